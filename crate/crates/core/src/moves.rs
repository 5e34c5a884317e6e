//! Single-visit time shifts that trade cost against welfare on a fixed route.
//!
//! Moving a visit later pushes the following visits only as far as chaining
//! forces them; moving it earlier pulls the preceding ones the same way.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{Instance, Minutes};
use crate::scheduler::{chain_offsets, compute_bounds};
use crate::solution::{compute_day_metrics, gap_between, Route, Solution};

/// Shifts the visit at `position` by `shift` minutes (positive delays,
/// negative advances) and cascades the change along the chain.
pub fn shift_service(instance: &Instance, route: &Route, position: usize, shift: Minutes) -> Route {
    let order = route.order();
    let offs = chain_offsets(instance, &order);
    let mut t = route.starts();
    t[position] += shift;
    if shift > 0 {
        for k in position + 1..t.len() {
            t[k] = t[k].max(t[k - 1] + offs[k - 1]);
        }
    } else {
        for k in (0..position).rev() {
            t[k] = t[k].min(t[k + 1] - offs[k]);
        }
    }
    let mut out = route.clone();
    for (v, s) in out.visits.iter_mut().zip(t) {
        v.start = s;
    }
    out
}

/// Integer shifts in `(0, limit]` at which the slope of route penalization
/// changes, plus `limit` itself, and the penalization profile over `0..=limit`.
/// `direction` is +1 for delays, -1 for advances.
fn penalization_breakpoints(
    instance: &Instance,
    route: &Route,
    position: usize,
    limit: Minutes,
    direction: Minutes,
) -> (Vec<Minutes>, Vec<Minutes>) {
    let order = route.order();
    let offs = chain_offsets(instance, &order);
    let base = route.starts();
    let services: Vec<_> = order.iter().map(|&j| instance.service(j)).collect();
    let mut t = base.clone();
    let profile: Vec<Minutes> = (0..=limit)
        .map(|d| {
            t.copy_from_slice(&base);
            t[position] += direction * d;
            if direction > 0 {
                for k in position + 1..t.len() {
                    t[k] = t[k].max(t[k - 1] + offs[k - 1]);
                }
            } else {
                for k in (0..position).rev() {
                    t[k] = t[k].min(t[k + 1] - offs[k]);
                }
            }
            services.iter().zip(&t).map(|(s, &x)| s.penalization_at(x)).sum()
        })
        .collect();
    let mut points: Vec<Minutes> = (1..limit)
        .filter(|&d| {
            let d = d as usize;
            profile[d + 1] - profile[d] != profile[d] - profile[d - 1]
        })
        .collect();
    if limit > 0 {
        points.push(limit);
    }
    (points, profile)
}

/// How far one visit may move in each direction and at which shifts the route
/// penalization changes slope.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveWindow {
    pub position: usize,
    pub max_delay: Minutes,
    pub max_advance: Minutes,
    pub delay_breakpoints: Vec<Minutes>,
    pub advance_breakpoints: Vec<Minutes>,
    /// Inclusive shift range for the delayed candidate, if any.
    pub delay_range: Option<(Minutes, Minutes)>,
    /// Inclusive shift range for the advanced candidate, if any.
    pub advance_range: Option<(Minutes, Minutes)>,
}

/// Delay is limited by the end of the soft window and the latest start; it is
/// capped at the last breakpoint up to which penalization never increases.
/// Advance is limited by the start of the soft window and the earliest start,
/// and may increase penalization elsewhere on the route.
pub fn welfare_move_window(instance: &Instance, route: &Route, position: usize) -> Option<MoveWindow> {
    let bounds = compute_bounds(instance, route.caregiver, route.day, &route.order())?;
    let visit = route.visits[position];
    let s = instance.service(visit.service);
    let t = visit.start;
    let max_delay = (s.soft.end - s.duration - t).max(0).min(bounds.latest[position] - t).max(0);
    let max_advance = (t - s.soft.start).max(0).min(t - bounds.earliest[position]).max(0);

    let (delay_breakpoints, profile) = penalization_breakpoints(instance, route, position, max_delay, 1);
    let non_increasing_until = profile.windows(2).take_while(|w| w[1] <= w[0]).count() as Minutes;
    let delay_cap = delay_breakpoints.iter().copied().filter(|&b| b <= non_increasing_until).max().unwrap_or(0);
    let (advance_breakpoints, _) = penalization_breakpoints(instance, route, position, max_advance, -1);

    Some(MoveWindow {
        position,
        max_delay,
        max_advance,
        delay_breakpoints,
        advance_breakpoints,
        delay_range: (delay_cap > 0).then_some((1, delay_cap)),
        advance_range: (max_advance > 0).then_some((1, max_advance)),
    })
}

/// The four cost-oriented shift ranges of one visit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostMoveOptions {
    pub position: usize,
    pub max_delay: Minutes,
    pub max_advance: Minutes,
    /// Delay that closes the gaps after the visit.
    pub shrink_later: Option<(Minutes, Minutes)>,
    /// Delay that opens the gap before the visit to at least `pi_min`.
    pub grow_before: Option<(Minutes, Minutes)>,
    /// Advance that closes the gaps before the visit.
    pub shrink_earlier: Option<(Minutes, Minutes)>,
    /// Advance that opens the gap after the visit to at least `pi_min`.
    pub grow_after: Option<(Minutes, Minutes)>,
}

impl CostMoveOptions {
    /// Ranges as signed shifts, in the order delay-shrink, delay-grow,
    /// advance-shrink, advance-grow.
    pub fn signed_ranges(&self) -> [Option<(Minutes, Minutes)>; 4] {
        let neg = |r: Option<(Minutes, Minutes)>| r.map(|(lo, hi)| (-hi, -lo));
        [self.shrink_later, self.grow_before, neg(self.shrink_earlier), neg(self.grow_after)]
    }
}

fn range(lo: Minutes, hi: Minutes) -> Option<(Minutes, Minutes)> {
    let lo = lo.max(1);
    (lo <= hi).then_some((lo, hi))
}

pub fn cost_move_options(instance: &Instance, route: &Route, position: usize) -> Option<CostMoveOptions> {
    let bounds = compute_bounds(instance, route.caregiver, route.day, &route.order())?;
    let t = route.visits[position].start;
    let max_delay = bounds.latest[position] - t;
    let max_advance = t - bounds.earliest[position];
    let gaps: Vec<Minutes> = route.visits.windows(2).map(|w| gap_between(instance, w[0], w[1])).collect();
    let gaps_after: Minutes = gaps[position..].iter().sum();
    let gaps_before: Minutes = gaps[..position].iter().sum();
    let pi = instance.pi_min;
    let last = route.len() - 1;
    Some(CostMoveOptions {
        position,
        max_delay,
        max_advance,
        shrink_later: range(0, max_delay.min(gaps_after)),
        grow_before: if position > 0 { range(pi - gaps[position - 1], max_delay) } else { None },
        shrink_earlier: range(0, max_advance.min(gaps_before)),
        grow_after: if position < last { range(pi - gaps[position], max_advance) } else { None },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveKind {
    WelfareDelay,
    WelfareAdvance,
    ShrinkLater,
    GrowBefore,
    ShrinkEarlier,
    GrowAfter,
}

#[derive(Clone, Debug)]
pub struct MoveCandidate {
    pub solution: Solution,
    pub kind: MoveKind,
    pub route_index: usize,
    pub shift: Minutes,
}

fn pick_visit(solution: &Solution, rng: &mut impl Rng) -> Option<(usize, usize)> {
    let routes: Vec<usize> = solution.non_empty_routes().map(|(r, _)| r).collect();
    if routes.is_empty() {
        return None;
    }
    let r = routes[rng.gen_range(0..routes.len())];
    let k = rng.gen_range(0..solution.route_at(r).len());
    Some((r, k))
}

fn build_candidate(
    instance: &Instance,
    solution: &Solution,
    route_index: usize,
    position: usize,
    shift: Minutes,
    kind: MoveKind,
) -> Option<MoveCandidate> {
    let route = solution.route_at(route_index);
    let moved = shift_service(instance, route, position, shift);
    let cap = instance.caregiver(route.caregiver).daily_max(route.day);
    if compute_day_metrics(&moved, instance).paid > cap {
        return None;
    }
    let mut out = solution.clone();
    *out.route_at_mut(route_index) = moved;
    Some(MoveCandidate { solution: out, kind, route_index, shift })
}

/// Welfare-oriented candidates for a visit at a known position.
pub fn welfare_candidates_at(
    instance: &Instance,
    solution: &Solution,
    route_index: usize,
    position: usize,
    rng: &mut impl Rng,
) -> Vec<MoveCandidate> {
    let Some(w) = welfare_move_window(instance, solution.route_at(route_index), position) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    if let Some((lo, hi)) = w.delay_range {
        let d = rng.gen_range(lo..=hi);
        out.extend(build_candidate(instance, solution, route_index, position, d, MoveKind::WelfareDelay));
    }
    if let Some((lo, hi)) = w.advance_range {
        let d = rng.gen_range(lo..=hi);
        out.extend(build_candidate(instance, solution, route_index, position, -d, MoveKind::WelfareAdvance));
    }
    out
}

/// Cost-oriented candidates for a visit at a known position.
pub fn cost_candidates_at(
    instance: &Instance,
    solution: &Solution,
    route_index: usize,
    position: usize,
    rng: &mut impl Rng,
) -> Vec<MoveCandidate> {
    let Some(opts) = cost_move_options(instance, solution.route_at(route_index), position) else {
        return Vec::new();
    };
    let kinds = [MoveKind::ShrinkLater, MoveKind::GrowBefore, MoveKind::ShrinkEarlier, MoveKind::GrowAfter];
    let mut out = Vec::new();
    for (r, kind) in opts.signed_ranges().into_iter().zip(kinds) {
        if let Some((lo, hi)) = r {
            let d = rng.gen_range(lo..=hi);
            out.extend(build_candidate(instance, solution, route_index, position, d, kind));
        }
    }
    out
}

/// Picks a random visit and emits one delayed and one advanced candidate.
pub fn improve_welfare_move(instance: &Instance, solution: &Solution, rng: &mut impl Rng) -> Vec<MoveCandidate> {
    match pick_visit(solution, rng) {
        Some((r, k)) => welfare_candidates_at(instance, solution, r, k, rng),
        None => Vec::new(),
    }
}

/// Picks a random visit and emits up to four cost-oriented candidates.
pub fn improve_cost_move(instance: &Instance, solution: &Solution, rng: &mut impl Rng) -> Vec<MoveCandidate> {
    match pick_visit(solution, rng) {
        Some((r, k)) => cost_candidates_at(instance, solution, r, k, rng),
        None => Vec::new(),
    }
}
