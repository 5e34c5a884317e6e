//! Start times for a fixed visit order.
//!
//! Both schedulers are exact lexicographic optimizers over integer start
//! times. Paid time of a day is its span minus the largest gap when that gap
//! reaches `pi_min`; equivalently it is the minimum, over the choice of which
//! gap (if any) is declared the unpaid break, of the resulting relaxed cost.
//! For each choice the scalarized objective is separable along the chain and
//! is minimized by a backward dynamic program with suffix minima. When the
//! welfare-first optimum breaks the daily maximum, a second program tracks the
//! accrued paid time as an extra state dimension.

use serde::{Deserialize, Serialize};

use crate::instance::{CaregiverIdx, Day, Instance, Minutes, ServiceIdx};
use crate::solution::{compute_day_metrics, Route, Visit};

/// Which objective the scheduler optimizes first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Priority {
    /// Minimize soft-window penalization, then paid time.
    WelfareFirst,
    /// Minimize paid time, then soft-window penalization.
    CostFirst,
}

/// Earliest and latest feasible start of every visit of a route.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleBounds {
    pub earliest: Vec<Minutes>,
    pub latest: Vec<Minutes>,
}

/// Minimum distance between consecutive starts: duration plus travel.
pub fn chain_offsets(instance: &Instance, order: &[ServiceIdx]) -> Vec<Minutes> {
    order.windows(2).map(|w| instance.service(w[0]).duration + instance.travel(w[0], w[1])).collect()
}

/// Forward pass from the earliest starts and backward pass from the latest;
/// `None` when the order cannot be scheduled.
pub fn compute_bounds(
    instance: &Instance,
    caregiver: CaregiverIdx,
    day: Day,
    order: &[ServiceIdx],
) -> Option<ScheduleBounds> {
    let avail = instance.caregiver(caregiver).window(day)?;
    let offs = chain_offsets(instance, order);
    let m = order.len();
    let mut earliest = Vec::with_capacity(m);
    for (k, &j) in order.iter().enumerate() {
        let s = instance.service(j);
        let own = avail.start.max(s.hard.start);
        earliest.push(if k == 0 { own } else { own.max(earliest[k - 1] + offs[k - 1]) });
    }
    let mut latest = vec![0; m];
    for k in (0..m).rev() {
        let s = instance.service(order[k]);
        let own = avail.end.min(s.hard.end) - s.duration;
        latest[k] = if k + 1 == m { own } else { own.min(latest[k + 1] - offs[k]) };
    }
    if earliest.iter().zip(&latest).any(|(e, l)| e > l) {
        return None;
    }
    Some(ScheduleBounds { earliest, latest })
}

pub fn schedule_welfare_first(
    instance: &Instance,
    caregiver: CaregiverIdx,
    day: Day,
    order: &[ServiceIdx],
) -> Option<Route> {
    schedule(instance, caregiver, day, order, Priority::WelfareFirst)
}

pub fn schedule_cost_first(
    instance: &Instance,
    caregiver: CaregiverIdx,
    day: Day,
    order: &[ServiceIdx],
) -> Option<Route> {
    schedule(instance, caregiver, day, order, Priority::CostFirst)
}

/// Weight that makes the primary objective dominate the secondary one.
const PRIMARY: i64 = 1 << 24;
const INF: i64 = i64::MAX / 4;

/// Optimal start times for `order`, or `None` when no feasible schedule exists.
pub fn schedule(
    instance: &Instance,
    caregiver: CaregiverIdx,
    day: Day,
    order: &[ServiceIdx],
    priority: Priority,
) -> Option<Route> {
    let mut route = Route::new(caregiver, day);
    if order.is_empty() {
        return Some(route);
    }
    let bounds = compute_bounds(instance, caregiver, day, order)?;
    let problem = ChainProblem::new(instance, order, &bounds, priority);
    let daily_max = instance.caregiver(caregiver).daily_max(day);

    let starts = match problem.solve_unconstrained() {
        Some(t) if problem.paid(&t) <= daily_max => t,
        Some(_) if priority == Priority::WelfareFirst => {
            // Nothing fits when even the cheapest schedule exceeds the cap.
            let cheapest = ChainProblem::new(instance, order, &bounds, Priority::CostFirst);
            match cheapest.solve_unconstrained() {
                Some(t) if cheapest.paid(&t) <= daily_max => problem.solve_with_daily_max(daily_max)?,
                _ => return None,
            }
        }
        _ => return None,
    };
    route.visits = order.iter().zip(starts).map(|(&service, start)| Visit { service, start }).collect();
    debug_assert!(compute_day_metrics(&route, instance).paid <= daily_max);
    Some(route)
}

/// The fixed-order scheduling problem in chain form.
struct ChainProblem<'a> {
    instance: &'a Instance,
    order: &'a [ServiceIdx],
    lo: Vec<Minutes>,
    hi: Vec<Minutes>,
    offs: Vec<Minutes>,
    last_duration: Minutes,
    pi_min: Minutes,
    w_pen: i64,
    w_cost: i64,
}

/// `None` declares no unpaid break; `Some(b)` declares the gap after position `b`.
type BreakChoice = Option<usize>;

impl<'a> ChainProblem<'a> {
    fn new(instance: &'a Instance, order: &'a [ServiceIdx], b: &ScheduleBounds, priority: Priority) -> Self {
        let (w_pen, w_cost) = match priority {
            Priority::WelfareFirst => (PRIMARY, 1),
            Priority::CostFirst => (1, PRIMARY),
        };
        Self {
            instance,
            order,
            lo: b.earliest.clone(),
            hi: b.latest.clone(),
            offs: chain_offsets(instance, order),
            last_duration: instance.service(*order.last().expect("non-empty")).duration,
            pi_min: instance.pi_min,
            w_pen,
            w_cost,
        }
    }

    fn m(&self) -> usize {
        self.order.len()
    }

    fn pen(&self, k: usize, t: Minutes) -> i64 {
        self.instance.service(self.order[k]).penalization_at(t)
    }

    /// Actual paid time of a schedule.
    fn paid(&self, t: &[Minutes]) -> Minutes {
        let span = t[self.m() - 1] + self.last_duration - t[0];
        let largest = (0..self.m() - 1).map(|k| t[k + 1] - t[k] - self.offs[k]).max().unwrap_or(0);
        if largest >= self.pi_min {
            span - largest
        } else {
            span
        }
    }

    fn objective(&self, t: &[Minutes]) -> i64 {
        let pen: i64 = (0..self.m()).map(|k| self.pen(k, t[k])).sum();
        self.w_pen * pen + self.w_cost * self.paid(t)
    }

    fn choices(&self) -> impl Iterator<Item = BreakChoice> {
        std::iter::once(None).chain((0..self.m().saturating_sub(1)).map(Some))
    }

    /// Minimum difference between `t[k + 1]` and `t[k]` under `choice`.
    fn min_step(&self, k: usize, choice: BreakChoice) -> Minutes {
        self.offs[k] + if choice == Some(k) { self.pi_min } else { 0 }
    }

    /// Separable term of position `k` at start `x` under `choice`: weighted
    /// penalization plus the linear pieces of the relaxed cost.
    fn unary(&self, k: usize, x: Minutes, choice: BreakChoice) -> i64 {
        let m = self.m();
        let mut cost = 0;
        if k == 0 {
            cost -= x;
        }
        if k == m - 1 {
            cost += x + self.last_duration;
        }
        if let Some(b) = choice {
            if k == b {
                cost += x + self.offs[b];
            }
            if k == b + 1 {
                cost -= x;
            }
        }
        self.w_pen * self.pen(k, x) + self.w_cost * cost
    }

    /// Lexicographically earliest schedule with minimum objective.
    fn solve_unconstrained(&self) -> Option<Vec<Minutes>> {
        let mut best: Option<(i64, Vec<Minutes>)> = None;
        for choice in self.choices() {
            let Some((value, t)) = self.solve_choice(choice) else { continue };
            debug_assert!(self.objective(&t) <= value);
            let better = match &best {
                None => true,
                Some((v, bt)) => value < *v || (value == *v && t < *bt),
            };
            if better {
                best = Some((value, t));
            }
        }
        best.map(|(_, t)| t)
    }

    fn solve_choice(&self, choice: BreakChoice) -> Option<(i64, Vec<Minutes>)> {
        let m = self.m();
        // value[k][x - lo[k]]: best objective of positions k.. given t_k = x.
        let mut value: Vec<Vec<i64>> = Vec::with_capacity(m);
        let mut suffix_next: Vec<i64> = Vec::new();
        for k in (0..m).rev() {
            let width = (self.hi[k] - self.lo[k] + 1) as usize;
            let mut v = vec![INF; width];
            for (idx, slot) in v.iter_mut().enumerate() {
                let x = self.lo[k] + idx as Minutes;
                let rest = if k + 1 == m {
                    0
                } else {
                    let y = (x + self.min_step(k, choice)).max(self.lo[k + 1]);
                    if y > self.hi[k + 1] {
                        INF
                    } else {
                        suffix_next[(y - self.lo[k + 1]) as usize]
                    }
                };
                if rest < INF {
                    *slot = self.unary(k, x, choice) + rest;
                }
            }
            let mut suffix = v.clone();
            for idx in (0..width.saturating_sub(1)).rev() {
                suffix[idx] = suffix[idx].min(suffix[idx + 1]);
            }
            suffix_next = suffix;
            value.push(v);
        }
        value.reverse();

        let (best, first) = value[0]
            .iter()
            .enumerate()
            .min_by_key(|&(idx, &v)| (v, idx))
            .map(|(idx, &v)| (v, self.lo[0] + idx as Minutes))?;
        if best >= INF {
            return None;
        }
        let mut t = vec![first];
        let mut target = best;
        for k in 0..m - 1 {
            let x = t[k];
            target -= self.unary(k, x, choice);
            let from = (x + self.min_step(k, choice)).max(self.lo[k + 1]);
            let y = (from..=self.hi[k + 1])
                .find(|&y| value[k + 1][(y - self.lo[k + 1]) as usize] == target)
                .expect("suffix minimum is attained");
            t.push(y);
        }
        Some((best, t))
    }

    /// Paid time charged under `choice`: the span minus the declared gap.
    fn relaxed_paid(&self, t: &[Minutes], choice: BreakChoice) -> Minutes {
        let span = t[self.m() - 1] + self.last_duration - t[0];
        match choice {
            Some(b) => span - (t[b + 1] - t[b] - self.offs[b]),
            None => span,
        }
    }

    /// Welfare-first optimum subject to paid time at most `daily_max`.
    fn solve_with_daily_max(&self, daily_max: Minutes) -> Option<Vec<Minutes>> {
        // The unconstrained optimum of a choice bounds its budgeted optimum
        // from below, and is that optimum when it already fits.
        let mut pending = Vec::new();
        let mut best: Option<(i64, Vec<Minutes>)> = None;
        let offer = |best: &mut Option<(i64, Vec<Minutes>)>, value: i64, t: Vec<Minutes>| {
            let better = match best {
                None => true,
                Some((v, bt)) => value < *v || (value == *v && t < *bt),
            };
            if better {
                *best = Some((value, t));
            }
        };
        for choice in self.choices() {
            let Some((bound, t)) = self.solve_choice(choice) else { continue };
            if self.relaxed_paid(&t, choice) <= daily_max {
                offer(&mut best, bound, t);
            } else {
                pending.push((bound, choice));
            }
        }
        pending.sort_by_key(|p| p.0);
        for (bound, choice) in pending {
            if best.as_ref().is_some_and(|(v, _)| bound > *v) {
                break;
            }
            if let Some((value, t)) = self.solve_choice_budgeted(choice, daily_max) {
                offer(&mut best, value, t);
            }
        }
        best.map(|(_, t)| t)
    }

    /// Cost accrued when moving from `t_k = x` to `t_{k+1} = y` under `choice`.
    fn step_cost(&self, k: usize, x: Minutes, y: Minutes, choice: BreakChoice) -> Minutes {
        if choice == Some(k) {
            self.offs[k]
        } else {
            y - x
        }
    }

    /// Dynamic program over (start, accrued relaxed cost). The objective is
    /// `w_pen * pen + w_cost * (accrued + last duration)`.
    fn solve_choice_budgeted(&self, choice: BreakChoice, daily_max: Minutes) -> Option<(i64, Vec<Minutes>)> {
        let m = self.m();
        let budget = daily_max - self.last_duration;
        if budget < 0 {
            return None;
        }
        let na = budget as usize + 1;
        let at = |idx: usize, a: usize| idx * na + a;

        // value[k][at(x - lo, a)]
        let mut value: Vec<Vec<i64>> = Vec::with_capacity(m);
        let mut reach_next: Vec<i64> = Vec::new();
        for k in (0..m).rev() {
            let width = (self.hi[k] - self.lo[k] + 1) as usize;
            let mut v = vec![INF; width * na];
            let pen = |x: Minutes| self.w_pen * self.pen(k, x);
            for idx in 0..width {
                let x = self.lo[k] + idx as Minutes;
                for a in 0..na {
                    let rest = if k + 1 == m {
                        self.w_cost * (a as i64 + self.last_duration)
                    } else {
                        let y0 = x + self.min_step(k, choice);
                        let y = y0.max(self.lo[k + 1]);
                        if y > self.hi[k + 1] {
                            INF
                        } else {
                            let a2 = a as i64 + self.step_cost(k, x, y, choice);
                            if a2 > budget {
                                INF
                            } else {
                                reach_next[at((y - self.lo[k + 1]) as usize, a2 as usize)]
                            }
                        }
                    };
                    if rest < INF {
                        v[at(idx, a)] = pen(x) + rest;
                    }
                }
            }
            // reach[y, a]: best over starts y' >= y of the next position,
            // charging the extra delay to the accrued cost unless the step is
            // the declared break.
            let mut reach = v.clone();
            let diagonal = k > 0 && choice != Some(k - 1);
            for idx in (0..width.saturating_sub(1)).rev() {
                for a in 0..na {
                    let later = if diagonal {
                        if a + 1 < na {
                            reach[at(idx + 1, a + 1)]
                        } else {
                            INF
                        }
                    } else {
                        reach[at(idx + 1, a)]
                    };
                    let cur = &mut reach[at(idx, a)];
                    *cur = (*cur).min(later);
                }
            }
            reach_next = reach;
            value.push(v);
        }
        value.reverse();

        let w0 = (self.hi[0] - self.lo[0] + 1) as usize;
        let (best, first) =
            (0..w0).map(|idx| (value[0][at(idx, 0)], idx)).min().map(|(v, idx)| (v, self.lo[0] + idx as Minutes))?;
        if best >= INF {
            return None;
        }
        let mut t = vec![first];
        let mut acc: Minutes = 0;
        let mut target = best;
        for k in 0..m - 1 {
            let x = t[k];
            target -= self.w_pen * self.pen(k, x);
            let from = (x + self.min_step(k, choice)).max(self.lo[k + 1]);
            let y = (from..=self.hi[k + 1])
                .find(|&y| {
                    let a2 = acc + self.step_cost(k, x, y, choice);
                    a2 <= budget && value[k + 1][at((y - self.lo[k + 1]) as usize, a2 as usize)] == target
                })
                .expect("optimal successor exists");
            acc += self.step_cost(k, x, y, choice);
            t.push(y);
        }
        Some((best, t))
    }
}
