//! Routes, schedules, objective evaluation and feasibility checking.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{CaregiverIdx, Day, Instance, Minutes, ServiceIdx, DAYS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Visit {
    pub service: ServiceIdx,
    pub start: Minutes,
}

/// The ordered visits of one caregiver on one day.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Route {
    pub caregiver: CaregiverIdx,
    pub day: Day,
    pub visits: Vec<Visit>,
}

impl Route {
    pub fn new(caregiver: CaregiverIdx, day: Day) -> Self {
        Self { caregiver, day, visits: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.visits.len()
    }

    pub fn order(&self) -> Vec<ServiceIdx> {
        self.visits.iter().map(|v| v.service).collect()
    }

    pub fn starts(&self) -> Vec<Minutes> {
        self.visits.iter().map(|v| v.start).collect()
    }

    /// Start of the working day (first visit), or `None` for an empty route.
    pub fn day_start(&self) -> Option<Minutes> {
        self.visits.first().map(|v| v.start)
    }

    /// End of the working day (end of the last visit).
    pub fn day_end(&self, instance: &Instance) -> Option<Minutes> {
        self.visits.last().map(|v| v.start + instance.service(v.service).duration)
    }
}

/// The largest idle gap of a day and whether it is deducted from paid time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakInfo {
    pub largest: Minutes,
    pub unpaid: bool,
    pub deducted: Minutes,
    /// Positions `(k, k + 1)` in the route of the earliest maximal gap.
    pub gap: Option<(usize, usize)>,
}

impl BreakInfo {
    pub fn from_largest(largest: Minutes, gap: Option<(usize, usize)>, pi_min: Minutes) -> Self {
        let unpaid = largest >= pi_min;
        Self { largest, unpaid, deducted: if unpaid { largest } else { 0 }, gap }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayMetrics {
    pub span: Minutes,
    pub breaks: BreakInfo,
    pub paid: Minutes,
    /// Idle minutes that are paid: every gap except a deducted break.
    pub paid_idle: Minutes,
}

/// Idle minutes between the end of `from` (plus travel) and the start of `to`.
pub fn gap_between(instance: &Instance, from: Visit, to: Visit) -> Minutes {
    let s = instance.service(from.service);
    to.start - (from.start + s.duration + instance.travel(from.service, to.service))
}

pub fn compute_day_metrics(route: &Route, instance: &Instance) -> DayMetrics {
    let (Some(first), Some(end)) = (route.day_start(), route.day_end(instance)) else {
        return DayMetrics::default();
    };
    let mut largest = 0;
    let mut at = None;
    let mut idle = 0;
    for (k, w) in route.visits.windows(2).enumerate() {
        let g = gap_between(instance, w[0], w[1]);
        idle += g.max(0);
        if g > largest {
            largest = g;
            at = Some((k, k + 1));
        }
    }
    let breaks = BreakInfo::from_largest(largest, at, instance.pi_min);
    let span = end - first;
    DayMetrics { span, breaks, paid: span - breaks.deducted, paid_idle: idle - breaks.deducted }
}

/// Weights of the two objectives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub overtime: i64,
    pub paid: i64,
    /// Negative, and large enough that one affinity level outweighs any
    /// achievable penalization.
    pub affinity: i64,
    pub penalization: i64,
}

impl ObjectiveWeights {
    pub fn for_instance(instance: &Instance) -> Self {
        let bound: Minutes = instance.services.iter().map(|s| s.penalization_bound()).sum();
        Self { overtime: 1, paid: 1, affinity: -bound.max(1), penalization: 1 }
    }
}

/// An objective pair; both components are minimized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Objectives {
    pub cost: i64,
    pub welfare: i64,
}

impl Objectives {
    pub const fn new(cost: i64, welfare: i64) -> Self {
        Self { cost, welfare }
    }
}

impl fmt::Display for Objectives {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.cost, self.welfare)
    }
}

impl From<(i64, i64)> for Objectives {
    fn from((cost, welfare): (i64, i64)) -> Self {
        Self { cost, welfare }
    }
}

/// `a` is no worse than `b` in both objectives and differs from it.
pub fn dominates(a: Objectives, b: Objectives) -> bool {
    a.cost <= b.cost && a.welfare <= b.welfare && a != b
}

/// Per-route quantities that the objectives are assembled from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RouteSummary {
    pub paid: Minutes,
    pub penalization: Minutes,
    pub affinity: i64,
}

pub fn summarize_route(route: &Route, instance: &Instance) -> RouteSummary {
    let cg = instance.caregiver(route.caregiver);
    let mut s = RouteSummary { paid: compute_day_metrics(route, instance).paid, ..Default::default() };
    for v in &route.visits {
        s.penalization += instance.service(v.service).penalization_at(v.start);
        s.affinity += i64::from(cg.affinity(v.service));
    }
    s
}

/// Caregiver cost given total weekly paid time.
pub fn caregiver_cost(weights: &ObjectiveWeights, weekly_paid: Minutes, agreed: Minutes) -> i64 {
    weights.overtime * (weekly_paid - agreed).max(0) + weights.paid * weekly_paid
}

/// Routes for every caregiver and every day, stored densely at `i * 7 + d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Solution {
    routes: Vec<Route>,
}

impl Solution {
    pub fn empty(instance: &Instance) -> Self {
        let routes = instance.caregiver_indices().flat_map(|i| Day::all().map(move |d| Route::new(i, d))).collect();
        Self { routes }
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn route_index(caregiver: CaregiverIdx, day: Day) -> usize {
        caregiver.0 * DAYS + day.index()
    }

    pub fn route(&self, caregiver: CaregiverIdx, day: Day) -> &Route {
        &self.routes[Self::route_index(caregiver, day)]
    }

    pub fn route_mut(&mut self, caregiver: CaregiverIdx, day: Day) -> &mut Route {
        &mut self.routes[Self::route_index(caregiver, day)]
    }

    pub fn route_at(&self, index: usize) -> &Route {
        &self.routes[index]
    }

    pub fn route_at_mut(&mut self, index: usize) -> &mut Route {
        &mut self.routes[index]
    }

    /// Route index and position of every assigned service.
    pub fn locate(&self, n_services: usize) -> Vec<Option<(usize, usize)>> {
        let mut at = vec![None; n_services];
        for (r, route) in self.routes.iter().enumerate() {
            for (k, v) in route.visits.iter().enumerate() {
                if v.service.0 < n_services {
                    at[v.service.0] = Some((r, k));
                }
            }
        }
        at
    }

    /// The route structure (assignment plus order) without start times.
    pub fn structure(&self) -> Vec<Vec<ServiceIdx>> {
        self.routes.iter().map(Route::order).collect()
    }

    pub fn non_empty_routes(&self) -> impl Iterator<Item = (usize, &Route)> {
        self.routes.iter().enumerate().filter(|(_, r)| !r.is_empty())
    }

    pub fn n_assigned(&self) -> usize {
        self.routes.iter().map(Route::len).sum()
    }

    /// Builds a solution from arbitrary routes; routes for missing
    /// (caregiver, day) pairs stay empty.
    pub fn from_routes(instance: &Instance, routes: impl IntoIterator<Item = Route>) -> Result<Self> {
        let mut sol = Self::empty(instance);
        for r in routes {
            if r.caregiver.0 >= instance.n_caregivers() {
                return Err(Error::Parse(format!("{} does not exist", r.caregiver)));
            }
            if let Some(v) = r.visits.iter().find(|v| v.service.0 >= instance.n_services()) {
                return Err(Error::Parse(format!("{} does not exist", v.service)));
            }
            let slot = sol.route_mut(r.caregiver, r.day);
            if !slot.is_empty() {
                return Err(Error::Parse(format!("two routes for {} on {}", r.caregiver, r.day)));
            }
            *slot = r;
        }
        Ok(sol)
    }
}

/// Objective values and their components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub objectives: Objectives,
    pub routes: Vec<RouteSummary>,
    pub weekly_paid: Vec<Minutes>,
    pub overtime: Vec<Minutes>,
    pub paid_total: Minutes,
    pub penalization_total: Minutes,
    pub affinity_total: i64,
}

impl Evaluation {
    pub fn overtime_total(&self) -> Minutes {
        self.overtime.iter().sum()
    }

    /// Recomputes one route after it changed and refreshes the totals.
    pub fn update_route(&mut self, instance: &Instance, weights: &ObjectiveWeights, solution: &Solution, index: usize) {
        let route = solution.route_at(index);
        let new = summarize_route(route, instance);
        let old = std::mem::replace(&mut self.routes[index], new);
        let i = route.caregiver.0;
        self.weekly_paid[i] += new.paid - old.paid;
        self.overtime[i] = (self.weekly_paid[i] - instance.caregivers[i].weekly_agreed).max(0);
        self.paid_total += new.paid - old.paid;
        self.penalization_total += new.penalization - old.penalization;
        self.affinity_total += new.affinity - old.affinity;
        self.objectives = objectives_from_totals(
            weights,
            self.overtime_total(),
            self.paid_total,
            self.affinity_total,
            self.penalization_total,
        );
    }
}

pub fn objectives_from_totals(
    w: &ObjectiveWeights,
    overtime: Minutes,
    paid: Minutes,
    affinity: i64,
    penalization: Minutes,
) -> Objectives {
    Objectives {
        cost: w.overtime * overtime + w.paid * paid,
        welfare: w.affinity * affinity + w.penalization * penalization,
    }
}

/// Objective values of a solution that ignores coverage; used on partial
/// solutions during search.
pub fn evaluate_partial(solution: &Solution, instance: &Instance, weights: &ObjectiveWeights) -> Evaluation {
    let routes: Vec<RouteSummary> = solution.routes.iter().map(|r| summarize_route(r, instance)).collect();
    let mut weekly_paid = vec![0; instance.n_caregivers()];
    for (r, s) in solution.routes.iter().zip(&routes) {
        weekly_paid[r.caregiver.0] += s.paid;
    }
    let overtime: Vec<Minutes> =
        weekly_paid.iter().zip(&instance.caregivers).map(|(&w, c)| (w - c.weekly_agreed).max(0)).collect();
    let paid_total = routes.iter().map(|s| s.paid).sum();
    let penalization_total = routes.iter().map(|s| s.penalization).sum();
    let affinity_total = routes.iter().map(|s| s.affinity).sum();
    let objectives =
        objectives_from_totals(weights, overtime.iter().sum(), paid_total, affinity_total, penalization_total);
    Evaluation { objectives, routes, weekly_paid, overtime, paid_total, penalization_total, affinity_total }
}

pub fn check_coverage(solution: &Solution, instance: &Instance) -> Result<()> {
    let mut seen = vec![0usize; instance.n_services()];
    for r in solution.routes() {
        for v in &r.visits {
            match seen.get_mut(v.service.0) {
                Some(c) => *c += 1,
                None => return Err(Error::Coverage(format!("unknown {}", v.service))),
            }
        }
    }
    if let Some(j) = seen.iter().position(|&c| c != 1) {
        let what = if seen[j] == 0 { "unassigned" } else { "assigned more than once" };
        return Err(Error::Coverage(format!("{} is {what}", ServiceIdx(j))));
    }
    Ok(())
}

pub fn evaluate(solution: &Solution, instance: &Instance, weights: &ObjectiveWeights) -> Result<Evaluation> {
    check_coverage(solution, instance)?;
    Ok(evaluate_partial(solution, instance, weights))
}

/// Constraint families of the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// Every service is performed exactly once.
    Coverage,
    /// Caregiver may perform the service.
    Compatibility,
    /// One route per caregiver and day, made of that day's services.
    RouteStructure,
    /// Start and finish inside the hard window.
    HardWindow,
    /// Duration plus travel fits between consecutive starts.
    TravelOrder,
    /// The working day lies inside the caregiver's availability.
    Availability,
    /// Daily paid time stays within the daily maximum.
    DailyMax,
    /// Overtime covers weekly paid time beyond the agreed amount.
    Overtime,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.constraint, self.message)
    }
}

/// Every violated constraint; empty iff the solution is feasible.
pub fn check_feasibility(solution: &Solution, instance: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut v = |constraint, message: String| out.push(Violation { constraint, message });

    let mut count = vec![0usize; instance.n_services()];
    for (idx, route) in solution.routes().iter().enumerate() {
        if route.caregiver.0 >= instance.n_caregivers() || Solution::route_index(route.caregiver, route.day) != idx {
            v(Constraint::RouteStructure, format!("route slot {idx} holds {} on {}", route.caregiver, route.day));
            continue;
        }
        for visit in &route.visits {
            match count.get_mut(visit.service.0) {
                Some(c) => *c += 1,
                None => v(Constraint::Coverage, format!("unknown {}", visit.service)),
            }
        }
        check_route(route, instance, &mut v);
    }
    for (j, &c) in count.iter().enumerate() {
        if c != 1 {
            v(Constraint::Coverage, format!("{} appears {c} times", ServiceIdx(j)));
        }
    }
    out
}

/// Route-local constraints: everything except coverage.
pub fn check_route(route: &Route, instance: &Instance, v: &mut impl FnMut(Constraint, String)) {
    let cg = instance.caregiver(route.caregiver);
    let who = format!("{} on {}", route.caregiver, route.day);
    for visit in &route.visits {
        let Some(s) = instance.services.get(visit.service.0) else { continue };
        if s.day != route.day {
            v(Constraint::RouteStructure, format!("{} belongs to {} but is routed by {who}", visit.service, s.day));
        }
        if !cg.serves(visit.service) {
            v(Constraint::Compatibility, format!("{} cannot be served by {}", visit.service, route.caregiver));
        }
        if visit.start < s.hard.start || visit.start + s.duration > s.hard.end {
            v(
                Constraint::HardWindow,
                format!("{} runs [{}, {}] outside {}", visit.service, visit.start, visit.start + s.duration, s.hard),
            );
        }
    }
    if route.visits.iter().any(|x| x.service.0 >= instance.n_services()) {
        return;
    }
    for w in route.visits.windows(2) {
        if gap_between(instance, w[0], w[1]) < 0 {
            v(Constraint::TravelOrder, format!("{} starts before {} can arrive ({who})", w[1].service, w[0].service));
        }
    }
    let (Some(first), Some(end)) = (route.day_start(), route.day_end(instance)) else { return };
    match cg.window(route.day) {
        None => v(Constraint::Availability, format!("{} does not work on {}", route.caregiver, route.day)),
        Some(av) => {
            if first < av.start || end > av.end {
                v(Constraint::Availability, format!("{who} works [{first}, {end}] outside {av}"));
            }
        }
    }
    let m = compute_day_metrics(route, instance);
    if m.paid > cg.daily_max(route.day) {
        v(Constraint::DailyMax, format!("{who} is paid {} > daily max {}", m.paid, cg.daily_max(route.day)));
    }
}

/// Checks that stated overtime values cover weekly paid time beyond the agreement.
pub fn check_overtime(solution: &Solution, instance: &Instance, stated: &[Minutes]) -> Vec<Violation> {
    let mut weekly = vec![0; instance.n_caregivers()];
    for r in solution.routes() {
        weekly[r.caregiver.0] += compute_day_metrics(r, instance).paid;
    }
    weekly
        .iter()
        .zip(&instance.caregivers)
        .enumerate()
        .filter_map(|(i, (&w, c))| {
            let z = stated.get(i).copied().unwrap_or(0);
            (z < 0 || z < w - c.weekly_agreed).then(|| Violation {
                constraint: Constraint::Overtime,
                message: format!("{} overtime {z} below {} - {}", CaregiverIdx(i), w, c.weekly_agreed),
            })
        })
        .collect()
}

/// File form of a solution: non-empty routes with 1-based ids, plus derived metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub routes: Vec<RouteRecord>,
    #[serde(default)]
    pub metrics: Option<SolutionMetrics>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteRecord {
    pub caregiver: u32,
    pub day: Day,
    pub services: Vec<u32>,
    pub starts: Vec<Minutes>,
    #[serde(default)]
    pub paid: Option<Minutes>,
    #[serde(default)]
    pub largest_break: Option<Minutes>,
    #[serde(default)]
    pub unpaid_break: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionMetrics {
    pub f1: i64,
    pub f2: i64,
    pub overtime: Vec<Minutes>,
    pub paid_total: Minutes,
    pub penalization_total: Minutes,
    pub affinity_total: i64,
    pub paid_idle_total: Minutes,
    pub unpaid_break_total: Minutes,
}

impl SolutionFile {
    pub fn from_solution(solution: &Solution, instance: &Instance) -> Self {
        let weights = ObjectiveWeights::for_instance(instance);
        let eval = evaluate_partial(solution, instance, &weights);
        let mut paid_idle_total = 0;
        let mut unpaid_break_total = 0;
        let routes = solution
            .non_empty_routes()
            .map(|(_, r)| {
                let m = compute_day_metrics(r, instance);
                paid_idle_total += m.paid_idle;
                unpaid_break_total += m.breaks.deducted;
                RouteRecord {
                    caregiver: r.caregiver.0 as u32 + 1,
                    day: r.day,
                    services: r.visits.iter().map(|v| v.service.0 as u32 + 1).collect(),
                    starts: r.starts(),
                    paid: Some(m.paid),
                    largest_break: Some(m.breaks.largest),
                    unpaid_break: Some(m.breaks.unpaid),
                }
            })
            .collect();
        Self {
            routes,
            metrics: Some(SolutionMetrics {
                f1: eval.objectives.cost,
                f2: eval.objectives.welfare,
                overtime: eval.overtime.clone(),
                paid_total: eval.paid_total,
                penalization_total: eval.penalization_total,
                affinity_total: eval.affinity_total,
                paid_idle_total,
                unpaid_break_total,
            }),
        }
    }

    pub fn to_solution(&self, instance: &Instance) -> Result<Solution> {
        let routes = self
            .routes
            .iter()
            .map(|r| {
                if r.services.len() != r.starts.len() {
                    return Err(Error::Parse(format!(
                        "route of caregiver {} on {} has {} services but {} starts",
                        r.caregiver,
                        r.day,
                        r.services.len(),
                        r.starts.len()
                    )));
                }
                if r.caregiver == 0 || r.services.contains(&0) {
                    return Err(Error::Parse("ids are 1-based".into()));
                }
                Ok(Route {
                    caregiver: CaregiverIdx(r.caregiver as usize - 1),
                    day: r.day,
                    visits: r
                        .services
                        .iter()
                        .zip(&r.starts)
                        .map(|(&s, &t)| Visit { service: ServiceIdx(s as usize - 1), start: t })
                        .collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Solution::from_routes(instance, routes)
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("solution serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate_instance, GeneratorProfile};
    use crate::instance::{Caregiver, InstanceMeta, Service, TravelMatrix, Window, DAYS};
    use proptest::prelude::*;

    /// One caregiver on Monday, services with wide windows and no travel.
    fn day_instance(durations: &[Minutes], daily_max: Minutes, agreed: Minutes) -> Instance {
        let mut availability = [None; DAYS];
        availability[0] = Some(Window::new(0, 1440));
        let mut max = [0; DAYS];
        max[0] = daily_max;
        let n = durations.len();
        Instance {
            meta: InstanceMeta::default(),
            pi_min: 120,
            services: durations
                .iter()
                .enumerate()
                .map(|(j, &d)| Service {
                    id: j as u32 + 1,
                    user_id: j as u32 + 1,
                    day: Day::from_index(0),
                    duration: d,
                    hard: Window::new(0, 1440),
                    soft: Window::new(480, 720),
                })
                .collect(),
            caregivers: vec![Caregiver {
                id: 1,
                availability,
                weekly_agreed: agreed,
                daily_max: max,
                can_serve: vec![true; n],
                affinity: vec![3; n],
            }],
            travel: TravelMatrix::zeros(n),
        }
    }

    fn route(starts: &[Minutes]) -> Route {
        let mut r = Route::new(CaregiverIdx(0), Day::from_index(0));
        r.visits = starts.iter().enumerate().map(|(j, &t)| Visit { service: ServiceIdx(j), start: t }).collect();
        r
    }

    #[test]
    fn long_gap_is_unpaid() {
        // 480..600, idle 172, 772..1115: span 635.
        let inst = day_instance(&[120, 343], 600, 2400);
        let m = compute_day_metrics(&route(&[480, 772]), &inst);
        assert_eq!(m.span, 635);
        assert_eq!(m.breaks.largest, 172);
        assert!(m.breaks.unpaid);
        assert_eq!(m.paid, 463);
        assert_eq!(m.paid_idle, 0);
    }

    #[test]
    fn short_gap_is_paid() {
        let inst = day_instance(&[120, 343], 700, 2400);
        let m = compute_day_metrics(&route(&[480, 719]), &inst);
        assert_eq!(m.breaks.largest, 119);
        assert!(!m.breaks.unpaid);
        assert_eq!(m.paid, m.span);
        assert_eq!(m.paid_idle, 119);
    }

    #[test]
    fn only_the_largest_gap_is_deducted() {
        // Gaps 130 and 150; only the 150 one is unpaid.
        let inst = day_instance(&[60, 60, 60], 600, 2400);
        let m = compute_day_metrics(&route(&[480, 670, 880]), &inst);
        assert_eq!(m.breaks.gap, Some((1, 2)));
        assert_eq!(m.paid, 460 - 150);
        assert_eq!(m.paid_idle, 130);
    }

    #[test]
    fn empty_route_costs_nothing() {
        let inst = day_instance(&[60], 600, 0);
        assert_eq!(compute_day_metrics(&route(&[]), &inst), DayMetrics::default());
        let s = Solution::empty(&inst);
        let e = evaluate_partial(&s, &inst, &ObjectiveWeights::for_instance(&inst));
        assert_eq!(e.objectives, Objectives::new(0, 0));
        assert!(evaluate(&s, &inst, &ObjectiveWeights::for_instance(&inst)).is_err());
    }

    #[test]
    fn objectives_add_overtime_paid_affinity_and_penalization() {
        // Paid 120, agreed 60: overtime 60. Visit 2 ends 30 minutes after the soft window.
        let inst = day_instance(&[60, 60], 600, 60);
        let s = Solution::from_routes(&inst, [route(&[480, 690])]).unwrap();
        let w = ObjectiveWeights::for_instance(&inst);
        let e = evaluate(&s, &inst, &w).unwrap();
        assert_eq!(e.paid_total, 270 - 150);
        assert_eq!(e.overtime, vec![60]);
        assert_eq!(e.penalization_total, 30);
        assert_eq!(e.affinity_total, 6);
        assert_eq!(e.objectives, Objectives::new(60 + 120, 6 * w.affinity + 30));
        assert!(w.affinity <= -1);
    }

    #[test]
    fn dominance() {
        let a = Objectives::new(1, 1);
        assert!(dominates(a, Objectives::new(1, 2)));
        assert!(dominates(a, Objectives::new(2, 2)));
        assert!(!dominates(a, a));
        assert!(!dominates(a, Objectives::new(0, 5)));
    }

    #[test]
    fn violations_are_reported_by_family() {
        let inst = day_instance(&[60, 60], 200, 2400);
        let mut inst2 = inst.clone();
        inst2.services[0].hard = Window::new(500, 600);
        let s = Solution::from_routes(&inst2, [route(&[480, 540])]).unwrap();
        let v = check_feasibility(&s, &inst2);
        assert_eq!(v.iter().map(|v| v.constraint).collect::<Vec<_>>(), vec![Constraint::HardWindow]);

        // Span 400 with a 280 gap is paid 120; a 100 gap makes it 300 > 200.
        let s = Solution::from_routes(&inst, [route(&[480, 820])]).unwrap();
        assert!(check_feasibility(&s, &inst).is_empty());
        let s = Solution::from_routes(&inst, [route(&[480, 640])]).unwrap();
        let v = check_feasibility(&s, &inst);
        assert_eq!(v.iter().map(|v| v.constraint).collect::<Vec<_>>(), vec![Constraint::DailyMax]);

        let s = Solution::from_routes(&inst, [route(&[480, 500])]).unwrap();
        assert!(check_feasibility(&s, &inst).iter().any(|v| v.constraint == Constraint::TravelOrder));

        let mut missing = Solution::empty(&inst);
        missing
            .route_mut(CaregiverIdx(0), Day::from_index(0))
            .visits
            .push(Visit { service: ServiceIdx(0), start: 480 });
        assert!(check_feasibility(&missing, &inst).iter().any(|v| v.constraint == Constraint::Coverage));
    }

    #[test]
    fn file_round_trip() {
        let inst = day_instance(&[60, 60], 600, 60);
        let s = Solution::from_routes(&inst, [route(&[480, 690])]).unwrap();
        let f = SolutionFile::from_solution(&s, &inst);
        let back: SolutionFile = serde_json::from_str(&f.to_json()).unwrap();
        assert_eq!(back.to_solution(&inst).unwrap(), s);
        assert_eq!(back.metrics.unwrap().f1, 180);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Updating one route incrementally agrees with a full evaluation.
        #[test]
        fn incremental_update_matches_full_evaluation(seed in 0u64..500, shift in -30i64..30, pick in 0usize..64) {
            let inst = generate_instance(6, 2, seed, &GeneratorProfile::tiny());
            let w = ObjectiveWeights::for_instance(&inst);
            let mut s = Solution::empty(&inst);
            for j in inst.service_indices() {
                let i = inst.candidates(j).next().unwrap();
                let day = inst.service(j).day;
                let r = s.route_mut(i, day);
                r.visits.push(Visit { service: j, start: inst.service(j).hard.start });
            }
            let mut eval = evaluate(&s, &inst, &w).unwrap();
            let non_empty: Vec<usize> = s.non_empty_routes().map(|(k, _)| k).collect();
            let k = non_empty[pick % non_empty.len()];
            let r = s.route_at_mut(k);
            let last = r.visits.len() - 1;
            r.visits[last].start += shift;
            eval.update_route(&inst, &w, &s, k);
            prop_assert_eq!(eval, evaluate(&s, &inst, &w).unwrap());
        }

        /// Relabelling caregivers does not change the objectives.
        #[test]
        fn caregiver_relabelling_is_neutral(seed in 0u64..500) {
            let inst = generate_instance(5, 2, seed, &GeneratorProfile::tiny());
            let w = ObjectiveWeights::for_instance(&inst);
            let mut s = Solution::empty(&inst);
            for j in inst.service_indices() {
                let i = inst.candidates(j).next().unwrap();
                s.route_mut(i, inst.service(j).day).visits.push(Visit { service: j, start: inst.service(j).hard.start });
            }
            let mut swapped = inst.clone();
            swapped.caregivers.swap(0, 1);
            let routes = s.routes().iter().cloned().map(|mut r| {
                r.caregiver = CaregiverIdx(1 - r.caregiver.0);
                r
            });
            let t = Solution::from_routes(&swapped, routes).unwrap();
            prop_assert_eq!(
                evaluate(&s, &inst, &w).unwrap().objectives,
                evaluate(&t, &swapped, &ObjectiveWeights::for_instance(&swapped)).unwrap().objectives
            );
        }
    }
}
