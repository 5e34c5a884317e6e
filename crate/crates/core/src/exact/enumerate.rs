//! Exhaustive front of the time-discretized problem.
//!
//! Every assignment of services to compatible caregivers, every visit order
//! and every start time on the grid is tried. Partial results are combined
//! with Pareto filtering, which is exact because the cost of a caregiver is
//! non-decreasing in paid time and both objectives are sums.

use std::collections::HashMap;

use crate::archive::{ParetoArchive, Provenance};
use crate::error::{Error, Result};
use crate::instance::{CaregiverIdx, Day, Instance, Minutes, ServiceIdx};
use crate::solution::{caregiver_cost, compute_day_metrics, ObjectiveWeights, Objectives, Route, Solution, Visit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub max_services: usize,
    pub max_caregivers: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self { max_services: 6, max_caregivers: 3 }
    }
}

pub(crate) fn check_limits(instance: &Instance, limits: EnumerationLimits) -> Result<()> {
    if instance.n_services() > limits.max_services {
        return Err(Error::TooLarge { what: "services", actual: instance.n_services(), limit: limits.max_services });
    }
    if instance.n_caregivers() > limits.max_caregivers {
        return Err(Error::TooLarge {
            what: "caregivers",
            actual: instance.n_caregivers(),
            limit: limits.max_caregivers,
        });
    }
    Ok(())
}

/// Keeps the points with no other point at most as large in both coordinates.
/// (cost, welfare, routes) of one partial assignment.
type RouteOutcome = (i64, i64, Vec<Route>);

fn pareto<T>(mut v: Vec<(i64, i64, T)>) -> Vec<(i64, i64, T)> {
    v.sort_by_key(|p| (p.0, p.1));
    let mut out: Vec<(i64, i64, T)> = Vec::new();
    for p in v {
        if out.last().is_none_or(|l| p.1 < l.1) {
            out.push(p);
        }
    }
    out
}

fn minkowski(a: &[RouteOutcome], b: &[RouteOutcome]) -> Vec<RouteOutcome> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let mut routes = x.2.clone();
            routes.extend(y.2.iter().cloned());
            out.push((x.0 + y.0, x.1 + y.1, routes));
        }
    }
    pareto(out)
}

fn permutations(items: &[ServiceIdx]) -> Vec<Vec<ServiceIdx>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// `(paid, penalization, route)` Pareto points of one caregiver day serving
/// exactly `services`.
fn route_front(
    instance: &Instance,
    caregiver: CaregiverIdx,
    day: Day,
    services: &[ServiceIdx],
    step: Minutes,
) -> Vec<RouteOutcome> {
    let empty = Route::new(caregiver, day);
    if services.is_empty() {
        return vec![(0, 0, vec![empty])];
    }
    let Some(avail) = instance.caregiver(caregiver).window(day) else { return Vec::new() };
    let cap = instance.caregiver(caregiver).daily_max(day);
    // Least penalization per paid time.
    let mut best: HashMap<Minutes, (Minutes, Route)> = HashMap::new();

    fn dfs(
        instance: &Instance,
        route: &mut Route,
        order: &[ServiceIdx],
        avail: (Minutes, Minutes),
        step: Minutes,
        cap: Minutes,
        best: &mut HashMap<Minutes, (Minutes, Route)>,
    ) {
        let k = route.visits.len();
        if k == order.len() {
            let paid = compute_day_metrics(route, instance).paid;
            if paid > cap {
                return;
            }
            let pen: Minutes = route.visits.iter().map(|v| instance.service(v.service).penalization_at(v.start)).sum();
            if best.get(&paid).is_none_or(|b| pen < b.0) {
                best.insert(paid, (pen, route.clone()));
            }
            return;
        }
        let s = instance.service(order[k]);
        let mut lo = s.hard.start.max(avail.0);
        if let Some(prev) = route.visits.last() {
            lo = lo.max(prev.start + instance.service(prev.service).duration + instance.travel(prev.service, order[k]));
        }
        let hi = s.hard.end.min(avail.1) - s.duration;
        let mut t = lo.div_euclid(step) * step;
        if t < lo {
            t += step;
        }
        while t <= hi {
            route.visits.push(Visit { service: order[k], start: t });
            dfs(instance, route, order, avail, step, cap, best);
            route.visits.pop();
            t += step;
        }
    }

    for order in permutations(services) {
        let mut route = empty.clone();
        dfs(instance, &mut route, &order, (avail.start, avail.end), step, cap, &mut best);
    }
    let mut keys: Vec<_> = best.keys().copied().collect();
    keys.sort_unstable();
    pareto(
        keys.into_iter()
            .map(|paid| {
                let (pen, route) = best[&paid].clone();
                (paid, pen, vec![route])
            })
            .collect(),
    )
}

/// Exact Pareto front when start times are restricted to multiples of `step`.
pub fn brute_force_front(instance: &Instance, step: Minutes) -> Result<ParetoArchive<Solution>> {
    brute_force_front_with(instance, step, EnumerationLimits::default())
}

pub fn brute_force_front_with(
    instance: &Instance,
    step: Minutes,
    limits: EnumerationLimits,
) -> Result<ParetoArchive<Solution>> {
    check_limits(instance, limits)?;
    let step = step.max(1);
    let weights = ObjectiveWeights::for_instance(instance);
    let options: Vec<Vec<CaregiverIdx>> =
        instance.service_indices().map(|j| instance.candidates(j).collect()).collect();
    if let Some(j) = options.iter().position(Vec::is_empty) {
        return Err(Error::Unplaceable(ServiceIdx(j)));
    }

    let mut route_cache: HashMap<(usize, usize, Vec<ServiceIdx>), Vec<RouteOutcome>> = HashMap::new();
    let mut archive = ParetoArchive::new();
    let n = instance.n_services();
    let mut choice = vec![0usize; n];
    loop {
        let assigned: Vec<CaregiverIdx> = (0..n).map(|j| options[j][choice[j]]).collect();
        let affinity: i64 = (0..n).map(|j| i64::from(instance.caregiver(assigned[j]).affinity(ServiceIdx(j)))).sum();

        let mut total: Vec<RouteOutcome> = vec![(0, 0, Vec::new())];
        for i in instance.caregiver_indices() {
            let mut week: Vec<RouteOutcome> = vec![(0, 0, Vec::new())];
            for day in Day::all() {
                let services: Vec<ServiceIdx> =
                    (0..n).filter(|&j| assigned[j] == i && instance.services[j].day == day).map(ServiceIdx).collect();
                let front = route_cache
                    .entry((i.0, day.index(), services.clone()))
                    .or_insert_with(|| route_front(instance, i, day, &services, step));
                week = minkowski(&week, front);
                if week.is_empty() {
                    break;
                }
            }
            let agreed = instance.caregiver(i).weekly_agreed;
            let costed: Vec<_> =
                week.into_iter().map(|(w, pen, r)| (caregiver_cost(&weights, w, agreed), pen, r)).collect();
            total = minkowski(&total, &pareto(costed));
            if total.is_empty() {
                break;
            }
        }
        for (cost, pen, routes) in total {
            let o = Objectives::new(cost, weights.affinity * affinity + weights.penalization * pen);
            archive.update_with(o, Provenance::Enumeration, || {
                Solution::from_routes(instance, routes).expect("enumerated routes are consistent")
            });
        }

        // Next assignment in mixed radix.
        let mut k = 0;
        while k < n {
            choice[k] += 1;
            if choice[k] < options[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    Ok(archive)
}
