//! Adaptive large neighbourhood search under a lexicographic objective.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{CaregiverIdx, Day, Instance, Minutes, ServiceIdx};
use crate::scheduler::{schedule, Priority};
use crate::solution::{
    evaluate_partial, objectives_from_totals, summarize_route, Evaluation, ObjectiveWeights, Objectives, Route,
    RouteSummary, Solution, Visit,
};

/// Direction of a lexicographic search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LexObjective {
    /// Welfare first, cost as tie-breaker.
    WelfareCost,
    /// Cost first, welfare as tie-breaker.
    CostWelfare,
}

impl LexObjective {
    pub fn key(self, o: Objectives) -> (i64, i64) {
        match self {
            LexObjective::WelfareCost => (o.welfare, o.cost),
            LexObjective::CostWelfare => (o.cost, o.welfare),
        }
    }

    pub fn priority(self) -> Priority {
        match self {
            LexObjective::WelfareCost => Priority::WelfareFirst,
            LexObjective::CostWelfare => Priority::CostFirst,
        }
    }

    /// Order on route summaries that agrees with `key` for a fixed route.
    fn route_key(self, s: &RouteSummary) -> (i64, i64) {
        match self {
            LexObjective::WelfareCost => (s.penalization, s.paid),
            LexObjective::CostWelfare => (s.paid, s.penalization),
        }
    }
}

/// Problem data shared by every search step.
#[derive(Clone, Debug)]
pub struct SearchContext<'a> {
    pub instance: &'a Instance,
    pub weights: ObjectiveWeights,
    relatedness_scale: (f64, f64),
    schedules: RefCell<ScheduleMemo>,
}

type ScheduleKey = (CaregiverIdx, Day, Priority, Vec<ServiceIdx>);

/// Start times of already scheduled (caregiver, day, order) triples. Repair
/// tries the same routes over and over.
#[derive(Clone, Debug, Default)]
struct ScheduleMemo {
    map: HashMap<ScheduleKey, Option<Vec<Minutes>>>,
    hits: u64,
    misses: u64,
}

const SCHEDULE_MEMO_LIMIT: usize = 1 << 18;

impl<'a> SearchContext<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        let weights = ObjectiveWeights::for_instance(instance);
        let travel = instance.travel.max().max(1) as f64;
        let mids: Vec<f64> = instance.services.iter().map(|s| midpoint(s.hard.start, s.hard.end)).collect();
        let lo = mids.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = mids.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let spread = if hi > lo { hi - lo } else { 1.0 };
        Self { instance, weights, relatedness_scale: (travel, spread), schedules: RefCell::default() }
    }

    /// [`schedule`], memoized.
    pub fn schedule(
        &self,
        caregiver: CaregiverIdx,
        day: Day,
        order: &[ServiceIdx],
        priority: Priority,
    ) -> Option<Route> {
        let key = (caregiver, day, priority, order.to_vec());
        let mut memo = self.schedules.borrow_mut();
        let starts = match memo.map.get(&key) {
            Some(hit) => {
                let hit = hit.clone();
                memo.hits += 1;
                hit
            }
            None => {
                memo.misses += 1;
                let starts = schedule(self.instance, caregiver, day, order, priority).map(|r| r.starts());
                if memo.map.len() >= SCHEDULE_MEMO_LIMIT {
                    memo.map.clear();
                }
                memo.map.insert(key, starts.clone());
                starts
            }
        }?;
        let mut route = Route::new(caregiver, day);
        route.visits = order.iter().zip(starts).map(|(&service, start)| Visit { service, start }).collect();
        Some(route)
    }

    /// (hits, misses) of the schedule memo.
    pub fn schedule_memo_stats(&self) -> (u64, u64) {
        let m = self.schedules.borrow();
        (m.hits, m.misses)
    }

    pub fn evaluate(&self, solution: &Solution) -> Evaluation {
        evaluate_partial(solution, self.instance, &self.weights)
    }

    /// Shaw relatedness: lower is more related.
    pub fn relatedness(&self, a: ServiceIdx, b: ServiceIdx) -> f64 {
        let (sa, sb) = (self.instance.service(a), self.instance.service(b));
        let travel = self.instance.travel(a, b).min(self.instance.travel(b, a)) as f64 / self.relatedness_scale.0;
        let mid = (midpoint(sa.hard.start, sa.hard.end) - midpoint(sb.hard.start, sb.hard.end)).abs()
            / self.relatedness_scale.1;
        travel + mid + if sa.day != sb.day { 1.0 } else { 0.0 }
    }
}

fn midpoint(a: Minutes, b: Minutes) -> f64 {
    (a + b) as f64 / 2.0
}

/// A solution together with its incrementally maintained evaluation.
#[derive(Clone, Debug)]
pub struct Working {
    pub solution: Solution,
    pub eval: Evaluation,
}

impl Working {
    pub fn new(ctx: &SearchContext, solution: Solution) -> Self {
        let eval = ctx.evaluate(&solution);
        Self { solution, eval }
    }

    pub fn objectives(&self) -> Objectives {
        self.eval.objectives
    }

    fn set_route(&mut self, ctx: &SearchContext, index: usize, route: Route) {
        *self.solution.route_at_mut(index) = route;
        self.eval.update_route(ctx.instance, &ctx.weights, &self.solution, index);
    }

    /// Objectives if route `index` were replaced by one summarized as `s`.
    fn objectives_with(&self, ctx: &SearchContext, index: usize, s: &RouteSummary) -> Objectives {
        let old = &self.eval.routes[index];
        let i = self.solution.route_at(index).caregiver.0;
        let agreed = ctx.instance.caregivers[i].weekly_agreed;
        let weekly = self.eval.weekly_paid[i] - old.paid + s.paid;
        let overtime = self.eval.overtime_total() - self.eval.overtime[i] + (weekly - agreed).max(0);
        objectives_from_totals(
            &ctx.weights,
            overtime,
            self.eval.paid_total - old.paid + s.paid,
            self.eval.affinity_total - old.affinity + s.affinity,
            self.eval.penalization_total - old.penalization + s.penalization,
        )
    }
}

/// Route that results from removing the visit at `position`, rescheduled.
fn route_without(ctx: &SearchContext, route: &Route, position: usize, priority: Priority) -> Option<Route> {
    let mut order = route.order();
    order.remove(position);
    ctx.schedule(route.caregiver, route.day, &order, priority)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemovalOp {
    Random,
    Related,
    Cost,
    OneRoute,
    TwoRoute,
}

impl RemovalOp {
    pub const ALL: [RemovalOp; 5] =
        [RemovalOp::Random, RemovalOp::Related, RemovalOp::Cost, RemovalOp::OneRoute, RemovalOp::TwoRoute];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InsertionOp {
    /// Repeatedly insert the service/position with the least objective increase.
    BasicGreedy,
    /// Insert services in random order, each at its best position.
    RandomGreedy,
    /// Basic greedy that avoids the service's previous caregiver.
    DifferentCaregiverBasicGreedy,
    /// Random greedy that avoids the service's previous caregiver.
    DifferentCaregiverRandomGreedy,
}

impl InsertionOp {
    pub const ALL: [InsertionOp; 4] = [
        InsertionOp::BasicGreedy,
        InsertionOp::RandomGreedy,
        InsertionOp::DifferentCaregiverBasicGreedy,
        InsertionOp::DifferentCaregiverRandomGreedy,
    ];

    fn avoids_previous(self) -> bool {
        matches!(self, InsertionOp::DifferentCaregiverBasicGreedy | InsertionOp::DifferentCaregiverRandomGreedy)
    }
}

/// Share of services removed per iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DestroyProportion {
    Fixed(f64),
    /// Drawn uniformly from `(0, max]` every iteration.
    Auto(f64),
}

impl DestroyProportion {
    /// Number of services to remove, at least one.
    pub fn draw(self, n_services: usize, rng: &mut impl Rng) -> usize {
        let p = match self {
            DestroyProportion::Fixed(p) => p,
            DestroyProportion::Auto(max) => max * (1.0 - rng.gen::<f64>()),
        };
        ((p * n_services as f64).ceil() as usize).clamp(1, n_services.max(1))
    }
}

impl fmt::Display for DestroyProportion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DestroyProportion::Fixed(p) => write!(f, "{}%", p * 100.0),
            DestroyProportion::Auto(p) => write!(f, "auto_{}%", p * 100.0),
        }
    }
}

impl FromStr for DestroyProportion {
    type Err = Error;

    /// Accepts `auto_5%`, `5%` and `0.05`.
    fn from_str(s: &str) -> Result<Self> {
        let (auto, rest) = match s.strip_prefix("auto_") {
            Some(r) => (true, r),
            None => (false, s),
        };
        let value = match rest.strip_suffix('%') {
            Some(pct) => pct.parse::<f64>().map(|v| v / 100.0),
            None => rest.parse::<f64>(),
        }
        .map_err(|_| Error::Usage(format!("bad destroy proportion {s:?}")))?;
        if !(value > 0.0 && value <= 1.0) {
            return Err(Error::Usage(format!("destroy proportion {s:?} must be in (0, 100%]")));
        }
        Ok(if auto { DestroyProportion::Auto(value) } else { DestroyProportion::Fixed(value) })
    }
}

/// How a candidate that is not a new best becomes the current solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcceptanceRule {
    /// `min(1, exp(-(f(best) - f(candidate)) / T))`, as printed for the
    /// algorithm; any candidate no better than the best is accepted.
    AsPrinted,
    /// `exp(-(f(candidate) - f(best)) / T)`: worse candidates become less
    /// likely as the temperature drops.
    Annealing,
}

/// Temperature `T_i = cooling^i * T_0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealingSchedule {
    pub initial: f64,
    pub cooling: f64,
    pub iteration: u64,
}

impl AnnealingSchedule {
    /// A worsening of `share` of the starting primary objective is accepted
    /// with probability one half.
    pub fn calibrated(primary: i64, share: f64, cooling: f64) -> Self {
        let initial = (share * primary.unsigned_abs() as f64 / std::f64::consts::LN_2).max(1.0);
        Self { initial, cooling, iteration: 0 }
    }

    pub fn temperature(&self) -> f64 {
        self.initial * self.cooling.powf(self.iteration as f64)
    }

    pub fn advance(&mut self) {
        self.iteration += 1;
    }
}

/// Scalar difference between two lexicographic keys: the primary difference
/// when it is non-zero, else the secondary difference over its observed range.
pub fn lex_delta(from: (i64, i64), to: (i64, i64), secondary_range: i64) -> f64 {
    if to.0 != from.0 {
        (to.0 - from.0) as f64
    } else {
        (to.1 - from.1) as f64 / secondary_range.max(1) as f64
    }
}

pub fn acceptance_probability(
    rule: AcceptanceRule,
    best: (i64, i64),
    candidate: (i64, i64),
    range: i64,
    t: f64,
) -> f64 {
    if candidate < best {
        return 1.0;
    }
    let exponent = match rule {
        AcceptanceRule::AsPrinted => -lex_delta(candidate, best, range) / t,
        AcceptanceRule::Annealing => -lex_delta(best, candidate, range) / t,
    };
    exponent.exp().min(1.0)
}

/// Removal and insertion operators with adaptive weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorBank {
    pub removal: Vec<(RemovalOp, f64)>,
    pub insertion: Vec<(InsertionOp, f64)>,
    pub new_best_reward: f64,
    pub improvement_reward: f64,
}

impl Default for OperatorBank {
    fn default() -> Self {
        Self {
            removal: RemovalOp::ALL.iter().map(|&o| (o, 1.0)).collect(),
            insertion: InsertionOp::ALL.iter().map(|&o| (o, 1.0)).collect(),
            new_best_reward: 0.2,
            improvement_reward: 0.1,
        }
    }
}

fn roulette<T: Copy>(items: &[(T, f64)], rng: &mut impl Rng) -> T {
    let total: f64 = items.iter().map(|(_, w)| w).sum();
    let mut x = rng.gen::<f64>() * total;
    for &(item, w) in items {
        if x < w {
            return item;
        }
        x -= w;
    }
    items.last().expect("operators").0
}

impl OperatorBank {
    pub fn pick(&self, rng: &mut impl Rng) -> (RemovalOp, InsertionOp) {
        (roulette(&self.removal, rng), roulette(&self.insertion, rng))
    }

    pub fn reward(&mut self, removal: RemovalOp, insertion: InsertionOp, factor: f64) {
        for (o, w) in self.removal.iter_mut() {
            if *o == removal {
                *w *= factor;
            }
        }
        for (o, w) in self.insertion.iter_mut() {
            if *o == insertion {
                *w *= factor;
            }
        }
    }

    /// Rescales each group so its weights average one.
    pub fn renormalize(&mut self) {
        fn norm<T>(v: &mut [(T, f64)]) {
            let mean = v.iter().map(|(_, w)| w).sum::<f64>() / v.len() as f64;
            for (_, w) in v.iter_mut() {
                *w /= mean;
            }
        }
        norm(&mut self.removal);
        norm(&mut self.insertion);
    }
}

/// Solutions with pairwise distinct route structures.
#[derive(Clone, Debug, Default)]
pub struct RouteSet {
    members: Vec<Solution>,
    keys: HashSet<Vec<Vec<ServiceIdx>>>,
}

impl RouteSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `solution` when no member has the same routes. Returns whether it was added.
    pub fn insert(&mut self, solution: &Solution) -> bool {
        if self.keys.insert(solution.structure()) {
            self.members.push(solution.clone());
            true
        } else {
            false
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn get(&self, i: usize) -> Option<&Solution> {
        self.members.get(i)
    }
}

/// Removes services from `w` according to `op`, reschedules the touched
/// routes and returns the removed services with their previous caregivers.
pub fn destroy(
    ctx: &SearchContext,
    w: &mut Working,
    op: RemovalOp,
    objective: LexObjective,
    count: usize,
    rng: &mut impl Rng,
) -> Option<Vec<(ServiceIdx, CaregiverIdx)>> {
    let n = ctx.instance.n_services();
    let assigned: Vec<ServiceIdx> = w.solution.routes().iter().flat_map(|r| r.order()).collect();
    let count = count.min(assigned.len());
    let chosen: Vec<ServiceIdx> = match op {
        RemovalOp::Random => assigned.choose_multiple(rng, count).copied().collect(),
        RemovalOp::Related => {
            let mut out = vec![*assigned.choose(rng)?];
            let mut left: Vec<ServiceIdx> = assigned.iter().copied().filter(|&j| j != out[0]).collect();
            while out.len() < count {
                let anchor = *out.choose(rng).expect("non-empty");
                let (k, _) = left
                    .iter()
                    .enumerate()
                    .map(|(k, &j)| (k, ctx.relatedness(anchor, j)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))?;
                out.push(left.remove(k));
            }
            out
        }
        RemovalOp::Cost => return destroy_by_cost(ctx, w, objective, count),
        RemovalOp::OneRoute | RemovalOp::TwoRoute => {
            let mut routes: Vec<usize> = w.solution.non_empty_routes().map(|(r, _)| r).collect();
            routes.shuffle(rng);
            let mut out = Vec::new();
            if op == RemovalOp::TwoRoute {
                for &r in routes.iter().take(2) {
                    out.extend(w.solution.route_at(r).order());
                }
            } else {
                for &r in &routes {
                    if out.len() >= count {
                        break;
                    }
                    let mut order = w.solution.route_at(r).order();
                    let need = count - out.len();
                    if order.len() > need {
                        order.shuffle(rng);
                        order.truncate(need);
                    }
                    out.extend(order);
                }
            }
            out
        }
    };

    let located = w.solution.locate(n);
    let removed: Vec<(ServiceIdx, CaregiverIdx)> = chosen
        .iter()
        .map(|&j| {
            let (r, _) = located[j.0].expect("assigned");
            (j, w.solution.route_at(r).caregiver)
        })
        .collect();
    let mut touched: Vec<usize> = chosen.iter().map(|j| located[j.0].expect("assigned").0).collect();
    touched.sort_unstable();
    touched.dedup();
    let drop: HashSet<ServiceIdx> = chosen.into_iter().collect();
    for r in touched {
        let route = w.solution.route_at(r);
        let order: Vec<ServiceIdx> = route.order().into_iter().filter(|j| !drop.contains(j)).collect();
        let new = ctx.schedule(route.caregiver, route.day, &order, objective.priority())?;
        w.set_route(ctx, r, new);
    }
    Some(removed)
}

/// Removes, one at a time, the service whose removal improves the objective most.
fn destroy_by_cost(
    ctx: &SearchContext,
    w: &mut Working,
    objective: LexObjective,
    count: usize,
) -> Option<Vec<(ServiceIdx, CaregiverIdx)>> {
    let mut removed = Vec::with_capacity(count);
    for _ in 0..count {
        let mut best: Option<((i64, i64), usize, Route, ServiceIdx)> = None;
        for (r, route) in w.solution.non_empty_routes() {
            for k in 0..route.len() {
                let Some(new) = route_without(ctx, route, k, objective.priority()) else { continue };
                let s = summarize_route(&new, ctx.instance);
                let key = objective.key(w.objectives_with(ctx, r, &s));
                if best.as_ref().is_none_or(|b| key < b.0) {
                    best = Some((key, r, new, route.visits[k].service));
                }
            }
        }
        let (_, r, new, j) = best?;
        removed.push((j, w.solution.route_at(r).caregiver));
        w.set_route(ctx, r, new);
    }
    Some(removed)
}

/// Best insertion of `j` into route `r`: the rescheduled route and its summary.
fn best_in_route(
    ctx: &SearchContext,
    w: &Working,
    j: ServiceIdx,
    r: usize,
    objective: LexObjective,
) -> Option<(RouteSummary, Route)> {
    let route = w.solution.route_at(r);
    let base = route.order();
    let mut best: Option<(RouteSummary, Route)> = None;
    for pos in 0..=base.len() {
        let mut order = base.clone();
        order.insert(pos, j);
        let Some(new) = ctx.schedule(route.caregiver, route.day, &order, objective.priority()) else {
            continue;
        };
        let s = summarize_route(&new, ctx.instance);
        if best.as_ref().is_none_or(|b| objective.route_key(&s) < objective.route_key(&b.0)) {
            best = Some((s, new));
        }
    }
    best
}

fn candidate_routes(ctx: &SearchContext, j: ServiceIdx) -> Vec<usize> {
    let day = ctx.instance.service(j).day;
    ctx.instance.candidates(j).map(|i| Solution::route_index(i, day)).collect()
}

/// Reinserts `removed` with `op`. Returns false, leaving `w` partially
/// repaired, when some service has no feasible position.
pub fn repair(
    ctx: &SearchContext,
    w: &mut Working,
    removed: &[(ServiceIdx, CaregiverIdx)],
    op: InsertionOp,
    objective: LexObjective,
    rng: &mut impl Rng,
) -> bool {
    let previous: HashMap<ServiceIdx, CaregiverIdx> = removed.iter().copied().collect();
    let allowed = |j: ServiceIdx, options: &[(usize, Objectives)], sol: &Solution| -> Vec<(usize, Objectives)> {
        if !op.avoids_previous() {
            return options.to_vec();
        }
        let prev = previous.get(&j).copied();
        let others: Vec<_> =
            options.iter().copied().filter(|&(r, _)| Some(sol.route_at(r).caregiver) != prev).collect();
        if others.is_empty() {
            options.to_vec()
        } else {
            others
        }
    };

    match op {
        InsertionOp::RandomGreedy | InsertionOp::DifferentCaregiverRandomGreedy => {
            let mut order: Vec<ServiceIdx> = removed.iter().map(|&(j, _)| j).collect();
            order.shuffle(rng);
            for j in order {
                let mut found: Vec<(usize, Objectives)> = Vec::new();
                let mut routes_for = HashMap::new();
                for r in candidate_routes(ctx, j) {
                    if let Some((s, route)) = best_in_route(ctx, w, j, r, objective) {
                        found.push((r, w.objectives_with(ctx, r, &s)));
                        routes_for.insert(r, route);
                    }
                }
                let options = allowed(j, &found, &w.solution);
                let Some(&(r, _)) = options.iter().min_by_key(|(r, o)| (objective.key(*o), *r)) else {
                    return false;
                };
                let route = routes_for.remove(&r).expect("evaluated");
                w.set_route(ctx, r, route);
            }
            true
        }
        InsertionOp::BasicGreedy | InsertionOp::DifferentCaregiverBasicGreedy => {
            let mut pending: Vec<ServiceIdx> = removed.iter().map(|&(j, _)| j).collect();
            pending.sort_unstable();
            let mut cache: HashMap<(ServiceIdx, usize), Option<(RouteSummary, Route)>> = HashMap::new();
            while !pending.is_empty() {
                let mut best: Option<((i64, i64), usize, ServiceIdx, usize)> = None;
                for (pi, &j) in pending.iter().enumerate() {
                    let mut found = Vec::new();
                    for r in candidate_routes(ctx, j) {
                        let entry = cache.entry((j, r)).or_insert_with(|| best_in_route(ctx, w, j, r, objective));
                        if let Some((s, _)) = entry {
                            found.push((r, w.objectives_with(ctx, r, s)));
                        }
                    }
                    let options = allowed(j, &found, &w.solution);
                    if options.is_empty() {
                        return false;
                    }
                    for (r, o) in options {
                        let key = objective.key(o);
                        if best.is_none_or(|b| key < b.0) {
                            best = Some((key, r, j, pi));
                        }
                    }
                }
                let (_, r, j, pi) = best.expect("pending is non-empty");
                let (_, route) = cache.remove(&(j, r)).flatten().expect("cached");
                w.set_route(ctx, r, route);
                pending.remove(pi);
                cache.retain(|&(_, rr), _| rr != r);
            }
            true
        }
    }
}

/// Builds a complete solution from empty routes by random greedy insertion.
pub fn initial_solution(ctx: &SearchContext, objective: LexObjective, rng: &mut impl Rng) -> Result<Solution> {
    let inst = ctx.instance;
    if let Some(j) = inst.service_indices().find(|&j| inst.candidates(j).next().is_none()) {
        return Err(Error::Unplaceable(j));
    }
    let all: Vec<(ServiceIdx, CaregiverIdx)> = inst.service_indices().map(|j| (j, CaregiverIdx(usize::MAX))).collect();
    const ATTEMPTS: usize = 20;
    for attempt in 0..ATTEMPTS {
        let mut w = Working::new(ctx, Solution::empty(inst));
        let op = if attempt + 1 < ATTEMPTS { InsertionOp::RandomGreedy } else { InsertionOp::BasicGreedy };
        if repair(ctx, &mut w, &all, op, objective, rng) {
            return Ok(w.solution);
        }
    }
    // Report a service that cannot be placed even into an otherwise empty solution,
    // falling back to the first service left out by a greedy pass.
    let empty = Working::new(ctx, Solution::empty(inst));
    for j in inst.service_indices() {
        if candidate_routes(ctx, j).into_iter().all(|r| best_in_route(ctx, &empty, j, r, objective).is_none()) {
            return Err(Error::Unplaceable(j));
        }
    }
    let mut w = Working::new(ctx, Solution::empty(inst));
    repair(ctx, &mut w, &all, InsertionOp::BasicGreedy, objective, rng);
    let placed = w.solution.locate(inst.n_services());
    let j = placed.iter().position(Option::is_none).unwrap_or(0);
    Err(Error::Unplaceable(ServiceIdx(j)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlnsConfig {
    pub iterations: usize,
    pub proportion: DestroyProportion,
    pub cooling: f64,
    /// Share of the starting primary objective used to calibrate `T_0`.
    pub calibration_share: f64,
    pub acceptance: AcceptanceRule,
    pub renormalize_every: usize,
    #[serde(default)]
    pub time_limit: Option<Duration>,
}

impl Default for AlnsConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            proportion: DestroyProportion::Auto(1.0),
            cooling: 0.995,
            calibration_share: 0.05,
            acceptance: AcceptanceRule::AsPrinted,
            renormalize_every: 100,
            time_limit: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AlnsOutcome {
    pub best: Solution,
    pub best_objectives: Objectives,
    pub iterations: usize,
    pub discarded: usize,
    pub bank: OperatorBank,
    /// Best key after every completed iteration.
    pub best_trace: Vec<(i64, i64)>,
}

/// Runs ALNS from `start`, adding every repaired solution with new routes to `route_set`.
pub fn alns_run(
    ctx: &SearchContext,
    objective: LexObjective,
    start: &Solution,
    route_set: &mut RouteSet,
    config: &AlnsConfig,
    rng: &mut impl Rng,
) -> AlnsOutcome {
    let clock = Instant::now();
    let mut current = Working::new(ctx, start.clone());
    let mut best = current.clone();
    let mut bank = OperatorBank::default();
    let start_key = objective.key(current.objectives());
    let mut schedule_t = AnnealingSchedule::calibrated(start_key.0, config.calibration_share, config.cooling);
    let (mut sec_lo, mut sec_hi) = (start_key.1, start_key.1);
    let n = ctx.instance.n_services();
    let mut discarded = 0;
    let mut done = 0;
    let mut best_trace = Vec::new();

    for it in 0..config.iterations {
        if config.time_limit.is_some_and(|l| clock.elapsed() >= l) {
            break;
        }
        done = it + 1;
        let q = config.proportion.draw(n, rng);
        let (rem, ins) = bank.pick(rng);
        let mut partial = current.clone();
        let Some(removed) = destroy(ctx, &mut partial, rem, objective, q, rng) else {
            discarded += 1;
            schedule_t.advance();
            continue;
        };
        let mut candidate = None;
        let mut used = ins;
        for op in std::iter::once(ins).chain(InsertionOp::ALL.into_iter().filter(|&o| o != ins)) {
            let mut w = partial.clone();
            if repair(ctx, &mut w, &removed, op, objective, rng) {
                candidate = Some(w);
                used = op;
                break;
            }
        }
        let Some(candidate) = candidate else {
            discarded += 1;
            schedule_t.advance();
            continue;
        };

        let key = objective.key(candidate.objectives());
        sec_lo = sec_lo.min(key.1);
        sec_hi = sec_hi.max(key.1);
        let best_key = objective.key(best.objectives());
        let current_key = objective.key(current.objectives());
        if key < best_key {
            bank.reward(rem, used, 1.0 + bank.new_best_reward);
        } else if key < current_key {
            bank.reward(rem, used, 1.0 + bank.improvement_reward);
        }
        route_set.insert(&candidate.solution);

        let p = acceptance_probability(config.acceptance, best_key, key, sec_hi - sec_lo, schedule_t.temperature());
        if key < best_key {
            best = candidate.clone();
            current = candidate;
        } else if p >= 1.0 || rng.gen::<f64>() < p {
            current = candidate;
        } else {
            current = best.clone();
        }
        schedule_t.advance();
        if config.renormalize_every > 0 && done % config.renormalize_every == 0 {
            bank.renormalize();
        }
        best_trace.push(objective.key(best.objectives()));
    }

    AlnsOutcome {
        best_objectives: best.objectives(),
        best: best.solution,
        iterations: done,
        discarded,
        bank,
        best_trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate_instance, GeneratorProfile};
    use crate::solution::check_feasibility;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(seed: u64) -> Instance {
        generate_instance(10, 3, seed, &GeneratorProfile::solomon_10())
    }

    #[test]
    fn proportion_parsing() {
        assert_eq!("auto_5%".parse::<DestroyProportion>().unwrap(), DestroyProportion::Auto(0.05));
        assert_eq!("10%".parse::<DestroyProportion>().unwrap(), DestroyProportion::Fixed(0.1));
        assert_eq!("0.25".parse::<DestroyProportion>().unwrap(), DestroyProportion::Fixed(0.25));
        assert!("0%".parse::<DestroyProportion>().is_err());
        assert!("auto_x".parse::<DestroyProportion>().is_err());
    }

    #[test]
    fn auto_proportion_removes_at_least_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let q = DestroyProportion::Auto(0.05).draw(10, &mut rng);
            assert_eq!(q, 1);
            let q = DestroyProportion::Auto(1.0).draw(10, &mut rng);
            assert!((1..=10).contains(&q));
        }
    }

    #[test]
    fn as_printed_acceptance_takes_anything_not_better_than_best() {
        let p = acceptance_probability(AcceptanceRule::AsPrinted, (10, 0), (15, 0), 1, 0.5);
        assert_eq!(p, 1.0);
        let p = acceptance_probability(AcceptanceRule::Annealing, (10, 0), (15, 0), 1, 5.0);
        assert!((p - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(acceptance_probability(AcceptanceRule::Annealing, (10, 0), (9, 99), 1, 5.0), 1.0);
    }

    #[test]
    fn calibrated_temperature_halves_five_percent_worsening() {
        let s = AnnealingSchedule::calibrated(1000, 0.05, 0.9);
        let p = (-50.0 / s.temperature()).exp();
        assert!((p - 0.5).abs() < 1e-12);
        let mut s2 = s;
        s2.advance();
        assert!(s2.temperature() < s.temperature());
    }

    #[test]
    fn full_random_removal_empties_routes() {
        let inst = setup(3);
        let ctx = SearchContext::new(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sol = initial_solution(&ctx, LexObjective::CostWelfare, &mut rng).unwrap();
        let mut w = Working::new(&ctx, sol);
        let removed = destroy(&ctx, &mut w, RemovalOp::Random, LexObjective::CostWelfare, 10, &mut rng).unwrap();
        assert_eq!(removed.len(), 10);
        assert_eq!(w.solution.n_assigned(), 0);
        assert_eq!(w.eval, ctx.evaluate(&w.solution));
    }

    #[test]
    fn two_route_removal_takes_both_routes() {
        let inst = setup(4);
        let ctx = SearchContext::new(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sol = initial_solution(&ctx, LexObjective::CostWelfare, &mut rng).unwrap();
        // Keep exactly two non-empty routes by moving everything else out.
        let routes: Vec<usize> = sol.non_empty_routes().map(|(r, _)| r).collect();
        let mut two = Solution::empty(&inst);
        for &r in routes.iter().take(2) {
            *two.route_at_mut(r) = sol.route_at(r).clone();
        }
        let mut w = Working::new(&ctx, two.clone());
        let removed = destroy(&ctx, &mut w, RemovalOp::TwoRoute, LexObjective::CostWelfare, 1, &mut rng).unwrap();
        assert_eq!(removed.len(), two.n_assigned());
        assert_eq!(w.solution.n_assigned(), 0);
    }

    #[test]
    fn cost_removal_picks_best_single_removal() {
        for seed in 0..5 {
            let inst = setup(seed);
            let ctx = SearchContext::new(&inst);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let obj = LexObjective::CostWelfare;
            let sol = initial_solution(&ctx, obj, &mut rng).unwrap();
            // Exhaustive single-removal oracle.
            let mut best_key = None;
            for (r, route) in sol.non_empty_routes() {
                for k in 0..route.len() {
                    let mut order = route.order();
                    order.remove(k);
                    let new = schedule(&inst, route.caregiver, route.day, &order, obj.priority()).unwrap();
                    let mut s = sol.clone();
                    *s.route_at_mut(r) = new;
                    let key = obj.key(ctx.evaluate(&s).objectives);
                    if best_key.is_none_or(|b| key < b) {
                        best_key = Some(key);
                    }
                }
            }
            let mut w = Working::new(&ctx, sol);
            destroy(&ctx, &mut w, RemovalOp::Cost, obj, 1, &mut rng).unwrap();
            assert_eq!(Some(obj.key(w.objectives())), best_key);
        }
    }

    #[test]
    fn single_service_greedy_takes_best_position() {
        let inst = setup(5);
        let ctx = SearchContext::new(&inst);
        let obj = LexObjective::WelfareCost;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sol = initial_solution(&ctx, obj, &mut rng).unwrap();
        let mut w = Working::new(&ctx, sol);
        let removed = destroy(&ctx, &mut w, RemovalOp::Random, obj, 1, &mut rng).unwrap();
        let j = removed[0].0;
        let partial = w.solution.clone();
        // Oracle: every caregiver route and slot.
        let mut best = None;
        for i in inst.candidates(j) {
            let day = inst.service(j).day;
            let route = partial.route(i, day);
            for pos in 0..=route.len() {
                let mut order = route.order();
                order.insert(pos, j);
                if let Some(new) = schedule(&inst, i, day, &order, obj.priority()) {
                    let mut s = partial.clone();
                    *s.route_mut(i, day) = new;
                    let key = obj.key(ctx.evaluate(&s).objectives);
                    if best.is_none_or(|b| key < b) {
                        best = Some(key);
                    }
                }
            }
        }
        assert!(repair(&ctx, &mut w, &removed, InsertionOp::BasicGreedy, obj, &mut rng));
        assert_eq!(Some(obj.key(w.objectives())), best);
    }

    #[test]
    fn repair_after_destroy_covers_everything() {
        let inst = setup(6);
        let ctx = SearchContext::new(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut sol = initial_solution(&ctx, LexObjective::CostWelfare, &mut rng).unwrap();
        let bank = OperatorBank::default();
        for it in 0..300 {
            let obj = if it % 2 == 0 { LexObjective::CostWelfare } else { LexObjective::WelfareCost };
            let (rem, ins) = bank.pick(&mut rng);
            let q = DestroyProportion::Auto(0.5).draw(10, &mut rng);
            let mut w = Working::new(&ctx, sol.clone());
            let removed = destroy(&ctx, &mut w, rem, obj, q, &mut rng).unwrap();
            if repair(&ctx, &mut w, &removed, ins, obj, &mut rng) {
                assert!(check_feasibility(&w.solution, &inst).is_empty());
                assert_eq!(w.eval, ctx.evaluate(&w.solution));
                sol = w.solution;
            }
        }
    }

    #[test]
    fn zero_budget_returns_start() {
        let inst = setup(7);
        let ctx = SearchContext::new(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sol = initial_solution(&ctx, LexObjective::CostWelfare, &mut rng).unwrap();
        let mut set = RouteSet::new();
        let cfg = AlnsConfig { iterations: 0, ..Default::default() };
        let out = alns_run(&ctx, LexObjective::CostWelfare, &sol, &mut set, &cfg, &mut rng);
        assert_eq!(out.best, sol);
        assert!(set.is_empty());
    }

    #[test]
    fn run_is_monotone_deterministic_and_route_distinct() {
        let inst = setup(8);
        let ctx = SearchContext::new(&inst);
        let cfg = AlnsConfig { iterations: 150, ..Default::default() };
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sol = initial_solution(&ctx, LexObjective::WelfareCost, &mut rng).unwrap();
            let mut set = RouteSet::new();
            let out = alns_run(&ctx, LexObjective::WelfareCost, &sol, &mut set, &cfg, &mut rng);
            (out, set)
        };
        let (a, set) = run(8);
        let (b, _) = run(8);
        assert_eq!(a.best, b.best);
        assert!(a.best_trace.windows(2).all(|w| w[1] <= w[0]));
        let keys: HashSet<_> = set.members().iter().map(Solution::structure).collect();
        assert_eq!(keys.len(), set.len());
        assert!(check_feasibility(&a.best, &inst).is_empty());
        assert!(a.bank.removal.iter().all(|(_, w)| *w > 0.0));
        assert!(a.bank.insertion.iter().all(|(_, w)| *w > 0.0));
    }
}
