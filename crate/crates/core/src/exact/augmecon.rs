//! AUGMECON2 over a pluggable exact backend.
//!
//! Both objectives are minimized. With `lb2 = f2(x_wc)` and `ub2 = f2(x_cw)`
//! the grid walks `e2 = ub2 - i2 * r2 / g2` downwards and solves
//! `min f1 - eps * s2 / r2` subject to `f2 + s2 = e2`, `s2 >= 0`. After each
//! solution the next `floor(s2 / (r2 / g2))` grid points would return the same
//! solution and are skipped.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::alns::LexObjective;
use crate::archive::{ParetoArchive, Provenance};
use crate::error::{Error, Result};
use crate::exact::milp::build_milp;
use crate::instance::{CaregiverIdx, Day, Instance, Minutes, ServiceIdx, DAYS};
use crate::solution::{caregiver_cost, compute_day_metrics, ObjectiveWeights, Objectives, Route, Solution, Visit};

use super::enumerate::{check_limits, EnumerationLimits};

#[derive(Clone, Debug, PartialEq)]
pub struct ExactPoint {
    pub objectives: Objectives,
    pub solution: Option<Solution>,
}

pub trait ExactBackend {
    fn name(&self) -> &str;

    /// Lexicographic optimum in direction `objective` among solutions whose
    /// welfare is at most `welfare_bound`; `None` when there is none.
    fn solve(&mut self, objective: LexObjective, welfare_bound: Option<i64>) -> Result<Option<ExactPoint>>;

    /// The augmented epsilon-constraint problem. With integer objectives and
    /// `eps < 1` it equals the cost-first optimum under `f2 <= e2`.
    fn solve_epsilon(&mut self, e2: f64, _eps: f64, _r2: f64) -> Result<Option<ExactPoint>> {
        self.solve(LexObjective::CostWelfare, Some((e2 + 1e-9).floor() as i64))
    }
}

pub fn lexicographic_solve(backend: &mut dyn ExactBackend, objective: LexObjective) -> Result<ExactPoint> {
    backend.solve(objective, None)?.ok_or_else(|| Error::Solver(format!("{}: no feasible solution", backend.name())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Number of grid intervals; `None` uses one per unit of the welfare range.
    pub intervals: Option<usize>,
    pub eps: f64,
    /// Writes the model of every attempted grid point here.
    pub emit_lp: Option<PathBuf>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { intervals: Some(100), eps: 1e-3, emit_lp: None }
    }
}

impl GridConfig {
    pub fn full_resolution() -> Self {
        Self { intervals: None, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridStep {
    pub i2: usize,
    pub e2: f64,
    pub status: String,
    pub surplus: Option<f64>,
    pub bypass: usize,
}

pub struct AugmeconResult {
    pub archive: ParetoArchive<Option<Solution>>,
    pub ub2: i64,
    pub lb2: i64,
    pub intervals: usize,
    pub steps: Vec<GridStep>,
}

pub fn augmecon2(backend: &mut dyn ExactBackend, instance: &Instance, config: &GridConfig) -> Result<AugmeconResult> {
    if !(1e-6..=1e-3).contains(&config.eps) {
        return Err(Error::Usage(format!("augmentation constant {} outside [1e-6, 1e-3]", config.eps)));
    }
    let wc = lexicographic_solve(backend, LexObjective::WelfareCost)?;
    let cw = lexicographic_solve(backend, LexObjective::CostWelfare)?;
    let (lb2, ub2) = (wc.objectives.welfare, cw.objectives.welfare);
    let r2 = ub2 - lb2;
    let mut archive = ParetoArchive::new();
    archive.update(cw.objectives, cw.solution, Provenance::Exact);
    archive.update(wc.objectives, wc.solution, Provenance::Exact);
    let mut steps = Vec::new();
    let intervals = config.intervals.unwrap_or(r2.max(1) as usize).max(1);
    if r2 <= 0 {
        return Ok(AugmeconResult { archive, ub2, lb2, intervals, steps });
    }
    let model = config.emit_lp.as_ref().map(|_| build_milp(instance));
    if let Some(dir) = &config.emit_lp {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let width = r2 as f64 / intervals as f64;
    let mut i2 = 1;
    while i2 <= intervals {
        let e2 = ub2 as f64 - i2 as f64 * width;
        if let (Some(dir), Some(model)) = (&config.emit_lp, &model) {
            model.with_epsilon_constraint(e2, config.eps, r2 as f64).write_lp(&dir.join(format!("grid_{i2:05}.lp")))?;
        }
        match backend.solve_epsilon(e2, config.eps, r2 as f64) {
            Ok(Some(p)) => {
                let surplus = (e2 - p.objectives.welfare as f64).max(0.0);
                let bypass = (surplus / width + 1e-9).floor() as usize;
                steps.push(GridStep { i2, e2, status: "optimal".into(), surplus: Some(surplus), bypass });
                archive.update(p.objectives, p.solution, Provenance::Exact);
                i2 += bypass + 1;
            }
            Ok(None) => {
                steps.push(GridStep { i2, e2, status: "infeasible".into(), surplus: None, bypass: 0 });
                break;
            }
            Err(e) => {
                log::warn!("grid point {i2} (e2 = {e2}) failed: {e}");
                steps.push(GridStep { i2, e2, status: format!("error: {e}"), surplus: None, bypass: 0 });
                i2 += 1;
            }
        }
    }
    Ok(AugmeconResult { archive, ub2, lb2, intervals, steps })
}

/// Least paid time per exact penalization value, with a witness.
type PenTable<T> = Vec<Option<(i64, T)>>;

fn set_min<T>(table: &mut PenTable<T>, pen: usize, value: i64, witness: impl FnOnce() -> T) {
    if table.len() <= pen {
        table.resize_with(pen + 1, || None);
    }
    if table[pen].as_ref().is_none_or(|(v, _)| value < *v) {
        table[pen] = Some((value, witness()));
    }
}

/// Min-plus convolution over the penalization index.
fn convolve(a: &PenTable<Vec<Route>>, b: &PenTable<Vec<Route>>) -> PenTable<Vec<Route>> {
    let mut out: PenTable<Vec<Route>> = Vec::new();
    for (p, x) in a.iter().enumerate() {
        let Some((va, ra)) = x else { continue };
        for (q, y) in b.iter().enumerate() {
            let Some((vb, rb)) = y else { continue };
            set_min(&mut out, p + q, va + vb, || {
                let mut r = ra.clone();
                r.extend(rb.iter().cloned());
                r
            });
        }
    }
    out
}

/// Forward dynamic program over visit positions for one order. The state is
/// the current start, the first start and the largest gap so far.
fn order_table(
    instance: &Instance,
    caregiver: CaregiverIdx,
    day: Day,
    order: &[ServiceIdx],
    step: Minutes,
    into: &mut PenTable<Vec<Route>>,
) {
    let cg = instance.caregiver(caregiver);
    let Some(avail) = cg.window(day) else { return };
    let grid = |lo: Minutes, hi: Minutes| {
        let first = (lo + step - 1).div_euclid(step) * step;
        (0..).map(move |k| first + k * step).take_while(move |&t| t <= hi)
    };
    let bounds = |k: usize| {
        let s = instance.service(order[k]);
        (s.hard.start.max(avail.start), s.hard.end.min(avail.end) - s.duration)
    };
    // (t_k, t_1, largest gap) -> (penalization, starts)
    let mut layer: BTreeMap<(Minutes, Minutes, Minutes), (Minutes, Vec<Minutes>)> = BTreeMap::new();
    let (lo, hi) = bounds(0);
    for t in grid(lo, hi) {
        layer.insert((t, t, 0), (instance.service(order[0]).penalization_at(t), vec![t]));
    }
    for k in 1..order.len() {
        let prev = instance.service(order[k - 1]);
        let offset = prev.duration + instance.travel(order[k - 1], order[k]);
        let (lo, hi) = bounds(k);
        let s = instance.service(order[k]);
        let mut next: BTreeMap<(Minutes, Minutes, Minutes), (Minutes, Vec<Minutes>)> = BTreeMap::new();
        for (&(t, first, gap), (pen, starts)) in &layer {
            for u in grid(lo.max(t + offset), hi) {
                let key = (u, first, gap.max(u - t - offset));
                let p = pen + s.penalization_at(u);
                if next.get(&key).is_none_or(|e| p < e.0) {
                    let mut st = starts.clone();
                    st.push(u);
                    next.insert(key, (p, st));
                }
            }
        }
        layer = next;
    }
    let last = instance.service(*order.last().expect("non-empty"));
    for ((t, first, gap), (pen, starts)) in layer {
        let deducted = if gap >= instance.pi_min { gap } else { 0 };
        let paid = t + last.duration - first - deducted;
        if paid > cg.daily_max(day) {
            continue;
        }
        set_min(into, pen as usize, paid, || {
            let visits = order.iter().zip(&starts).map(|(&service, &start)| Visit { service, start }).collect();
            vec![Route { caregiver, day, visits }]
        });
    }
}

fn route_table(
    instance: &Instance,
    caregiver: CaregiverIdx,
    day: Day,
    services: &[ServiceIdx],
    step: Minutes,
) -> PenTable<Vec<Route>> {
    let mut table = Vec::new();
    if services.is_empty() {
        set_min(&mut table, 0, 0, || vec![Route::new(caregiver, day)]);
        return table;
    }
    // Heap's algorithm over visit orders.
    let mut order = services.to_vec();
    let n = order.len();
    let mut c = vec![0; n];
    order_table(instance, caregiver, day, &order, step, &mut table);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            order_table(instance, caregiver, day, &order, step, &mut table);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    debug_assert!(table.iter().flatten().all(|(_, r)| compute_day_metrics(&r[0], instance).paid >= 0));
    table
}

/// Exact backend for small instances on a time grid: per assignment, a table
/// of least cost for every total penalization, then a scan for the
/// constrained lexicographic optimum.
pub struct InternalBackend<'a> {
    instance: &'a Instance,
    weights: ObjectiveWeights,
    /// Per assignment: total affinity and least cost by total penalization.
    tables: Vec<(i64, PenTable<Vec<Route>>)>,
}

impl<'a> InternalBackend<'a> {
    pub fn new(instance: &'a Instance, step: Minutes) -> Result<Self> {
        Self::with_limits(instance, step, EnumerationLimits::default())
    }

    pub fn with_limits(instance: &'a Instance, step: Minutes, limits: EnumerationLimits) -> Result<Self> {
        check_limits(instance, limits)?;
        let step = step.max(1);
        let weights = ObjectiveWeights::for_instance(instance);
        let n = instance.n_services();
        let options: Vec<Vec<CaregiverIdx>> =
            instance.service_indices().map(|j| instance.candidates(j).collect()).collect();
        if let Some(j) = options.iter().position(Vec::is_empty) {
            return Err(Error::Unplaceable(ServiceIdx(j)));
        }
        let mut routes: HashMap<(usize, usize, u64), PenTable<Vec<Route>>> = HashMap::new();
        let mut tables = Vec::new();
        let total: usize = options.iter().map(Vec::len).product();
        for code in 0..total {
            let mut rest = code;
            let assigned: Vec<CaregiverIdx> = options
                .iter()
                .map(|o| {
                    let c = o[rest % o.len()];
                    rest /= o.len();
                    c
                })
                .collect();
            let affinity: i64 =
                (0..n).map(|j| i64::from(instance.caregiver(assigned[j]).affinity(ServiceIdx(j)))).sum();
            let mut acc: PenTable<Vec<Route>> = vec![Some((0, Vec::new()))];
            for i in instance.caregiver_indices() {
                let mut week: PenTable<Vec<Route>> = vec![Some((0, Vec::new()))];
                for d in 0..DAYS {
                    let day = Day::from_index(d);
                    let mask = (0..n)
                        .filter(|&j| assigned[j] == i && instance.services[j].day == day)
                        .fold(0u64, |m, j| m | 1 << j);
                    let table = routes.entry((i.0, d, mask)).or_insert_with(|| {
                        let services: Vec<ServiceIdx> = (0..n).filter(|j| mask >> j & 1 == 1).map(ServiceIdx).collect();
                        route_table(instance, i, day, &services, step)
                    });
                    week = convolve(&week, table);
                }
                let agreed = instance.caregiver(i).weekly_agreed;
                let costed: PenTable<Vec<Route>> =
                    week.into_iter().map(|e| e.map(|(w, r)| (caregiver_cost(&weights, w, agreed), r))).collect();
                acc = convolve(&acc, &costed);
            }
            if acc.iter().any(Option::is_some) {
                tables.push((affinity, acc));
            }
        }
        Ok(Self { instance, weights, tables })
    }
}

impl ExactBackend for InternalBackend<'_> {
    fn name(&self) -> &str {
        "internal"
    }

    fn solve(&mut self, objective: LexObjective, welfare_bound: Option<i64>) -> Result<Option<ExactPoint>> {
        let mut best: Option<((i64, i64), Objectives, &Vec<Route>)> = None;
        for (affinity, table) in &self.tables {
            for (pen, entry) in table.iter().enumerate() {
                let Some((cost, routes)) = entry else { continue };
                let o =
                    Objectives::new(*cost, self.weights.affinity * affinity + self.weights.penalization * pen as i64);
                if welfare_bound.is_some_and(|b| o.welfare > b) {
                    continue;
                }
                let key = objective.key(o);
                if best.as_ref().is_none_or(|b| key < b.0) {
                    best = Some((key, o, routes));
                }
            }
        }
        Ok(best.map(|(_, objectives, routes)| ExactPoint {
            objectives,
            solution: Some(Solution::from_routes(self.instance, routes.iter().cloned()).expect("consistent routes")),
        }))
    }
}
