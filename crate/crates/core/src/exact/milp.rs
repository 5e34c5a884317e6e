//! The mixed-integer model of the problem, its LP-format writer and a
//! checker that evaluates any assignment against every row.
//!
//! Index conventions follow the route model: position 0 is the start dummy,
//! services are `1..=n` and `n + 1` is the end dummy. Caregivers and days are
//! 1-based in variable names. On a day that is not the service's own day its
//! hard window is `[0, 0]`, and an unavailable caregiver day has availability
//! `[0, 0]`, which together make those assignments infeasible.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::instance::{CaregiverIdx, Day, Instance, Minutes, ServiceIdx, DAYS};
use crate::solution::{compute_day_metrics, ObjectiveWeights, Objectives, Route, Solution, Visit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    /// Arc `j -> k` of caregiver `i` on day `d`.
    X(usize, usize, usize, usize),
    /// Start time of position `j`.
    T(usize, usize, usize),
    /// The gap `j -> k` is the day's designated break.
    Y(usize, usize, usize, usize),
    NoBreak(usize, usize),
    Unpaid(usize, usize),
    Break(usize, usize),
    UnpaidBreak(usize, usize),
    Overtime(usize),
    Early(usize),
    Late(usize),
    /// Slack of the epsilon constraint.
    Surplus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Var {
    pub key: VarKey,
    pub name: String,
    pub kind: VarKind,
}

/// `Σ coef · var + constant`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn add(&mut self, var: usize, coef: f64) -> &mut Self {
        self.terms.push((var, coef));
        self
    }

    /// Merges repeated variables and drops zero coefficients.
    fn normalized(mut self) -> Self {
        self.terms.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for (v, c) in self.terms {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += c,
                _ => out.push((v, c)),
            }
        }
        out.retain(|t| t.1 != 0.0);
        Self { terms: out, constant: self.constant }
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * values[v]).sum::<f64>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// Constraint families of the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    LeaveOnce,
    EnterOnce,
    Compatibility,
    StartDummy,
    EndDummy,
    Flow,
    HardStart,
    HardEnd,
    Travel,
    AvailabilityStart,
    AvailabilityEnd,
    FirstStartUpper,
    FirstStartLower,
    LastEnd,
    DailyMax,
    OvertimeLower,
    BreakLower,
    BreakUpper,
    NoBreak,
    OneBreak,
    BreakOnArc,
    UnpaidLower,
    UnpaidUpper,
    UnpaidBreakCap,
    UnpaidBreakAtMost,
    UnpaidBreakAtLeast,
    EarlyLower,
    LateLower,
    EpsilonConstraint,
    Bound,
}

impl Family {
    fn tag(self) -> &'static str {
        match self {
            Family::LeaveOnce => "leave_once",
            Family::EnterOnce => "enter_once",
            Family::Compatibility => "compat",
            Family::StartDummy => "start_dummy",
            Family::EndDummy => "end_dummy",
            Family::Flow => "flow",
            Family::HardStart => "hard_start",
            Family::HardEnd => "hard_end",
            Family::Travel => "travel",
            Family::AvailabilityStart => "avail_start",
            Family::AvailabilityEnd => "avail_end",
            Family::FirstStartUpper => "first_up",
            Family::FirstStartLower => "first_lo",
            Family::LastEnd => "last_end",
            Family::DailyMax => "daily_max",
            Family::OvertimeLower => "overtime",
            Family::BreakLower => "break_lo",
            Family::BreakUpper => "break_up",
            Family::NoBreak => "no_break",
            Family::OneBreak => "one_break",
            Family::BreakOnArc => "break_arc",
            Family::UnpaidLower => "unpaid_lo",
            Family::UnpaidUpper => "unpaid_up",
            Family::UnpaidBreakCap => "rhat_cap",
            Family::UnpaidBreakAtMost => "rhat_le_r",
            Family::UnpaidBreakAtLeast => "rhat_ge",
            Family::EarlyLower => "early",
            Family::LateLower => "late",
            Family::EpsilonConstraint => "eps",
            Family::Bound => "bound",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub family: Family,
    pub name: String,
    pub expr: LinExpr,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowViolation {
    pub name: String,
    pub family: Family,
    pub lhs: f64,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MilpModel {
    pub name: String,
    pub vars: Vec<Var>,
    index: HashMap<VarKey, usize>,
    pub rows: Vec<Row>,
    pub f1: LinExpr,
    pub f2: LinExpr,
    /// Objective written to LP files.
    pub objective: LinExpr,
    pub weights: ObjectiveWeights,
    /// Strictness constant of the unpaid-break upper row.
    pub break_epsilon: f64,
    n_services: usize,
    n_caregivers: usize,
}

/// `|N||D|((|S|+1)^2 - |S|)` arcs, `|N||D|(|S|+2)` times, `|N||D||S|(|S|-1)`
/// break indicators, four per caregiver day, plus overtime and the two
/// penalization variables per service.
pub fn expected_variable_count(n_services: usize, n_caregivers: usize) -> usize {
    let (s, nd) = (n_services, n_caregivers * DAYS);
    nd * ((s + 1) * (s + 1) - s) + nd * (s + 2) + nd * s * s.saturating_sub(1) + 4 * nd + n_caregivers + 2 * s
}

impl MilpModel {
    pub fn var(&self, key: VarKey) -> usize {
        self.index[&key]
    }

    pub fn try_var(&self, key: VarKey) -> Option<usize> {
        self.index.get(&key).copied()
    }

    pub fn n_services(&self) -> usize {
        self.n_services
    }

    fn push_var(&mut self, key: VarKey, kind: VarKind) {
        let name = match key {
            VarKey::X(i, d, j, k) => format!("x_{}_{}_{j}_{k}", i + 1, d + 1),
            VarKey::T(i, d, j) => format!("t_{}_{}_{j}", i + 1, d + 1),
            VarKey::Y(i, d, j, k) => format!("y_{}_{}_{j}_{k}", i + 1, d + 1),
            VarKey::NoBreak(i, d) => format!("ybar_{}_{}", i + 1, d + 1),
            VarKey::Unpaid(i, d) => format!("u_{}_{}", i + 1, d + 1),
            VarKey::Break(i, d) => format!("r_{}_{}", i + 1, d + 1),
            VarKey::UnpaidBreak(i, d) => format!("rhat_{}_{}", i + 1, d + 1),
            VarKey::Overtime(i) => format!("z_{}", i + 1),
            VarKey::Early(j) => format!("vs_{j}"),
            VarKey::Late(j) => format!("ve_{j}"),
            VarKey::Surplus => "s2".to_string(),
        };
        self.index.insert(key, self.vars.len());
        self.vars.push(Var { key, name, kind });
    }

    fn push_row(&mut self, family: Family, suffix: String, expr: LinExpr, sense: Sense, rhs: f64) {
        let expr = expr.normalized();
        let rhs = rhs - expr.constant;
        let expr = LinExpr { terms: expr.terms, constant: 0.0 };
        self.rows.push(Row { family, name: format!("{}{}", family.tag(), suffix), expr, sense, rhs });
    }

    /// Copy with `f2 + s2 = e2` and objective `f1 - (eps / r2) * s2`.
    pub fn with_epsilon_constraint(&self, e2: f64, eps: f64, r2: f64) -> Self {
        let mut m = self.clone();
        m.push_var(VarKey::Surplus, VarKind::Continuous);
        let s2 = m.var(VarKey::Surplus);
        let mut expr = m.f2.clone();
        expr.add(s2, 1.0);
        m.push_row(Family::EpsilonConstraint, String::new(), expr, Sense::Eq, e2);
        let mut obj = m.f1.clone();
        obj.add(s2, -eps / r2.max(1.0));
        m.objective = obj.normalized();
        m
    }

    /// Copy with an extra row on one of the objectives.
    pub fn with_objective_bound(&self, which: Objective, sense: Sense, rhs: f64) -> Self {
        let mut m = self.clone();
        let expr = match which {
            Objective::Cost => m.f1.clone(),
            Objective::Welfare => m.f2.clone(),
        };
        let n = m.rows.iter().filter(|r| r.family == Family::Bound).count();
        m.push_row(Family::Bound, format!("_{n}"), expr, sense, rhs);
        m
    }

    pub fn minimizing(&self, which: Objective) -> Self {
        let mut m = self.clone();
        m.objective = match which {
            Objective::Cost => m.f1.clone(),
            Objective::Welfare => m.f2.clone(),
        };
        m
    }

    /// CPLEX LP text with a fixed ordering of rows and variables.
    pub fn to_lp(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "\\ {} ({} variables, {} rows)", self.name, self.vars.len(), self.rows.len());
        s.push_str("Minimize\n obj:");
        self.write_terms(&mut s, &self.objective);
        if self.objective.terms.is_empty() {
            let _ = write!(s, " 0 {}", self.vars[0].name);
        }
        s.push_str("\nSubject To\n");
        for r in &self.rows {
            let _ = write!(s, " {}:", r.name);
            self.write_terms(&mut s, &r.expr);
            let _ = writeln!(s, " {} {}", r.sense.symbol(), num(r.rhs));
        }
        s.push_str("Bounds\n");
        for v in self.vars.iter().filter(|v| v.kind == VarKind::Continuous) {
            let _ = writeln!(s, " {} >= 0", v.name);
        }
        s.push_str("Binaries\n");
        for v in self.vars.iter().filter(|v| v.kind == VarKind::Binary) {
            let _ = writeln!(s, " {}", v.name);
        }
        s.push_str("End\n");
        s
    }

    fn write_terms(&self, s: &mut String, e: &LinExpr) {
        for (n, &(v, c)) in e.terms.iter().enumerate() {
            if n > 0 && n % 8 == 0 {
                s.push_str("\n  ");
            }
            let sign = if c < 0.0 { '-' } else { '+' };
            let _ = write!(s, " {sign} {} {}", num(c.abs()), self.vars[v].name);
        }
    }

    pub fn write_lp(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_lp()).map_err(|e| Error::io(path, e))
    }

    /// Rows not satisfied by `values` within `tol`, plus binaries off {0, 1}.
    pub fn check(&self, values: &[f64], tol: f64) -> Vec<RowViolation> {
        let mut out = Vec::new();
        for r in &self.rows {
            let lhs = r.expr.eval(values);
            let ok = match r.sense {
                Sense::Le => lhs <= r.rhs + tol,
                Sense::Ge => lhs >= r.rhs - tol,
                Sense::Eq => (lhs - r.rhs).abs() <= tol,
            };
            if !ok {
                out.push(RowViolation { name: r.name.clone(), family: r.family, lhs, sense: r.sense, rhs: r.rhs });
            }
        }
        for (k, v) in self.vars.iter().enumerate() {
            let x = values[k];
            let bad = x < -tol
                || (v.kind == VarKind::Binary && (x - x.round()).abs() > tol
                    || x > 1.0 + tol && v.kind == VarKind::Binary);
            if bad {
                out.push(RowViolation {
                    name: v.name.clone(),
                    family: Family::Bound,
                    lhs: x,
                    sense: Sense::Ge,
                    rhs: 0.0,
                });
            }
        }
        out
    }

    /// Values of both objectives, rounded to integers.
    pub fn objectives(&self, values: &[f64]) -> Objectives {
        Objectives::new(self.f1.eval(values).round() as i64, self.f2.eval(values).round() as i64)
    }

    /// Assignment that represents `solution`, with every auxiliary variable at
    /// its tightest value.
    pub fn encode(&self, solution: &Solution, instance: &Instance) -> Vec<f64> {
        let mut x = vec![0.0; self.vars.len()];
        let n = self.n_services;
        let end = n + 1;
        for i in 0..self.n_caregivers {
            let cg = &instance.caregivers[i];
            let mut weekly = 0;
            for d in 0..DAYS {
                let route = solution.route(CaregiverIdx(i), Day::from_index(d));
                let idle_start = cg.availability[d].map_or(0, |w| w.start);
                if route.is_empty() {
                    x[self.var(VarKey::X(i, d, 0, end))] = 1.0;
                    x[self.var(VarKey::T(i, d, 0))] = idle_start as f64;
                    x[self.var(VarKey::T(i, d, end))] = idle_start as f64;
                    x[self.var(VarKey::NoBreak(i, d))] = 1.0;
                    continue;
                }
                let pos: Vec<usize> = route.visits.iter().map(|v| v.service.0 + 1).collect();
                let mut prev = 0;
                for (&p, v) in pos.iter().zip(&route.visits) {
                    x[self.var(VarKey::X(i, d, prev, p))] = 1.0;
                    x[self.var(VarKey::T(i, d, p))] = v.start as f64;
                    prev = p;
                }
                x[self.var(VarKey::X(i, d, prev, end))] = 1.0;
                let m = compute_day_metrics(route, instance);
                x[self.var(VarKey::T(i, d, 0))] = route.day_start().unwrap_or(0) as f64;
                x[self.var(VarKey::T(i, d, end))] = route.day_end(instance).unwrap_or(0) as f64;
                match m.breaks.gap {
                    Some((a, b)) => x[self.var(VarKey::Y(i, d, pos[a], pos[b]))] = 1.0,
                    None => x[self.var(VarKey::NoBreak(i, d))] = 1.0,
                }
                x[self.var(VarKey::Break(i, d))] = m.breaks.largest as f64;
                if m.breaks.unpaid {
                    x[self.var(VarKey::Unpaid(i, d))] = 1.0;
                    x[self.var(VarKey::UnpaidBreak(i, d))] = m.breaks.largest as f64;
                }
                weekly += m.paid;
            }
            x[self.var(VarKey::Overtime(i))] = (weekly - cg.weekly_agreed).max(0) as f64;
        }
        for v in solution.routes().iter().flat_map(|r| &r.visits) {
            let s = instance.service(v.service);
            let j = v.service.0 + 1;
            x[self.var(VarKey::Early(j))] = (s.soft.start - v.start).max(0) as f64;
            x[self.var(VarKey::Late(j))] = (v.start + s.duration - s.soft.end).max(0) as f64;
        }
        x
    }

    /// Reads routes back from the arc and time variables.
    pub fn decode(&self, values: &[f64], instance: &Instance) -> Result<Solution> {
        let end = self.n_services + 1;
        let mut routes = Vec::new();
        for i in 0..self.n_caregivers {
            for d in 0..DAYS {
                let mut route = Route::new(CaregiverIdx(i), Day::from_index(d));
                let mut at = 0;
                for _ in 0..=self.n_services {
                    let next = (1..=end)
                        .filter(|&k| k != at)
                        .find(|&k| values[self.var(VarKey::X(i, d, at, k))] > 0.5)
                        .ok_or_else(|| {
                            Error::Solver(format!("route of caregiver {} day {} is broken", i + 1, d + 1))
                        })?;
                    if next == end {
                        break;
                    }
                    let start = values[self.var(VarKey::T(i, d, next))].round() as Minutes;
                    route.visits.push(Visit { service: ServiceIdx(next - 1), start });
                    at = next;
                }
                routes.push(route);
            }
        }
        Solution::from_routes(instance, routes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Cost,
    Welfare,
}

fn num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Builds the full model for `instance`.
pub fn build_milp(instance: &Instance) -> MilpModel {
    let weights = ObjectiveWeights::for_instance(instance);
    let (n, m) = (instance.n_services(), instance.n_caregivers());
    let end = n + 1;
    let mut model = MilpModel {
        name: instance.meta.name.clone(),
        vars: Vec::new(),
        index: HashMap::new(),
        rows: Vec::new(),
        f1: LinExpr::default(),
        f2: LinExpr::default(),
        objective: LinExpr::default(),
        weights,
        break_epsilon: 1.0,
        n_services: n,
        n_caregivers: m,
    };
    use VarKind::{Binary, Continuous};
    for i in 0..m {
        for d in 0..DAYS {
            for j in 0..=n {
                for k in 1..=end {
                    if j != k {
                        model.push_var(VarKey::X(i, d, j, k), Binary);
                    }
                }
            }
            for j in 0..=end {
                model.push_var(VarKey::T(i, d, j), Continuous);
            }
            for j in 1..=n {
                for k in 1..=n {
                    if j != k {
                        model.push_var(VarKey::Y(i, d, j, k), Binary);
                    }
                }
            }
            model.push_var(VarKey::NoBreak(i, d), Binary);
            model.push_var(VarKey::Unpaid(i, d), Binary);
            model.push_var(VarKey::Break(i, d), Continuous);
            model.push_var(VarKey::UnpaidBreak(i, d), Continuous);
        }
    }
    for i in 0..m {
        model.push_var(VarKey::Overtime(i), Continuous);
    }
    for j in 1..=n {
        model.push_var(VarKey::Early(j), Continuous);
        model.push_var(VarKey::Late(j), Continuous);
    }

    let svc = |j: usize| instance.service(ServiceIdx(j - 1));
    // Hard window of position j on day d.
    let hard = |j: usize, d: usize| -> (f64, f64) {
        let s = svc(j);
        if s.day.index() == d {
            (s.hard.start as f64, s.hard.end as f64)
        } else {
            (0.0, 0.0)
        }
    };
    let travel = |j: usize, k: usize| -> f64 {
        if k == end {
            0.0
        } else {
            instance.travel(ServiceIdx(j - 1), ServiceIdx(k - 1)) as f64
        }
    };
    let x = |mo: &MilpModel, i, d, j, k| mo.var(VarKey::X(i, d, j, k));
    let t = |mo: &MilpModel, i, d, j| mo.var(VarKey::T(i, d, j));
    let pi = instance.pi_min as f64;

    for j in 1..=n {
        let mut e = LinExpr::default();
        for i in 0..m {
            for d in 0..DAYS {
                for k in (1..=end).filter(|&k| k != j) {
                    e.add(x(&model, i, d, j, k), 1.0);
                }
            }
        }
        model.push_row(Family::LeaveOnce, format!("_{j}"), e, Sense::Eq, 1.0);
    }
    for k in 1..=n {
        let mut e = LinExpr::default();
        for i in 0..m {
            for d in 0..DAYS {
                for j in (0..=n).filter(|&j| j != k) {
                    e.add(x(&model, i, d, j, k), 1.0);
                }
            }
        }
        model.push_row(Family::EnterOnce, format!("_{k}"), e, Sense::Eq, 1.0);
    }
    for i in 0..m {
        for j in 1..=n {
            let mut e = LinExpr::default();
            for d in 0..DAYS {
                for k in (1..=end).filter(|&k| k != j) {
                    e.add(x(&model, i, d, j, k), 1.0);
                }
            }
            let rho = if instance.caregivers[i].serves(ServiceIdx(j - 1)) { 1.0 } else { 0.0 };
            model.push_row(Family::Compatibility, format!("_{}_{j}", i + 1), e, Sense::Le, rho);
        }
    }

    for i in 0..m {
        let cg = &instance.caregivers[i];
        let mut weekly = LinExpr::default();
        for d in 0..DAYS {
            let tag = format!("_{}_{}", i + 1, d + 1);
            let (g_lo, g_hi) = cg.availability[d].map_or((0.0, 0.0), |w| (w.start as f64, w.end as f64));
            let span = g_hi - g_lo;
            let (t0, ts) = (t(&model, i, d, 0), t(&model, i, d, end));
            let (r, rhat) = (model.var(VarKey::Break(i, d)), model.var(VarKey::UnpaidBreak(i, d)));
            let (u, ybar) = (model.var(VarKey::Unpaid(i, d)), model.var(VarKey::NoBreak(i, d)));

            let mut e = LinExpr::default();
            for k in 1..=end {
                e.add(x(&model, i, d, 0, k), 1.0);
            }
            model.push_row(Family::StartDummy, tag.clone(), e, Sense::Eq, 1.0);
            let mut e = LinExpr::default();
            for j in 0..=n {
                e.add(x(&model, i, d, j, end), 1.0);
            }
            model.push_row(Family::EndDummy, tag.clone(), e, Sense::Eq, 1.0);

            for h in 1..=n {
                let mut e = LinExpr::default();
                for j in (0..=n).filter(|&j| j != h) {
                    e.add(x(&model, i, d, j, h), 1.0);
                }
                for k in (1..=end).filter(|&k| k != h) {
                    e.add(x(&model, i, d, h, k), -1.0);
                }
                model.push_row(Family::Flow, format!("{tag}_{h}"), e, Sense::Eq, 0.0);
            }

            for j in 1..=n {
                let (a_lo, a_hi) = hard(j, d);
                let eta = svc(j).duration as f64;
                let mut lo = LinExpr::default();
                let mut hi = LinExpr::default();
                for k in (1..=end).filter(|&k| k != j) {
                    lo.add(x(&model, i, d, j, k), a_lo);
                    hi.add(x(&model, i, d, j, k), -(a_hi - eta));
                }
                lo.add(t(&model, i, d, j), -1.0);
                hi.add(t(&model, i, d, j), 1.0);
                model.push_row(Family::HardStart, format!("{tag}_{j}"), lo, Sense::Le, 0.0);
                model.push_row(Family::HardEnd, format!("{tag}_{j}"), hi, Sense::Le, 0.0);
            }

            for j in 1..=n {
                let (_, a_hi) = hard(j, d);
                let eta = svc(j).duration as f64;
                for k in (1..=end).filter(|&k| k != j) {
                    let mut e = LinExpr::default();
                    e.add(t(&model, i, d, j), 1.0)
                        .add(t(&model, i, d, k), -1.0)
                        .add(x(&model, i, d, j, k), eta + travel(j, k) + a_hi);
                    model.push_row(Family::Travel, format!("{tag}_{j}_{k}"), e, Sense::Le, a_hi);
                }
            }

            let mut e = LinExpr::default();
            e.add(t0, 1.0);
            model.push_row(Family::AvailabilityStart, tag.clone(), e, Sense::Ge, g_lo);
            let mut e = LinExpr::default();
            e.add(ts, 1.0);
            model.push_row(Family::AvailabilityEnd, tag.clone(), e, Sense::Le, g_hi);

            for k in 1..=end {
                let mut up = LinExpr::default();
                up.add(t0, 1.0).add(t(&model, i, d, k), -1.0).add(x(&model, i, d, 0, k), g_hi);
                model.push_row(Family::FirstStartUpper, format!("{tag}_{k}"), up, Sense::Le, g_hi);
                let mut lo = LinExpr::default();
                lo.add(t0, 1.0).add(t(&model, i, d, k), -1.0).add(x(&model, i, d, 0, k), -g_hi);
                model.push_row(Family::FirstStartLower, format!("{tag}_{k}"), lo, Sense::Ge, -g_hi);
            }
            for j in 1..=n {
                let eta = svc(j).duration as f64;
                let mut e = LinExpr::default();
                e.add(ts, 1.0).add(t(&model, i, d, j), -1.0).add(x(&model, i, d, j, end), g_hi);
                model.push_row(Family::LastEnd, format!("{tag}_{j}"), e, Sense::Le, eta + g_hi);
            }

            let mut paid = LinExpr::default();
            paid.add(ts, 1.0).add(t0, -1.0).add(rhat, -1.0);
            model.push_row(Family::DailyMax, tag.clone(), paid.clone(), Sense::Le, cg.daily_max[d] as f64);
            weekly.terms.extend(paid.terms.iter().copied());

            let mut one = LinExpr::default();
            for j in 1..=n {
                let eta = svc(j).duration as f64;
                for k in (1..=n).filter(|&k| k != j) {
                    let th = travel(j, k);
                    let (xv, yv) = (x(&model, i, d, j, k), model.var(VarKey::Y(i, d, j, k)));
                    // G alone is not big enough on days off, where it is 0.
                    let big = g_hi + eta + th;
                    let mut lo = LinExpr::default();
                    lo.add(r, 1.0).add(t(&model, i, d, k), -1.0).add(t(&model, i, d, j), 1.0).add(xv, -big);
                    model.push_row(Family::BreakLower, format!("{tag}_{j}_{k}"), lo, Sense::Ge, -big - eta - th);
                    let mut up = LinExpr::default();
                    up.add(r, 1.0).add(t(&model, i, d, k), -1.0).add(t(&model, i, d, j), 1.0).add(xv, big).add(yv, big);
                    model.push_row(Family::BreakUpper, format!("{tag}_{j}_{k}"), up, Sense::Le, 2.0 * big - eta - th);
                    let mut arc = LinExpr::default();
                    arc.add(yv, 1.0).add(xv, -1.0);
                    model.push_row(Family::BreakOnArc, format!("{tag}_{j}_{k}"), arc, Sense::Le, 0.0);
                    one.add(yv, 1.0);
                }
            }
            let mut e = LinExpr::default();
            e.add(r, 1.0).add(ybar, g_hi);
            model.push_row(Family::NoBreak, tag.clone(), e, Sense::Le, g_hi);
            one.add(ybar, 1.0);
            model.push_row(Family::OneBreak, tag.clone(), one, Sense::Eq, 1.0);

            let mut e = LinExpr::default();
            e.add(r, 1.0).add(u, -pi);
            model.push_row(Family::UnpaidLower, tag.clone(), e, Sense::Ge, 0.0);
            let mut e = LinExpr::default();
            e.add(r, 1.0).add(u, -span);
            model.push_row(Family::UnpaidUpper, tag.clone(), e, Sense::Le, pi - model.break_epsilon);
            let mut e = LinExpr::default();
            e.add(rhat, 1.0).add(u, -span);
            model.push_row(Family::UnpaidBreakCap, tag.clone(), e, Sense::Le, 0.0);
            let mut e = LinExpr::default();
            e.add(rhat, 1.0).add(r, -1.0);
            model.push_row(Family::UnpaidBreakAtMost, tag.clone(), e, Sense::Le, 0.0);
            let mut e = LinExpr::default();
            e.add(rhat, 1.0).add(r, -1.0).add(u, -span);
            model.push_row(Family::UnpaidBreakAtLeast, tag, e, Sense::Ge, -span);
        }
        let z = model.var(VarKey::Overtime(i));
        let mut e = LinExpr::default();
        e.add(z, 1.0);
        for &(v, c) in &weekly.terms {
            e.add(v, -c);
        }
        model.push_row(Family::OvertimeLower, format!("_{}", i + 1), e, Sense::Ge, -(cg.weekly_agreed as f64));
        model.f1.add(z, weights.overtime as f64);
        for &(v, c) in &weekly.terms {
            model.f1.add(v, c * weights.paid as f64);
        }
    }

    for j in 1..=n {
        let s = svc(j);
        let (b_lo, b_hi, eta) = (s.soft.start as f64, s.soft.end as f64, s.duration as f64);
        let (vs, ve) = (model.var(VarKey::Early(j)), model.var(VarKey::Late(j)));
        let mut early = LinExpr::default();
        let mut late = LinExpr::default();
        early.add(vs, 1.0);
        late.add(ve, 1.0);
        for i in 0..m {
            for d in 0..DAYS {
                for k in (1..=end).filter(|&k| k != j) {
                    early.add(x(&model, i, d, j, k), -b_lo);
                    late.add(x(&model, i, d, j, k), -(eta - b_hi));
                }
                early.add(t(&model, i, d, j), 1.0);
                late.add(t(&model, i, d, j), -1.0);
            }
        }
        model.push_row(Family::EarlyLower, format!("_{j}"), early, Sense::Ge, 0.0);
        model.push_row(Family::LateLower, format!("_{j}"), late, Sense::Ge, 0.0);
        model.f2.add(vs, weights.penalization as f64).add(ve, weights.penalization as f64);
        for i in 0..m {
            let lambda = instance.caregivers[i].affinity(ServiceIdx(j - 1)) as f64;
            for d in 0..DAYS {
                for k in (1..=end).filter(|&k| k != j) {
                    model.f2.add(x(&model, i, d, j, k), weights.affinity as f64 * lambda);
                }
            }
        }
    }
    model.f1 = std::mem::take(&mut model.f1).normalized();
    model.f2 = std::mem::take(&mut model.f2).normalized();
    model.objective = model.f1.clone();
    model
}
