//! Solving the MILP with an external program.
//!
//! The program is called as `program [args..] MODEL.lp SOLUTION.txt` and must
//! write `status=<word>` followed by `name=value` lines. Any status other than
//! `optimal` or `feasible` with no values means no solution.

use std::path::{Path, PathBuf};
use std::process::Command;

use crate::alns::LexObjective;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::solution::{evaluate, ObjectiveWeights};

use super::augmecon::{ExactBackend, ExactPoint};
use super::milp::{build_milp, MilpModel, Objective, Sense};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOutput {
    pub status: String,
    pub values: Option<Vec<f64>>,
}

/// Parses a solution file against the variables of `model`.
pub fn parse_solution(text: &str, model: &MilpModel) -> Result<SolverOutput> {
    let mut status = String::from("unknown");
    let mut values = vec![0.0; model.vars.len()];
    let mut any = false;
    let names: std::collections::HashMap<&str, usize> =
        model.vars.iter().enumerate().map(|(k, v)| (v.name.as_str(), k)).collect();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .or_else(|| line.split_once(char::is_whitespace))
            .ok_or_else(|| Error::Parse(format!("solution line {}: {line:?}", n + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "status" {
            status = value.to_lowercase();
            continue;
        }
        let Some(&k) = names.get(key) else {
            return Err(Error::Parse(format!("solution line {}: unknown variable {key}", n + 1)));
        };
        values[k] = value.parse().map_err(|_| Error::Parse(format!("solution line {}: bad value {value:?}", n + 1)))?;
        any = true;
    }
    let solved = any && matches!(status.as_str(), "optimal" | "feasible" | "unknown");
    Ok(SolverOutput { status, values: solved.then_some(values) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExternalSolver {
    pub program: String,
    pub args: Vec<String>,
    /// Model and solution files go here; a temporary directory otherwise.
    pub work_dir: Option<PathBuf>,
}

impl ExternalSolver {
    /// The bundled HiGHS helper, `scripts/lp_solve_scipy.py`. `HCSP_LP_SCRIPT`
    /// overrides the script location.
    pub fn scipy() -> Self {
        let script = std::env::var("HCSP_LP_SCRIPT")
            .unwrap_or_else(|_| concat!(env!("CARGO_MANIFEST_DIR"), "/../../scripts/lp_solve_scipy.py").to_string());
        Self { program: "python3".into(), args: vec![script], work_dir: None }
    }

    /// Parses `"program arg1 arg2"`.
    pub fn from_command_line(line: &str) -> Result<Self> {
        let mut parts = line.split_whitespace().map(String::from);
        let program = parts.next().ok_or_else(|| Error::Usage("empty solver command".into()))?;
        Ok(Self { program, args: parts.collect(), work_dir: None })
    }

    pub fn solve(&self, model: &MilpModel, tag: &str) -> Result<SolverOutput> {
        let dir = match &self.work_dir {
            Some(d) => {
                std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
                d.clone()
            }
            None => std::env::temp_dir().join(format!("hcsp-lp-{}", std::process::id())),
        };
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let lp = dir.join(format!("{tag}.lp"));
        let sol = dir.join(format!("{tag}.sol"));
        model.write_lp(&lp)?;
        let _ = std::fs::remove_file(&sol);
        let out = Command::new(&self.program)
            .args(&self.args)
            .arg(&lp)
            .arg(&sol)
            .output()
            .map_err(|e| Error::Solver(format!("cannot run {}: {e}", self.program)))?;
        if !out.status.success() {
            return Err(Error::Solver(format!(
                "{} exited with {}: {}",
                self.program,
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        let text = std::fs::read_to_string(&sol).map_err(|e| Error::io(&sol, e))?;
        parse_solution(&text, model)
    }

    /// True when the program runs and answers a trivial model.
    pub fn available(&self) -> bool {
        Command::new(&self.program).args(&self.args).arg("--check").output().is_ok_and(|o| o.status.success())
    }
}

/// Exact backend that hands every subproblem to an external solver.
pub struct ExternalBackend<'a> {
    instance: &'a Instance,
    model: MilpModel,
    solver: ExternalSolver,
    weights: ObjectiveWeights,
    calls: usize,
}

impl<'a> ExternalBackend<'a> {
    pub fn new(instance: &'a Instance, solver: ExternalSolver) -> Self {
        Self {
            model: build_milp(instance),
            weights: ObjectiveWeights::for_instance(instance),
            instance,
            solver,
            calls: 0,
        }
    }

    fn run(&mut self, model: &MilpModel) -> Result<Option<ExactPoint>> {
        self.calls += 1;
        let out = self.solver.solve(model, &format!("subproblem_{:05}", self.calls))?;
        let Some(values) = out.values else { return Ok(None) };
        let solution = model.decode(&values, self.instance)?;
        let objectives = evaluate(&solution, self.instance, &self.weights)?.objectives;
        Ok(Some(ExactPoint { objectives, solution: Some(solution) }))
    }
}

impl ExactBackend for ExternalBackend<'_> {
    fn name(&self) -> &str {
        "external"
    }

    fn solve(&mut self, objective: LexObjective, welfare_bound: Option<i64>) -> Result<Option<ExactPoint>> {
        let (first, second) = match objective {
            LexObjective::CostWelfare => (Objective::Cost, Objective::Welfare),
            LexObjective::WelfareCost => (Objective::Welfare, Objective::Cost),
        };
        let mut base = self.model.clone();
        if let Some(b) = welfare_bound {
            base = base.with_objective_bound(Objective::Welfare, Sense::Le, b as f64);
        }
        let Some(p) = self.run(&base.minimizing(first))? else { return Ok(None) };
        let value = match first {
            Objective::Cost => p.objectives.cost,
            Objective::Welfare => p.objectives.welfare,
        };
        let stage2 = base.with_objective_bound(first, Sense::Le, value as f64).minimizing(second);
        Ok(self.run(&stage2)?.or(Some(p)))
    }

    fn solve_epsilon(&mut self, e2: f64, eps: f64, r2: f64) -> Result<Option<ExactPoint>> {
        let model = self.model.with_epsilon_constraint(e2, eps, r2);
        self.run(&model)
    }
}

pub fn default_work_dir(base: &Path) -> PathBuf {
    base.join("lp")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate_instance, GeneratorProfile};

    #[test]
    fn parses_status_and_values() {
        let inst = generate_instance(1, 1, 1, &GeneratorProfile::tiny());
        let model = build_milp(&inst);
        let name = &model.vars[3].name;
        let out = parse_solution(&format!("status=optimal\n{name}=1\n"), &model).unwrap();
        assert_eq!(out.values.unwrap()[3], 1.0);
        let out = parse_solution("status=infeasible\n", &model).unwrap();
        assert_eq!(out.status, "infeasible");
        assert!(out.values.is_none());
        assert!(parse_solution("status=optimal\nnope=1\n", &model).is_err());
    }
}
