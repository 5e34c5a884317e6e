//! Writes the MILP of a small instance in LP format, checks a metaheuristic
//! solution against every row and, when scipy is installed, solves the
//! cost-first problem with HiGHS.
//!
//! cargo run --example emit_milp -- [OUT_DIR]

use std::path::PathBuf;

use hcsp::alns::LexObjective;
use hcsp::bialns::{bialns, BialnsConfig};
use hcsp::exact::{build_milp, expected_variable_count, lexicographic_solve, ExternalBackend, ExternalSolver};
use hcsp::generator::{generate_instance, GeneratorProfile};

fn main() -> hcsp::Result<()> {
    let out =
        std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("hcsp-examples/milp"));
    std::fs::create_dir_all(&out).map_err(|e| hcsp::Error::Parse(e.to_string()))?;
    let inst = generate_instance(3, 2, 5, &GeneratorProfile::tiny());
    let model = build_milp(&inst);
    assert_eq!(model.vars.len(), expected_variable_count(inst.n_services(), inst.n_caregivers()));
    let path = out.join("model.lp");
    model.write_lp(&path)?;
    println!("{}: {} variables, {} rows", path.display(), model.vars.len(), model.rows.len());

    let r = bialns(&inst, &BialnsConfig::quick())?;
    for e in r.archive.iter().take(3) {
        let x = model.encode(&e.payload, &inst);
        let violated = model.check(&x, 1e-6);
        let o = model.objectives(&x);
        println!("solution {}: model objectives {o}, {} violated rows", e.objectives, violated.len());
    }

    let solver = ExternalSolver::scipy();
    if solver.available() {
        let p = lexicographic_solve(&mut ExternalBackend::new(&inst, solver), LexObjective::CostWelfare)?;
        println!("HiGHS cost-first optimum: {}", p.objectives);
    } else {
        println!("scipy not found; skipping the solver run");
    }
    Ok(())
}
