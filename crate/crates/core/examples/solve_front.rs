//! Runs the metaheuristic on a generated 10-service instance and writes the
//! front with one JSON file per solution.
//!
//! cargo run --release --example solve_front -- [OUT_DIR] [PRESET]

use std::path::PathBuf;

use hcsp::bench::{export_front, write_front_csv};
use hcsp::bialns::{bialns, BialnsConfig};
use hcsp::check_feasibility;
use hcsp::generator::{generate_instance, GeneratorProfile};

fn main() -> hcsp::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("hcsp-examples/solve"));
    let preset = args.next().unwrap_or_else(|| "quick".into());
    let config = BialnsConfig { seed: 42, ..BialnsConfig::preset(&preset).expect("known preset") };
    let inst = generate_instance(10, 3, 7, &GeneratorProfile::solomon_10());

    let result = bialns(&inst, &config)?;
    for line in &result.log {
        println!(
            "step {} {:<12} {:>7} iterations  archive {:>4}  routes {:>5}  {} ms",
            line.step, line.event, line.iterations, line.archive_size, line.route_set_size, line.elapsed_ms
        );
    }
    assert!(result.archive.iter().all(|e| check_feasibility(&e.payload, &inst).is_empty()));

    let mut files = Vec::new();
    let rows = export_front(&out, &inst, result.archive.iter().map(|e| (e.objectives, Some(&e.payload))), &mut files)?;
    write_front_csv(&out.join("front.csv"), &rows)?;
    println!(
        "{} points, from ({}, {}) to ({}, {}); written to {}",
        rows.len(),
        rows[0].f1,
        rows[0].f2,
        rows[rows.len() - 1].f1,
        rows[rows.len() - 1].f2,
        out.display()
    );
    Ok(())
}
