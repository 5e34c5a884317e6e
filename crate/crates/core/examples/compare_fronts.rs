//! Quality indicators of metaheuristic fronts against the exact front of a
//! small instance.

use hcsp::bialns::{bialns, BialnsConfig};
use hcsp::exact::{augmecon2, GridConfig, InternalBackend};
use hcsp::generator::{generate_instance, GeneratorProfile};
use hcsp::indicators::{compare_fronts, point, write_report_csv};

fn main() -> hcsp::Result<()> {
    let inst = generate_instance(4, 2, 119, &GeneratorProfile::tiny());
    let exact = augmecon2(&mut InternalBackend::new(&inst, 1)?, &inst, &GridConfig::full_resolution())?;
    let mut fronts = vec![("exact".to_string(), exact.archive.front().into_iter().map(point).collect())];
    // A starved run next to a normal one.
    for (label, config) in [
        ("bialns_tiny_budget", BialnsConfig { n: 5, nroutes: 0, nsols: 3, ..BialnsConfig::quick() }),
        ("bialns_quick", BialnsConfig::quick()),
    ] {
        let r = bialns(&inst, &config)?;
        fronts.push((label.to_string(), r.archive.front().into_iter().map(point).collect()));
    }
    let reports = compare_fronts(&fronts)?;
    write_report_csv(std::io::stdout(), &[("tiny-4x2".to_string(), reports)])?;
    Ok(())
}
