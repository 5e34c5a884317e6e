//! AUGMECON2 over the exhaustive backend, checked against plain enumeration
//! on a small instance with start times on a 15-minute grid.

use hcsp::exact::{augmecon2, brute_force_front, GridConfig, InternalBackend};
use hcsp::generator::{generate_instance, GeneratorProfile};

fn main() -> hcsp::Result<()> {
    let inst = generate_instance(5, 2, 0, &GeneratorProfile::tiny());
    let step = 15;

    for config in [GridConfig::full_resolution(), GridConfig { intervals: Some(4), ..GridConfig::default() }] {
        let mut backend = InternalBackend::new(&inst, step)?;
        let r = augmecon2(&mut backend, &inst, &config)?;
        println!("grid of {} intervals on welfare [{}, {}]:", r.intervals, r.lb2, r.ub2);
        for s in &r.steps {
            println!("  i2 {:>4}  e2 {:>10.1}  {:<10} bypass {}", s.i2, s.e2, s.status, s.bypass);
        }
        println!("  front: {:?}", r.archive.front().iter().map(ToString::to_string).collect::<Vec<_>>());
    }

    let oracle = brute_force_front(&inst, step)?;
    let full = augmecon2(&mut InternalBackend::new(&inst, step)?, &inst, &GridConfig::full_resolution())?;
    assert_eq!(full.archive.front(), oracle.front());
    println!("full grid equals enumeration: {} points", oracle.len());
    Ok(())
}
