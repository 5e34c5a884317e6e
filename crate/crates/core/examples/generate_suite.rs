//! Builds the two benchmark suites (ten instances each of 10 and 15
//! services) and saves them as JSON.
//!
//! cargo run --example generate_suite -- [OUT_DIR]

use std::path::PathBuf;

use hcsp::generator::{generate_suite, GeneratorProfile};
use hcsp::{load_instance, save_instance};

fn main() -> hcsp::Result<()> {
    let out =
        std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("hcsp-examples/suite"));
    for (n, profile) in [(10, GeneratorProfile::solomon_10()), (15, GeneratorProfile::solomon_15())] {
        let dir = out.join(&profile.name);
        std::fs::create_dir_all(&dir).map_err(|e| hcsp::Error::Parse(e.to_string()))?;
        for (k, inst) in generate_suite(n, 3, 10, 1, &profile).into_iter().enumerate() {
            let path = dir.join(format!("{}-{:02}.json", profile.name, k + 1));
            save_instance(&inst, &path)?;
            // Files round-trip exactly.
            assert_eq!(load_instance(&path)?, inst);
            let minutes: i64 = inst.services.iter().map(|s| s.duration).sum();
            println!(
                "{}: {} services, {} caregivers, {minutes} service minutes",
                path.display(),
                inst.n_services(),
                inst.n_caregivers()
            );
        }
    }
    Ok(())
}
