//! Benchmark every fixture with two configurations and print the fraction
//! solved against time. The `pdlp bench` subcommand writes the same data
//! as CSV.

use std::path::PathBuf;

use pdlp::cli::{bench_instance, survival_curve};
use pdlp::SolverConfig;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mps");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mps"))
        .collect();
    files.sort();

    let configs = [
        ("restarted", SolverConfig::default()),
        ("plain", SolverConfig::baseline()),
    ];
    for (label, cfg) in configs {
        let records: Vec<_> = files.iter().map(|f| bench_instance(f, &cfg)).collect();
        let iterations: u64 = records.iter().filter_map(|r| r.iterations).sum();
        println!("{label} [{}], {iterations} iterations in total", cfg.fingerprint());
        for point in survival_curve(&records, 1.0) {
            println!("  t <= {:>9.6}s  solved {:.3}", point.time_threshold, point.fraction_solved);
        }
    }
    Ok(())
}
