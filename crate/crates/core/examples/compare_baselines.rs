//! Experiment driver: fit and compare against sparse and dense AR baselines.

use spars::experiment::{run_compare, ExperimentConfig};
use spars::generate::{generate, FixtureKind, FixtureParams};
use spars::io::write_series;

fn main() -> spars::Result<()> {
    let dir = std::env::temp_dir().join("spars_compare_example");
    std::fs::create_dir_all(&dir).map_err(|e| spars::Error::Io { path: dir.clone(), source: e })?;
    let input = dir.join("noisy.csv");
    let p = FixtureParams { noise: 0.1, ..Default::default() };
    write_series(&input, &generate(FixtureKind::NoisyPeriodic, &p)?)?;

    let cfg = ExperimentConfig {
        input: Some(input),
        out: dir.clone(),
        epochs: 150,
        ..Default::default()
    };
    let out = run_compare(&cfg)?;
    print!("{}", out.report.to_text());
    println!("report written to {}", out.report_path.display());
    Ok(())
}
