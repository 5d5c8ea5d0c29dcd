//! Runs the statistical validation suite at reduced sample sizes.

use cautious::harness::{run_validation, Experiment, ExperimentConfig, ValidationConfig};

fn main() -> cautious::Result<()> {
    let cfg = ExperimentConfig {
        experiment: Experiment::Validate,
        validation: ValidationConfig {
            supermartingale_sequences: 500,
            ville_sequences: 1000,
            exactness_cases: 200,
            ..Default::default()
        },
        ..Default::default()
    };
    let report = run_validation(&cfg)?;
    for check in &report.checks {
        println!("{}", check.line());
    }
    println!("all passed: {}", report.passed);
    Ok(())
}
