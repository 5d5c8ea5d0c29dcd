//! How often the cautious bound over-estimates the true harm under a uniform
//! policy, against the guaranteed `1 - alpha / p(v*)`.

use cautious::harness::{run_tightness, Experiment, ExperimentConfig};

fn main() -> cautious::Result<()> {
    let cfg = ExperimentConfig {
        experiment: Experiment::Tightness,
        episodes: 300,
        alpha_list: vec![2f64.powi(-13), 0.001, 0.01, 0.1, 0.5, 0.999],
        threshold_samples: 20_000,
        ..Default::default()
    };
    let report = run_tightness(&cfg)?;
    println!("p(v*) = {}", report.prior_truth);
    for a in &report.alphas {
        println!(
            "alpha {:<10.3e} overestimates {:.4}  guaranteed {:>10.4}  median estimate near harm 0.5: {}",
            a.alpha,
            a.overestimate_frequency,
            a.guaranteed_frequency,
            a.bucket.median_estimate.map_or("-".into(), |m| format!("{m:.3}"))
        );
    }
    Ok(())
}
