//! Reduced reward/deaths sweep. Pass an output directory to keep the CSV.

use cautious::harness::{run_reward_deaths, Experiment, ExperimentConfig, GuardrailName};

fn main() -> cautious::Result<()> {
    let cfg = ExperimentConfig {
        experiment: Experiment::RewardDeaths,
        episodes: 200,
        alpha_list: vec![0.01, 0.5],
        guardrails: vec![GuardrailName::CautiousSet, GuardrailName::PosteriorPredictive, GuardrailName::Cheating],
        threshold_samples: 20_000,
        ..Default::default()
    };
    let report = run_reward_deaths(&cfg)?;
    println!("E = {:.4}", report.explosion_threshold);
    println!("{:<22}{:>7}{:>8}{:>10}{:>9}", "guardrail", "C", "alpha", "reward", "deaths");
    for c in &report.cells {
        let alpha = c.alpha.map_or("-".to_string(), |a| a.to_string());
        println!("{:<22}{:>7}{:>8}{:>10.3}{:>9.3}", c.guardrail, c.c, alpha, c.mean_reward, c.death_rate);
    }
    if let Some(dir) = std::env::args().nth(1) {
        let (csv, json) = report.write(dir.as_ref())?;
        println!("wrote {} and {}", csv.display(), json.display());
    }
    Ok(())
}
