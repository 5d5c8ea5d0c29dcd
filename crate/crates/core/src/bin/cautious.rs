use std::path::PathBuf;
use std::process::ExitCode;

use cautious::harness::{run_reward_deaths, run_tightness, run_validation, Experiment, ExperimentConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cautious", version, about = "Cautious-theory guardrail experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV/JSON outputs.
    Run {
        /// reward-deaths, tightness or validate
        experiment: Experiment,
        /// JSON file mirroring ExperimentConfig; omitted fields take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> cautious::Result<bool> {
    let Command::Run {
        experiment,
        config,
        seed,
        episodes,
        out,
    } = cli.command;
    let mut cfg = match config {
        Some(path) => ExperimentConfig::load(&path)?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment = experiment;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(n) = episodes {
        cfg.episodes = n;
    }
    if let Some(dir) = out {
        cfg.output_path = dir;
    }
    let dir = cfg.output_path.clone();
    match experiment {
        Experiment::RewardDeaths => {
            let report = run_reward_deaths(&cfg)?;
            let (csv, json) = report.write(&dir)?;
            for c in &report.cells {
                eprintln!(
                    "{:<22} C={:<6} alpha={:<8} reward {:>7.3} ± {:.3}  deaths {:.3} ± {:.3}",
                    c.guardrail,
                    c.c,
                    c.alpha.map(|a| a.to_string()).unwrap_or_else(|| "-".into()),
                    c.mean_reward,
                    c.reward_se,
                    c.death_rate,
                    c.death_se
                );
            }
            eprintln!("wrote {} and {}", csv.display(), json.display());
            Ok(true)
        }
        Experiment::Tightness => {
            let report = run_tightness(&cfg)?;
            let (csv, json) = report.write(&dir)?;
            for a in &report.alphas {
                eprintln!(
                    "alpha={:<10} overestimated {:.4} (guaranteed >= {:.4})",
                    a.alpha, a.overestimate_frequency, a.guaranteed_frequency
                );
            }
            eprintln!("wrote {} and {}", csv.display(), json.display());
            Ok(true)
        }
        Experiment::Validate => {
            let report = run_validation(&cfg)?;
            let path = report.write(&dir)?;
            for c in &report.checks {
                eprintln!("{}", c.line());
            }
            eprintln!("wrote {}", path.display());
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
