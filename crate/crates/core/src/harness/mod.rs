//! Experiment driver: reward/death sweeps, the tightness study and the
//! statistical validation suite, with CSV and JSON persistence.
//!
//! Every random stream is seeded from `(master_seed, cell, episode)` via
//! [`crate::rng::derive_seed`] and results are merged in `(cell, episode)`
//! order, so outputs are byte-identical across runs and thread counts.

mod config;
mod output;
pub mod reward_deaths;
pub mod tightness;
pub mod validation;

pub use config::{Experiment, ExperimentConfig, GuardrailName, ValidationConfig};
pub use output::{read_csv, version_string, write_csv, write_json};
pub use reward_deaths::{run_reward_deaths, CellSummary, EpisodeRecord, RewardDeathsReport};
pub use tightness::{run_tightness, AlphaSummary, BucketSummary, TightnessRecord, TightnessReport};
pub use validation::{run_validation, CheckResult, ValidationReport};

use crate::bandit::estimate_explosion_threshold;
use crate::rng::{derive_seed, seeded};

/// Stream coordinate reserved for the global explosion-threshold estimate.
pub(crate) const THRESHOLD_STREAM: u64 = u64::MAX;
/// Stream coordinate for per-episode bandit instances, shared by all cells.
pub(crate) const INSTANCE_STREAM: u64 = u64::MAX - 1;

/// The frozen explosion threshold `E` for a config.
pub fn explosion_threshold(config: &ExperimentConfig) -> f64 {
    let mut rng = seeded(derive_seed(config.master_seed, THRESHOLD_STREAM, 0));
    estimate_explosion_threshold(config.n_arms, config.d, config.threshold_samples, &mut rng)
}
