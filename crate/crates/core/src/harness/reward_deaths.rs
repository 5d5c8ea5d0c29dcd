//! Mean episode reward and death rate per guardrail cell.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::output::{version_string, write_csv, write_json};
use super::{explosion_threshold, INSTANCE_STREAM};
use crate::bandit::{boltzmann_policy, estimate_explosion_threshold_given, BanditInstance, Episode};
use crate::error::{Error, Result};
use crate::guardrails::{admissible_mask, evaluate_all, GuardrailConfig};
use crate::rng::{derive_seed, seeded};
use crate::stats::MeanEstimate;

pub const CSV_HEADER: [&str; 9] = [
    "guardrail",
    "C",
    "alpha",
    "episode",
    "steps",
    "total_reward",
    "died",
    "all_rejected",
    "seed",
];

pub const CSV_FILE: &str = "reward_deaths.csv";
pub const SUMMARY_FILE: &str = "reward_deaths_summary.json";

/// One row of the reward/deaths CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub guardrail: String,
    #[serde(rename = "C")]
    pub c: f64,
    pub alpha: Option<f64>,
    pub episode: u64,
    pub steps: usize,
    pub total_reward: f64,
    pub died: bool,
    pub all_rejected: bool,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub guardrail: String,
    #[serde(rename = "C")]
    pub c: f64,
    pub alpha: Option<f64>,
    pub episodes: usize,
    pub mean_reward: f64,
    pub reward_se: f64,
    pub death_rate: f64,
    pub death_se: f64,
    pub all_rejected_rate: f64,
    pub mean_steps: f64,
}

impl CellSummary {
    /// Aggregates one cell's records; summation follows record order.
    pub fn from_records(records: &[EpisodeRecord]) -> Option<Self> {
        let first = records.first()?;
        let reward = MeanEstimate::from_samples(records.iter().map(|r| r.total_reward));
        let death = MeanEstimate::from_samples(records.iter().map(|r| r.died as u8 as f64));
        let rejected = MeanEstimate::from_samples(records.iter().map(|r| r.all_rejected as u8 as f64));
        let steps = MeanEstimate::from_samples(records.iter().map(|r| r.steps as f64));
        Some(Self {
            guardrail: first.guardrail.clone(),
            c: first.c,
            alpha: first.alpha,
            episodes: records.len(),
            mean_reward: reward.mean,
            reward_se: reward.std_err,
            death_rate: death.mean,
            death_se: death.std_err,
            all_rejected_rate: rejected.mean,
            mean_steps: steps.mean,
        })
    }

    /// Groups records into consecutive cells and aggregates each.
    pub fn from_all(records: &[EpisodeRecord]) -> Vec<Self> {
        records
            .chunk_by(|a, b| a.guardrail == b.guardrail && a.c == b.c && a.alpha == b.alpha)
            .filter_map(Self::from_records)
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RewardDeathsReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub explosion_threshold: f64,
    pub cells: Vec<CellSummary>,
    #[serde(skip)]
    pub records: Vec<EpisodeRecord>,
}

impl RewardDeathsReport {
    pub fn cell(&self, guardrail: &str, c: f64, alpha: Option<f64>) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|s| s.guardrail == guardrail && s.c == c && s.alpha == alpha)
    }

    /// Writes the episode CSV and the JSON summary into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        let csv = dir.join(CSV_FILE);
        let json = dir.join(SUMMARY_FILE);
        write_csv(&csv, &CSV_HEADER, &self.records)?;
        write_json(&json, self)?;
        Ok((csv, json))
    }
}

/// Episode instance shared by every cell at the same episode index.
pub(crate) fn episode_instance(config: &ExperimentConfig, threshold: f64, episode: u64) -> Result<BanditInstance> {
    let mut rng = seeded(derive_seed(config.master_seed, INSTANCE_STREAM, episode));
    let inst = BanditInstance::sample(config.n_arms, config.d, threshold, &mut rng)?;
    if config.condition_threshold_on_features {
        let e = estimate_explosion_threshold_given(inst.features(), config.d, config.threshold_samples, &mut rng);
        return BanditInstance::new(config.d, inst.features().to_vec(), inst.v_star(), e);
    }
    Ok(inst)
}

/// Stable stream coordinate of a guardrail cell, independent of its position
/// in the sweep.
pub fn cell_id(guardrail: &GuardrailConfig) -> u64 {
    // FNV-1a over the name
    let name = guardrail
        .kind
        .name()
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    let alpha = guardrail.kind.alpha().map_or(0, f64::to_bits);
    derive_seed(name, guardrail.threshold.to_bits(), alpha)
}

/// Runs one guarded episode with the Boltzmann behavior policy.
pub fn run_episode(
    guardrail: &GuardrailConfig,
    instance: BanditInstance,
    horizon: usize,
    temperature: f64,
    seed: u64,
) -> Result<(usize, f64, bool, bool)> {
    let mut rng = seeded(seed);
    let mut ep = Episode::new(instance, horizon, true);
    let mut all_rejected = false;
    while !ep.is_over() {
        let decisions = evaluate_all(guardrail, ep.posterior(), ep.instance());
        let mask = admissible_mask(&decisions);
        let policy = match boltzmann_policy(ep.posterior(), ep.instance(), &mask, temperature) {
            Ok(p) => p,
            Err(Error::AllMasked) => {
                all_rejected = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let arm = policy.sample(&mut rng);
        ep.step(arm, &mut rng)?;
    }
    Ok((ep.t(), ep.total_reward(), !ep.alive(), all_rejected))
}

pub fn run_reward_deaths(config: &ExperimentConfig) -> Result<RewardDeathsReport> {
    config.validate()?;
    let cells = config.cells()?;
    let threshold = explosion_threshold(config);
    let ids: Vec<u64> = cells.iter().map(cell_id).collect();
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..config.episodes as u64).map(move |e| (c, e)))
        .collect();
    let records = jobs
        .into_par_iter()
        .map(|(cell, episode)| {
            let g = &cells[cell];
            let seed = derive_seed(config.master_seed, ids[cell], episode);
            let instance = episode_instance(config, threshold, episode)?;
            let (steps, total_reward, died, all_rejected) =
                run_episode(g, instance, config.horizon, config.temperature, seed)?;
            Ok(EpisodeRecord {
                guardrail: g.kind.name().to_string(),
                c: g.threshold,
                alpha: g.kind.alpha(),
                episode,
                steps,
                total_reward,
                died,
                all_rejected,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RewardDeathsReport {
        version: version_string(),
        config: config.clone(),
        explosion_threshold: threshold,
        cells: CellSummary::from_all(&records),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guardrails::GuardrailKind;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            episodes: 30,
            d: 6,
            threshold_samples: 5000,
            c_list: vec![0.05],
            alpha_list: vec![0.01],
            ..Default::default()
        }
    }

    #[test]
    fn record_invariants() {
        let report = run_reward_deaths(&small_config()).unwrap();
        assert_eq!(report.records.len(), 4 * 30);
        assert_eq!(report.cells.len(), 4);
        for r in &report.records {
            assert!(r.steps <= 25);
            assert!(!(r.died && r.all_rejected));
            if !r.died && !r.all_rejected {
                assert_eq!(r.steps, 25);
            }
        }
    }

    #[test]
    fn zero_episodes_is_empty() {
        let cfg = ExperimentConfig {
            episodes: 0,
            ..small_config()
        };
        let report = run_reward_deaths(&cfg).unwrap();
        assert!(report.records.is_empty());
        assert!(report.cells.is_empty());
    }

    #[test]
    fn cheating_below_min_harm_terminates_immediately() {
        let mut rng = seeded(4);
        let inst = BanditInstance::sample(10, 6, 2.0, &mut rng).unwrap();
        let min = (0..10).map(|a| inst.true_harm(a)).fold(f64::INFINITY, f64::min);
        let g = GuardrailConfig::new(GuardrailKind::Cheating, min * 0.5).unwrap();
        let (steps, reward, died, rejected) = run_episode(&g, inst, 25, 2.0, 1).unwrap();
        assert_eq!((steps, reward, died, rejected), (0, 0.0, false, true));
    }

    #[test]
    fn episode_records_are_order_independent() {
        let cfg = small_config();
        let report = run_reward_deaths(&cfg).unwrap();
        let cells = cfg.cells().unwrap();
        let threshold = explosion_threshold(&cfg);
        // recompute a few records out of order
        for &(cell, episode) in &[(3usize, 29u64), (0, 0), (2, 17)] {
            let seed = derive_seed(cfg.master_seed, cell_id(&cells[cell]), episode);
            let inst = episode_instance(&cfg, threshold, episode).unwrap();
            let (steps, total, died, _) = run_episode(&cells[cell], inst, 25, 2.0, seed).unwrap();
            let rec = &report.records[cell * 30 + episode as usize];
            assert_eq!((rec.steps, rec.total_reward, rec.died), (steps, total, died));
        }
    }
}
