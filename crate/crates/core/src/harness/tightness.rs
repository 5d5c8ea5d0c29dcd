//! How often, and how tightly, the cautious-set bound covers the true harm.
//!
//! The agent follows a uniform policy and explosions do not end episodes. At
//! every step the sampled action's true harm is compared with the cautious-set
//! estimate computed from the observations before that step.

use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::explosion_threshold;
use super::output::{version_string, write_csv, write_json};
use super::reward_deaths::episode_instance;
use crate::bandit::Episode;
use crate::bounds::cautious_set_bound;
use crate::error::Result;
use crate::rng::{derive_seed, seeded};
use crate::stats::median;

pub const CSV_HEADER: [&str; 7] = [
    "alpha",
    "episode",
    "t",
    "action",
    "estimate",
    "true_harm",
    "overestimated",
];

pub const CSV_FILE: &str = "tightness.csv";
pub const SUMMARY_FILE: &str = "tightness_summary.json";

/// Cell coordinate of the tightness policy/reward streams.
const TIGHTNESS_CELL: u64 = 0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessRecord {
    pub alpha: f64,
    pub episode: u64,
    pub t: usize,
    pub action: usize,
    pub estimate: f64,
    pub true_harm: f64,
    pub overestimated: bool,
}

/// Estimates for actions whose true harm lies within the bucket around 0.5.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketSummary {
    pub width: f64,
    pub count: usize,
    pub median_estimate: Option<f64>,
    pub mean_estimate: Option<f64>,
    pub fraction_underestimated: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaSummary {
    pub alpha: f64,
    pub samples: usize,
    pub overestimate_frequency: f64,
    /// `1 - alpha / prior(v*)`; may be negative.
    pub guaranteed_frequency: f64,
    pub bucket: BucketSummary,
}

impl AlphaSummary {
    pub fn from_records(alpha: f64, prior_truth: f64, width: f64, records: &[&TightnessRecord]) -> Self {
        let over = records.iter().filter(|r| r.overestimated).count();
        let bucket: Vec<f64> = records
            .iter()
            .filter(|r| (r.true_harm - 0.5).abs() <= width)
            .map(|r| r.estimate)
            .collect();
        let count = bucket.len();
        let mean = (count > 0).then(|| bucket.iter().sum::<f64>() / count as f64);
        let under = (count > 0).then(|| {
            records
                .iter()
                .filter(|r| (r.true_harm - 0.5).abs() <= width && !r.overestimated)
                .count() as f64
                / count as f64
        });
        Self {
            alpha,
            samples: records.len(),
            overestimate_frequency: if records.is_empty() {
                f64::NAN
            } else {
                over as f64 / records.len() as f64
            },
            guaranteed_frequency: 1.0 - alpha / prior_truth,
            bucket: BucketSummary {
                width,
                count,
                median_estimate: median(&bucket),
                mean_estimate: mean,
                fraction_underestimated: under,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TightnessReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub explosion_threshold: f64,
    pub prior_truth: f64,
    pub alphas: Vec<AlphaSummary>,
    #[serde(skip)]
    pub records: Vec<TightnessRecord>,
}

impl TightnessReport {
    pub fn alpha(&self, alpha: f64) -> Option<&AlphaSummary> {
        self.alphas.iter().find(|s| s.alpha == alpha)
    }

    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        let csv = dir.join(CSV_FILE);
        let json = dir.join(SUMMARY_FILE);
        write_csv(&csv, &CSV_HEADER, &self.records)?;
        write_json(&json, self)?;
        Ok((csv, json))
    }
}

fn tightness_episode(config: &ExperimentConfig, threshold: f64, episode: u64) -> Result<Vec<TightnessRecord>> {
    let instance = episode_instance(config, threshold, episode)?;
    let mut rng = seeded(derive_seed(config.master_seed, TIGHTNESS_CELL, episode));
    let mut ep = Episode::new(instance, config.horizon, false);
    let mut out = Vec::with_capacity(config.horizon * config.alpha_list.len());
    while !ep.is_over() {
        let t = ep.t();
        let arm = rng.random_range(0..ep.instance().n_arms());
        let true_harm = ep.instance().true_harm(arm);
        let profile = ep.instance().harm_profile(arm);
        let ranking = ep.posterior().ranking();
        for &alpha in &config.alpha_list {
            let estimate = cautious_set_bound(&ranking.cautious_set(alpha), &profile).value;
            out.push(TightnessRecord {
                alpha,
                episode,
                t,
                action: arm,
                estimate,
                true_harm,
                overestimated: estimate >= true_harm,
            });
        }
        ep.step(arm, &mut rng)?;
    }
    Ok(out)
}

pub fn run_tightness(config: &ExperimentConfig) -> Result<TightnessReport> {
    config.validate()?;
    let threshold = explosion_threshold(config);
    let per_episode = (0..config.episodes as u64)
        .into_par_iter()
        .map(|e| tightness_episode(config, threshold, e))
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<TightnessRecord> = per_episode.into_iter().flatten().collect();
    let prior_truth = 1.0 / (1u64 << config.d) as f64;
    let alphas = config
        .alpha_list
        .iter()
        .map(|&alpha| {
            let rows: Vec<&TightnessRecord> = records.iter().filter(|r| r.alpha == alpha).collect();
            AlphaSummary::from_records(alpha, prior_truth, config.harm_bucket_width, &rows)
        })
        .collect();
    Ok(TightnessReport {
        version: version_string(),
        config: config.clone(),
        explosion_threshold: threshold,
        prior_truth,
        alphas,
        records,
    })
}
