use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bandit::{DEFAULT_ARMS, DEFAULT_DIM, DEFAULT_HORIZON, DEFAULT_TEMPERATURE, DEFAULT_THRESHOLD_SAMPLES, MAX_DIM};
use crate::error::{Error, Result};
use crate::guardrails::{GuardrailConfig, GuardrailKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    RewardDeaths,
    Tightness,
    Validate,
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reward-deaths" => Ok(Self::RewardDeaths),
            "tightness" => Ok(Self::Tightness),
            "validate" => Ok(Self::Validate),
            other => Err(Error::Config(format!("unknown experiment {other:?}"))),
        }
    }
}

/// Guardrail family; cautious-set cells are expanded over `alpha_list`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardrailName {
    IidCautious,
    CautiousSet,
    PosteriorPredictive,
    Cheating,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    pub supermartingale_sequences: usize,
    pub supermartingale_horizon: usize,
    pub bandit_dim: usize,
    pub ville_sequences: usize,
    pub ville_horizon: usize,
    pub ville_deltas: Vec<f64>,
    pub convergence_runs: usize,
    pub convergence_horizon: usize,
    pub first_symbol_delta: f64,
    pub first_symbol_draws: usize,
    pub walk_p: f64,
    pub walk_sequences: usize,
    pub walk_length: usize,
    pub death_trials: usize,
    pub exactness_cases: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            supermartingale_sequences: 2000,
            supermartingale_horizon: 50,
            bandit_dim: 6,
            ville_sequences: 5000,
            ville_horizon: 200,
            ville_deltas: vec![0.05, 0.1, 0.2],
            convergence_runs: 500,
            convergence_horizon: 2000,
            first_symbol_delta: 0.2,
            first_symbol_draws: 10_000,
            walk_p: 0.7,
            walk_sequences: 200,
            walk_length: 10_000,
            death_trials: 10_000,
            exactness_cases: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub episodes: usize,
    pub n_arms: usize,
    pub d: usize,
    #[serde(rename = "C_list")]
    pub c_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    pub guardrails: Vec<GuardrailName>,
    pub master_seed: u64,
    pub threshold_samples: usize,
    pub output_path: PathBuf,
    pub temperature: f64,
    pub horizon: usize,
    /// Half-width of the true-harm bucket around 0.5 in the tightness summary.
    pub harm_bucket_width: f64,
    /// Re-estimate `E` per episode conditioned on that episode's features.
    pub condition_threshold_on_features: bool,
    pub validation: ValidationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::RewardDeaths,
            episodes: 1000,
            n_arms: DEFAULT_ARMS,
            d: DEFAULT_DIM,
            c_list: vec![0.01, 0.033, 0.1],
            alpha_list: vec![0.001, 0.01, 0.1, 0.5, 0.999],
            guardrails: vec![
                GuardrailName::IidCautious,
                GuardrailName::CautiousSet,
                GuardrailName::PosteriorPredictive,
                GuardrailName::Cheating,
            ],
            master_seed: 0,
            threshold_samples: DEFAULT_THRESHOLD_SAMPLES,
            output_path: PathBuf::from("results"),
            temperature: DEFAULT_TEMPERATURE,
            horizon: DEFAULT_HORIZON,
            harm_bucket_width: 0.05,
            condition_threshold_on_features: false,
            validation: ValidationConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn bad(msg: impl Into<String>) -> Error {
        Error::Config(msg.into())
    }

    /// Checks the fields the selected experiment reads.
    pub fn validate(&self) -> Result<()> {
        if self.n_arms == 0 {
            return Err(Self::bad("n_arms must be positive"));
        }
        if self.d == 0 || self.d > MAX_DIM {
            return Err(Self::bad(format!("d must lie in 1..={MAX_DIM}")));
        }
        if self.threshold_samples == 0 {
            return Err(Self::bad("threshold_samples must be positive"));
        }
        if !(self.temperature > 0.0) {
            return Err(Self::bad("temperature must be positive"));
        }
        if self.horizon == 0 {
            return Err(Self::bad("horizon must be positive"));
        }
        let alphas_ok = self.alpha_list.iter().all(|&a| a > 0.0 && a <= 1.0);
        match self.experiment {
            Experiment::RewardDeaths => {
                if self.guardrails.is_empty() || self.c_list.is_empty() {
                    return Err(Self::bad("reward-deaths needs guardrails and C_list"));
                }
                if self.guardrails.contains(&GuardrailName::CautiousSet) && self.alpha_list.is_empty() {
                    return Err(Self::bad("cautious-set guardrail needs alpha_list"));
                }
                if !self.c_list.iter().all(|c| (0.0..=1.0).contains(c)) {
                    return Err(Self::bad("C values must lie in [0, 1]"));
                }
                if !alphas_ok {
                    return Err(Self::bad("alpha values must lie in (0, 1]"));
                }
            }
            Experiment::Tightness => {
                if self.alpha_list.is_empty() || !alphas_ok {
                    return Err(Self::bad("tightness needs alpha values in (0, 1]"));
                }
                if !(self.harm_bucket_width >= 0.0) {
                    return Err(Self::bad("harm_bucket_width must be nonnegative"));
                }
            }
            Experiment::Validate => {
                let v = &self.validation;
                if v.ville_deltas.is_empty() || !v.ville_deltas.iter().all(|&d| d > 0.0 && d < 1.0) {
                    return Err(Self::bad("ville_deltas must be nonempty and in (0, 1)"));
                }
                if v.bandit_dim == 0 || v.bandit_dim > MAX_DIM {
                    return Err(Self::bad("bandit_dim out of range"));
                }
                if !(v.walk_p > 0.5 && v.walk_p < 1.0) {
                    return Err(Self::bad("walk_p must lie in (1/2, 1)"));
                }
                if !(v.first_symbol_delta > 0.0 && v.first_symbol_delta < 1.0) {
                    return Err(Self::bad("first_symbol_delta must lie in (0, 1)"));
                }
            }
        }
        Ok(())
    }

    /// Guardrail cells in output order: guardrail, then C, then alpha.
    pub fn cells(&self) -> Result<Vec<GuardrailConfig>> {
        let mut out = Vec::new();
        for name in &self.guardrails {
            for &c in &self.c_list {
                match name {
                    GuardrailName::CautiousSet => {
                        for &alpha in &self.alpha_list {
                            out.push(GuardrailConfig::new(GuardrailKind::CautiousSet { alpha }, c)?);
                        }
                    }
                    GuardrailName::IidCautious => out.push(GuardrailConfig::new(GuardrailKind::IidCautious, c)?),
                    GuardrailName::PosteriorPredictive => {
                        out.push(GuardrailConfig::new(GuardrailKind::PosteriorPredictive, c)?)
                    }
                    GuardrailName::Cheating => out.push(GuardrailConfig::new(GuardrailKind::Cheating, c)?),
                }
            }
        }
        Ok(out)
    }
}
