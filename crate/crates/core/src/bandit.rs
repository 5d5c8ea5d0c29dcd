//! The exploding bandit.
//!
//! Each arm `a` carries a feature bit-vector `f_a in {0,1}^d` and pays a reward
//! drawn from `N(f_a . v*, 1)`, where the hidden `v* in {0,1}^d` is unknown to
//! the agent. A reward above the explosion threshold `E` is harm and, unless
//! disabled, ends the episode. Every `v` indexes one theory (its integer
//! encoding is the [`TheoryIndex`]), so the agent's belief is an exact
//! posterior over `2^d` theories.
//!
//! Bit-vectors are stored as `u32` masks; `f_a . v` is `popcount(f_a & v)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bounds::HarmProfile;
use crate::error::{Error, Result};
use crate::posterior::Posterior;
use crate::theory::{Prior, TheoryIndex, TheorySpace};

pub const DEFAULT_ARMS: usize = 10;
pub const DEFAULT_DIM: usize = 10;
pub const DEFAULT_TEMPERATURE: f64 = 2.0;
pub const DEFAULT_HORIZON: usize = 25;
pub const DEFAULT_THRESHOLD_SAMPLES: usize = 100_000;

/// Largest supported `d`; the posterior holds `2^d` masses.
pub const MAX_DIM: usize = 20;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[inline]
pub fn dot(a: u32, b: u32) -> u32 {
    (a & b).count_ones()
}

fn bit_mask(d: usize) -> u32 {
    if d == 32 {
        u32::MAX
    } else {
        (1u32 << d) - 1
    }
}

fn check_dims(n_arms: usize, d: usize) -> Result<()> {
    if n_arms == 0 {
        return Err(Error::Config("need at least one arm".into()));
    }
    if d == 0 || d > MAX_DIM {
        return Err(Error::Config(format!("d must lie in 1..={MAX_DIM}, got {d}")));
    }
    Ok(())
}

/// `P(R > threshold)` for `R ~ N(mean, 1)`, i.e. `1 - Phi(threshold - mean)`.
pub fn harm_probability(mean: f64, threshold: f64) -> f64 {
    0.5 * libm::erfc((threshold - mean) / std::f64::consts::SQRT_2)
}

/// `log N(reward; mean, 1)`.
pub fn reward_log_likelihood(mean: f64, reward: f64) -> f64 {
    let z = reward - mean;
    -LN_SQRT_2PI - 0.5 * z * z
}

/// Monte Carlo estimate of `E[max_a f_a . v*]` over joint uniform draws of the
/// features and `v*`.
pub fn estimate_explosion_threshold<R: Rng + ?Sized>(
    n_arms: usize,
    d: usize,
    n_samples: usize,
    rng: &mut R,
) -> f64 {
    assert!(n_samples >= 1, "need at least one sample");
    let mask = bit_mask(d);
    let mut features = vec![0u32; n_arms];
    let mut total = 0u64;
    for _ in 0..n_samples {
        for f in features.iter_mut() {
            *f = rng.random::<u32>() & mask;
        }
        let v = rng.random::<u32>() & mask;
        total += features.iter().map(|&f| dot(f, v)).max().unwrap_or(0) as u64;
    }
    total as f64 / n_samples as f64
}

/// Like [`estimate_explosion_threshold`] but conditioned on fixed features.
pub fn estimate_explosion_threshold_given<R: Rng + ?Sized>(
    features: &[u32],
    d: usize,
    n_samples: usize,
    rng: &mut R,
) -> f64 {
    assert!(n_samples >= 1, "need at least one sample");
    let mask = bit_mask(d);
    let mut total = 0u64;
    for _ in 0..n_samples {
        let v = rng.random::<u32>() & mask;
        total += features.iter().map(|&f| dot(f, v)).max().unwrap_or(0) as u64;
    }
    total as f64 / n_samples as f64
}

/// One episode's arms, hidden reward vector and explosion threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct BanditInstance {
    d: usize,
    features: Vec<u32>,
    v_star: u32,
    threshold: f64,
}

impl BanditInstance {
    pub fn new(d: usize, features: Vec<u32>, v_star: u32, threshold: f64) -> Result<Self> {
        check_dims(features.len(), d)?;
        let mask = bit_mask(d);
        if features.iter().any(|&f| f & !mask != 0) || v_star & !mask != 0 {
            return Err(Error::Config(format!("bit-vector wider than d = {d}")));
        }
        if !threshold.is_finite() {
            return Err(Error::InvalidParameter {
                name: "explosion threshold",
                value: threshold,
                reason: "must be finite",
            });
        }
        Ok(Self {
            d,
            features,
            v_star,
            threshold,
        })
    }

    /// Uniform features and `v*`, as drawn at the start of each episode.
    pub fn sample<R: Rng + ?Sized>(n_arms: usize, d: usize, threshold: f64, rng: &mut R) -> Result<Self> {
        check_dims(n_arms, d)?;
        let mask = bit_mask(d);
        let features = (0..n_arms).map(|_| rng.random::<u32>() & mask).collect();
        let v_star = rng.random::<u32>() & mask;
        Self::new(d, features, v_star, threshold)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_arms(&self) -> usize {
        self.features.len()
    }

    pub fn n_theories(&self) -> usize {
        1 << self.d
    }

    pub fn features(&self) -> &[u32] {
        &self.features
    }

    pub fn v_star(&self) -> u32 {
        self.v_star
    }

    pub fn truth(&self) -> TheoryIndex {
        TheoryIndex(self.v_star as usize)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn mean_reward(&self, v: u32, arm: usize) -> f64 {
        dot(self.features[arm], v) as f64
    }

    pub fn harm_prob(&self, v: u32, arm: usize) -> f64 {
        harm_probability(self.mean_reward(v, arm), self.threshold)
    }

    /// Harm probability under the true `v*`.
    pub fn true_harm(&self, arm: usize) -> f64 {
        self.harm_prob(self.v_star, arm)
    }

    /// Harm probability indexed by mean reward `0..=d`.
    pub fn harm_by_mean(&self) -> Vec<f64> {
        (0..=self.d)
            .map(|k| harm_probability(k as f64, self.threshold))
            .collect()
    }

    /// Harm probability of `arm` under every theory.
    pub fn harm_profile(&self, arm: usize) -> HarmProfile {
        self.harm_profile_with(arm, &self.harm_by_mean())
    }

    pub(crate) fn harm_profile_with(&self, arm: usize, by_mean: &[f64]) -> HarmProfile {
        let f = self.features[arm];
        HarmProfile::new(
            (0..self.n_theories() as u32)
                .map(|v| by_mean[dot(f, v) as usize])
                .collect(),
        )
        .expect("normal tail probabilities lie in [0, 1]")
    }

    pub fn theories(&self) -> BanditTheories {
        BanditTheories {
            features: self.features.clone(),
            prior: Prior::uniform(self.n_theories()),
        }
    }
}

/// An action together with the reward it produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pull {
    pub arm: usize,
    pub reward: f64,
}

/// The family `{tau_v : v in {0,1}^d}` with a uniform prior.
///
/// Distinct `v` that agree on every `f_a . v` are duplicate theories; they are
/// kept as separate indices. The behavior policy is the same function of
/// history under every theory, so its factor cancels in the posterior and
/// only the reward density appears here.
#[derive(Clone, Debug)]
pub struct BanditTheories {
    features: Vec<u32>,
    prior: Prior,
}

impl BanditTheories {
    pub fn features(&self) -> &[u32] {
        &self.features
    }
}

impl TheorySpace for BanditTheories {
    type Observation = Pull;

    fn prior(&self) -> &Prior {
        &self.prior
    }

    fn log_likelihood(&self, index: TheoryIndex, _history: &[Pull], next: &Pull) -> f64 {
        let mean = dot(self.features[next.arm], index.0 as u32) as f64;
        reward_log_likelihood(mean, next.reward)
    }
}

/// Posterior mean reward of every arm.
pub fn expected_rewards(posterior: &Posterior, features: &[u32]) -> Vec<f64> {
    let mut q = vec![0.0; features.len()];
    for (v, &p) in posterior.masses().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (qa, &f) in q.iter_mut().zip(features) {
            *qa += p * dot(f, v as u32) as f64;
        }
    }
    q
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyDistribution {
    probs: Vec<f64>,
    temperature: f64,
    mask: Vec<bool>,
}

impl PolicyDistribution {
    /// Softmax of `values / temperature` restricted to admissible arms.
    pub fn softmax(values: &[f64], temperature: f64, mask: &[bool]) -> Result<Self> {
        assert_eq!(values.len(), mask.len());
        assert!(temperature > 0.0, "temperature must be positive");
        let max = values
            .iter()
            .zip(mask)
            .filter(|(_, &ok)| ok)
            .map(|(&q, _)| q)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::AllMasked);
        }
        let mut probs: Vec<f64> = values
            .iter()
            .zip(mask)
            .map(|(&q, &ok)| if ok { ((q - max) / temperature).exp() } else { 0.0 })
            .collect();
        let z: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= z);
        Ok(Self {
            probs,
            temperature,
            mask: mask.to_vec(),
        })
    }

    /// Uniform over admissible arms.
    pub fn uniform(mask: &[bool]) -> Result<Self> {
        Self::softmax(&vec![0.0; mask.len()], 1.0, mask)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (a, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last = a;
                if u < acc {
                    return a;
                }
            }
        }
        last
    }
}

/// Boltzmann policy over posterior expected rewards.
pub fn boltzmann_policy(
    posterior: &Posterior,
    instance: &BanditInstance,
    mask: &[bool],
    temperature: f64,
) -> Result<PolicyDistribution> {
    let q = expected_rewards(posterior, instance.features());
    PolicyDistribution::softmax(&q, temperature, mask)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub arm: usize,
    pub reward: f64,
    pub harmed: bool,
}

/// A running episode: instance, belief and trajectory.
#[derive(Clone, Debug)]
pub struct Episode {
    instance: BanditInstance,
    theories: BanditTheories,
    posterior: Posterior,
    history: Vec<Pull>,
    horizon: usize,
    explode: bool,
    alive: bool,
    total_reward: f64,
}

impl Episode {
    /// `explode = false` keeps the episode running after harm.
    pub fn new(instance: BanditInstance, horizon: usize, explode: bool) -> Self {
        let theories = instance.theories();
        let posterior = Posterior::new(&theories);
        Self {
            instance,
            theories,
            posterior,
            history: Vec::with_capacity(horizon),
            horizon,
            explode,
            alive: true,
            total_reward: 0.0,
        }
    }

    pub fn instance(&self) -> &BanditInstance {
        &self.instance
    }

    pub fn theories(&self) -> &BanditTheories {
        &self.theories
    }

    pub fn posterior(&self) -> &Posterior {
        &self.posterior
    }

    pub fn history(&self) -> &[Pull] {
        &self.history
    }

    pub fn t(&self) -> usize {
        self.history.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn alive(&self) -> bool {
        self.alive
    }

    pub fn total_reward(&self) -> f64 {
        self.total_reward
    }

    pub fn is_over(&self) -> bool {
        !self.alive || self.t() >= self.horizon
    }

    pub fn step<R: Rng + ?Sized>(&mut self, arm: usize, rng: &mut R) -> Result<StepOutcome> {
        if self.is_over() {
            return Err(Error::EpisodeOver {
                t: self.t(),
                alive: self.alive,
            });
        }
        assert!(arm < self.instance.n_arms(), "arm {arm} out of range");
        let noise: f64 = rng.sample(StandardNormal);
        let reward = self.instance.mean_reward(self.instance.v_star, arm) + noise;
        let harmed = reward > self.instance.threshold;
        let pull = Pull { arm, reward };
        self.posterior.update(&self.theories, &self.history, &pull)?;
        self.history.push(pull);
        self.total_reward += reward;
        if harmed && self.explode {
            self.alive = false;
        }
        Ok(StepOutcome { arm, reward, harmed })
    }
}
