//! Monte Carlo checks of the posterior guarantees.
//!
//! Each check simulates data from a known true theory, measures a frequency or
//! mean, and compares it with the guaranteed value using three standard errors
//! of slack where the comparison is statistical.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ValidationConfig};
use super::output::{version_string, write_json};
use crate::bandit::{boltzmann_policy, harm_probability, BanditInstance, Episode, DEFAULT_ARMS, DEFAULT_TEMPERATURE};
use crate::bounds::{iid_cautious_bound, HarmProfile};
use crate::error::Result;
use crate::oracles::{brute_force_posterior, first_symbol_posterior, walk_statistic};
use crate::posterior::{Posterior, TruthTracker};
use crate::rng::{derive_seed, seeded};
use crate::stats::{binomial_se, MeanEstimate};
use crate::theory::{BernoulliFamily, FirstSymbolFamily, Generative, TheoryIndex, TheorySpace};

pub const REPORT_FILE: &str = "validation.json";

/// Slack, in standard errors, on every Monte Carlo comparison.
pub const SE_SLACK: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Human-readable pass condition.
    pub criterion: String,
    pub observed: f64,
    pub bound: f64,
    pub std_err: Option<f64>,
    pub passed: bool,
    pub details: BTreeMap<String, f64>,
}

impl CheckResult {
    fn new(name: impl Into<String>, criterion: impl Into<String>, observed: f64, bound: f64, passed: bool) -> Self {
        Self {
            name: name.into(),
            criterion: criterion.into(),
            observed,
            bound,
            std_err: None,
            passed,
            details: BTreeMap::new(),
        }
    }

    fn with_se(mut self, se: f64) -> Self {
        self.std_err = Some(se);
        self
    }

    fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    /// One status line.
    pub fn line(&self) -> String {
        format!(
            "[{}] {}: observed {} vs {} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            fmt_value(self.observed),
            fmt_value(self.bound),
            self.criterion
        )
    }
}

fn fmt_value(v: f64) -> String {
    if v != 0.0 && v.is_finite() && (v.abs() < 1e-3 || v.abs() >= 1e6) {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(REPORT_FILE);
        write_json(&path, self)?;
        Ok(path)
    }
}

/// The three-theory coin family used by the Bernoulli checks.
pub fn coin_family() -> BernoulliFamily {
    BernoulliFamily::uniform(vec![0.3, 0.5, 0.7]).expect("valid family")
}

/// Worst per-step z-score of the mean increment `W_(t+1) - W_t`.
fn increment_check(name: &str, paths: &[Vec<f64>], horizon: usize) -> CheckResult {
    let mut worst = f64::NEG_INFINITY;
    let mut worst_t = 0;
    let mut worst_mean = 0.0;
    for t in 0..horizon {
        let est = MeanEstimate::from_samples(paths.iter().map(|w| w[t + 1] - w[t]));
        let z = if est.std_err > 0.0 {
            est.mean / est.std_err
        } else if est.mean > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if z > worst {
            worst = z;
            worst_t = t;
            worst_mean = est.mean;
        }
    }
    CheckResult::new(
        name,
        "mean(W_{t+1} - W_t) <= 3 SE at every t",
        worst,
        SE_SLACK,
        worst <= SE_SLACK,
    )
    .detail("sequences", paths.len() as f64)
    .detail("horizon", horizon as f64)
    .detail("worst_t", worst_t as f64)
    .detail("worst_mean_increment", worst_mean)
}

/// `W_t` stays a supermartingale for i.i.d. coin data from `tau_0.7`.
pub fn supermartingale_bernoulli(sequences: usize, horizon: usize, seed: u64) -> Result<CheckResult> {
    let fam = coin_family();
    let truth = TheoryIndex(2);
    let paths = (0..sequences as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded(derive_seed(seed, 1, s));
            let data = fam.sample_sequence(truth, horizon, &mut rng);
            let mut post = Posterior::new(&fam);
            let mut tracker = TruthTracker::new(truth, fam.prior())?;
            for t in 0..horizon {
                post.update(&fam, &data[..t], &data[t])?;
                tracker.record(&post);
            }
            Ok(tracker.w_history().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(increment_check("supermartingale/bernoulli", &paths, horizon))
}

/// `W_t` stays a supermartingale for on-policy bandit data (Boltzmann policy,
/// no guardrail, explosions ignored).
pub fn supermartingale_bandit(sequences: usize, horizon: usize, d: usize, seed: u64) -> Result<CheckResult> {
    let paths = (0..sequences as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded(derive_seed(seed, 2, s));
            let inst = BanditInstance::sample(DEFAULT_ARMS, d, f64::MAX, &mut rng)?;
            let truth = inst.truth();
            let mut ep = Episode::new(inst, horizon, false);
            let mut tracker = TruthTracker::new(truth, ep.theories().prior())?;
            let mask = vec![true; DEFAULT_ARMS];
            while !ep.is_over() {
                let policy = boltzmann_policy(ep.posterior(), ep.instance(), &mask, DEFAULT_TEMPERATURE)?;
                let arm = policy.sample(&mut rng);
                ep.step(arm, &mut rng)?;
                tracker.record(ep.posterior());
            }
            Ok(tracker.w_history().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(increment_check(&format!("supermartingale/bandit-d{d}"), &paths, horizon))
}

/// Per-sequence trajectory summaries shared by the Ville and dominance checks.
struct CoinPath {
    inf_truth_mass: f64,
    /// For each alpha: whether the truth stayed in `I^alpha` at every t.
    stayed_in_set: Vec<bool>,
}

fn coin_paths(sequences: usize, horizon: usize, alphas: &[f64], seed: u64) -> Result<(f64, Vec<CoinPath>)> {
    let fam = coin_family();
    let truth = TheoryIndex(1);
    let prior_truth = fam.prior().mass(truth);
    let paths = (0..sequences as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded(derive_seed(seed, 3, s));
            let data = fam.sample_sequence(truth, horizon, &mut rng);
            let mut post = Posterior::new(&fam);
            let mut tracker = TruthTracker::new(truth, fam.prior())?;
            let ranking = post.ranking();
            let mut stayed: Vec<bool> = alphas.iter().map(|&a| ranking.cautious_set(a).contains(truth)).collect();
            for t in 0..horizon {
                post.update(&fam, &data[..t], &data[t])?;
                tracker.record(&post);
                let ranking = post.ranking();
                for (ok, &a) in stayed.iter_mut().zip(alphas) {
                    *ok = *ok && ranking.cautious_set(a).contains(truth);
                }
            }
            Ok(CoinPath {
                inf_truth_mass: tracker.inf_truth_mass(),
                stayed_in_set: stayed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((prior_truth, paths))
}

/// Posterior on the truth dips below `delta * prior(truth)` with frequency at
/// most `delta`, and the truth stays in `I^alpha` for `alpha = delta * prior / 2`
/// with frequency at least `1 - delta`.
pub fn ville_and_dominance(
    deltas: &[f64],
    sequences: usize,
    horizon: usize,
    seed: u64,
) -> Result<Vec<CheckResult>> {
    let fam = coin_family();
    let prior_truth = fam.prior().mass(TheoryIndex(1));
    let alphas: Vec<f64> = deltas.iter().map(|d| 0.5 * d * prior_truth).collect();
    let (prior_truth, paths) = coin_paths(sequences, horizon, &alphas, seed)?;
    let m = paths.len() as f64;
    let mut out = Vec::new();
    for (k, &delta) in deltas.iter().enumerate() {
        let se = binomial_se(delta, paths.len());
        let violations = paths
            .iter()
            .filter(|p| p.inf_truth_mass < delta * prior_truth)
            .count() as f64
            / m;
        let bound = delta + SE_SLACK * se;
        out.push(
            CheckResult::new(
                format!("ville/delta={delta}"),
                "P(inf_t post(i*) < delta prior(i*)) <= delta + 3 SE",
                violations,
                bound,
                violations <= bound,
            )
            .with_se(se)
            .detail("sequences", m)
            .detail("horizon", horizon as f64),
        );
        let stayed = paths.iter().filter(|p| p.stayed_in_set[k]).count() as f64 / m;
        let floor = 1.0 - delta - SE_SLACK * se;
        out.push(
            CheckResult::new(
                format!("dominance/delta={delta}"),
                "P(i* in I^alpha for all t) >= 1 - delta - 3 SE, alpha = delta prior(i*) / 2",
                stayed,
                floor,
                stayed >= floor,
            )
            .with_se(se)
            .detail("alpha", alphas[k])
            .detail("sequences", m),
        );
    }
    Ok(out)
}

/// Posterior concentrates on the truth of a distinct-parameter coin family.
pub fn convergence(runs: usize, horizon: usize, seed: u64) -> Result<CheckResult> {
    let fam = coin_family();
    let truth = TheoryIndex(1);
    let outcomes = (0..runs as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded(derive_seed(seed, 4, s));
            let data = fam.sample_sequence(truth, horizon, &mut rng);
            let mut post = Posterior::new(&fam);
            let mut settled_at = 0;
            for t in 0..horizon {
                post.update(&fam, &data[..t], &data[t])?;
                if post.map_index() != truth {
                    settled_at = t + 1;
                }
            }
            Ok((post.mass(truth) > 0.99 && post.map_index() == truth, settled_at))
        })
        .collect::<Result<Vec<_>>>()?;
    let frac = outcomes.iter().filter(|o| o.0).count() as f64 / runs as f64;
    let mean_settle = outcomes.iter().map(|o| o.1 as f64).sum::<f64>() / runs as f64;
    Ok(CheckResult::new(
        "convergence",
        "post(i*) > 0.99 and MAP = i* at the horizon in >= 95% of runs",
        frac,
        0.95,
        frac >= 0.95,
    )
    .detail("runs", runs as f64)
    .detail("horizon", horizon as f64)
    .detail("mean_settling_time", mean_settle))
}

/// The i.i.d. cautious-theory bound covers the true harm after enough data.
pub fn iid_soundness(runs: usize, horizon: usize, seed: u64) -> Result<CheckResult> {
    let fam = BernoulliFamily::uniform(vec![0.2, 0.35, 0.5, 0.65, 0.8])?;
    let profile = HarmProfile::new(vec![0.9, 0.1, 0.4, 0.7, 0.2])?;
    let truth = TheoryIndex(2);
    let covered = (0..runs as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded(derive_seed(seed, 5, s));
            let data = fam.sample_sequence(truth, horizon, &mut rng);
            let mut post = Posterior::new(&fam);
            post.update_all(&fam, &data)?;
            Ok(iid_cautious_bound(&post, &profile).value >= profile.get(truth))
        })
        .collect::<Result<Vec<_>>>()?;
    let frac = covered.iter().filter(|&&c| c).count() as f64 / runs as f64;
    Ok(CheckResult::new(
        "iid-soundness",
        "iid cautious bound >= harm(i*) at the horizon in >= 95% of runs",
        frac,
        0.95,
        frac >= 0.95,
    )
    .detail("runs", runs as f64)
    .detail("horizon", horizon as f64))
}

/// Two-theory construction: posterior after a first 1 is exact and the
/// first-symbol frequency under the truth is `delta`.
pub fn first_symbol(delta: f64, draws: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let prior_truth = 0.5;
    let fam = FirstSymbolFamily::new(delta, prior_truth)?;
    let mut post = Posterior::new(&fam);
    post.update(&fam, &[], &true)?;
    let want = first_symbol_posterior(delta, prior_truth);
    let got = post.mass(FirstSymbolFamily::TRUTH);
    let err = (got - want).abs();
    // later symbols leave the posterior frozen
    let mut frozen = post.clone();
    let tail = [true, false, false, true, true];
    let mut hist = vec![true];
    for z in tail {
        frozen.update(&fam, &hist, &z)?;
        hist.push(z);
    }
    let drift = (frozen.mass(FirstSymbolFamily::TRUTH) - got).abs();
    let exact = CheckResult::new(
        "first-symbol/posterior",
        "|post(i* | Z1=1) - delta p / (delta p + 1 - p)| <= 1e-12",
        err.max(drift),
        1e-12,
        err <= 1e-12 && drift <= 1e-12,
    )
    .detail("posterior", got)
    .detail("closed_form", want);

    let mut rng = seeded(derive_seed(seed, 6, 0));
    let ones = (0..draws)
        .filter(|_| fam.sample_next(FirstSymbolFamily::TRUTH, &[], &mut rng))
        .count();
    let freq = ones as f64 / draws as f64;
    let se = binomial_se(delta, draws);
    let dev = (freq - delta).abs();
    let branch = CheckResult::new(
        "first-symbol/branch-frequency",
        "|freq(Z1 = 1) - delta| <= 3 SE",
        dev,
        SE_SLACK * se,
        dev <= SE_SLACK * se,
    )
    .with_se(se)
    .detail("frequency", freq)
    .detail("delta", delta);
    Ok(vec![exact, branch])
}

/// Fair-coin data against `{tau_p, tau_1/2 (prior 0), tau_(1-p)}`: the log
/// posterior ratio is a scaled random walk and keeps swinging between the
/// two wrong theories.
pub fn random_walk(p: f64, sequences: usize, length: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let fam = BernoulliFamily::non_convergent(p)?;
    let hi = TheoryIndex(0);
    let lo = TheoryIndex(2);
    let results = (0..sequences as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded(derive_seed(seed, 7, s));
            let data: Vec<bool> = (0..length).map(|_| rng.random::<bool>()).collect();
            let mut post = Posterior::new(&fam);
            let mut worst = 0.0f64;
            let (mut above, mut below) = (false, false);
            for t in 0..length {
                post.update(&fam, &data[..t], &data[t])?;
                let ratio = post.log_mass(hi) - post.log_mass(lo);
                let walk = walk_statistic(p, &data[..=t]);
                worst = worst.max((ratio - walk).abs());
                let m = post.mass(hi);
                above |= m > 0.99;
                below |= m < 0.01;
            }
            Ok((worst, above && below))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let frac = results.iter().filter(|r| r.1).count() as f64 / sequences as f64;
    Ok(vec![
        CheckResult::new(
            "non-convergence/log-ratio",
            "|log post ratio - log(p/(1-p)) sum(2Z-1)| <= 1e-9 at every t",
            worst,
            1e-9,
            worst <= 1e-9,
        ),
        CheckResult::new(
            "non-convergence/oscillation",
            ">= 90% of sequences see post(tau_p) both > 0.99 and < 0.01",
            frac,
            0.9,
            frac >= 0.9,
        )
        .detail("sequences", sequences as f64)
        .detail("length", length as f64),
    ])
}

/// Threshold at which a unit-variance reward with mean 0 explodes with
/// probability `harm`.
pub fn threshold_for_harm(harm: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if harm_probability(0.0, mid) > harm {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A 25-step episode with per-step harm 0.1 dies with probability `1 - 0.9^25`.
pub fn death_probability(trials: usize, seed: u64) -> Result<CheckResult> {
    let threshold = threshold_for_harm(0.1);
    let died = (0..trials as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded(derive_seed(seed, 8, s));
            let inst = BanditInstance::new(4, vec![0], 0b1111, threshold)?;
            let mut ep = Episode::new(inst, 25, true);
            while !ep.is_over() {
                ep.step(0, &mut rng)?;
            }
            Ok(!ep.alive())
        })
        .collect::<Result<Vec<_>>>()?;
    let freq = died.iter().filter(|&&d| d).count() as f64 / trials as f64;
    let exact = 1.0 - 0.9f64.powi(25);
    let dev = (freq - exact).abs();
    Ok(CheckResult::new(
        "death-probability",
        "|freq(death) - (1 - 0.9^25)| <= 0.02",
        dev,
        0.02,
        dev <= 0.02,
    )
    .detail("frequency", freq)
    .detail("exact", exact)
    .detail("trials", trials as f64))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Sequential log-space updates agree with one-shot products, and i.i.d.
/// posteriors do not depend on the data order.
pub fn posterior_exactness(cases: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let diffs = (0..cases as u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = seeded(derive_seed(seed, 9, c));
            let n = rng.random_range(2..=6);
            let params: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.95)).collect();
            let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
            let fix = 1.0 - w.iter().sum::<f64>();
            w[0] += fix;
            let fam = BernoulliFamily::new(params.clone(), w.clone())?;
            let len = rng.random_range(0..=100);
            let truth = TheoryIndex(rng.random_range(0..n));
            let mut data = fam.sample_sequence(truth, len, &mut rng);

            let mut seq = Posterior::new(&fam);
            seq.update_all(&fam, &data)?;
            let oracle = brute_force_posterior(
                &w,
                |i, _: &[bool], z: &bool| if *z { params[i] } else { 1.0 - params[i] },
                &data,
            )?;
            let batch = max_abs_diff(seq.masses(), &oracle);

            data.shuffle(&mut rng);
            let mut shuffled = Posterior::new(&fam);
            shuffled.update_all(&fam, &data)?;
            let order = max_abs_diff(seq.masses(), shuffled.masses());

            // non-i.i.d.: a small bandit family under a uniform policy
            let d = rng.random_range(1..=3);
            let inst = BanditInstance::sample(3, d, 1.0, &mut rng)?;
            let theories = inst.theories();
            let pulls: Vec<_> = (0..rng.random_range(0..=25))
                .map(|_| {
                    let arm = rng.random_range(0..3);
                    let noise: f64 = rng.sample(rand_distr::StandardNormal);
                    crate::bandit::Pull {
                        arm,
                        reward: inst.mean_reward(inst.v_star(), arm) + noise,
                    }
                })
                .collect();
            let mut seq_b = Posterior::new(&theories);
            seq_b.update_all(&theories, &pulls)?;
            let feats = inst.features().to_vec();
            let oracle_b = brute_force_posterior(
                theories.prior().masses(),
                |v, _: &[crate::bandit::Pull], p: &crate::bandit::Pull| {
                    let mean = (0..d).filter(|&k| (feats[p.arm] >> k) & 1 == 1 && (v >> k) & 1 == 1).count() as f64;
                    (-0.5 * (p.reward - mean).powi(2)).exp() / (2.0 * std::f64::consts::PI).sqrt()
                },
                &pulls,
            )?;
            let bandit = max_abs_diff(seq_b.masses(), &oracle_b);
            Ok((batch, order, bandit))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = |f: fn(&(f64, f64, f64)) -> f64| diffs.iter().map(f).fold(0.0, f64::max);
    let batch = worst(|d| d.0);
    let order = worst(|d| d.1);
    let bandit = worst(|d| d.2);
    Ok(vec![
        CheckResult::new(
            "exactness/sequential-vs-product",
            "max |sequential - one-shot product| <= 1e-9 (coin families)",
            batch,
            1e-9,
            batch <= 1e-9,
        )
        .detail("cases", cases as f64),
        CheckResult::new(
            "exactness/autoregressive",
            "max |sequential - autoregressive product| <= 1e-9 (bandit families)",
            bandit,
            1e-9,
            bandit <= 1e-9,
        )
        .detail("cases", cases as f64),
        CheckResult::new(
            "exactness/order-invariance",
            "max |post(D) - post(shuffled D)| <= 1e-9 (coin families)",
            order,
            1e-9,
            order <= 1e-9,
        )
        .detail("cases", cases as f64),
    ])
}

/// Runs every check with the configured sample sizes.
pub fn run_validation(config: &ExperimentConfig) -> Result<ValidationReport> {
    config.validate()?;
    let v: &ValidationConfig = &config.validation;
    let seed = config.master_seed;
    let mut checks = Vec::new();
    checks.extend(posterior_exactness(v.exactness_cases, seed)?);
    checks.push(supermartingale_bernoulli(v.supermartingale_sequences, v.supermartingale_horizon, seed)?);
    checks.push(supermartingale_bandit(
        v.supermartingale_sequences,
        v.supermartingale_horizon,
        v.bandit_dim,
        seed,
    )?);
    checks.extend(ville_and_dominance(&v.ville_deltas, v.ville_sequences, v.ville_horizon, seed)?);
    checks.push(convergence(v.convergence_runs, v.convergence_horizon, seed)?);
    checks.push(iid_soundness(v.convergence_runs, v.convergence_horizon, seed)?);
    checks.extend(first_symbol(v.first_symbol_delta, v.first_symbol_draws, seed)?);
    checks.extend(random_walk(v.walk_p, v.walk_sequences, v.walk_length, seed)?);
    checks.push(death_probability(v.death_trials, seed)?);
    Ok(ValidationReport {
        version: version_string(),
        config: config.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
