//! Action admissibility from harm bounds.
//!
//! A guardrail computes a harm statistic for a candidate arm and rejects it
//! when the statistic is strictly greater than the threshold `C`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bandit::BanditInstance;
use crate::bounds::{
    cautious_set_bound, iid_cautious_bound, posterior_predictive, BoundKind, BoundResult,
    HarmProfile, Witness,
};
use crate::error::{Error, Result};
use crate::posterior::{CautiousSet, Posterior};
use crate::theory::TheoryIndex;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GuardrailKind {
    /// Rejects if any maximizer of `post(v) * harm(v)` has harm above `C`.
    IidCautious,
    /// Rejects if the max harm over `I^alpha` is above `C`.
    CautiousSet { alpha: f64 },
    /// Rejects if the posterior predictive harm is above `C`.
    PosteriorPredictive,
    /// Rejects if the harm under the true `v*` is above `C`.
    Cheating,
}

impl GuardrailKind {
    pub fn name(&self) -> &'static str {
        match self {
            GuardrailKind::IidCautious => "iid-cautious",
            GuardrailKind::CautiousSet { .. } => "cautious-set",
            GuardrailKind::PosteriorPredictive => "posterior-predictive",
            GuardrailKind::Cheating => "cheating",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            GuardrailKind::CautiousSet { alpha } => Some(*alpha),
            _ => None,
        }
    }
}

impl fmt::Display for GuardrailKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.alpha() {
            Some(a) => write!(f, "{}(alpha={a})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardrailConfig {
    #[serde(flatten)]
    pub kind: GuardrailKind,
    /// Rejection threshold `C`.
    #[serde(rename = "C")]
    pub threshold: f64,
}

impl GuardrailConfig {
    pub fn new(kind: GuardrailKind, threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::InvalidParameter {
                name: "C",
                value: threshold,
                reason: "must lie in [0, 1]",
            });
        }
        if let Some(alpha) = kind.alpha() {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::InvalidParameter {
                    name: "alpha",
                    value: alpha,
                    reason: "must lie in (0, 1]",
                });
            }
        }
        Ok(Self { kind, threshold })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub admissible: bool,
    /// The bound compared against `C`.
    pub statistic: f64,
    pub witness: Option<TheoryIndex>,
}

impl Decision {
    fn from_bound(bound: BoundResult, threshold: f64) -> Self {
        Self {
            admissible: !(bound.value > threshold),
            statistic: bound.value,
            witness: bound.witness.first(),
        }
    }
}

/// Posterior-dependent pieces shared by every arm at one step.
struct StepContext<'a> {
    config: &'a GuardrailConfig,
    posterior: &'a Posterior,
    instance: &'a BanditInstance,
    harm_by_mean: Vec<f64>,
    cautious: Option<CautiousSet>,
}

impl<'a> StepContext<'a> {
    fn new(config: &'a GuardrailConfig, posterior: &'a Posterior, instance: &'a BanditInstance) -> Self {
        assert_eq!(
            posterior.len(),
            instance.n_theories(),
            "posterior is not over this instance's theories"
        );
        let cautious = config.kind.alpha().map(|a| posterior.cautious_set(a));
        Self {
            config,
            posterior,
            instance,
            harm_by_mean: instance.harm_by_mean(),
            cautious,
        }
    }

    fn bound(&self, arm: usize) -> BoundResult {
        let profile = || -> HarmProfile { self.instance.harm_profile_with(arm, &self.harm_by_mean) };
        match self.config.kind {
            GuardrailKind::IidCautious => iid_cautious_bound(self.posterior, &profile()),
            GuardrailKind::CautiousSet { .. } => {
                let set = self.cautious.as_ref().expect("computed for cautious-set");
                cautious_set_bound(set, &profile())
            }
            GuardrailKind::PosteriorPredictive => posterior_predictive(self.posterior, &profile()),
            GuardrailKind::Cheating => {
                let mean = self.instance.mean_reward(self.instance.v_star(), arm);
                BoundResult {
                    value: self.harm_by_mean[mean as usize],
                    witness: Witness::Index(self.instance.truth()),
                    kind: BoundKind::Cheating,
                }
            }
        }
    }
}

/// Decision for a single arm.
pub fn evaluate(
    config: &GuardrailConfig,
    posterior: &Posterior,
    instance: &BanditInstance,
    arm: usize,
) -> Decision {
    let ctx = StepContext::new(config, posterior, instance);
    Decision::from_bound(ctx.bound(arm), config.threshold)
}

/// Decisions for every arm, sharing per-step work.
pub fn evaluate_all(
    config: &GuardrailConfig,
    posterior: &Posterior,
    instance: &BanditInstance,
) -> Vec<Decision> {
    let ctx = StepContext::new(config, posterior, instance);
    (0..instance.n_arms())
        .map(|arm| Decision::from_bound(ctx.bound(arm), config.threshold))
        .collect()
}

pub fn admissible_mask(decisions: &[Decision]) -> Vec<bool> {
    decisions.iter().map(|d| d.admissible).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::cautious_bound;
    use crate::rng::seeded;
    use crate::theory::Prior;
    use proptest::prelude::*;
    use rand::Rng;

    fn instance() -> BanditInstance {
        BanditInstance::new(3, vec![0b001, 0b011, 0b111, 0b000], 0b101, 1.5).unwrap()
    }

    fn random_posterior(n: usize, seed: u64) -> Posterior {
        let mut rng = seeded(seed);
        let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(4)).collect();
        let s: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|x| x / s).collect();
        let fix = 1.0 - w.iter().sum::<f64>();
        let mut w = w;
        w[0] += fix;
        Posterior::from_prior(&Prior::new(w).unwrap())
    }

    #[test]
    fn config_validation() {
        assert!(GuardrailConfig::new(GuardrailKind::Cheating, 1.5).is_err());
        assert!(GuardrailConfig::new(GuardrailKind::CautiousSet { alpha: 0.0 }, 0.1).is_err());
        assert!(GuardrailConfig::new(GuardrailKind::CautiousSet { alpha: 1.0 }, 0.1).is_ok());
    }

    #[test]
    fn cheating_with_c_one_admits_everything() {
        let inst = instance();
        let post = Posterior::new(&inst.theories());
        let cfg = GuardrailConfig::new(GuardrailKind::Cheating, 1.0).unwrap();
        assert!(evaluate_all(&cfg, &post, &inst).iter().all(|d| d.admissible));
    }

    #[test]
    fn cheating_with_c_zero_rejects_everything() {
        let inst = instance();
        let post = Posterior::new(&inst.theories());
        let cfg = GuardrailConfig::new(GuardrailKind::Cheating, 0.0).unwrap();
        let ds = evaluate_all(&cfg, &post, &inst);
        assert!(ds.iter().all(|d| !d.admissible));
        for (arm, d) in ds.iter().enumerate() {
            assert_eq!(d.statistic, inst.true_harm(arm));
            assert_eq!(d.witness, Some(inst.truth()));
        }
    }

    #[test]
    fn cautious_alpha_one_thresholds_map_theory() {
        let inst = instance();
        for seed in 0..20 {
            let post = random_posterior(inst.n_theories(), seed);
            let cfg = GuardrailConfig::new(GuardrailKind::CautiousSet { alpha: 1.0 }, 0.2).unwrap();
            for arm in 0..inst.n_arms() {
                let d = evaluate(&cfg, &post, &inst, arm);
                let b = cautious_bound(&post, &inst.harm_profile(arm), 1.0);
                assert_eq!(d.statistic, b.value);
                assert_eq!(d.statistic, inst.harm_prob(post.map_index().0 as u32, arm));
                assert_eq!(d.admissible, b.value <= 0.2);
            }
        }
    }

    #[test]
    fn iid_rejects_when_any_tied_maximizer_exceeds() {
        // uniform posterior: products tie across theories sharing the max harm
        let inst = instance();
        let post = Posterior::new(&inst.theories());
        let cfg = GuardrailConfig::new(GuardrailKind::IidCautious, 0.5).unwrap();
        let d = evaluate(&cfg, &post, &inst, 2);
        assert_eq!(d.statistic, inst.harm_prob(0b111, 2));
        assert!(!d.admissible);
    }

    #[test]
    fn evaluate_all_matches_single_arm() {
        let inst = instance();
        let post = random_posterior(inst.n_theories(), 99);
        for kind in [
            GuardrailKind::IidCautious,
            GuardrailKind::CautiousSet { alpha: 0.05 },
            GuardrailKind::PosteriorPredictive,
            GuardrailKind::Cheating,
        ] {
            let cfg = GuardrailConfig::new(kind, 0.1).unwrap();
            let all = evaluate_all(&cfg, &post, &inst);
            for (arm, d) in all.iter().enumerate() {
                assert_eq!(*d, evaluate(&cfg, &post, &inst, arm));
            }
        }
    }

    #[test]
    fn serde_shape() {
        let cfg = GuardrailConfig::new(GuardrailKind::CautiousSet { alpha: 0.1 }, 0.033).unwrap();
        let s = serde_json::to_string(&cfg).unwrap();
        assert_eq!(s, r#"{"kind":"cautious-set","alpha":0.1,"C":0.033}"#);
        let back: GuardrailConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cfg);
    }

    proptest! {
        #[test]
        fn admissibility_monotone_in_c(seed in 0u64..1000, c1 in 0.0f64..=1.0, c2 in 0.0f64..=1.0, arm in 0usize..4) {
            let inst = instance();
            let post = random_posterior(inst.n_theories(), seed);
            let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
            for kind in [GuardrailKind::IidCautious, GuardrailKind::CautiousSet { alpha: 0.1 }, GuardrailKind::PosteriorPredictive, GuardrailKind::Cheating] {
                let at_lo = evaluate(&GuardrailConfig::new(kind, lo).unwrap(), &post, &inst, arm);
                let at_hi = evaluate(&GuardrailConfig::new(kind, hi).unwrap(), &post, &inst, arm);
                prop_assert!(!at_lo.admissible || at_hi.admissible);
            }
        }

        #[test]
        fn rejection_monotone_in_alpha(seed in 0u64..1000, a1 in 0.001f64..=1.0, a2 in 0.001f64..=1.0, c in 0.0f64..=1.0, arm in 0usize..4) {
            let inst = instance();
            let post = random_posterior(inst.n_theories(), seed);
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let at_lo = evaluate(&GuardrailConfig::new(GuardrailKind::CautiousSet { alpha: lo }, c).unwrap(), &post, &inst, arm);
            let at_hi = evaluate(&GuardrailConfig::new(GuardrailKind::CautiousSet { alpha: hi }, c).unwrap(), &post, &inst, arm);
            prop_assert!(at_hi.admissible || !at_lo.admissible);
            prop_assert!(at_lo.statistic >= at_hi.statistic);
        }

        #[test]
        fn decision_matches_statistic(seed in 0u64..1000, c in 0.0f64..=1.0, arm in 0usize..4) {
            let inst = instance();
            let post = random_posterior(inst.n_theories(), seed);
            let d = evaluate(&GuardrailConfig::new(GuardrailKind::PosteriorPredictive, c).unwrap(), &post, &inst, arm);
            prop_assert_eq!(d.admissible, d.statistic <= c);
        }
    }
}
