//! Harm-probability estimators computed from a posterior and a harm profile.
//!
//! A [`HarmProfile`] holds `P(H = 1 | context, theory i, history)` for every
//! index of the family under one fixed context. The estimators differ in how
//! they aggregate it:
//!
//! | estimator               | statistic                                           |
//! |-------------------------|-----------------------------------------------------|
//! | [`iid_cautious_bound`]  | `harm(i~)` for `i~` in `argmax_i post(i) * harm(i)` |
//! | [`weak_bound`]          | `sup_i post(i) * harm(i) / (delta * prior(i*))`     |
//! | [`cautious_bound`]      | `max_{i in I^alpha} harm(i)`                        |
//! | [`posterior_predictive`]| `sum_i post(i) * harm(i)`                           |
//! | [`cheating_bound`]      | `harm(i*)` (needs the true index)                   |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::{CautiousSet, Posterior};
use crate::theory::TheoryIndex;

/// Absolute tolerance for ties between `post(i) * harm(i)` products.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct HarmProfile {
    harm: Vec<f64>,
}

impl HarmProfile {
    pub fn new(harm: Vec<f64>) -> Result<Self> {
        for &h in &harm {
            if !(0.0..=1.0).contains(&h) {
                return Err(Error::InvalidParameter {
                    name: "harm probability",
                    value: h,
                    reason: "must lie in [0, 1]",
                });
            }
        }
        Ok(Self { harm })
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(TheoryIndex) -> f64) -> Result<Self> {
        Self::new((0..len).map(|i| f(TheoryIndex(i))).collect())
    }

    pub fn len(&self) -> usize {
        self.harm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.harm.is_empty()
    }

    pub fn get(&self, index: TheoryIndex) -> f64 {
        self.harm[index.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.harm
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    IidCautious,
    Weak,
    CautiousSet,
    PosteriorPredictive,
    Cheating,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    None,
    Index(TheoryIndex),
    Set(Vec<TheoryIndex>),
}

impl Witness {
    /// A representative index: the single witness, or the first of a set.
    pub fn first(&self) -> Option<TheoryIndex> {
        match self {
            Witness::None => None,
            Witness::Index(i) => Some(*i),
            Witness::Set(v) => v.first().copied(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult {
    pub value: f64,
    pub witness: Witness,
    pub kind: BoundKind,
}

fn check_sizes(posterior: &Posterior, profile: &HarmProfile) {
    assert_eq!(
        posterior.len(),
        profile.len(),
        "harm profile does not cover the theory space"
    );
}

/// Cautious-theory bound for i.i.d. data.
///
/// Every index whose product `post(i) * harm(i)` is within [`TIE_TOL`] of the
/// maximum is a witness; the value is the largest harm among them.
pub fn iid_cautious_bound(posterior: &Posterior, profile: &HarmProfile) -> BoundResult {
    check_sizes(posterior, profile);
    let products: Vec<f64> = posterior
        .masses()
        .iter()
        .zip(profile.values())
        .map(|(p, h)| p * h)
        .collect();
    let best = products.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<TheoryIndex> = products
        .iter()
        .enumerate()
        .filter(|&(_, &x)| x >= best - TIE_TOL)
        .map(|(i, _)| TheoryIndex(i))
        .collect();
    let value = ties
        .iter()
        .map(|&i| profile.get(i))
        .fold(0.0, f64::max);
    BoundResult {
        value,
        witness: Witness::Set(ties),
        kind: BoundKind::IidCautious,
    }
}

/// Weak non-i.i.d. bound. The raw value may exceed 1; callers clamp.
pub fn weak_bound(
    posterior: &Posterior,
    profile: &HarmProfile,
    delta: f64,
    prior_truth: f64,
) -> BoundResult {
    check_sizes(posterior, profile);
    assert!(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    assert!(prior_truth > 0.0, "prior on the truth must be positive");
    let mut best = (0, f64::NEG_INFINITY);
    for (i, (p, h)) in posterior.masses().iter().zip(profile.values()).enumerate() {
        let x = p * h;
        if x > best.1 {
            best = (i, x);
        }
    }
    BoundResult {
        value: best.1 / (delta * prior_truth),
        witness: Witness::Index(TheoryIndex(best.0)),
        kind: BoundKind::Weak,
    }
}

/// Largest harm over a precomputed cautious set; ties go to the lowest index.
pub fn cautious_set_bound(set: &CautiousSet, profile: &HarmProfile) -> BoundResult {
    let mut best: Option<(TheoryIndex, f64)> = None;
    for &i in set.members() {
        let h = profile.get(i);
        best = match best {
            Some((bi, bh)) if bh > h || (bh == h && bi < i) => Some((bi, bh)),
            _ => Some((i, h)),
        };
    }
    let (witness, value) = best.expect("cautious sets are nonempty");
    BoundResult {
        value,
        witness: Witness::Index(witness),
        kind: BoundKind::CautiousSet,
    }
}

/// Cautious-set bound: max harm over `I^alpha`.
pub fn cautious_bound(posterior: &Posterior, profile: &HarmProfile, alpha: f64) -> BoundResult {
    check_sizes(posterior, profile);
    cautious_set_bound(&posterior.cautious_set(alpha), profile)
}

pub fn posterior_predictive(posterior: &Posterior, profile: &HarmProfile) -> BoundResult {
    check_sizes(posterior, profile);
    let value: f64 = posterior
        .masses()
        .iter()
        .zip(profile.values())
        .map(|(p, h)| p * h)
        .sum();
    BoundResult {
        value: value.clamp(0.0, 1.0),
        witness: Witness::None,
        kind: BoundKind::PosteriorPredictive,
    }
}

/// Reference statistic using the true index.
pub fn cheating_bound(profile: &HarmProfile, truth: TheoryIndex) -> BoundResult {
    BoundResult {
        value: profile.get(truth),
        witness: Witness::Index(truth),
        kind: BoundKind::Cheating,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::Prior;
    use proptest::prelude::*;

    fn post(mass: &[f64]) -> Posterior {
        Posterior::from_prior(&Prior::new(mass.to_vec()).unwrap())
    }

    fn profile(h: &[f64]) -> HarmProfile {
        HarmProfile::new(h.to_vec()).unwrap()
    }

    #[test]
    fn profile_rejects_out_of_range() {
        assert!(HarmProfile::new(vec![0.5, 1.5]).is_err());
        assert!(HarmProfile::new(vec![-0.1]).is_err());
    }

    #[test]
    fn iid_uniform_posterior_picks_max_harm() {
        let r = iid_cautious_bound(&post(&[0.25; 4]), &profile(&[0.1, 0.7, 0.3, 0.2]));
        assert_eq!(r.value, 0.7);
        assert_eq!(r.witness, Witness::Set(vec![TheoryIndex(1)]));
    }

    #[test]
    fn iid_hand_example() {
        let r = iid_cautious_bound(&post(&[0.7, 0.3]), &profile(&[0.2, 0.6]));
        assert_eq!(r.witness, Witness::Set(vec![TheoryIndex(1)]));
        assert_eq!(r.value, 0.6);
    }

    #[test]
    fn iid_zero_harm_ties_everything() {
        let r = iid_cautious_bound(&post(&[0.5, 0.3, 0.2]), &profile(&[0.0; 3]));
        assert_eq!(r.value, 0.0);
        assert_eq!(
            r.witness,
            Witness::Set(vec![TheoryIndex(0), TheoryIndex(1), TheoryIndex(2)])
        );
    }

    #[test]
    fn iid_reports_worst_tied_maximizer() {
        // products 0.2 and 0.2 tie; harm 0.8 wins.
        let r = iid_cautious_bound(&post(&[0.5, 0.25, 0.25]), &profile(&[0.4, 0.8, 0.1]));
        assert_eq!(r.witness, Witness::Set(vec![TheoryIndex(0), TheoryIndex(1)]));
        assert_eq!(r.value, 0.8);
    }

    #[test]
    fn weak_bound_cases() {
        let r = weak_bound(&post(&[1.0]), &profile(&[0.3]), 1.0, 1.0);
        assert_eq!(r.value, 0.3);

        let r = weak_bound(&post(&[0.6, 0.4]), &profile(&[0.1, 0.5]), 0.5, 0.5);
        assert!((r.value - 0.8).abs() < 1e-15);
        assert_eq!(r.witness, Witness::Index(TheoryIndex(1)));

        let n = 1 << 10;
        let r = weak_bound(&post(&vec![1.0 / n as f64; n]), &profile(&vec![0.5; n]), 0.1, 1.0 / n as f64);
        assert!(r.value > 1.0);
    }

    #[test]
    fn cautious_bound_cases() {
        let p = post(&[0.5, 0.3, 0.2]);
        let h = profile(&[0.1, 0.5, 0.9]);
        assert_eq!(cautious_bound(&p, &h, 1.0).value, 0.1);
        let r = cautious_bound(&p, &h, 0.3);
        assert_eq!(r.value, 0.5);
        assert_eq!(r.witness, Witness::Index(TheoryIndex(1)));
        for alpha in [0.01, 0.3, 0.7, 1.0] {
            assert_eq!(cautious_bound(&p, &profile(&[0.4; 3]), alpha).value, 0.4);
        }
    }

    #[test]
    fn cautious_bound_ties_lowest_index() {
        let p = post(&[0.2, 0.5, 0.3]);
        let r = cautious_bound(&p, &profile(&[0.6, 0.1, 0.6]), 0.01);
        assert_eq!(r.witness, Witness::Index(TheoryIndex(0)));
    }

    #[test]
    fn predictive_cases() {
        assert_eq!(posterior_predictive(&post(&[0.5, 0.5]), &profile(&[0.0, 1.0])).value, 0.5);
        assert_eq!(posterior_predictive(&post(&[0.0, 1.0]), &profile(&[0.9, 0.3])).value, 0.3);
        let v = posterior_predictive(&post(&[0.6, 0.4]), &profile(&[0.1, 0.5])).value;
        assert!((v - 0.26).abs() < 1e-15);
    }

    #[test]
    fn cheating_reads_truth() {
        let r = cheating_bound(&profile(&[0.1, 0.9]), TheoryIndex(1));
        assert_eq!(r.value, 0.9);
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..12).prop_flat_map(|n| {
            (
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(0.0f64..=1.0, n),
            )
        })
    }

    fn normalize(w: &[f64]) -> Option<Vec<f64>> {
        let s: f64 = w.iter().sum();
        (s > 1e-6).then(|| w.iter().map(|x| x / s).collect())
    }

    proptest! {
        #[test]
        fn cautious_bound_nonincreasing_in_alpha((w, h) in instance(), a in 0.001f64..1.0, b in 0.001f64..1.0) {
            let Some(m) = normalize(&w) else { return Ok(()); };
            let p = Posterior::from_prior(&Prior::new(m).unwrap_or_else(|_| Prior::uniform(w.len())));
            let prof = profile(&h);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(cautious_bound(&p, &prof, lo).value >= cautious_bound(&p, &prof, hi).value);
        }

        #[test]
        fn full_support_cautious_dominates_predictive((w, h) in instance()) {
            let Some(m) = normalize(&w) else { return Ok(()); };
            let Ok(prior) = Prior::new(m) else { return Ok(()); };
            let p = Posterior::from_prior(&prior);
            let positive: Vec<f64> = p.masses().iter().copied().filter(|&x| x > 0.0).collect();
            let min = positive.iter().copied().fold(f64::INFINITY, f64::min);
            // below min / total, every ranked index clears the threshold
            let alpha = min * 0.5;
            let set = p.cautious_set(alpha);
            prop_assert_eq!(set.len(), positive.len());
            let prof = profile(&h);
            prop_assert!(cautious_bound(&p, &prof, alpha).value + 1e-12 >= posterior_predictive(&p, &prof).value);
        }

        #[test]
        fn weak_bound_dominates_every_index((w, h) in instance(), delta in 0.01f64..=1.0) {
            let Some(m) = normalize(&w) else { return Ok(()); };
            let Ok(prior) = Prior::new(m) else { return Ok(()); };
            let p = Posterior::from_prior(&prior);
            let prof = profile(&h);
            let prior_truth = 0.3;
            let r = weak_bound(&p, &prof, delta, prior_truth);
            for i in 0..w.len() {
                let i = TheoryIndex(i);
                prop_assert!(r.value >= p.mass(i) * prof.get(i) / (delta * prior_truth));
            }
        }

        #[test]
        fn iid_witnesses_tie((w, h) in instance()) {
            let Some(m) = normalize(&w) else { return Ok(()); };
            let Ok(prior) = Prior::new(m) else { return Ok(()); };
            let p = Posterior::from_prior(&prior);
            let prof = profile(&h);
            let r = iid_cautious_bound(&p, &prof);
            let Witness::Set(set) = &r.witness else { panic!("iid bound reports a set") };
            prop_assert!(set.iter().any(|&i| prof.get(i) == r.value));
            let prods: Vec<f64> = set.iter().map(|&i| p.mass(i) * prof.get(i)).collect();
            let hi = prods.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = prods.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!(hi - lo <= 1e-12);
        }
    }
}
