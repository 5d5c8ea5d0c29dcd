//! Indexed families of theories with prior masses.
//!
//! A theory is identified by a [`TheoryIndex`] into its family and is only
//! ever accessed through its one-step conditional log-density
//! `log p_i(next | history)`. Families are immutable after construction and
//! enumeration order (ascending index) is the tie-breaking order used by every
//! ranking in the crate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the sum of prior masses.
pub const PRIOR_SUM_TOL: f64 = 1e-12;

/// Opaque index of a theory within its family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TheoryIndex(pub usize);

impl TheoryIndex {
    pub fn get(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for TheoryIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A validated probability mass function over `0..len` theory indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Prior {
    mass: Vec<f64>,
}

impl Prior {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::LengthMismatch {
                what: "prior",
                expected: 1,
                got: 0,
            });
        }
        for &m in &mass {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "prior mass",
                    value: m,
                    reason: "must be finite and nonnegative",
                });
            }
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(Error::PriorNotNormalized(total));
        }
        Ok(Self { mass })
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0, "uniform prior over an empty family");
        Self {
            mass: vec![1.0 / len as f64; len],
        }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self, index: TheoryIndex) -> f64 {
        self.mass[index.0]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }
}

/// An indexed family of sequence distributions together with a prior.
pub trait TheorySpace: Sync {
    type Observation;

    fn prior(&self) -> &Prior;

    /// `log p_i(next | history)`. May be `-inf` for impossible observations.
    fn log_likelihood(
        &self,
        index: TheoryIndex,
        history: &[Self::Observation],
        next: &Self::Observation,
    ) -> f64;

    fn len(&self) -> usize {
        self.prior().len()
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn indices(&self) -> std::iter::Map<std::ops::Range<usize>, fn(usize) -> TheoryIndex> {
        (0..self.len()).map(TheoryIndex as fn(usize) -> TheoryIndex)
    }
}

/// Families whose observation space is finite and can be enumerated.
pub trait FiniteObservations: TheorySpace {
    fn observation_space(&self) -> Vec<Self::Observation>;
}

/// Families that can generate data from any of their members.
pub trait Generative: TheorySpace {
    fn sample_next<R: Rng + ?Sized>(
        &self,
        index: TheoryIndex,
        history: &[Self::Observation],
        rng: &mut R,
    ) -> Self::Observation;

    fn sample_sequence<R: Rng + ?Sized>(
        &self,
        index: TheoryIndex,
        len: usize,
        rng: &mut R,
    ) -> Vec<Self::Observation> {
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let z = self.sample_next(index, &out, rng);
            out.push(z);
        }
        out
    }
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter {
            name,
            value: p,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

fn ln_bernoulli(p_one: f64, z: bool) -> f64 {
    if z {
        p_one.ln()
    } else {
        (1.0 - p_one).ln()
    }
}

/// I.i.d. Bernoulli theories over the alphabet `{false, true}` (0 and 1).
///
/// Theory `i` emits `true` with probability `params[i]` regardless of history.
#[derive(Clone, Debug)]
pub struct BernoulliFamily {
    params: Vec<f64>,
    prior: Prior,
}

impl BernoulliFamily {
    pub fn new(params: Vec<f64>, prior: Vec<f64>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::LengthMismatch {
                what: "params",
                expected: 1,
                got: 0,
            });
        }
        if params.len() != prior.len() {
            return Err(Error::LengthMismatch {
                what: "prior",
                expected: params.len(),
                got: prior.len(),
            });
        }
        for &p in &params {
            check_probability("bernoulli parameter", p)?;
        }
        Ok(Self {
            params,
            prior: Prior::new(prior)?,
        })
    }

    pub fn uniform(params: Vec<f64>) -> Result<Self> {
        let n = params.len();
        Self::new(params, vec![1.0 / n.max(1) as f64; n])
    }

    /// `{tau_p, tau_1/2, tau_(1-p)}` with the fair coin at zero prior mass.
    pub fn non_convergent(p: f64) -> Result<Self> {
        if !(0.5 < p && p < 1.0) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                reason: "must lie in (1/2, 1)",
            });
        }
        Self::new(vec![p, 0.5, 1.0 - p], vec![0.5, 0.0, 0.5])
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn param(&self, index: TheoryIndex) -> f64 {
        self.params[index.0]
    }
}

impl TheorySpace for BernoulliFamily {
    type Observation = bool;

    fn prior(&self) -> &Prior {
        &self.prior
    }

    fn log_likelihood(&self, index: TheoryIndex, _history: &[bool], next: &bool) -> f64 {
        ln_bernoulli(self.params[index.0], *next)
    }
}

impl FiniteObservations for BernoulliFamily {
    fn observation_space(&self) -> Vec<bool> {
        vec![false, true]
    }
}

impl Generative for BernoulliFamily {
    fn sample_next<R: Rng + ?Sized>(&self, index: TheoryIndex, _: &[bool], rng: &mut R) -> bool {
        rng.random::<f64>() < self.params[index.0]
    }
}

/// Two theories that differ only on the first observation.
///
/// `i*` (index 0) emits 1 first with probability `delta`; `i'` (index 1) always
/// emits 1 first. Every later symbol is a fair coin under both, so the
/// posterior freezes after the first observation.
#[derive(Clone, Debug)]
pub struct FirstSymbolFamily {
    delta: f64,
    prior: Prior,
}

impl FirstSymbolFamily {
    pub const TRUTH: TheoryIndex = TheoryIndex(0);
    pub const ALTERNATIVE: TheoryIndex = TheoryIndex(1);

    pub fn new(delta: f64, prior_truth: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
                reason: "must lie in (0, 1)",
            });
        }
        if !(prior_truth > 0.0 && prior_truth < 1.0) {
            return Err(Error::InvalidParameter {
                name: "prior_truth",
                value: prior_truth,
                reason: "must lie in (0, 1)",
            });
        }
        Ok(Self {
            delta,
            prior: Prior::new(vec![prior_truth, 1.0 - prior_truth])?,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn first_symbol_prob(&self, index: TheoryIndex) -> f64 {
        if index == Self::TRUTH {
            self.delta
        } else {
            1.0
        }
    }
}

impl TheorySpace for FirstSymbolFamily {
    type Observation = bool;

    fn prior(&self) -> &Prior {
        &self.prior
    }

    fn log_likelihood(&self, index: TheoryIndex, history: &[bool], next: &bool) -> f64 {
        if history.is_empty() {
            ln_bernoulli(self.first_symbol_prob(index), *next)
        } else {
            0.5f64.ln()
        }
    }
}

impl FiniteObservations for FirstSymbolFamily {
    fn observation_space(&self) -> Vec<bool> {
        vec![false, true]
    }
}

impl Generative for FirstSymbolFamily {
    fn sample_next<R: Rng + ?Sized>(
        &self,
        index: TheoryIndex,
        history: &[bool],
        rng: &mut R,
    ) -> bool {
        let p = if history.is_empty() {
            self.first_symbol_prob(index)
        } else {
            0.5
        };
        rng.random::<f64>() < p
    }
}
