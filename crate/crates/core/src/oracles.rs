//! Independent reference computations for tests.
//!
//! Nothing here calls into the posterior, bounds or bandit modules: posteriors
//! are computed as one normalized product of linear-space likelihoods in an
//! extended-exponent float, the normal CDF comes from its Taylor series and
//! Laplace continued fraction, and bandit thresholds are enumerated exactly.

use serde::Serialize;

use crate::error::{Error, Result};

/// Outcome of comparing a computed value with a reference.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub name: String,
    pub computed: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleReport {
    pub fn compare(name: impl Into<String>, computed: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            computed,
            reference,
            tolerance,
            passed: (computed - reference).abs() <= tolerance,
        }
    }
}

/// `mantissa * 2^exponent` with the mantissa kept in `[0.5, 1)` (or zero).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledFloat {
    mantissa: f64,
    exponent: i64,
}

impl ScaledFloat {
    pub const ZERO: Self = Self {
        mantissa: 0.0,
        exponent: 0,
    };

    pub fn new(x: f64) -> Self {
        assert!(x.is_finite() && x >= 0.0, "scaled floats hold finite nonnegatives");
        Self {
            mantissa: x,
            exponent: 0,
        }
        .normalized()
    }

    fn normalized(self) -> Self {
        if self.mantissa == 0.0 {
            return Self::ZERO;
        }
        let (m, e) = frexp(self.mantissa);
        Self {
            mantissa: m,
            exponent: self.exponent + e,
        }
    }

    pub fn mul(self, x: f64) -> Self {
        Self {
            mantissa: self.mantissa * x,
            exponent: self.exponent,
        }
        .normalized()
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    /// `self / reference` as an ordinary float.
    pub fn ratio_to(self, reference: Self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let shift = self.exponent - reference.exponent;
        self.mantissa / reference.mantissa * pow2(shift)
    }
}

fn pow2(e: i64) -> f64 {
    if e < -1100 {
        0.0
    } else if e > 1100 {
        f64::INFINITY
    } else {
        2f64.powi(e as i32)
    }
}

/// Splits a positive finite `x` into `m * 2^e` with `m` in `[0.5, 1)`.
fn frexp(x: f64) -> (f64, i64) {
    let (x, bias) = if x < f64::MIN_POSITIVE {
        (x * 2f64.powi(64), -64)
    } else {
        (x, 0)
    };
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64 - 1022;
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, exp + bias)
}

/// Posterior as one normalized product `prior(i) * prod_t p_i(z_t | z_<t)`.
///
/// `density(i, history, z)` must return a linear-space probability or density.
pub fn brute_force_posterior<O>(
    prior: &[f64],
    density: impl Fn(usize, &[O], &O) -> f64,
    data: &[O],
) -> Result<Vec<f64>> {
    let products: Vec<ScaledFloat> = prior
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            (0..data.len()).fold(ScaledFloat::new(p), |acc, t| {
                acc.mul(density(i, &data[..t], &data[t]))
            })
        })
        .collect();
    let largest = products
        .iter()
        .filter(|p| !p.is_zero())
        .max_by(|a, b| a.exponent.cmp(&b.exponent).then(a.mantissa.total_cmp(&b.mantissa)))
        .copied()
        .ok_or(Error::AllZeroLikelihood { t: data.len() })?;
    let rel: Vec<f64> = products.iter().map(|p| p.ratio_to(largest)).collect();
    let total: f64 = rel.iter().sum();
    Ok(rel.into_iter().map(|r| r / total).collect())
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Upper tail `1 - Phi(x)` for `x > 0` by backward evaluation of
/// `phi(x) / (x + 1/(x + 2/(x + 3/(x + ...))))`.
fn upper_tail_cf(x: f64) -> f64 {
    let mut acc = x;
    for k in (1..=4000).rev() {
        acc = x + k as f64 / acc;
    }
    std_normal_pdf(x) / acc
}

/// `Phi(x) - 1/2 = phi(x) * sum_n x^(2n+1) / (1 * 3 * ... * (2n+1))`.
fn centered_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut n = 0u32;
    loop {
        // Neumaier summation
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        n += 1;
        term *= x2 / (2 * n + 1) as f64;
        if term.abs() < 1e-18 * sum.abs() || n > 500 {
            break;
        }
    }
    std_normal_pdf(x) * (sum + comp)
}

/// Standard normal CDF accurate to about `1e-15` absolute.
pub fn normal_cdf_reference(x: f64) -> f64 {
    assert!(x.is_finite(), "normal_cdf_reference needs a finite argument");
    if x.abs() <= 3.0 {
        0.5 + centered_series(x)
    } else if x > 0.0 {
        1.0 - upper_tail_cf(x)
    } else {
        upper_tail_cf(-x)
    }
}

/// `log(p / (1-p)) * sum_i (2 z_i - 1)`, the log posterior ratio of `tau_p`
/// against `tau_(1-p)` under equal priors.
pub fn walk_statistic(p: f64, observations: &[bool]) -> f64 {
    let walk: i64 = observations.iter().map(|&z| if z { 1 } else { -1 }).sum();
    (p / (1.0 - p)).ln() * walk as f64
}

/// Posterior on the truth after a first symbol 1 in the two-theory family:
/// `delta p / (delta p + (1 - p))`.
/// Probability that a simple symmetric random walk of `n` steps started at 0
/// reaches both `+k` and `-k`, by dynamic programming over (position, hit flags).
pub fn walk_hits_both_probability(n: usize, k: usize) -> f64 {
    let width = 2 * n + 1;
    let (hi, lo) = (n + k, n - k);
    let mut p = vec![[0.0f64; 4]; width];
    p[n][0] = 1.0;
    for _ in 0..n {
        let mut q = vec![[0.0f64; 4]; width];
        for x in 0..width {
            for f in 0..4 {
                let m = 0.5 * p[x][f];
                if m == 0.0 {
                    continue;
                }
                for y in [x.wrapping_sub(1), x + 1] {
                    if y >= width {
                        continue;
                    }
                    let mut g = f;
                    if y >= hi {
                        g |= 1;
                    }
                    if y <= lo {
                        g |= 2;
                    }
                    q[y][g] += m;
                }
            }
        }
        p = q;
    }
    p.iter().map(|s| s[3]).sum()
}

/// `E[max_a f_a . v*]` for uniform bit vectors, using that given `|v*| = k` the
/// arm means are i.i.d. Binomial(k, 1/2).
pub fn binomial_explosion_threshold(n_arms: usize, d: usize) -> f64 {
    let choose = |n: usize, r: usize| -> f64 { (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64) };
    (0..=d)
        .map(|k| {
            let weight = choose(d, k) / 2f64.powi(d as i32);
            let mut cdf = 0.0;
            let mut expected_max = 0.0;
            for m in 0..k {
                cdf += choose(k, m) / 2f64.powi(k as i32);
                expected_max += 1.0 - cdf.powi(n_arms as i32);
            }
            weight * expected_max
        })
        .sum()
}

pub fn first_symbol_posterior(delta: f64, prior_truth: f64) -> f64 {
    delta * prior_truth / (delta * prior_truth + (1.0 - prior_truth))
}

/// Exact `E[max_a f_a . v]` over uniform features and `v` by enumeration.
pub fn exact_explosion_threshold(n_arms: usize, d: usize) -> f64 {
    let bits = n_arms * d;
    assert!(bits + d <= 24, "enumeration too large");
    let arm_mask = (1u64 << d) - 1;
    let mut total = 0u64;
    for v in 0..(1u64 << d) {
        for joint in 0..(1u64 << bits) {
            let best = (0..n_arms)
                .map(|a| {
                    let f = (joint >> (a * d)) & arm_mask;
                    // inner product of bit-vectors without popcount
                    (0..d).filter(|&k| (f >> k) & 1 == 1 && (v >> k) & 1 == 1).count() as u64
                })
                .max()
                .unwrap_or(0);
            total += best;
        }
    }
    total as f64 / (1u64 << (bits + d)) as f64
}
