//! Small sample-statistics helpers shared by the harness and the tests.

use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub n: usize,
    pub mean: f64,
    pub std_err: f64,
}

impl MeanEstimate {
    /// Summation runs in iteration order, so equal inputs give bit-equal output.
    pub fn from_samples<I>(samples: I) -> Self
    where
        I: IntoIterator<Item = f64>,
        I::IntoIter: Clone,
    {
        let it = samples.into_iter();
        let (mut n, mut sum) = (0usize, 0.0);
        for x in it.clone() {
            n += 1;
            sum += x;
        }
        if n == 0 {
            return Self {
                n,
                mean: f64::NAN,
                std_err: f64::NAN,
            };
        }
        let mean = sum / n as f64;
        let std_err = if n > 1 {
            let ss: f64 = it.map(|x| (x - mean) * (x - mean)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self { n, mean, std_err }
    }
}

/// Standard error of a frequency estimate at success probability `p`.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Median of a sample (mean of the two middle values for even sizes).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_se() {
        let est = MeanEstimate::from_samples([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(est.n, 4);
        assert_eq!(est.mean, 2.5);
        // sample variance 5/3
        assert!((est.std_err - (5.0 / 3.0 / 4.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empty_and_singleton() {
        assert!(MeanEstimate::from_samples(Vec::<f64>::new()).mean.is_nan());
        assert_eq!(MeanEstimate::from_samples([7.0]).std_err, 0.0);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
