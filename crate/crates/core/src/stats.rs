//! Estimators used on replicate output: empirical distributions, Beta moment
//! fits of angles on `[0, 2π)`, and the Kolmogorov–Smirnov distance.

use std::f64::consts::TAU;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use thiserror::Error;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample value {0} outside (0, 2π)")]
    OutOfRange(f64),
    #[error("sample variance is zero")]
    ZeroVariance,
    #[error("variance {variance} is not below mean·(2π - mean) = {bound}; moment estimates would be non-positive")]
    NonPositiveEstimate { variance: f64, bound: f64 },
}

/// Proportion of each value of `support` among `values`, in support order.
pub fn empirical_distribution(
    values: &[usize],
    support: RangeInclusive<usize>,
) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::param("empirical distribution of an empty sample"));
    }
    let (lo, hi) = (*support.start(), *support.end());
    let mut counts = vec![0usize; hi + 1 - lo];
    for &v in values {
        if v < lo || v > hi {
            return Err(Error::param(format!(
                "value {v} outside support {lo}..={hi}"
            )));
        }
        counts[v - lo] += 1;
    }
    let n = values.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// Moment estimates of a Beta law rescaled to `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub sample_mean: f64,
    /// Population variance (divides by `n`).
    pub sample_variance: f64,
    pub n: usize,
}

impl BetaFit {
    pub fn cdf(&self) -> ScaledBeta {
        ScaledBeta::new(self.alpha_hat, self.beta_hat)
    }
}

/// `α̂ = (x̄/2π)(x̄(2π−x̄)/Var − 1)`, `β̂ = ((2π−x̄)/2π)(x̄(2π−x̄)/Var − 1)`.
pub fn beta_moment_fit(sample: &[f64]) -> Result<BetaFit, FitError> {
    if sample.len() < 2 {
        return Err(FitError::TooFewSamples {
            needed: 2,
            got: sample.len(),
        });
    }
    if let Some(&bad) = sample.iter().find(|&&x| !(x > 0.0 && x < TAU)) {
        return Err(FitError::OutOfRange(bad));
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let variance = sample.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
    if variance == 0.0 {
        return Err(FitError::ZeroVariance);
    }
    let bound = mean * (TAU - mean);
    if variance >= bound {
        return Err(FitError::NonPositiveEstimate { variance, bound });
    }
    let common = bound / variance - 1.0;
    Ok(BetaFit {
        alpha_hat: mean / TAU * common,
        beta_hat: (TAU - mean) / TAU * common,
        sample_mean: mean,
        sample_variance: variance,
        n: sample.len(),
    })
}

/// Supremum distance between the empirical CDF of `sample` and `cdf`,
/// taking both one-sided gaps at every sorted sample point.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::param("KS statistic of an empty sample"));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    });
    Ok(d.clamp(0.0, 1.0))
}

/// CDF of the uniform law on `[0, 2π)`.
pub fn uniform_circle_cdf(x: f64) -> f64 {
    (x / TAU).clamp(0.0, 1.0)
}

/// `Beta(α, β)` rescaled to `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledBeta {
    pub alpha: f64,
    pub beta: f64,
}

impl ScaledBeta {
    pub fn new(alpha: f64, beta: f64) -> Self {
        assert!(
            alpha > 0.0 && beta > 0.0,
            "Beta parameters must be positive"
        );
        ScaledBeta { alpha, beta }
    }

    /// Regularized incomplete beta `I_{x/2π}(α, β)` (continued-fraction evaluation).
    pub fn cdf(&self, x: f64) -> f64 {
        let u = x / TAU;
        if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else {
            beta_reg(self.alpha, self.beta, u)
        }
    }
}

/// Mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn distribution_examples() {
        let mut v = Vec::new();
        for (value, count) in [(1, 114), (2, 2232), (3, 2449), (4, 203), (5, 2)] {
            v.extend(std::iter::repeat_n(value, count));
        }
        let d = empirical_distribution(&v, 1..=5).unwrap();
        assert_eq!(d, vec![0.0228, 0.4464, 0.4898, 0.0406, 0.0004]);
        assert_eq!(
            empirical_distribution(&[3, 3, 3], 1..=5).unwrap(),
            vec![0.0, 0.0, 1.0, 0.0, 0.0]
        );
        assert_eq!(
            empirical_distribution(&[1, 2], 1..=2).unwrap(),
            vec![0.5, 0.5]
        );
        assert!(empirical_distribution(&[], 1..=5).is_err());
        assert!(empirical_distribution(&[6], 1..=5).is_err());
    }

    #[test]
    fn fit_two_point_sample() {
        let f = beta_moment_fit(&[PI / 2.0, 3.0 * PI / 2.0]).unwrap();
        assert!((f.alpha_hat - 1.5).abs() < 1e-12);
        assert!((f.beta_hat - 1.5).abs() < 1e-12);
    }

    #[test]
    fn fit_symmetric_sample_gives_equal_parameters() {
        let s = [PI - 1.0, PI - 0.3, PI + 0.3, PI + 1.0, PI];
        let f = beta_moment_fit(&s).unwrap();
        assert!((f.alpha_hat - f.beta_hat).abs() < 1e-12);
    }

    #[test]
    fn fit_errors_are_distinct() {
        assert_eq!(
            beta_moment_fit(&[1.0]),
            Err(FitError::TooFewSamples { needed: 2, got: 1 })
        );
        assert_eq!(beta_moment_fit(&[1.0, 1.0]), Err(FitError::ZeroVariance));
        assert!(matches!(
            beta_moment_fit(&[0.0, 1.0]),
            Err(FitError::OutOfRange(_))
        ));
    }

    #[test]
    fn ks_single_point_and_quantiles() {
        assert!((ks_statistic(&[PI], uniform_circle_cdf).unwrap() - 0.5).abs() < 1e-15);
        for n in [1usize, 4, 37, 500] {
            let s: Vec<f64> = (1..=n).map(|k| TAU * (k as f64 - 0.5) / n as f64).collect();
            let d = ks_statistic(&s, uniform_circle_cdf).unwrap();
            assert!((d - 0.5 / n as f64).abs() < 1e-12, "n={n} d={d}");
        }
        assert!(ks_statistic(&[], uniform_circle_cdf).is_err());
    }

    #[test]
    fn scaled_beta_endpoints() {
        let b = ScaledBeta::new(2.74, 2.74);
        assert_eq!(b.cdf(0.0), 0.0);
        assert_eq!(b.cdf(TAU), 1.0);
        assert!((b.cdf(PI) - 0.5).abs() < 1e-12);
    }
}
