//! Sample moments and the one-sample Kolmogorov-Smirnov test.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Terms kept in the Kolmogorov distribution series.
const KOLMOGOROV_TERMS: usize = 100;

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Running sums of a sample. Integer inputs accumulate exactly, so merging
/// in any order gives identical results.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntMoments {
    pub count: u64,
    pub sum: u128,
    pub sum_sq: u128,
}

impl IntMoments {
    pub fn push(&mut self, x: u64) {
        self.count += 1;
        self.sum += x as u128;
        self.sum_sq += (x as u128) * (x as u128);
    }

    pub fn merge(mut self, other: IntMoments) -> IntMoments {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let n = self.count as f64;
        // n Σx² - (Σx)² is exact in integers.
        let num = self.count as u128 * self.sum_sq - self.sum * self.sum;
        num as f64 / (n * (n - 1.0))
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// `(x - mean) / sd` with sample moments.
pub fn standardize(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.len() < 2 {
        return Err(Error::Degenerate(format!("{} observations", xs.len())));
    }
    let m = mean(xs);
    let sd = variance(xs).sqrt();
    if !(sd.is_finite() && sd > 0.0) {
        return Err(Error::Degenerate("sample variance is zero".into()));
    }
    Ok(xs.iter().map(|x| (x - m) / sd).collect())
}

/// `P(K > x)` for the limiting Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // Theta-function form; converges fast for small x.
        let s: f64 = (1..=KOLMOGOROV_TERMS)
            .map(|k| {
                let j = (2 * k - 1) as f64;
                (-(j * j) * PI * PI / (8.0 * x * x)).exp()
            })
            .sum();
        (1.0 - (2.0 * PI).sqrt() / x * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=KOLMOGOROV_TERMS)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * x * x).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample KS test of `xs` against a continuous `cdf`, with the
/// asymptotic p-value `P(K > √n D)`.
pub fn ks_test(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if xs.is_empty() {
        return Err(Error::Degenerate("empty sample".into()));
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::Degenerate("NaN in sample".into()));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic,
        p_value: kolmogorov_survival(n.sqrt() * statistic),
        n: sorted.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_values() {
        assert!((standard_normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((standard_normal_cdf(1.96) - 0.975_002_104_851_78).abs() < 1e-11);
        assert!((standard_normal_cdf(-3.0) - 0.001_349_898_031_63).abs() < 1e-11);
    }

    #[test]
    fn kolmogorov_reference_points() {
        // Classical critical values: P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01.
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_survival(1.9495) - 0.001).abs() < 1e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        // Both branches agree where they meet.
        let a = kolmogorov_survival(1.18 - 1e-9);
        let b = kolmogorov_survival(1.18 + 1e-9);
        assert!((a - b).abs() < 1e-7);
    }

    #[test]
    fn ks_on_exact_quantiles() {
        // Midpoint quantiles have D = 1/(2n).
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let r = ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((r.statistic - 0.5 / n as f64).abs() < 1e-12);
        assert!(r.p_value > 0.999);
    }

    #[test]
    fn ks_rejects_shifted_sample() {
        let xs: Vec<f64> = (0..2000).map(|i| (i as f64 + 0.5) / 2000.0 * 0.8).collect();
        let r = ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.statistic > 0.19);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn standardization_identity() {
        let xs: Vec<f64> = (0..57).map(|i| ((i * 37) % 11) as f64 + 0.25 * i as f64).collect();
        let z = standardize(&xs).unwrap();
        assert!(mean(&z).abs() < 1e-12);
        assert!((variance(&z) - 1.0).abs() < 1e-12);
        assert!(matches!(standardize(&[3.0; 10]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn integer_moments() {
        let mut m = IntMoments::default();
        for x in [1u64, 2, 3, 4] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.variance() - 5.0 / 3.0).abs() < 1e-15);
        let mut a = IntMoments::default();
        a.push(1);
        a.push(2);
        let mut b = IntMoments::default();
        b.push(3);
        b.push(4);
        assert_eq!(a.merge(b), m);
        assert_eq!(b.merge(a), m);
    }
}
