//! Closed-form constants and right-hand sides of the concentration, mean
//! deviation, mixing and armour-tail inequalities.
//!
//! Every `x^k / k!` is evaluated as a running product of `x / j`, which
//! stays finite long after `x^k` or `k!` alone would overflow.

use std::collections::BTreeMap;
use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative truncation threshold for all series.
pub const SERIES_TOL: f64 = 1e-15;

/// `x^k / k!`.
pub fn power_over_factorial(x: f64, k: u64) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * x / j as f64)
}

/// `1 / m!`, zero once it underflows.
pub fn inv_factorial(m: u64) -> f64 {
    power_over_factorial(1.0, m)
}

fn shell(d: u32, k: u64) -> f64 {
    ((2 * k + 1) as f64).powi(d as i32) - ((2 * k) as f64 - 1.0).powi(d as i32)
}

fn check_d(d: u32) -> Result<()> {
    if d == 0 {
        Err(Error::invalid("d", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// Terms of the series for `B`, `k = 1..=terms`.
fn b_series(d: u32, terms: Option<u64>) -> f64 {
    let q = (2 * d - 1) as f64;
    let mut sum = 0.0;
    let mut k = 1u64;
    loop {
        let term = power_over_factorial(q, k) * shell(d, k);
        sum += term;
        match terms {
            Some(n) if k >= n => break,
            // Terms grow until k ~ q, so only stop once past the peak.
            None if k as f64 > q && term <= SERIES_TOL * sum => break,
            _ => {}
        }
        k += 1;
    }
    sum
}

/// `B = 1 + (2d/(2d-1)) Σ_{k≥1} (2d-1)^k [(2k+1)^d - (2k-1)^d] / k!`.
#[allow(non_snake_case)]
pub fn constant_B(d: u32) -> Result<f64> {
    check_d(d)?;
    let q = (2 * d - 1) as f64;
    Ok(1.0 + 2.0 * d as f64 / q * b_series(d, None))
}

/// `B` from a fixed number of series terms.
#[allow(non_snake_case)]
pub fn constant_B_terms(d: u32, terms: u64) -> Result<f64> {
    check_d(d)?;
    let q = (2 * d - 1) as f64;
    Ok(1.0 + 2.0 * d as f64 / q * b_series(d, Some(terms)))
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_nan() || eps < 0.0 {
        Err(Error::invalid("eps", format!("{eps} is negative")))
    } else {
        Ok(())
    }
}

/// `exp(1/e - eps² / (4 e B |Λ_n|))`, `|Λ_n| = (2n+1)^d`.
pub fn concentration_bound(d: u32, n: u32, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let b = constant_B(d)?;
    let volume = ((2 * n + 1) as f64).powi(d as i32);
    Ok((1.0 / E - eps * eps / (4.0 * E * b * volume)).exp())
}

/// `2 / ⌈m/2 + 2⌉!`: bound on `P(|N_n - N̄_n| > m)` in d = 1.
pub fn coupling_bound(m: f64) -> Result<f64> {
    check_eps(m)?;
    Ok(2.0 * inv_factorial((m / 2.0 + 2.0).ceil() as u64))
}

/// Free-boundary bound in d = 1:
/// `exp(1/e - eps² / (16 e (4e-3) (2n+1))) + 2 / ⌈eps/4 + 2⌉!`.
pub fn concentration_bound_free(n: u32, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let volume = (2 * n + 1) as f64;
    let gaussian = (1.0 / E - eps * eps / (16.0 * E * (4.0 * E - 3.0) * volume)).exp();
    Ok(gaussian + concentration_free_boundary_term(eps))
}

/// The factorial part `2 / ⌈eps/4 + 2⌉!` of [`concentration_bound_free`].
pub fn concentration_free_boundary_term(eps: f64) -> f64 {
    2.0 * inv_factorial((eps / 4.0 + 2.0).ceil() as u64)
}

/// Bound on `|E N̄_n - ρ|Λ_n||`: `2(e-1)` in d = 1, the general series
/// otherwise.
pub fn mean_dev_bound(d: u32, n: u32) -> Result<f64> {
    check_d(d)?;
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if d == 1 {
        Ok(2.0 * (E - 1.0))
    } else {
        mean_dev_bound_general(d, n)
    }
}

/// `2d(2d-1)^n/(n+1)! + (2d)² Σ_{k=0}^{n-1} (2d-1)^k (2(n-k)+1)^{d-1} / (k+1)!`,
/// valid in every dimension (in d = 1 it is at most `4(e-1)`).
pub fn mean_dev_bound_general(d: u32, n: u32) -> Result<f64> {
    check_d(d)?;
    let q = (2 * d - 1) as f64;
    let two_d = 2.0 * d as f64;
    // (2d-1)^k/(k+1)! = power_over_factorial(q, k+1) / q
    let head = two_d * power_over_factorial(q, n as u64 + 1) / q;
    let tail: f64 = (0..n as u64)
        .map(|k| power_over_factorial(q, k + 1) / q * ((2 * (n as u64 - k) + 1) as f64).powi(d as i32 - 1))
        .sum();
    Ok(head + two_d * two_d * tail)
}

fn check_positive(name: &'static str, v: u64) -> Result<()> {
    if v == 0 {
        Err(Error::invalid(name, "must be at least 1"))
    } else {
        Ok(())
    }
}

/// `(k+l) 3^{⌈n/4⌉} / ⌊n/4⌋!` (d = 2).
pub fn mixing_alpha_kl(k: u64, l: u64, n: u64) -> Result<f64> {
    check_positive("k", k)?;
    check_positive("l", l)?;
    check_positive("n", n)?;
    let up = n.div_ceil(4);
    let down = n / 4;
    // 3^up / down! = 3^(up-down) * 3^down/down!
    let extra = 3f64.powi((up - down) as i32);
    Ok((k + l) as f64 * extra * power_over_factorial(3.0, down))
}

/// `(16n+1) 3^n / n!` (d = 2).
pub fn mixing_alpha_1inf(n: u64) -> Result<f64> {
    check_positive("n", n)?;
    Ok((16 * n + 1) as f64 * power_over_factorial(3.0, n))
}

/// `2d (2d-1)^{k-1} / k!`: bound on the probability that a decreasing path
/// of length k leaves the origin.
pub fn armour_tail(d: u32, k: u64) -> Result<f64> {
    check_d(d)?;
    check_positive("k", k)?;
    let q = (2 * d - 1) as f64;
    Ok(2.0 * d as f64 * power_over_factorial(q, k) / q)
}

/// The simplified d = 2 form `3^k / k!` (valid for k ≥ 3).
pub fn armour_tail_d2_simplified(k: u64) -> Result<f64> {
    check_positive("k", k)?;
    Ok(power_over_factorial(3.0, k))
}

/// `2d (2d-1)^k / ((2d-1) k!)`, bound on `φ_{∞,1}(k)`.
pub fn phi_inf1_bound(d: u32, k: u64) -> Result<f64> {
    check_d(d)?;
    check_positive("k", k)?;
    let q = (2 * d - 1) as f64;
    Ok(2.0 * d as f64 / q * power_over_factorial(q, k))
}

/// Named values with the parameters used to compute them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub parameters: BTreeMap<String, f64>,
    pub values: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsParams {
    pub d: u32,
    pub n: u32,
    pub eps: f64,
    pub k: u64,
    pub l: u64,
}

impl Default for BoundsParams {
    fn default() -> Self {
        BoundsParams {
            d: 1,
            n: 10,
            eps: 10.0,
            k: 1,
            l: 1,
        }
    }
}

/// Evaluates every bound at the given parameters. Entries that only exist
/// in d = 1 or d = 2 are omitted elsewhere.
pub fn bounds_report(p: &BoundsParams) -> Result<BoundsReport> {
    check_d(p.d)?;
    check_positive("n", p.n as u64)?;
    check_positive("k", p.k)?;
    check_positive("l", p.l)?;
    check_eps(p.eps)?;
    let mut values = BTreeMap::new();
    values.insert("B".to_string(), constant_B(p.d)?);
    values.insert("concentration_bound".to_string(), concentration_bound(p.d, p.n, p.eps)?);
    values.insert("mean_dev_bound".to_string(), mean_dev_bound(p.d, p.n)?);
    values.insert("mean_dev_bound_general".to_string(), mean_dev_bound_general(p.d, p.n)?);
    values.insert("armour_tail".to_string(), armour_tail(p.d, p.k)?);
    values.insert("phi_inf1_bound".to_string(), phi_inf1_bound(p.d, p.k)?);
    if p.d == 1 {
        values.insert(
            "concentration_bound_free".to_string(),
            concentration_bound_free(p.n, p.eps)?,
        );
        values.insert("coupling_bound".to_string(), coupling_bound(p.eps)?);
    }
    if p.d == 2 {
        values.insert("mixing_alpha_kl".to_string(), mixing_alpha_kl(p.k, p.l, p.n as u64)?);
        values.insert("mixing_alpha_1inf".to_string(), mixing_alpha_1inf(p.n as u64)?);
        values.insert("armour_tail_simplified".to_string(), armour_tail_d2_simplified(p.k)?);
    }
    let parameters = BTreeMap::from([
        ("d".to_string(), p.d as f64),
        ("n".to_string(), p.n as f64),
        ("eps".to_string(), p.eps),
        ("k".to_string(), p.k as f64),
        ("l".to_string(), p.l as f64),
    ]);
    if let Some((name, v)) = values.iter().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::Internal(format!("bound {name} evaluated to {v}")));
    }
    Ok(BoundsReport { parameters, values })
}
