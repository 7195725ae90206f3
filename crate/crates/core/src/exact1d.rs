//! Exact one-dimensional results.
//!
//! In d = 1 the armour of the origin is an interval `{-m, …, n}` whose two
//! ends are local minima of the marks and whose marks decrease away from 0.
//! Its law is explicit, and the origin is occupied exactly when both `m` and
//! `n` are even, which yields the occupation density in closed form.
//!
//! The second half of the module is a brute-force oracle: for a path of `s`
//! sites every one of the `s!` visiting orders is equally likely, so the law
//! of the jammed occupation count is a finite rational distribution.

use std::collections::BTreeMap;
use std::f64::consts::E;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::armour::Armour;
use crate::bounds::{inv_factorial, SERIES_TOL};
use crate::error::{Error, Result};
use crate::field::Site;
use crate::parking::BoundaryCondition;

/// Largest path enumerated by [`enumerate_jam`].
pub const MAX_ORACLE_SIZE: usize = 10;

/// `b_{m,n} = 1 / ((m+n+1) m! n!)`.
pub fn b_coeff(m: u64, n: u64) -> f64 {
    inv_factorial(m) * inv_factorial(n) / (m + n + 1) as f64
}

fn factorial_big(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

pub fn b_coeff_exact(m: u64, n: u64) -> BigRational {
    BigRational::new(
        BigInt::one(),
        BigInt::from(m + n + 1) * factorial_big(m) * factorial_big(n),
    )
}

/// The event `A({0}) = {-left, …, right}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArmourCase {
    pub left: u64,
    pub right: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseFamily {
    Singleton,
    RightSided,
    LeftSided,
    TwoSided,
}

impl ArmourCase {
    pub fn new(left: u64, right: u64) -> ArmourCase {
        ArmourCase { left, right }
    }

    pub fn family(&self) -> CaseFamily {
        match (self.left, self.right) {
            (0, 0) => CaseFamily::Singleton,
            (0, _) => CaseFamily::RightSided,
            (_, 0) => CaseFamily::LeftSided,
            _ => CaseFamily::TwoSided,
        }
    }

    /// `X(0)` on this event: 1 iff both extents are even.
    pub fn occupancy(&self) -> u8 {
        (self.left.is_multiple_of(2) && self.right.is_multiple_of(2)) as u8
    }

    /// Reads the case off a computed armour of `{center}`. `None` when the
    /// armour is not an interval containing `center` (impossible in d = 1).
    pub fn from_armour(armour: &Armour, center: &Site) -> Option<ArmourCase> {
        if center.dim() != 1 || armour.seedset() != [*center] {
            return None;
        }
        let c = center.coord(0) as i64;
        let xs: Vec<i64> = armour.members().iter().map(|s| s.coord(0) as i64).collect();
        let lo = *xs.iter().min()?;
        let hi = *xs.iter().max()?;
        if (hi - lo + 1) as usize != xs.len() {
            return None;
        }
        Some(ArmourCase::new((c - lo) as u64, (hi - c) as u64))
    }
}

/// `P(A({0}) = case)` from the per-family formulas: 1/3 for the singleton,
/// `(n+2)/(n+3)!` one-sided, and the `b` combination two-sided.
pub fn case_probability(c: &ArmourCase) -> f64 {
    match c.family() {
        CaseFamily::Singleton => 1.0 / 3.0,
        CaseFamily::RightSided => one_sided(c.right),
        CaseFamily::LeftSided => one_sided(c.left),
        CaseFamily::TwoSided => two_sided(c.left, c.right),
    }
}

fn one_sided(n: u64) -> f64 {
    (n + 2) as f64 * inv_factorial(n + 3)
}

fn two_sided(m: u64, n: u64) -> f64 {
    (b_coeff(m, n) - b_coeff(m, n + 1)) - (b_coeff(m + 1, n) - b_coeff(m + 1, n + 1))
}

/// Exact rational `P(A({0}) = case)`. Uses the two-sided `b` combination for
/// every family (with `b_{0,n} = 1/(n+1)!` it also covers the one-sided and
/// singleton cases).
pub fn case_probability_exact(c: &ArmourCase) -> BigRational {
    let (m, n) = (c.left, c.right);
    (b_coeff_exact(m, n) - b_coeff_exact(m, n + 1)) - (b_coeff_exact(m + 1, n) - b_coeff_exact(m + 1, n + 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseFamilySums {
    pub singleton: f64,
    /// Σ_{n≥1} P(A = {0,…,n}); the left-sided family has the same sum.
    pub one_sided_each: f64,
    pub two_sided: f64,
    /// Σ_{n≥1} P(A = {0,…,2n}).
    pub even_one_sided_each: f64,
    /// Σ_{m,n≥1} P(A = {-2m,…,2n}).
    pub even_two_sided: f64,
}

impl CaseFamilySums {
    pub fn total(&self) -> f64 {
        self.singleton + 2.0 * self.one_sided_each + self.two_sided
    }

    /// `P(X(0) = 1)` assembled from the even families.
    pub fn rho(&self) -> f64 {
        self.singleton + 2.0 * self.even_one_sided_each + self.even_two_sided
    }
}

/// Sums `f(k)` for `k = start, start+step, …` until a term drops below the
/// relative tolerance.
fn sum_series(start: u64, step: u64, f: impl Fn(u64) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut k = start;
    loop {
        let t = f(k);
        sum += t;
        if t.abs() <= SERIES_TOL * sum.abs() {
            return sum;
        }
        k += step;
    }
}

/// Aggregate family probabilities by direct summation of the case formulas.
pub fn case_family_sums() -> CaseFamilySums {
    let two_sided_from = |step: u64| sum_series(step, step, |m| sum_series(step, step, |n| two_sided(m, n)));
    CaseFamilySums {
        singleton: case_probability(&ArmourCase::new(0, 0)),
        one_sided_each: sum_series(1, 1, one_sided),
        two_sided: two_sided_from(1),
        even_one_sided_each: sum_series(2, 2, one_sided),
        even_two_sided: two_sided_from(2),
    }
}

/// Closed forms of the even families: `1/e - 1/3` and
/// `5/6 - 2/e - 1/(2e²)`.
pub fn even_family_closed_forms() -> (f64, f64) {
    (1.0 / E - 1.0 / 3.0, 5.0 / 6.0 - 2.0 / E - 1.0 / (2.0 * E * E))
}

/// `∫_0^1 [(cosh u - 1) - (sinh u - u)]² du` by composite Simpson; the
/// even two-sided family as an integral.
pub fn even_two_sided_integral() -> f64 {
    let f = |u: f64| {
        let a = u.cosh() - 1.0;
        let b = u.sinh() - u;
        a * a - 2.0 * a * b + b * b
    };
    let intervals = 2000;
    let h = 1.0 / intervals as f64;
    let inner: f64 = (1..intervals)
        .map(|k| {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            w * f(k as f64 * h)
        })
        .sum();
    h / 3.0 * (f(0.0) + inner + f(1.0))
}

/// `(1 - e^{-2}) / 2`.
pub fn rho_closed_form() -> f64 {
    (1.0 - (-2.0f64).exp()) / 2.0
}

/// Occupation density `ρ = E[X(0)]` in d = 1, assembled from the armour
/// case series and checked against the closed form.
pub fn exact_rho() -> Result<f64> {
    let sums = case_family_sums();
    let assembled = sums.rho();
    let closed = rho_closed_form();
    let (even_one, even_two) = even_family_closed_forms();
    let checks = [
        ("total probability", sums.total(), 1.0),
        ("even one-sided family", sums.even_one_sided_each, even_one),
        ("even two-sided family", sums.even_two_sided, even_two),
        ("density", assembled, closed),
    ];
    for (what, got, want) in checks {
        if (got - want).abs() > 1e-12 {
            return Err(Error::Internal(format!("{what}: series {got} vs closed form {want}")));
        }
    }
    Ok(assembled)
}

/// Exact law of the occupied count on a path.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    pub size: usize,
    pub support: BTreeMap<u64, BigRational>,
}

impl ExactDistribution {
    pub fn mean(&self) -> BigRational {
        self.support
            .iter()
            .fold(BigRational::zero(), |acc, (k, p)| acc + p * BigInt::from(*k))
    }

    pub fn total(&self) -> BigRational {
        self.support.values().fold(BigRational::zero(), |acc, p| acc + p)
    }

    pub fn probability(&self, k: u64) -> BigRational {
        self.support.get(&k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn to_f64(&self) -> BTreeMap<u64, f64> {
        self.support
            .iter()
            .map(|(k, p)| (*k, p.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    /// `{"1": "1/3", "2": "2/3"}`.
    pub fn to_string_map(&self) -> BTreeMap<String, String> {
        self.support
            .iter()
            .map(|(k, p)| (k.to_string(), p.to_string()))
            .collect()
    }
}

/// Rearranges `perm` into its lexicographic successor; false at the last one.
fn next_permutation(perm: &mut [u8]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Occupied count when path sites (1-based inside `occ`) are visited in
/// `order`; `occ[0]` and `occ[s+1]` hold the frozen ends.
fn sweep(order: &[u8], occ: &mut [u8]) -> u64 {
    let s = order.len();
    occ[1..=s].fill(0);
    let mut count = 0;
    for &v in order {
        let i = v as usize + 1;
        if occ[i - 1] == 0 && occ[i + 1] == 0 {
            occ[i] = 1;
            count += 1;
        }
    }
    count
}

/// Exact distribution of the jammed count on the path `{0, …, s-1}` under
/// `boundary` (only the values at -1 and s matter), by enumerating all
/// `s!` visiting orders.
pub fn enumerate_jam(s: usize, boundary: &BoundaryCondition) -> Result<ExactDistribution> {
    if s == 0 || s > MAX_ORACLE_SIZE {
        return Err(Error::invalid("size", format!("{s} is outside 1..={MAX_ORACLE_SIZE}")));
    }
    for site in boundary.occupied() {
        if site.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: site.dim(),
            });
        }
        let x = site.coord(0);
        if x >= 0 && (x as usize) < s {
            return Err(Error::BoundaryInsideRegion(*site));
        }
    }
    let left = boundary.get(&Site::at(-1));
    let right = boundary.get(&Site::at(s as i32));

    // One block of (s-1)! orders per first visited site.
    let counts = (0..s as u8)
        .into_par_iter()
        .map(|first| {
            let mut rest: Vec<u8> = (0..s as u8).filter(|&v| v != first).collect();
            let mut order = vec![first; s];
            let mut occ = vec![0u8; s + 2];
            occ[0] = left;
            occ[s + 1] = right;
            let mut counts = vec![0u64; s + 1];
            loop {
                order[1..].copy_from_slice(&rest);
                counts[sweep(&order, &mut occ) as usize] += 1;
                if !next_permutation(&mut rest) {
                    break;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; s + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let total = factorial_big(s as u64);
    let support = counts
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .map(|(k, c)| (k as u64, BigRational::new(BigInt::from(c), total.clone())))
        .collect();
    Ok(ExactDistribution { size: s, support })
}

/// Exact free-boundary means `E[N̄]` for path sizes `1..=s_max`.
pub fn oracle_mean_curve(s_max: usize) -> Result<Vec<(usize, BigRational)>> {
    if s_max == 0 || s_max > MAX_ORACLE_SIZE {
        return Err(Error::invalid(
            "s_max",
            format!("{s_max} is outside 1..={MAX_ORACLE_SIZE}"),
        ));
    }
    (1..=s_max)
        .map(|s| Ok((s, enumerate_jam(s, &BoundaryCondition::zero())?.mean())))
        .collect()
}
