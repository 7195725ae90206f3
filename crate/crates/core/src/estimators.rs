//! Monte Carlo estimators: density, covariance, CLT and LIL diagnostics,
//! concentration tails and the d = 1 boundary coupling.
//!
//! Replicate `r` uses the field seeded with `seed + r`. Replicates run in
//! parallel but are collected in index order and reduced sequentially, so
//! every result is bit-identical for any worker count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::armour::{sample_window, sample_x};
use crate::bounds;
use crate::error::{Error, Result};
use crate::exact1d::rho_closed_form;
use crate::field::{check_dim, word_to_unit, Seed, Site, UniformField};
use crate::lattice::{displacements, BoxRegion};
use crate::parking::jam_box;
use crate::stats::{self, standard_normal_cdf, IntMoments, KsResult};

/// Salt separating the CLT jitter stream from the marks.
const JITTER_SALT: u64 = 0x6a09_e667_f3bc_c908;

/// Shell increments of the covariance sum below this are treated as zero.
pub const TRUNCATION_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Exact samples of the infinite-volume limit via armours.
    Thermodynamic,
    /// Box jammed with the all-zero boundary.
    FreeBoundary,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Thermodynamic => "thermodynamic",
            Mode::FreeBoundary => "free-boundary",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "thermodynamic" | "thermo" => Ok(Mode::Thermodynamic),
            "free-boundary" | "free" => Ok(Mode::FreeBoundary),
            _ => Err(Error::invalid(
                "mode",
                format!("unknown mode `{s}` (expected thermo or free)"),
            )),
        }
    }
}

fn check_min(name: &'static str, value: u64, min: u64) -> Result<()> {
    if value < min {
        Err(Error::invalid(name, format!("must be at least {min}, got {value}")))
    } else {
        Ok(())
    }
}

/// Field for replicate `r`.
pub fn replicate_field(seed: Seed, r: u64, d: usize) -> Result<UniformField> {
    UniformField::new(seed.replicate(r), d)
}

/// Runs `f` for every replicate index and returns the results in index
/// order. The first failing replicate (by index) determines the error.
pub fn per_replicate<T, F>(replicates: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let out: Vec<Result<T>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            f(r).map_err(|e| Error::Replicate {
                replicate: r,
                source: Box::new(e),
            })
        })
        .collect();
    out.into_iter().collect()
}

/// Occupied count on `b` under `mode`.
pub fn sample_count(field: &UniformField, b: &BoxRegion, mode: Mode, cap: u32) -> Result<u64> {
    match mode {
        Mode::Thermodynamic if b.radius == 0 => sample_x(field, &b.center, cap).map(u64::from),
        Mode::Thermodynamic => Ok(sample_window(field, b, cap)?.count_occupied()),
        Mode::FreeBoundary => Ok(jam_box(field, b)?.count_occupied()),
    }
}

/// Occupied counts on `Λ_n` for replicates `0..replicates`.
pub fn sample_counts(d: usize, n: u32, replicates: u64, seed: Seed, mode: Mode, cap: u32) -> Result<Vec<u64>> {
    check_dim(d)?;
    let b = BoxRegion::centered(d, n)?;
    per_replicate(replicates, |r| {
        sample_count(&replicate_field(seed, r, d)?, &b, mode, cap)
    })
}

/// `ρ` used to centre counts: exact in d = 1, otherwise the pooled
/// estimate supplied by the caller.
fn centring_rho(d: usize, pooled: impl FnOnce() -> f64) -> (f64, bool) {
    if d == 1 {
        (rho_closed_form(), true)
    } else {
        (pooled(), false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub replicates: u64,
    pub n: u32,
    pub d: usize,
    pub mode: Mode,
}

/// Mean occupied fraction of `Λ_n` over independent replicates.
pub fn estimate_density(
    d: usize,
    n: u32,
    replicates: u64,
    seed: Seed,
    mode: Mode,
    cap: u32,
) -> Result<DensityEstimate> {
    check_min("replicates", replicates, 2)?;
    let counts = sample_counts(d, n, replicates, seed, mode, cap)?;
    let m = moments(&counts);
    let volume = BoxRegion::centered(d, n)?.len() as f64;
    Ok(DensityEstimate {
        mean: m.mean() / volume,
        stderr: m.stderr() / volume,
        replicates,
        n,
        d,
        mode,
    })
}

fn moments(xs: &[u64]) -> IntMoments {
    let mut m = IntMoments::default();
    for &x in xs {
        m.push(x);
    }
    m
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceRatio {
    /// `Var(N_n) / |Λ_n|`.
    pub ratio: f64,
    pub stderr: f64,
    pub mean_count: f64,
    pub replicates: u64,
    pub n: u32,
    pub d: usize,
    pub mode: Mode,
}

/// Estimate of `Var(N_n)/|Λ_n|`, whose limit is `σ²`.
pub fn estimate_variance_ratio(
    d: usize,
    n: u32,
    replicates: u64,
    seed: Seed,
    mode: Mode,
    cap: u32,
) -> Result<VarianceRatio> {
    check_min("replicates", replicates, 4)?;
    let counts = sample_counts(d, n, replicates, seed, mode, cap)?;
    let m = moments(&counts);
    let mean = m.mean();
    let var = m.variance();
    // Var(s²) ≈ (μ₄ - σ⁴) / R.
    let mu4 = counts.iter().map(|&c| (c as f64 - mean).powi(4)).sum::<f64>() / counts.len() as f64;
    let volume = BoxRegion::centered(d, n)?.len() as f64;
    Ok(VarianceRatio {
        ratio: var / volume,
        stderr: ((mu4 - var * var).max(0.0) / replicates as f64).sqrt() / volume,
        mean_count: mean,
        replicates,
        n,
        d,
        mode,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEntry {
    pub displacement: Site,
    pub covariance: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceTable {
    pub d: usize,
    pub r_max: u32,
    pub samples: u64,
    /// Estimate of `P(X(0) = 1)`.
    pub p0: f64,
    /// Entries in row-major displacement order.
    pub entries: Vec<CovarianceEntry>,
    /// `Σ_{‖i‖ ≤ r_max} Cov(X(0), X(i))`.
    pub sigma2_truncated: f64,
    /// Cumulative covariance sum over `‖i‖ ≤ r`, for `r = 0..=r_max`.
    pub sigma2_by_radius: Vec<f64>,
    /// Standard error of each cumulative sum.
    pub sigma2_stderr_by_radius: Vec<f64>,
    /// First radius whose shell increment is below [`TRUNCATION_TOL`] (or
    /// within three standard errors of zero).
    pub truncation_radius: Option<u32>,
}

impl CovarianceTable {
    pub fn entry(&self, displacement: &Site) -> Option<&CovarianceEntry> {
        self.entries.iter().find(|e| e.displacement == *displacement)
    }

    /// `σ²` at the truncation radius, or at `r_max` if none was found.
    pub fn sigma2(&self) -> f64 {
        let r = self.truncation_radius.unwrap_or(self.r_max);
        self.sigma2_by_radius[r as usize]
    }
}

/// Joint samples of `X(0)` and `X(i)`, `‖i‖_max ≤ r_max`, one thermodynamic
/// window per replicate.
pub fn estimate_covariance(d: usize, r_max: u32, samples: u64, seed: Seed, cap: u32) -> Result<CovarianceTable> {
    check_dim(d)?;
    check_min("r-max", r_max as u64, 1)?;
    check_min("samples", samples, 2)?;
    let window = BoxRegion::centered(d, r_max)?;
    let offsets = displacements(d, r_max)?;
    let origin = offsets.len() / 2;
    let windows: Vec<Vec<u8>> = per_replicate(samples, |r| {
        let c = sample_window(&replicate_field(seed, r, d)?, &window, cap)?;
        Ok(offsets.iter().map(|s| c.get(s).unwrap_or(0)).collect())
    })?;

    let k = offsets.len();
    let mut ones = vec![0u64; k];
    let mut both = vec![0u64; k];
    for w in &windows {
        let x0 = w[origin] as u64;
        for (j, &x) in w.iter().enumerate() {
            ones[j] += x as u64;
            both[j] += x0 * x as u64;
        }
    }
    let r_count = samples as f64;
    let p: Vec<f64> = ones.iter().map(|&c| c as f64 / r_count).collect();
    let p0 = p[origin];

    // Influence function of Cov_j = p11_j - p0 p_j:
    // X0 Xj - p0 Xj - p_j X0. Shell and cumulative sums add the influences.
    let influence = |w: &[u8], j: usize| -> f64 {
        let x0 = w[origin] as f64;
        let xj = w[j] as f64;
        x0 * xj - p0 * xj - p[j] * x0
    };
    let entries: Vec<CovarianceEntry> = offsets
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let cov = both[j] as f64 / r_count - p0 * p[j];
            let fs: Vec<f64> = windows.iter().map(|w| influence(w, j)).collect();
            CovarianceEntry {
                displacement: *s,
                covariance: cov,
                stderr: (stats::variance(&fs) / r_count).sqrt(),
            }
        })
        .collect();

    let mut sigma2_by_radius = Vec::with_capacity(r_max as usize + 1);
    let mut sigma2_stderr_by_radius = Vec::with_capacity(r_max as usize + 1);
    let mut truncation_radius = None;
    let mut prev = 0.0;
    for r in 0..=r_max {
        let inside: Vec<usize> = (0..k).filter(|&j| offsets[j].max_norm() <= r).collect();
        let total: f64 = inside.iter().map(|&j| entries[j].covariance).sum();
        let fs: Vec<f64> = windows
            .iter()
            .map(|w| inside.iter().map(|&j| influence(w, j)).sum())
            .collect();
        let se = (stats::variance(&fs) / r_count).sqrt();
        if r >= 1 && truncation_radius.is_none() {
            let shell: Vec<usize> = (0..k).filter(|&j| offsets[j].max_norm() == r).collect();
            let fs: Vec<f64> = windows
                .iter()
                .map(|w| shell.iter().map(|&j| influence(w, j)).sum())
                .collect();
            let shell_se = (stats::variance(&fs) / r_count).sqrt();
            let inc = (total - prev).abs();
            if inc < TRUNCATION_TOL || inc < 3.0 * shell_se {
                truncation_radius = Some(r);
            }
        }
        prev = total;
        sigma2_by_radius.push(total);
        sigma2_stderr_by_radius.push(se);
    }
    Ok(CovarianceTable {
        d,
        r_max,
        samples,
        p0,
        entries,
        sigma2_truncated: *sigma2_by_radius.last().expect("r_max >= 1"),
        sigma2_by_radius,
        sigma2_stderr_by_radius,
        truncation_radius,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub d: usize,
    pub n: u32,
    pub replicates: u64,
    pub mode: Mode,
    pub mean: f64,
    pub sd: f64,
    /// KS test of the jittered, standardized counts.
    pub ks: KsResult,
    /// KS test of the raw integer counts (lattice-valued, so it rejects
    /// for large samples).
    pub ks_raw: KsResult,
    pub counts: Vec<u64>,
    pub standardized: Vec<f64>,
}

/// Standardizes `xs` by sample moments and tests against N(0,1).
pub fn clt_from_samples(xs: &[f64]) -> Result<(Vec<f64>, KsResult)> {
    let z = stats::standardize(xs)?;
    let ks = stats::ks_test(&z, standard_normal_cdf)?;
    Ok((z, ks))
}

/// Uniform jitter on (-1/2, 1/2) for replicate `r`, independent of the marks.
fn jitter(seed: Seed, r: u64) -> f64 {
    let f = UniformField::new(Seed(seed.0 ^ JITTER_SALT).replicate(r), 1).expect("d = 1");
    word_to_unit(f.word_at(&Site::at(0))) - 0.5
}

/// CLT shape check for `N_n`. Counts are integers, so each is spread by an
/// independent uniform on (-1/2, 1/2) before the KS test; the unjittered
/// test is reported too.
pub fn clt_diagnostic(d: usize, n: u32, replicates: u64, seed: Seed, mode: Mode, cap: u32) -> Result<CltReport> {
    check_min("replicates", replicates, 1000)?;
    let counts = sample_counts(d, n, replicates, seed, mode, cap)?;
    let raw: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let jittered: Vec<f64> = counts
        .iter()
        .enumerate()
        .map(|(r, &c)| c as f64 + jitter(seed, r as u64))
        .collect();
    let (z, ks) = clt_from_samples(&jittered)?;
    let (_, ks_raw) = clt_from_samples(&raw)?;
    Ok(CltReport {
        d,
        n,
        replicates,
        mode,
        mean: stats::mean(&raw),
        sd: stats::variance(&raw).sqrt(),
        ks,
        ks_raw,
        counts,
        standardized: z,
    })
}

/// `(N - ρ|Λ|) / √(2σ²|Λ| log log |Λ|)`.
pub fn lil_statistic(count: f64, rho: f64, volume: f64, sigma2: f64) -> f64 {
    let num = count - rho * volume;
    if num == 0.0 {
        return 0.0;
    }
    num / (2.0 * sigma2 * volume * volume.ln().ln()).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LilReport {
    pub d: usize,
    pub n_list: Vec<u32>,
    pub volumes: Vec<u64>,
    pub replicates: u64,
    pub rho: f64,
    pub rho_exact: bool,
    pub sigma2: f64,
    /// `paths[r][k]` is `R_{n_k}` for replicate `r`.
    pub paths: Vec<Vec<f64>>,
    /// `max_r max_{j ≤ k} R_{n_j}`.
    pub running_max: Vec<f64>,
    /// `max_r max_{j ≤ k} |R_{n_j}|`.
    pub running_max_abs: Vec<f64>,
}

/// LIL paths `R_n` over nested thermodynamic boxes. Each replicate samples
/// the largest box once and reads the smaller counts from it.
pub fn lil_diagnostic(
    d: usize,
    n_list: &[u32],
    replicates: u64,
    seed: Seed,
    sigma2: f64,
    cap: u32,
) -> Result<LilReport> {
    check_dim(d)?;
    check_min("replicates", replicates, 1)?;
    if n_list.is_empty() {
        return Err(Error::invalid("n-list", "must not be empty"));
    }
    if let Some(&n) = n_list.iter().find(|&&n| n == 0) {
        return Err(Error::invalid(
            "n-list",
            format!("n = {n} gives |Λ_n| = 1; log log |Λ_n| needs |Λ_n| >= 3"),
        ));
    }
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::invalid("sigma2", "must be positive and finite"));
    }
    let n_max = *n_list.iter().max().expect("non-empty");
    let window = BoxRegion::centered(d, n_max)?;
    // shells[r][k] = occupied sites at max-norm k.
    let shells: Vec<Vec<u64>> = per_replicate(replicates, |r| {
        let c = sample_window(&replicate_field(seed, r, d)?, &window, cap)?;
        let mut by_norm = vec![0u64; n_max as usize + 1];
        for (s, &x) in c.sites().iter().zip(c.occupancy()) {
            by_norm[s.max_norm() as usize] += x as u64;
        }
        Ok(by_norm)
    })?;
    let counts: Vec<Vec<u64>> = shells
        .iter()
        .map(|by_norm| {
            let mut acc = 0;
            let cum: Vec<u64> = by_norm
                .iter()
                .map(|c| {
                    acc += c;
                    acc
                })
                .collect();
            n_list.iter().map(|&n| cum[n as usize]).collect()
        })
        .collect();
    let volumes: Vec<u64> = n_list
        .iter()
        .map(|&n| BoxRegion::centered(d, n).map(|b| b.len()))
        .collect::<Result<_>>()?;
    let vmax = window.len() as f64;
    let (rho, rho_exact) = centring_rho(d, || {
        counts
            .iter()
            .map(|c| c[n_list.iter().position(|&n| n == n_max).unwrap()] as f64)
            .sum::<f64>()
            / (replicates as f64 * vmax)
    });
    let paths: Vec<Vec<f64>> = counts
        .iter()
        .map(|c| {
            c.iter()
                .zip(&volumes)
                .map(|(&k, &v)| lil_statistic(k as f64, rho, v as f64, sigma2))
                .collect()
        })
        .collect();
    let mut running_max = Vec::with_capacity(n_list.len());
    let mut running_max_abs = Vec::with_capacity(n_list.len());
    let (mut hi, mut hi_abs) = (f64::NEG_INFINITY, 0.0f64);
    for k in 0..n_list.len() {
        for p in &paths {
            hi = hi.max(p[k]);
            hi_abs = hi_abs.max(p[k].abs());
        }
        running_max.push(hi);
        running_max_abs.push(hi_abs);
    }
    Ok(LilReport {
        d,
        n_list: n_list.to_vec(),
        volumes,
        replicates,
        rho,
        rho_exact,
        sigma2,
        paths,
        running_max,
        running_max_abs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    /// `ε` for concentration tails, `M` for the coupling discrepancy.
    pub threshold: f64,
    pub exceed: u64,
    pub empirical: f64,
    pub stderr: f64,
    pub bound: f64,
}

impl TailRow {
    fn new(threshold: f64, exceed: u64, replicates: u64, bound: f64) -> TailRow {
        let p = exceed as f64 / replicates as f64;
        TailRow {
            threshold,
            exceed,
            empirical: p,
            stderr: (p * (1.0 - p) / replicates as f64).sqrt(),
            bound,
        }
    }

    /// `empirical ≤ bound + k·stderr`.
    pub fn within(&self, k: f64) -> bool {
        self.empirical <= self.bound + k * self.stderr
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub d: usize,
    pub n: u32,
    pub replicates: u64,
    pub mode: Mode,
    /// Centring density; `None` for the coupling discrepancy.
    pub rho: Option<f64>,
    pub rho_exact: bool,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    pub fn all_within(&self, k: f64) -> bool {
        self.rows.iter().all(|r| r.within(k))
    }
}

fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(name, "must not be empty"));
    }
    if let Some(x) = grid.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::invalid(
            name,
            format!("entries must be finite and >= 0, got {x}"),
        ));
    }
    Ok(())
}

/// Empirical `P(|N - ρ|Λ_n|| > ε)` against the matching analytic bound.
pub fn concentration_empirics(
    d: usize,
    n: u32,
    replicates: u64,
    eps_grid: &[f64],
    seed: Seed,
    mode: Mode,
    cap: u32,
) -> Result<TailReport> {
    check_dim(d)?;
    check_min("replicates", replicates, 1000)?;
    check_grid("eps", eps_grid)?;
    if mode == Mode::FreeBoundary && d != 1 {
        return Err(Error::invalid(
            "mode",
            "the free-boundary concentration bound is only available in d = 1",
        ));
    }
    let counts = sample_counts(d, n, replicates, seed, mode, cap)?;
    let volume = BoxRegion::centered(d, n)?.len() as f64;
    let (rho, rho_exact) = centring_rho(d, || moments(&counts).mean() / volume);
    let centre = rho * volume;
    let rows = eps_grid
        .iter()
        .map(|&eps| {
            let exceed = counts.iter().filter(|&&c| (c as f64 - centre).abs() > eps).count() as u64;
            let bound = match mode {
                Mode::Thermodynamic => bounds::concentration_bound(d as u32, n, eps)?,
                Mode::FreeBoundary => bounds::concentration_bound_free(n, eps)?,
            };
            Ok(TailRow::new(eps, exceed, replicates, bound))
        })
        .collect::<Result<_>>()?;
    Ok(TailReport {
        d,
        n,
        replicates,
        mode,
        rho: Some(rho),
        rho_exact,
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoupledCounts {
    /// Thermodynamic count `N_n`.
    pub thermodynamic: u64,
    /// Free-boundary count `N̄_n`.
    pub free: u64,
}

impl CoupledCounts {
    pub fn discrepancy(&self) -> u64 {
        self.thermodynamic.abs_diff(self.free)
    }
}

/// `N_n` and `N̄_n` on one field per replicate.
pub fn coupled_counts(d: usize, n: u32, replicates: u64, seed: Seed, cap: u32) -> Result<Vec<CoupledCounts>> {
    check_dim(d)?;
    let b = BoxRegion::centered(d, n)?;
    per_replicate(replicates, |r| {
        let f = replicate_field(seed, r, d)?;
        Ok(CoupledCounts {
            thermodynamic: sample_count(&f, &b, Mode::Thermodynamic, cap)?,
            free: sample_count(&f, &b, Mode::FreeBoundary, cap)?,
        })
    })
}

/// Empirical `P(|N_n - N̄_n| > M)` against `2/⌈M/2+2⌉!` in d = 1.
pub fn coupling_discrepancy(
    d: usize,
    n: u32,
    replicates: u64,
    seed: Seed,
    m_grid: &[f64],
    cap: u32,
) -> Result<TailReport> {
    if d != 1 {
        return Err(Error::invalid(
            "d",
            "the coupling discrepancy is only defined for d = 1",
        ));
    }
    check_min("replicates", replicates, 1)?;
    check_grid("m", m_grid)?;
    let pairs = coupled_counts(d, n, replicates, seed, cap)?;
    let rows = m_grid
        .iter()
        .map(|&m| {
            let exceed = pairs.iter().filter(|p| p.discrepancy() as f64 > m).count() as u64;
            Ok(TailRow::new(m, exceed, replicates, bounds::coupling_bound(m)?))
        })
        .collect::<Result<_>>()?;
    Ok(TailReport {
        d,
        n,
        replicates,
        mode: Mode::FreeBoundary,
        rho: None,
        rho_exact: false,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanDeviation {
    pub n: u32,
    pub replicates: u64,
    pub mean_count: f64,
    pub stderr: f64,
    /// `ρ(2n+1)`.
    pub expected: f64,
    pub deviation: f64,
    pub bound: f64,
}

impl MeanDeviation {
    pub fn within(&self, k: f64) -> bool {
        self.deviation <= self.bound + k * self.stderr
    }
}

/// `|E N̄_n - ρ|Λ_n||` in d = 1 against `2(e-1)`.
pub fn mean_deviation(n: u32, replicates: u64, seed: Seed) -> Result<MeanDeviation> {
    check_min("n", n as u64, 1)?;
    check_min("replicates", replicates, 2)?;
    let counts = sample_counts(1, n, replicates, seed, Mode::FreeBoundary, crate::armour::DEFAULT_CAP)?;
    let m = moments(&counts);
    let expected = rho_closed_form() * (2 * n + 1) as f64;
    Ok(MeanDeviation {
        n,
        replicates,
        mean_count: m.mean(),
        stderr: m.stderr(),
        expected,
        deviation: (m.mean() - expected).abs(),
        bound: bounds::mean_dev_bound(1, n)?,
    })
}
