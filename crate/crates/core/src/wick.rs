//! Gaussian moments through pair partitions, and the truncated moment and
//! cumulant generating series of the weighted noise `Ξ = ψ ξ`.
//!
//! Every moment integral is evaluated through `E[(∫₀ᵗ Ξ du)^m] / m!`, where
//! `∫₀ᵗ Ξ du ~ Normal(0, φ(t))`. By Isserlis' theorem the m-th moment is a
//! sum over the perfect matchings of `{1..m}`, each contributing `φ^{m/2}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::paths::{self, SeedSpec};
use crate::psi::{self, IntegrandSpec, PhiMethod, DEFAULT_TOL};
use crate::stats;

/// Largest order enumerated explicitly; `13!! = 135135` matchings.
pub const MAX_ORDER: usize = 14;

/// A perfect matching of `{1..m}` as pairs `(i, j)` with `i < j`, sorted by
/// first element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PairPartition {
    pub pairs: Vec<(usize, usize)>,
}

impl PairPartition {
    pub fn order(&self) -> usize {
        2 * self.pairs.len()
    }
}

/// Per-order terms of a truncated generating series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesTruncation {
    pub beta: f64,
    pub orders: Vec<(usize, f64)>,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRelation {
    pub gap: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

/// `n!!` with `(−1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> u128 {
    let mut acc: u128 = 1;
    let mut k = n;
    while k > 1 {
        acc *= k as u128;
        k -= 2;
    }
    acc
}

/// Number of perfect matchings of `m` points: `(m−1)!!` for even m, else 0.
pub fn pairing_count(m: usize) -> u128 {
    if m % 2 == 1 {
        0
    } else {
        double_factorial(m as i64 - 1)
    }
}

fn guard(m: usize) -> Result<()> {
    if m > MAX_ORDER {
        return Err(Error::Capacity { order: m, limit: MAX_ORDER, count: pairing_count(m) });
    }
    Ok(())
}

/// All perfect matchings of `{1..m}` in lexicographic order.
pub fn enumerate_pairings(m: usize) -> Result<Vec<PairPartition>> {
    guard(m)?;
    if m % 2 == 1 {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(pairing_count(m) as usize);
    let remaining: Vec<usize> = (1..=m).collect();
    let mut current = Vec::with_capacity(m / 2);
    extend(&remaining, &mut current, &mut out);
    Ok(out)
}

fn extend(remaining: &[usize], current: &mut Vec<(usize, usize)>, out: &mut Vec<PairPartition>) {
    let Some((&first, rest)) = remaining.split_first() else {
        out.push(PairPartition { pairs: current.clone() });
        return;
    };
    let mut others = Vec::with_capacity(rest.len().saturating_sub(1));
    for k in 0..rest.len() {
        others.clear();
        others.extend(rest.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &v)| v));
        current.push((first, rest[k]));
        extend(&others, current, out);
        current.pop();
    }
}

/// `E S^m` for `S ~ Normal(0, variance)`, by summing over pair partitions.
pub fn gaussian_moment(variance: f64, m: usize) -> Result<f64> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::InvalidArgument(format!("variance must be nonnegative, got {variance}")));
    }
    let pairings = enumerate_pairings(m)?;
    // every pair contributes one factor of the (common) covariance
    let weight = pairings.len() as u64;
    Ok(weight as f64 * variance.powi((m / 2) as i32))
}

fn factorial(m: usize) -> f64 {
    (1..=m as u64).product::<u64>() as f64
}

fn finite_phi(spec: &IntegrandSpec, t: f64) -> Result<f64> {
    psi::phi(spec, t, PhiMethod::Auto, DEFAULT_TOL)
}

/// MGF series `Σ_{m=0}^{M} E[(∫Ξ)^m] / m!` with β = 1.
pub fn mgf_truncated(spec: &IntegrandSpec, t: f64, order: usize) -> Result<SeriesTruncation> {
    guard(order)?;
    let phi = finite_phi(spec, t)?;
    let mut orders = Vec::with_capacity(order + 1);
    for m in 0..=order {
        orders.push((m, gaussian_moment(phi, m)? / factorial(m)));
    }
    let total = orders.iter().map(|o| o.1).sum();
    Ok(SeriesTruncation { beta: 1.0, orders, total })
}

/// CGF series `Σ_{m=1}^{M} κ_m / m!` with β = 1. Only the second cumulant
/// of a centred Gaussian is nonzero, so orders 1 and ≥ 3 are literal zeros.
pub fn cgf_truncated(spec: &IntegrandSpec, t: f64, order: usize) -> Result<SeriesTruncation> {
    if order < 2 {
        return Err(Error::InvalidArgument(format!("cgf order must be at least 2, got {order}")));
    }
    guard(order)?;
    let phi = finite_phi(spec, t)?;
    let orders: Vec<(usize, f64)> = (1..=order)
        .map(|m| match m {
            2 => (m, 0.5 * phi),
            _ => (m, 0.0),
        })
        .collect();
    let total = orders.iter().map(|o| o.1).sum();
    Ok(SeriesTruncation { beta: 1.0, orders, total })
}

/// Compares `log(MGF_M)` with `CGF_M`. The bound uses the first omitted even
/// MGF term `R₀`, scaled to `R = R₀·exp(φ/2)`, as a bound on the tail:
/// `bound = log(1 + R / (total − R))`.
pub fn check_log_relation(spec: &IntegrandSpec, t: f64, order: usize) -> Result<LogRelation> {
    if order < 2 || order % 2 == 1 {
        return Err(Error::InvalidArgument(format!("log relation needs an even order ≥ 2, got {order}")));
    }
    let mgf = mgf_truncated(spec, t, order)?;
    let cgf = cgf_truncated(spec, t, order)?;
    if !(mgf.total > 0.0) {
        return Err(Error::InvalidArgument(format!("mgf total must be positive, got {}", mgf.total)));
    }
    let phi = 2.0 * cgf.orders[1].1;
    let gap = (mgf.total.ln() - cgf.total).abs();
    let next = order + 2;
    let omitted = pairing_count(next) as f64 * phi.powi((next / 2) as i32) / factorial(next);
    let r = omitted * (0.5 * phi).exp();
    let bound = if mgf.total > r { (r / (mgf.total - r)).ln_1p() } else { f64::INFINITY };
    Ok(LogRelation { gap, bound, pass: gap <= bound })
}

/// `E Z(t)` assembled from the series: `exp(−½φ + CGF_M)`, which is
/// exactly one whenever φ is finite.
pub fn series_expectation(spec: &IntegrandSpec, t: f64, order: usize) -> Result<f64> {
    let cgf = cgf_truncated(spec, t, order)?;
    let phi = finite_phi(spec, t)?;
    Ok((cgf.total - 0.5 * phi).exp())
}

/// Monte Carlo estimate of `E[(Σ ψ(t_j) ΔB_j)^m]` from fresh increments.
/// Only a cross-check for [`gaussian_moment`].
pub fn discrete_moment_oracle(
    spec: &IntegrandSpec,
    grid: &TimeGrid,
    m: usize,
    n_mc: usize,
    seed: SeedSpec,
) -> Result<MomentEstimate> {
    if m > 8 {
        return Err(Error::InvalidArgument(format!("oracle supports m ≤ 8, got {m}")));
    }
    if n_mc < 10_000 {
        return Err(Error::TooFewSamples { n: n_mc, required: 10_000 });
    }
    let sums = paths::terminal_ito(spec, grid, n_mc, seed)?;
    let powers: Vec<f64> = sums.iter().map(|s| s.powi(m as i32)).collect();
    Ok(MomentEstimate { mean: stats::mean(&powers), std_error: stats::naive_se(&powers), n: n_mc })
}
