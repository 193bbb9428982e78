//! Brownian increments, Itô integrals and the stochastic exponential on a
//! time grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Scheme;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::psi::{self, IntegrandSpec, NovikovVerdict};
use crate::rng::RowRng;

/// Identifies a reproducible batch of draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SeedSpec {
    pub seed: u64,
    pub stream: u64,
}

impl SeedSpec {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }
}

/// Dense row-major matrix with one row per path.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// SHA-256 over the little-endian bytes of the entries, hex encoded.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.data {
            h.update(v.to_le_bytes());
        }
        hex(&h.finalize())
    }

    fn par_rows_mut(&mut self) -> impl IndexedParallelIterator<Item = (usize, &mut [f64])> {
        // a zero-width matrix still has rows; chunking needs a nonzero size
        let cols = self.cols.max(1);
        self.data.par_chunks_mut(cols).enumerate()
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Simulated paths on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub grid: TimeGrid,
    pub n_paths: usize,
    pub seed: SeedSpec,
    pub scheme: Scheme,
    /// Rows come in (+ΔB, −ΔB) pairs.
    pub antithetic: bool,
    /// `n_paths × N` Brownian increments.
    pub increments: Matrix,
    /// `n_paths × (N+1)` left-endpoint Itô sums.
    pub ito: Matrix,
    /// `n_paths × (N+1)` values of Z.
    pub z: Matrix,
    /// Discrete compensator `φ_N(t_j)` per node.
    pub compensator: Vec<f64>,
    /// Number of entries of `z` that are ≤ 0 (Euler–Maruyama only).
    pub nonpositive: usize,
}

impl PathBundle {
    pub fn n_nodes(&self) -> usize {
        self.grid.n_nodes()
    }

    /// Copy with `z[·][j]` multiplied by `exp(rate · (t_j − t_from))` for
    /// every `j ≥ from_index`. Used to check that the martingale tests have
    /// power against a known drift.
    pub fn with_injected_drift(&self, rate: f64, from_index: usize) -> PathBundle {
        let mut out = self.clone();
        let t = self.grid.times();
        let factors: Vec<f64> = t
            .iter()
            .enumerate()
            .map(|(j, &tj)| if j >= from_index { (rate * (tj - t[from_index])).exp() } else { 1.0 })
            .collect();
        out.z.par_rows_mut().for_each(|(_, row)| {
            for (v, f) in row.iter_mut().zip(&factors) {
                *v *= f;
            }
        });
        out
    }
}

fn validate_paths(n_paths: usize, antithetic: bool) -> Result<()> {
    if n_paths == 0 {
        return Err(Error::InvalidArgument("n_paths must be at least 1".into()));
    }
    if antithetic && !n_paths.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("antithetic sampling needs an even path count, got {n_paths}")));
    }
    Ok(())
}

/// Fill one row of increments. With antithetic pairing, rows `2k` and
/// `2k+1` share the normals of source row `k` with opposite signs.
fn fill_increments(row: &mut [f64], r: usize, sqrt_dt: &[f64], seed: SeedSpec, antithetic: bool) {
    let (source, sign) = if antithetic { (r / 2, if r.is_multiple_of(2) { 1.0 } else { -1.0 }) } else { (r, 1.0) };
    let mut rng = RowRng::new(seed.seed, seed.stream, source as u64);
    for (v, s) in row.iter_mut().zip(sqrt_dt) {
        *v = sign * s * rng.standard_normal();
    }
}

fn sqrt_steps(grid: &TimeGrid) -> Vec<f64> {
    (0..grid.n_steps()).map(|i| grid.dt(i).sqrt()).collect()
}

/// Independent `Normal(0, Δt_i)` increments, one row per path.
pub fn sample_brownian(grid: &TimeGrid, n_paths: usize, seed: SeedSpec) -> Result<Matrix> {
    sample_brownian_with(grid, n_paths, seed, false)
}

pub fn sample_brownian_with(grid: &TimeGrid, n_paths: usize, seed: SeedSpec, antithetic: bool) -> Result<Matrix> {
    validate_paths(n_paths, antithetic)?;
    let sqrt_dt = sqrt_steps(grid);
    let mut m = Matrix::zeros(n_paths, grid.n_steps());
    m.par_rows_mut().for_each(|(r, row)| fill_increments(row, r, &sqrt_dt, seed, antithetic));
    Ok(m)
}

/// Left-endpoint Itô sums `I(t_{j+1}) = I(t_j) + ψ(t_j) ΔB_j`.
pub fn ito_integral(spec: &IntegrandSpec, increments: &Matrix, grid: &TimeGrid) -> Result<Matrix> {
    if increments.cols() != grid.n_steps() {
        return Err(Error::InvalidArgument(format!(
            "increments have {} columns, grid has {} steps",
            increments.cols(),
            grid.n_steps()
        )));
    }
    let psi = psi::left_values(spec, grid)?;
    let mut ito = Matrix::zeros(increments.rows(), grid.n_nodes());
    ito.par_rows_mut().for_each(|(r, row)| {
        let db = increments.row(r);
        let mut acc = 0.0;
        for j in 0..db.len() {
            acc += psi[j] * db[j];
            row[j + 1] = acc;
        }
    });
    Ok(ito)
}

fn require_finite(spec: &IntegrandSpec, grid: &TimeGrid) -> Result<()> {
    let report = psi::novikov_check(spec, grid.horizon())?;
    match report.verdict {
        NovikovVerdict::Finite => Ok(()),
        NovikovVerdict::Divergent => {
            Err(Error::Divergent { horizon: grid.horizon(), diverged_at: report.diverged_at.unwrap_or(grid.horizon()) })
        }
    }
}

/// `Z = exp(I − ½φ_N)` on every node.
pub fn stoch_exp_exact(spec: &IntegrandSpec, grid: &TimeGrid, n_paths: usize, seed: SeedSpec) -> Result<PathBundle> {
    simulate(spec, grid, n_paths, seed, Scheme::Exact, false)
}

/// Euler–Maruyama `Z_{j+1} = Z_j (1 + ψ(t_j) ΔB_j)`, driven by the same
/// increments as [`stoch_exp_exact`] for equal seeds.
pub fn stoch_exp_em(spec: &IntegrandSpec, grid: &TimeGrid, n_paths: usize, seed: SeedSpec) -> Result<PathBundle> {
    simulate(spec, grid, n_paths, seed, Scheme::Em, false)
}

pub fn simulate(
    spec: &IntegrandSpec,
    grid: &TimeGrid,
    n_paths: usize,
    seed: SeedSpec,
    scheme: Scheme,
    antithetic: bool,
) -> Result<PathBundle> {
    require_finite(spec, grid)?;
    let increments = sample_brownian_with(grid, n_paths, seed, antithetic)?;
    let ito = ito_integral(spec, &increments, grid)?;
    let compensator = psi::discrete_compensator(spec, grid)?;
    let psi = psi::left_values(spec, grid)?;
    let mut z = Matrix::zeros(n_paths, grid.n_nodes());
    match scheme {
        Scheme::Exact => z.par_rows_mut().for_each(|(r, row)| {
            for (j, (v, i)) in row.iter_mut().zip(ito.row(r)).enumerate() {
                *v = (i - 0.5 * compensator[j]).exp();
            }
        }),
        Scheme::Em => z.par_rows_mut().for_each(|(r, row)| {
            let db = increments.row(r);
            row[0] = 1.0;
            for j in 0..db.len() {
                row[j + 1] = row[j] * (1.0 + psi[j] * db[j]);
            }
        }),
    }
    let nonpositive = z.as_slice().iter().filter(|&&v| v <= 0.0).count();
    Ok(PathBundle {
        grid: grid.clone(),
        n_paths,
        seed,
        scheme,
        antithetic,
        increments,
        ito,
        z,
        compensator,
        nonpositive,
    })
}

/// Exact-sampler `Z(horizon)` for each path without storing the full
/// bundle. Bit-identical to the last column of [`simulate`] with
/// `Scheme::Exact` and the same arguments.
pub fn terminal_values(
    spec: &IntegrandSpec,
    grid: &TimeGrid,
    n_paths: usize,
    seed: SeedSpec,
    antithetic: bool,
) -> Result<Vec<f64>> {
    require_finite(spec, grid)?;
    validate_paths(n_paths, antithetic)?;
    let psi = psi::left_values(spec, grid)?;
    let half_comp = 0.5 * psi::discrete_compensator(spec, grid)?[grid.n_steps()];
    let sqrt_dt = sqrt_steps(grid);
    let mut out = vec![0.0; n_paths];
    out.par_iter_mut().enumerate().for_each_init(
        || vec![0.0; grid.n_steps()],
        |db, (r, v)| {
            fill_increments(db, r, &sqrt_dt, seed, antithetic);
            let mut acc = 0.0;
            for (p, d) in psi.iter().zip(db.iter()) {
                acc += p * d;
            }
            *v = (acc - half_comp).exp();
        },
    );
    Ok(out)
}

/// Terminal Itô sum `Σ ψ(t_j) ΔB_j` for each path, streamed row by row.
pub fn terminal_ito(spec: &IntegrandSpec, grid: &TimeGrid, n_paths: usize, seed: SeedSpec) -> Result<Vec<f64>> {
    validate_paths(n_paths, false)?;
    let psi = psi::left_values(spec, grid)?;
    let sqrt_dt = sqrt_steps(grid);
    let mut out = vec![0.0; n_paths];
    out.par_iter_mut().enumerate().for_each_init(
        || vec![0.0; grid.n_steps()],
        |db, (r, v)| {
            fill_increments(db, r, &sqrt_dt, seed, false);
            *v = psi.iter().zip(db.iter()).fold(0.0, |acc, (p, d)| acc + p * d);
        },
    );
    Ok(out)
}

/// Drifted process `X(t_j) = x₀ e^{α t_j} Z(t_j)` from the exact sampler.
pub fn gbm_drift(
    alpha: f64,
    x0: f64,
    spec: &IntegrandSpec,
    grid: &TimeGrid,
    n_paths: usize,
    seed: SeedSpec,
) -> Result<Matrix> {
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(Error::InvalidArgument(format!("x0 must be positive, got {x0}")));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be finite, got {alpha}")));
    }
    let bundle = stoch_exp_exact(spec, grid, n_paths, seed)?;
    let growth: Vec<f64> = grid.times().iter().map(|&t| x0 * (alpha * t).exp()).collect();
    let mut x = bundle.z;
    x.par_rows_mut().for_each(|(_, row)| {
        for (v, g) in row.iter_mut().zip(&growth) {
            *v *= g;
        }
    });
    Ok(x)
}
