//! One-dimensional quadrature on finite intervals.
//!
//! Two routines back the quadrature methods of [`crate::psi::PhiMethod`]:
//! Romberg integration (composite trapezoid with Richardson extrapolation)
//! and adaptive Gauss–Kronrod 7/15 bisection.

use crate::error::{Error, Result};

const ROMBERG_MAX_LEVEL: usize = 24;
const ADAPTIVE_MAX_DEPTH: u32 = 60;

/// Romberg integration of `f` over `[a, b]`.
///
/// Stops when two successive diagonal entries agree within `tol`.
pub fn romberg<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut prev: Vec<f64> = vec![0.5 * (b - a) * (f(a) + f(b))];
    let mut h = b - a;
    for level in 1..=ROMBERG_MAX_LEVEL {
        h *= 0.5;
        let n_new = 1usize << (level - 1);
        let mid: f64 = (0..n_new).map(|k| f(a + (2 * k + 1) as f64 * h)).sum();
        let mut row = Vec::with_capacity(level + 1);
        row.push(0.5 * prev[0] + h * mid);
        let mut factor = 1.0;
        for j in 1..=level {
            factor *= 4.0;
            let r = row[j - 1] + (row[j - 1] - prev[j - 1]) / (factor - 1.0);
            row.push(r);
        }
        let err = (row[level] - prev[level - 1]).abs();
        // Require a few levels so polynomial aliasing on coarse grids is not
        // mistaken for convergence.
        if level >= 3 && err <= tol {
            return Ok(row[level]);
        }
        if !row[level].is_finite() {
            return Err(Error::Quadrature { tol, estimate: row[level], error: f64::INFINITY });
        }
        prev = row;
    }
    let est = prev[ROMBERG_MAX_LEVEL];
    Err(Error::Quadrature { tol, estimate: est, error: f64::NAN })
}

// Gauss–Kronrod 7/15 nodes on [-1, 1] (positive half, centre last).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes and the centre.
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]` with absolute
/// tolerance `tol`. Panels are bisected until each meets its share of the
/// tolerance.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (whole, err) = gk15(&f, a, b);
    let mut failed = None;
    let v = refine(&f, a, b, whole, err, tol, 0, &mut failed);
    match failed {
        None => Ok(v),
        Some(e) => Err(Error::Quadrature { tol, estimate: v, error: e }),
    }
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    estimate: f64,
    err: f64,
    tol: f64,
    depth: u32,
    failed: &mut Option<f64>,
) -> f64 {
    if !estimate.is_finite() {
        *failed = Some(f64::INFINITY);
        return estimate;
    }
    if err <= tol {
        return estimate;
    }
    if depth >= ADAPTIVE_MAX_DEPTH {
        *failed = Some(err);
        return estimate;
    }
    let m = 0.5 * (a + b);
    let (left, el) = gk15(f, a, m);
    let (right, er) = gk15(f, m, b);
    refine(f, a, m, left, el, 0.5 * tol, depth + 1, failed) + refine(f, m, b, right, er, 0.5 * tol, depth + 1, failed)
}
