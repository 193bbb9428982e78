//! Reductions whose result does not depend on the number of worker threads.
//!
//! Inputs are cut into fixed-size chunks, each chunk is summed sequentially
//! (possibly on different threads), and the chunk sums are then added in
//! chunk order.

use rayon::prelude::*;

const CHUNK: usize = 4096;

pub fn sum(xs: &[f64]) -> f64 {
    sum_by(xs, |x| x)
}

pub fn sum_by<F: Fn(f64) -> f64 + Sync>(xs: &[f64], f: F) -> f64 {
    let partial: Vec<f64> = xs.par_chunks(CHUNK).map(|c| c.iter().fold(0.0, |acc, &x| acc + f(x))).collect();
    partial.iter().sum()
}

pub fn mean(xs: &[f64]) -> f64 {
    sum(xs) / xs.len() as f64
}

/// Sample mean and its leave-one-out jackknife standard error.
pub fn mean_and_jackknife_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let total = sum(xs);
    let mean = total / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let loo = |x: f64| (total - x) / (n - 1.0);
    let loo_mean = sum_by(xs, loo) / n;
    let ss = sum_by(xs, |x| {
        let d = loo(x) - loo_mean;
        d * d
    });
    (mean, ((n - 1.0) / n * ss).sqrt())
}

/// `s / √n` with the unbiased sample variance.
pub fn naive_se(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss = sum_by(xs, |x| (x - m) * (x - m));
    (ss / (n - 1.0) / n).sqrt()
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Asymptotic KS critical value at significance `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}
