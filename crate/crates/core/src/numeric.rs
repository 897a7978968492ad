//! Small numeric helpers shared across modules: seeded RNGs, seed derivation,
//! column standardization, grids and a scalar sign-change bisection.

use crate::error::{HociError, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a run seed with a list of integer labels into a child seed.
///
/// Used so that every pair/order task gets its own independent stream no
/// matter in which order tasks are scheduled.
pub fn derive_seed(run_seed: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(run_seed), |acc, &l| splitmix64(acc ^ splitmix64(l)))
}

/// Order-sensitive hash of the bit patterns of a column.
pub fn hash_f64s(values: &[f64]) -> u64 {
    values
        .iter()
        .fold(0xcbf2_9ce4_8422_2325u64, |acc, v| splitmix64(acc ^ v.to_bits()))
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population variance (divides by `n`).
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64
}

/// Returns `(standardized, mean, std)`. Fails for constant columns.
pub fn standardize(values: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    let m = mean(values);
    let sd = variance(values).sqrt();
    if !(sd > 0.0) || sd <= 1e-12 * m.abs().max(1.0) {
        return Err(HociError::degenerate(
            "column has zero variance and cannot be standardized",
        ));
    }
    let out = values.iter().map(|v| (v - m) / sd).collect();
    Ok((out, m, sd))
}

pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// `count` points spaced evenly in log10 between `start` and `stop` (both > 0).
pub fn logspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    linspace(start.log10(), stop.log10(), count)
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect()
}

/// Finds a sign change of `f` in `[lo, hi]` by bisection, to within `tol`.
///
/// Returns `None` when `f(lo)` and `f(hi)` share a strict sign.
pub fn bisect_sign_change<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
