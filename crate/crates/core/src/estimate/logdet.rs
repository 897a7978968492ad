use crate::error::{HociError, Result};
use nalgebra::{Cholesky, DMatrix};
use std::f64::consts::LN_2;

// Smallest admissible squared Cholesky pivot of a correlation matrix.
const PIVOT_FLOOR: f64 = 1e-12;

fn corr(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    (a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / n).clamp(-1.0, 1.0)
}

/// `−½·log2(1 − ρ̂²)` on standardized columns.
pub(super) fn pair(zx: &[f64], zy: &[f64]) -> f64 {
    let r = corr(zx, zy);
    let one_minus = 1.0 - r * r;
    if one_minus <= 0.0 {
        return f64::INFINITY;
    }
    -0.5 * (-r * r).ln_1p() / LN_2
}

/// `log det` of a correlation matrix, or `None` when it is numerically singular.
fn log_det(m: DMatrix<f64>) -> Option<f64> {
    let chol = Cholesky::new(m)?;
    let l = chol.l();
    let mut acc = 0.0;
    for i in 0..l.nrows() {
        let d = l[(i, i)] * l[(i, i)];
        if d < PIVOT_FLOOR {
            return None;
        }
        acc += d.ln();
    }
    Some(acc)
}

/// `½·log2(det R_xx · det r_yy / det R)` on standardized columns.
pub(super) fn block(zs: &[Vec<f64>], zy: &[f64]) -> Result<f64> {
    let d = zs.len();
    let all: Vec<&[f64]> = zs.iter().map(Vec::as_slice).chain(std::iter::once(zy)).collect();
    let mut r = DMatrix::<f64>::identity(d + 1, d + 1);
    for i in 0..=d {
        for j in 0..i {
            let c = corr(all[i], all[j]);
            r[(i, j)] = c;
            r[(j, i)] = c;
        }
    }
    let rxx = r.view((0, 0), (d, d)).clone_owned();
    let ld_xx = log_det(rxx).ok_or_else(|| {
        HociError::degenerate("empirical correlation matrix of the block is singular")
    })?;
    match log_det(r) {
        Some(ld) => Ok(0.5 * (ld_xx - ld) / LN_2),
        // block is fine but y is an exact linear function of it
        None => Ok(f64::INFINITY),
    }
}
