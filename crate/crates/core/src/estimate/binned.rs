//! Plug-in histogram estimator.
//!
//! A column with at most `bins` distinct values is treated as categorical
//! (one cell per value); otherwise it is cut into `bins` equal-width cells
//! between its minimum and maximum.

use crate::error::{HociError, Result};

fn discretize(z: &[f64], bins: usize) -> (Vec<u64>, u64) {
    let mut distinct = z.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() <= bins {
        let codes = z
            .iter()
            .map(|v| distinct.partition_point(|d| d < v) as u64)
            .collect();
        return (codes, distinct.len() as u64);
    }
    let lo = distinct[0];
    let hi = distinct[distinct.len() - 1];
    let width = (hi - lo) / bins as f64;
    let codes = z
        .iter()
        .map(|v| (((v - lo) / width) as u64).min(bins as u64 - 1))
        .collect();
    (codes, bins as u64)
}

/// Entropy in bits of the empirical distribution of `codes`.
///
/// Counts are summed in sorted order so the result depends only on the
/// multiset of cell counts.
fn entropy(mut codes: Vec<u64>) -> f64 {
    let n = codes.len() as f64;
    codes.sort_unstable();
    let mut counts = Vec::new();
    let mut run = 1usize;
    for w in codes.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            counts.push(run);
            run = 1;
        }
    }
    counts.push(run);
    counts.sort_unstable();
    counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn joint_codes(columns: &[&[f64]], bins: usize) -> Result<Vec<u64>> {
    let n = columns[0].len();
    let mut codes = vec![0u64; n];
    let mut radix_total: u64 = 1;
    for col in columns {
        let (c, radix) = discretize(col, bins);
        radix_total = radix_total
            .checked_mul(radix)
            .ok_or_else(|| HociError::degenerate("too many histogram cells for the block"))?;
        for (acc, v) in codes.iter_mut().zip(c) {
            *acc = *acc * radix + v;
        }
    }
    Ok(codes)
}

pub(super) fn mi(block: &[&[f64]], y: &[f64], bins: usize) -> Result<f64> {
    let xc = joint_codes(block, bins)?;
    let yc = joint_codes(&[y], bins)?;
    let mut all: Vec<&[f64]> = block.to_vec();
    all.push(y);
    let xyc = joint_codes(&all, bins)?;
    Ok(entropy(xc) + entropy(yc) - entropy(xyc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categorical_detection() {
        let (codes, radix) = discretize(&[0.0, 9.0, 1.0, 8.0, 0.0], 4);
        assert_eq!(radix, 4);
        assert_eq!(codes, vec![0, 3, 1, 2, 0]);
    }

    #[test]
    fn equal_width_cells() {
        let z: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let (codes, radix) = discretize(&z, 10);
        assert_eq!(radix, 10);
        assert_eq!(codes[0], 0);
        assert_eq!(codes[99], 9);
        assert_eq!(codes[50], 5);
    }

    #[test]
    fn deterministic_copy_gives_entropy() {
        let z: Vec<f64> = (0..64).map(|i| (i % 4) as f64).collect();
        assert!((mi(&[&z], &z, 8).unwrap() - 2.0).abs() < 1e-12);
    }
}
