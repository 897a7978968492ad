//! Kraskov–Stögbauer–Grassberger estimator (algorithm 1, max-norm).
//!
//! `I = ψ(k) + ψ(N) − ⟨ψ(n_x + 1) + ψ(n_y + 1)⟩`, where the neighbor counts
//! are taken strictly inside the distance to the k-th joint neighbor.

use crate::numeric;
use rand::Rng;
use std::f64::consts::LN_2;

const JITTER: f64 = 1e-10;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Adds seeded jitter of magnitude `1e-10` (standardized scale) to break
/// ties. The seed is the hash of the raw column, so results do not depend on
/// call order or argument position.
pub(super) fn jittered(z: &[f64], raw: &[f64]) -> Vec<f64> {
    let mut rng = numeric::rng(numeric::hash_f64s(raw));
    z.iter()
        .map(|v| v + JITTER * (2.0 * rng.random::<f64>() - 1.0))
        .collect()
}

/// `ψ(0..=n)` for integer arguments, with `ψ(0)` unused.
fn digamma_table(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    if n >= 1 {
        t[1] = -EULER_GAMMA;
    }
    for i in 2..=n {
        t[i] = t[i - 1] + 1.0 / (i - 1) as f64;
    }
    t
}

/// Points sorted by their first coordinate, for window sweeps.
struct Sweep<'a> {
    dims: Vec<&'a [f64]>,
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl<'a> Sweep<'a> {
    fn new(dims: Vec<&'a [f64]>) -> Self {
        let n = dims[0].len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| dims[0][a].total_cmp(&dims[0][b]).then(a.cmp(&b)));
        let mut rank = vec![0; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        Sweep { dims, order, rank }
    }

    fn dist(&self, a: usize, b: usize) -> f64 {
        self.dims
            .iter()
            .map(|d| (d[a] - d[b]).abs())
            .fold(0.0, f64::max)
    }

    /// Distance from point `i` to its k-th nearest neighbor.
    fn kth_distance(&self, i: usize, k: usize) -> f64 {
        let n = self.order.len();
        let first = self.dims[0];
        let mut best: Vec<f64> = Vec::with_capacity(k + 1);
        let bound = |best: &Vec<f64>| if best.len() < k { f64::INFINITY } else { best[k - 1] };
        let push = |best: &mut Vec<f64>, d: f64| {
            let pos = best.partition_point(|&b| b <= d);
            if pos < k {
                best.insert(pos, d);
                best.truncate(k);
            }
        };
        let r = self.rank[i];
        let (mut lo, mut hi) = (r, r + 1);
        loop {
            let b = bound(&best);
            let left = (lo > 0).then(|| first[i] - first[self.order[lo - 1]]);
            let right = (hi < n).then(|| first[self.order[hi]] - first[i]);
            match (left, right) {
                (Some(l), Some(rr)) if l.min(rr) >= b => break,
                (Some(l), None) if l >= b => break,
                (None, Some(rr)) if rr >= b => break,
                (None, None) => break,
                _ => {}
            }
            let take_left = match (left, right) {
                (Some(l), Some(rr)) => l <= rr,
                (Some(_), None) => true,
                _ => false,
            };
            let j = if take_left {
                lo -= 1;
                self.order[lo]
            } else {
                hi += 1;
                self.order[hi - 1]
            };
            push(&mut best, self.dist(i, j));
        }
        bound(&best)
    }

    /// Number of other points strictly within `eps` of point `i`.
    fn count_within(&self, i: usize, eps: f64) -> usize {
        let first = self.dims[0];
        let lo = self.order.partition_point(|&j| first[j] <= first[i] - eps);
        let hi = self.order.partition_point(|&j| first[j] < first[i] + eps);
        if self.dims.len() == 1 {
            return hi - lo - 1;
        }
        self.order[lo..hi]
            .iter()
            .filter(|&&j| j != i && self.dist(i, j) < eps)
            .count()
    }
}

/// KSG estimate in bits between a block of columns and a single column.
pub(super) fn mi(block: &[&[f64]], y: &[f64], k: usize) -> f64 {
    let n = y.len();
    let k = k.min(n - 1);
    let mut joint_dims: Vec<&[f64]> = block.to_vec();
    joint_dims.push(y);
    let joint = Sweep::new(joint_dims);
    let xs = Sweep::new(block.to_vec());
    let ys = Sweep::new(vec![y]);
    let psi = digamma_table(n + 1);

    let mut acc = 0.0;
    for i in 0..n {
        let eps = joint.kth_distance(i, k);
        let nx = xs.count_within(i, eps);
        let ny = ys.count_within(i, eps);
        acc += psi[nx + 1] + psi[ny + 1];
    }
    (psi[k] + psi[n] - acc / n as f64) / LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digamma_values() {
        let t = digamma_table(10);
        assert!((t[1] + EULER_GAMMA).abs() < 1e-15);
        // ψ(10) = H_9 − γ
        let h9: f64 = (1..=9).map(|i| 1.0 / i as f64).sum();
        assert!((t[10] - (h9 - EULER_GAMMA)).abs() < 1e-13);
    }

    #[test]
    fn kth_distance_matches_brute_force() {
        let a: Vec<f64> = (0..200).map(|i| ((i * 37 % 101) as f64).sin()).collect();
        let b: Vec<f64> = (0..200).map(|i| ((i * 53 % 97) as f64).cos()).collect();
        let sweep = Sweep::new(vec![&a, &b]);
        for i in [0, 17, 99, 199] {
            let mut d: Vec<f64> = (0..200)
                .filter(|&j| j != i)
                .map(|j| (a[i] - a[j]).abs().max((b[i] - b[j]).abs()))
                .collect();
            d.sort_by(f64::total_cmp);
            for k in [1, 3, 5] {
                assert_eq!(sweep.kth_distance(i, k), d[k - 1]);
                let brute = d.iter().filter(|&&v| v < d[k - 1]).count();
                assert_eq!(sweep.count_within(i, d[k - 1]), brute);
            }
        }
    }
}
