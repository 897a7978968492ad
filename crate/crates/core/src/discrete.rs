//! Exact discrete ensemble built from `n` i.i.d. base symbols `Z_1..Z_n`.
//!
//! Each observed variable `X_i` is the tuple of all symbols except `Z_i`. A
//! tuple is represented by a membership bit-mask of length `n`; the shared
//! content of two tuples is the bitwise AND of their masks, and because the
//! symbols are i.i.d. the mutual information between two tuples is
//! `weight(a AND b)·H(Z)`. An independent joint-PMF enumeration checks this.

use crate::channels::ChannelMatrix;
use crate::error::{HociError, Result};
use crate::numeric;
use rand::distr::weighted::WeightedIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Largest state space the enumeration oracle will walk.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// Widest ensemble representable by a [`Mask`].
pub const MAX_SYMBOLS: usize = 64;

/// Membership mask over `len` base symbols; bit `p` set means `Z_p` is present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mask {
    bits: u64,
    len: usize,
}

impl Mask {
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if len == 0 || len > MAX_SYMBOLS {
            return Err(HociError::domain(format!("mask length must be in 1..={MAX_SYMBOLS}, got {len}")));
        }
        if len < 64 && bits >> len != 0 {
            return Err(HociError::domain(format!("mask bits {bits:#b} exceed length {len}")));
        }
        Ok(Mask { bits, len })
    }

    /// Parses a string such as `"110"`; character `p` is symbol `p`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        for (p, c) in s.chars().enumerate() {
            match c {
                '1' => bits |= 1 << p,
                '0' => {}
                _ => return Err(HociError::domain(format!("invalid mask character '{c}' in \"{s}\""))),
            }
        }
        Mask::new(bits, s.chars().count())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn contains(&self, position: usize) -> bool {
        self.bits >> position & 1 == 1
    }

    /// Present positions in ascending order.
    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&p| self.contains(p))
    }

    pub fn and(&self, other: &Mask) -> Result<Mask> {
        check_same_len(self, other)?;
        Ok(Mask {
            bits: self.bits & other.bits,
            len: self.len,
        })
    }
}

impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in 0..self.len {
            f.write_str(if self.contains(p) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for Mask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Mask {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Mask::parse(&s).map_err(serde::de::Error::custom)
    }
}

fn check_same_len(a: &Mask, b: &Mask) -> Result<()> {
    if a.len != b.len {
        return Err(HociError::domain(format!("mask lengths differ: {} vs {}", a.len, b.len)));
    }
    Ok(())
}

/// The canonical construction: `X_i` holds every symbol except `Z_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteEnsemble {
    n: usize,
    base_pmf: Vec<f64>,
    masks: Vec<Mask>,
}

impl DiscreteEnsemble {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn alphabet_size(&self) -> usize {
        self.base_pmf.len()
    }
    pub fn base_pmf(&self) -> &[f64] {
        &self.base_pmf
    }
    pub fn masks(&self) -> &[Mask] {
        &self.masks
    }
    /// `H(Z)` in bits.
    pub fn symbol_entropy(&self) -> f64 {
        exact_entropy(&self.base_pmf)
    }
}

fn validate_pmf(pmf: &[f64]) -> Result<()> {
    if pmf.len() < 2 {
        return Err(HociError::domain(format!("alphabet needs at least 2 symbols, got {}", pmf.len())));
    }
    if let Some(p) = pmf.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(HociError::domain(format!("pmf entry {p} is not a nonnegative number")));
    }
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(HociError::domain(format!("pmf sums to {total}, not 1")));
    }
    Ok(())
}

pub fn uniform_pmf(alphabet_size: usize) -> Vec<f64> {
    vec![1.0 / alphabet_size as f64; alphabet_size]
}

pub fn build_ensemble(n: usize, base_pmf: &[f64]) -> Result<DiscreteEnsemble> {
    if n < 3 {
        return Err(HociError::domain(format!("the construction needs n ≥ 3, got {n}")));
    }
    if n > MAX_SYMBOLS {
        return Err(HociError::domain(format!("n = {n} exceeds {MAX_SYMBOLS}")));
    }
    validate_pmf(base_pmf)?;
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let masks = (0..n)
        .map(|i| Mask {
            bits: full & !(1u64 << i),
            len: n,
        })
        .collect();
    Ok(DiscreteEnsemble {
        n,
        base_pmf: base_pmf.to_vec(),
        masks,
    })
}

/// Shannon entropy in bits, with `0·log 0 = 0`.
pub fn exact_entropy(pmf: &[f64]) -> f64 {
    pmf.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Exact `I(φ_a; φ_b)` through the i.i.d. factorization.
pub fn mask_mi(ensemble: &DiscreteEnsemble, a: &Mask, b: &Mask) -> Result<f64> {
    check_mask(ensemble, a)?;
    check_mask(ensemble, b)?;
    Ok(a.and(b)?.weight() as f64 * ensemble.symbol_entropy())
}

fn check_mask(ensemble: &DiscreteEnsemble, m: &Mask) -> Result<()> {
    if m.len != ensemble.n {
        return Err(HociError::domain(format!(
            "mask of length {} does not match ensemble size {}",
            m.len, ensemble.n
        )));
    }
    Ok(())
}

fn state_count(ensemble: &DiscreteEnsemble) -> u128 {
    (ensemble.alphabet_size() as u128).saturating_pow(ensemble.n as u32)
}

/// `I(φ_a; φ_b)` by walking every outcome of `(Z_1..Z_n)` and accumulating
/// the joint PMF of the two projected tuples.
pub fn enumerate_mask_mi(ensemble: &DiscreteEnsemble, a: &Mask, b: &Mask) -> Result<f64> {
    check_mask(ensemble, a)?;
    check_mask(ensemble, b)?;
    let states = state_count(ensemble);
    if states > ENUMERATION_LIMIT {
        return Err(HociError::Capacity {
            states,
            limit: ENUMERATION_LIMIT,
        });
    }
    let m = ensemble.alphabet_size();
    let n = ensemble.n;
    let pos_a: Vec<usize> = a.positions().collect();
    let pos_b: Vec<usize> = b.positions().collect();
    let code = |digits: &[usize], pos: &[usize]| pos.iter().fold(0u64, |acc, &p| acc * m as u64 + digits[p] as u64);

    let mut joint: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    let mut digits = vec![0usize; n];
    for _ in 0..states {
        let p: f64 = digits.iter().map(|&d| ensemble.base_pmf[d]).product();
        if p > 0.0 {
            *joint.entry((code(&digits, &pos_a), code(&digits, &pos_b))).or_insert(0.0) += p;
        }
        // odometer increment
        for d in digits.iter_mut() {
            *d += 1;
            if *d < m {
                break;
            }
            *d = 0;
        }
    }
    let mut pa: BTreeMap<u64, f64> = BTreeMap::new();
    let mut pb: BTreeMap<u64, f64> = BTreeMap::new();
    for (&(ca, cb), &p) in &joint {
        *pa.entry(ca).or_insert(0.0) += p;
        *pb.entry(cb).or_insert(0.0) += p;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(ca, cb), &p)| p * (p / (pa[&ca] * pb[&cb])).log2())
        .sum();
    Ok(mi.max(0.0))
}

/// A deduplicated family of masks at one level of the SCI hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSet {
    pub level: usize,
    pub masks: Vec<Mask>,
}

/// Level 1 is the ensemble itself; level `ℓ` collects every AND of a
/// level-`(ℓ−1)` mask with a level-1 mask that removes at least one more
/// symbol, deduplicated.
pub fn build_t_level(ensemble: &DiscreteEnsemble, level: usize) -> Result<MaskSet> {
    if level < 1 || level > ensemble.n - 1 {
        return Err(HociError::domain(format!(
            "level must be in 1..={}, got {level}",
            ensemble.n - 1
        )));
    }
    let mut current: Vec<Mask> = ensemble.masks.clone();
    for _ in 2..=level {
        let mut next = Vec::new();
        for phi in &current {
            for base in &ensemble.masks {
                let m = phi.and(base)?;
                if m != *phi {
                    next.push(m);
                }
            }
        }
        next.sort();
        next.dedup();
        current = next;
    }
    current.sort();
    current.dedup();
    Ok(MaskSet { level, masks: current })
}

/// Result of checking `min I(φ; φ')` over `φ ∈ 𝒯_{ℓ−1}`, `φ' ∈ 𝒯_1` against
/// `(n − ℓ)·H(Z)` for one order `ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub order: usize,
    pub set_size: usize,
    pub min_mi_bits: f64,
    pub expected_bits: f64,
    pub argmin: (Mask, Mask),
    /// Minimum from the enumeration oracle, when the state space fits.
    pub oracle_min_bits: Option<f64>,
    /// Largest `|shortcut − oracle|` over every evaluated pair.
    pub oracle_max_abs_diff: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionVerification {
    pub n: usize,
    pub alphabet_size: usize,
    pub symbol_entropy_bits: f64,
    pub oracle_tolerance_bits: f64,
    pub levels: Vec<LevelCheck>,
    pub passed: bool,
}

pub const ORACLE_TOLERANCE_BITS: f64 = 1e-10;

/// Checks orders `ℓ = 2..=n`: the minimum over the AND-mask hierarchy must
/// equal `(n − ℓ)·H(Z)` exactly, and agree with enumeration to 1e-10 bits.
pub fn verify_theorem5(n: usize, base_pmf: &[f64]) -> Result<ConstructionVerification> {
    let ens = build_ensemble(n, base_pmf)?;
    let h = ens.symbol_entropy();
    let use_oracle = state_count(&ens) <= ENUMERATION_LIMIT;
    let t1 = build_t_level(&ens, 1)?;
    let mut levels = Vec::new();
    for order in 2..=n {
        let lower = build_t_level(&ens, order - 1)?;
        let mut best: Option<(f64, Mask, Mask)> = None;
        let mut oracle_min = f64::INFINITY;
        let mut max_diff: f64 = 0.0;
        for phi in &lower.masks {
            for base in &t1.masks {
                let v = mask_mi(&ens, phi, base)?;
                if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                    best = Some((v, *phi, *base));
                }
                if use_oracle {
                    let o = enumerate_mask_mi(&ens, phi, base)?;
                    oracle_min = oracle_min.min(o);
                    max_diff = max_diff.max((o - v).abs());
                }
            }
        }
        let (min_mi, a, b) = best.expect("mask sets are non-empty");
        let expected = (n - order) as f64 * h;
        let passed = min_mi == expected && (!use_oracle || max_diff <= ORACLE_TOLERANCE_BITS);
        levels.push(LevelCheck {
            order,
            set_size: lower.masks.len(),
            min_mi_bits: min_mi,
            expected_bits: expected,
            argmin: (a, b),
            oracle_min_bits: use_oracle.then_some(oracle_min),
            oracle_max_abs_diff: use_oracle.then_some(max_diff),
            passed,
        });
    }
    let passed = levels.iter().all(|l| l.passed);
    Ok(ConstructionVerification {
        n,
        alphabet_size: ens.alphabet_size(),
        symbol_entropy_bits: h,
        oracle_tolerance_bits: ORACLE_TOLERANCE_BITS,
        levels,
        passed,
    })
}

/// Positional base used to encode a tuple as one real-valued sample. Digits
/// are spread far apart so that additive noise blurs low-order symbols before
/// high-order ones.
pub fn encoding_base(alphabet_size: usize) -> u64 {
    8 * alphabet_size as u64
}

/// Draws `num_samples` realizations of `(X_1..X_n)`, each tuple encoded as
/// `Σ_r z_{p_r}·base^r` over its present positions `p_0 < p_1 < …`.
pub fn sample_channels(ensemble: &DiscreteEnsemble, num_samples: usize, seed: u64) -> Result<ChannelMatrix> {
    let base = encoding_base(ensemble.alphabet_size()) as f64;
    let max_code = base.powi(ensemble.n as i32 - 1);
    if max_code > 2f64.powi(53) {
        return Err(HociError::domain(format!(
            "n = {} with alphabet {} cannot be encoded exactly in f64 samples",
            ensemble.n,
            ensemble.alphabet_size()
        )));
    }
    let dist = WeightedIndex::new(&ensemble.base_pmf).map_err(|e| HociError::domain(e.to_string()))?;
    let mut rng = numeric::rng(seed);
    let mut data = vec![Vec::with_capacity(num_samples); ensemble.n];
    let mut z = vec![0usize; ensemble.n];
    for _ in 0..num_samples {
        for v in z.iter_mut() {
            *v = dist.sample(&mut rng);
        }
        for (row, mask) in data.iter_mut().zip(&ensemble.masks) {
            let mut value = 0.0;
            let mut weight = 1.0;
            for p in mask.positions() {
                value += z[p] as f64 * weight;
                weight *= base;
            }
            row.push(value);
        }
    }
    ChannelMatrix::unnamed(data, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn strings(masks: &[Mask]) -> BTreeSet<String> {
        masks.iter().map(|m| m.to_string()).collect()
    }

    #[test]
    fn n3_masks() {
        let e = build_ensemble(3, &uniform_pmf(2)).unwrap();
        assert_eq!(strings(e.masks()), ["110", "101", "011"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn n4_pairwise_weights() {
        let e = build_ensemble(4, &uniform_pmf(2)).unwrap();
        for (i, a) in e.masks().iter().enumerate() {
            assert_eq!(a.weight(), 3);
            for b in &e.masks()[i + 1..] {
                assert_eq!(a.and(b).unwrap().weight(), 2);
            }
        }
    }

    #[test]
    fn n5_has_five_distinct_masks() {
        let e = build_ensemble(5, &[0.25, 0.75]).unwrap();
        assert_eq!(strings(e.masks()).len(), 5);
    }

    #[test]
    fn rejects_small_n_and_bad_pmf() {
        assert!(build_ensemble(2, &uniform_pmf(2)).is_err());
        assert!(build_ensemble(3, &[0.5, 0.6]).is_err());
        assert!(build_ensemble(3, &[1.0]).is_err());
        assert!(build_ensemble(3, &[-0.5, 1.5]).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(exact_entropy(&[0.5, 0.5]), 1.0);
        assert_eq!(exact_entropy(&[1.0, 0.0]), 0.0);
        assert!((exact_entropy(&[0.25, 0.75]) - 0.811_278_124_459_132_8).abs() < 1e-12);
    }

    #[test]
    fn mask_mi_examples() {
        let e = build_ensemble(3, &uniform_pmf(2)).unwrap();
        let a = Mask::parse("110").unwrap();
        let b = Mask::parse("101").unwrap();
        assert_eq!(mask_mi(&e, &a, &b).unwrap(), 1.0);
        assert!((enumerate_mask_mi(&e, &a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(mask_mi(&e, &a, &a).unwrap(), 2.0);
        let x = Mask::parse("100").unwrap();
        let y = Mask::parse("011").unwrap();
        assert_eq!(mask_mi(&e, &x, &y).unwrap(), 0.0);
        assert!(enumerate_mask_mi(&e, &x, &y).unwrap().abs() < 1e-12);
        assert!(mask_mi(&e, &a, &Mask::parse("1100").unwrap()).is_err());
    }

    #[test]
    fn enumeration_capacity() {
        let e = build_ensemble(21, &uniform_pmf(2)).unwrap();
        let m = e.masks()[0];
        assert!(matches!(enumerate_mask_mi(&e, &m, &m), Err(HociError::Capacity { .. })));
        assert!(mask_mi(&e, &m, &m).is_ok());
    }

    #[test]
    fn t_levels() {
        let e = build_ensemble(3, &uniform_pmf(2)).unwrap();
        assert_eq!(
            strings(&build_t_level(&e, 2).unwrap().masks),
            ["100", "010", "001"].iter().map(|s| s.to_string()).collect()
        );
        assert_eq!(strings(&build_t_level(&e, 1).unwrap().masks), strings(e.masks()));
        let e4 = build_ensemble(4, &uniform_pmf(2)).unwrap();
        let t3 = build_t_level(&e4, 3).unwrap();
        assert_eq!(t3.masks.len(), 4);
        assert!(t3.masks.iter().all(|m| m.weight() == 1));
        assert!(build_t_level(&e4, 0).is_err());
        assert!(build_t_level(&e4, 4).is_err());
    }

    #[test]
    fn construction_levels_match_symbol_counts() {
        let v = verify_theorem5(4, &uniform_pmf(2)).unwrap();
        assert!(v.passed);
        let mins: Vec<f64> = v.levels.iter().map(|l| l.min_mi_bits).collect();
        assert_eq!(mins, vec![2.0, 1.0, 0.0]);

        let v = verify_theorem5(3, &uniform_pmf(2)).unwrap();
        assert_eq!(v.levels[0].min_mi_bits, 1.0);
        assert_eq!(v.levels[1].min_mi_bits, 0.0);

        let v = verify_theorem5(5, &[0.25, 0.75]).unwrap();
        assert!(v.passed);
        assert!((v.levels[0].min_mi_bits - 2.433_834_373_377_398_4).abs() < 1e-12);
    }

    #[test]
    fn mask_serde_as_string() {
        let m = Mask::parse("1011").unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "\"1011\"");
        assert_eq!(serde_json::from_str::<Mask>(&s).unwrap(), m);
    }

    #[test]
    fn sampled_channels_encode_tuples() {
        let e = build_ensemble(3, &uniform_pmf(2)).unwrap();
        let m = sample_channels(&e, 200, 3).unwrap();
        let base = encoding_base(2) as f64;
        for c in m.channels() {
            assert!(c.values().iter().all(|v| [0.0, 1.0, base, base + 1.0].contains(v)));
        }
    }
}
