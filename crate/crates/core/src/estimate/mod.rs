//! Mutual-information estimation from samples.
//!
//! Three interchangeable estimators sit behind [`EstimatorConfig`]:
//!
//! * `gaussian_logdet`: parametric, `−½·log2(1 − ρ̂²)` or its log-determinant
//!   generalization for blocks;
//! * `binned`: plug-in estimate on a histogram;
//! * `knn`: the Kraskov–Stögbauer–Grassberger neighbor-count estimator.
//!
//! Every column is standardized to zero mean and unit variance first. Raw
//! estimates below zero are clamped to zero and flagged.

mod binned;
mod knn;
mod logdet;

use crate::channels::SampleColumn;
use crate::error::{HociError, Result};
use crate::info::Info;
use crate::numeric;
use serde::{Deserialize, Serialize};

/// Minimum sample count for any pairwise estimate.
pub const MIN_PAIR_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GaussianLogdet,
    Binned,
    Knn,
}

impl std::str::FromStr for Method {
    type Err = HociError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "gaussian_logdet" => Ok(Method::GaussianLogdet),
            "binned" => Ok(Method::Binned),
            "knn" => Ok(Method::Knn),
            other => Err(HociError::Configuration(format!("unknown estimator '{other}'"))),
        }
    }
}

/// How pairwise information between two channels is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Samples are exchangeable draws; use the direct estimate.
    #[default]
    Iid,
    /// Samples are a time series; use [`bidirectional_te_mi`].
    TimeSeries,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub method: Method,
    pub mode: SampleMode,
    /// Neighbor count for `knn`.
    pub k: usize,
    /// Histogram bins per dimension for `binned`.
    pub bins: usize,
    /// Embedding length in samples for the transfer-entropy approximation.
    pub ts_lag: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            method: Method::GaussianLogdet,
            mode: SampleMode::Iid,
            k: 4,
            bins: 16,
            ts_lag: 3,
        }
    }
}

impl EstimatorConfig {
    pub fn with_method(method: Method) -> Self {
        EstimatorConfig {
            method,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(HociError::Configuration("knn neighbor count k must be ≥ 1".into()));
        }
        if self.bins < 2 {
            return Err(HociError::Configuration("bins must be ≥ 2".into()));
        }
        if self.ts_lag < 1 {
            return Err(HociError::Configuration("ts_lag must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// A mutual-information estimate in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    /// Nonnegative; `+inf` when the estimator sees perfect dependence.
    pub bits: f64,
    /// The raw estimate was negative and has been clamped to zero.
    pub clamped: bool,
    /// Both arguments were the same column.
    pub self_pair: bool,
}

impl MiEstimate {
    fn from_raw(raw: f64, self_pair: bool) -> Self {
        if raw < 0.0 {
            MiEstimate {
                bits: 0.0,
                clamped: true,
                self_pair,
            }
        } else {
            MiEstimate {
                bits: raw,
                clamped: false,
                self_pair,
            }
        }
    }

    pub fn info(&self) -> Info {
        Info::from_f64(self.bits)
    }
}

fn standardized(col: &[f64], what: &str) -> Result<Vec<f64>> {
    numeric::standardize(col)
        .map(|(z, _, _)| z)
        .map_err(|_| HociError::degenerate(format!("{what} is constant")))
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(HociError::degenerate(format!("length mismatch: {a} vs {b}")));
    }
    if a < MIN_PAIR_SAMPLES {
        return Err(HociError::degenerate(format!(
            "need at least {MIN_PAIR_SAMPLES} samples, got {a}"
        )));
    }
    Ok(())
}

/// Estimates `I(X; Y)` between two equally long columns.
pub fn mi_estimate(x: &SampleColumn, y: &SampleColumn, cfg: &EstimatorConfig) -> Result<MiEstimate> {
    cfg.validate()?;
    check_lengths(x.len(), y.len())?;
    let self_pair = x.values() == y.values();
    let zx = standardized(x.values(), "x column")?;
    let zy = standardized(y.values(), "y column")?;
    let raw = match cfg.method {
        Method::GaussianLogdet => {
            if self_pair {
                f64::INFINITY
            } else {
                logdet::pair(&zx, &zy)
            }
        }
        Method::Binned => binned::mi(&[zx.as_slice()], &zy, cfg.bins)?,
        Method::Knn => {
            let jx = knn::jittered(&zx, x.values());
            let jy = knn::jittered(&zy, y.values());
            knn::mi(&[jx.as_slice()], &jy, cfg.k)
        }
    };
    Ok(MiEstimate::from_raw(raw, self_pair))
}

/// Estimates `I(X_block; Y)` for a block of one or more columns.
pub fn mi_estimate_joint(block: &[SampleColumn], y: &SampleColumn, cfg: &EstimatorConfig) -> Result<MiEstimate> {
    cfg.validate()?;
    match block {
        [] => Err(HociError::degenerate("block must have at least one column")),
        [single] => mi_estimate(single, y, cfg),
        _ => {
            for c in block {
                check_lengths(c.len(), y.len())?;
            }
            let zs = block
                .iter()
                .enumerate()
                .map(|(i, c)| standardized(c.values(), &format!("block column {i}")))
                .collect::<Result<Vec<_>>>()?;
            let zy = standardized(y.values(), "y column")?;
            let raw = match cfg.method {
                Method::GaussianLogdet => logdet::block(&zs, &zy)?,
                Method::Binned => {
                    let refs: Vec<&[f64]> = zs.iter().map(Vec::as_slice).collect();
                    binned::mi(&refs, &zy, cfg.bins)?
                }
                Method::Knn => {
                    let js: Vec<Vec<f64>> = zs
                        .iter()
                        .zip(block)
                        .map(|(z, c)| knn::jittered(z, c.values()))
                        .collect();
                    let refs: Vec<&[f64]> = js.iter().map(Vec::as_slice).collect();
                    let jy = knn::jittered(&zy, y.values());
                    knn::mi(&refs, &jy, cfg.k)
                }
            };
            Ok(MiEstimate::from_raw(raw, false))
        }
    }
}

/// Lag-embedded block `(s_{t−1}, …, s_{t−lag})` for `t = lag..len`.
fn past_block(s: &[f64], lag: usize) -> Result<Vec<SampleColumn>> {
    (1..=lag)
        .map(|l| SampleColumn::new(s[lag - l..s.len() - l].to_vec()))
        .collect()
}

/// Time-series proxy for pairwise MI:
/// `Î(X_{t−ℓ..t−1}; Y_t) + Î(Y_{t−ℓ..t−1}; X_t)` with `ℓ = cfg.ts_lag`.
pub fn bidirectional_te_mi(x: &SampleColumn, y: &SampleColumn, cfg: &EstimatorConfig) -> Result<MiEstimate> {
    cfg.validate()?;
    if x.len() != y.len() {
        return Err(HociError::degenerate(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    let lag = cfg.ts_lag;
    if x.len() <= lag + 1 {
        return Err(HociError::degenerate(format!(
            "series of length {} too short for lag {lag}",
            x.len()
        )));
    }
    let y_now = SampleColumn::new(y.values()[lag..].to_vec())?;
    let x_now = SampleColumn::new(x.values()[lag..].to_vec())?;
    let forward = mi_estimate_joint(&past_block(x.values(), lag)?, &y_now, cfg)?;
    let backward = mi_estimate_joint(&past_block(y.values(), lag)?, &x_now, cfg)?;
    Ok(MiEstimate {
        bits: forward.bits + backward.bits,
        clamped: forward.clamped || backward.clamped,
        self_pair: x.values() == y.values(),
    })
}

/// Pairwise information under the configured [`SampleMode`].
pub fn pair_mi(x: &SampleColumn, y: &SampleColumn, cfg: &EstimatorConfig) -> Result<MiEstimate> {
    match cfg.mode {
        SampleMode::Iid => mi_estimate(x, y, cfg),
        SampleMode::TimeSeries => bidirectional_te_mi(x, y, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn col(v: Vec<f64>) -> SampleColumn {
        SampleColumn::new(v).unwrap()
    }

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut r = numeric::rng(seed);
        (0..n).map(|_| r.sample(StandardNormal)).collect()
    }

    fn uniforms(n: usize, seed: u64) -> Vec<f64> {
        let mut r = numeric::rng(seed);
        (0..n).map(|_| r.random::<f64>()).collect()
    }

    #[test]
    fn length_and_degeneracy_errors() {
        let cfg = EstimatorConfig::default();
        let a = col(normals(20, 1));
        let b = col(normals(21, 2));
        assert!(matches!(mi_estimate(&a, &b, &cfg), Err(HociError::DegenerateInput(_))));
        let c = col(vec![1.0; 20]);
        assert!(matches!(mi_estimate(&a, &c, &cfg), Err(HociError::DegenerateInput(_))));
        let short = col(normals(5, 3));
        assert!(mi_estimate(&short, &short, &cfg).is_err());
    }

    #[test]
    fn knn_self_pair_is_large_and_flagged() {
        let a = col(normals(2000, 4));
        let e = mi_estimate(&a, &a, &EstimatorConfig::with_method(Method::Knn)).unwrap();
        assert!(e.self_pair);
        assert!(e.bits > 5.0, "{}", e.bits);
    }

    #[test]
    fn logdet_self_pair_diverges() {
        let a = col(normals(100, 4));
        let e = mi_estimate(&a, &a, &EstimatorConfig::default()).unwrap();
        assert!(e.self_pair && e.bits.is_infinite());
        assert!(e.info().is_infinite());
    }

    #[test]
    fn binned_independent_uniform_null() {
        let x = col(uniforms(10_000, 5));
        let y = col(uniforms(10_000, 6));
        let cfg = EstimatorConfig {
            bins: 16,
            ..EstimatorConfig::with_method(Method::Binned)
        };
        let e = mi_estimate(&x, &y, &cfg).unwrap();
        assert!(e.bits <= 0.05, "{}", e.bits);
    }

    #[test]
    fn symmetry() {
        let x = normals(3000, 7);
        let y: Vec<f64> = x.iter().zip(normals(3000, 8)).map(|(a, b)| a + b).collect();
        let (x, y) = (col(x), col(y));
        for m in [Method::GaussianLogdet, Method::Binned] {
            let cfg = EstimatorConfig::with_method(m);
            assert_eq!(mi_estimate(&x, &y, &cfg).unwrap().bits, mi_estimate(&y, &x, &cfg).unwrap().bits);
        }
        let cfg = EstimatorConfig::with_method(Method::Knn);
        let d = mi_estimate(&x, &y, &cfg).unwrap().bits - mi_estimate(&y, &x, &cfg).unwrap().bits;
        assert!(d.abs() < 1e-9);
    }

    #[test]
    fn knn_matches_gaussian_truth() {
        // ρ² = 1/2 -> I = 0.5 bit
        let x = normals(4000, 9);
        let y: Vec<f64> = x.iter().zip(normals(4000, 10)).map(|(a, b)| a + b).collect();
        let e = mi_estimate(&col(x), &col(y), &EstimatorConfig::with_method(Method::Knn)).unwrap();
        assert!((e.bits - 0.5).abs() < 0.05, "{}", e.bits);
    }

    #[test]
    fn joint_width_one_reduces_to_pair() {
        let x = col(normals(500, 11));
        let y = col(normals(500, 12));
        for m in [Method::GaussianLogdet, Method::Binned, Method::Knn] {
            let cfg = EstimatorConfig::with_method(m);
            assert_eq!(
                mi_estimate_joint(std::slice::from_ref(&x), &y, &cfg).unwrap(),
                mi_estimate(&x, &y, &cfg).unwrap()
            );
        }
    }

    #[test]
    fn joint_duplicate_block_is_singular() {
        let x = col(normals(500, 13));
        let y = col(normals(500, 14));
        let r = mi_estimate_joint(&[x.clone(), x], &y, &EstimatorConfig::default());
        assert!(matches!(r, Err(HociError::DegenerateInput(_))));
    }

    #[test]
    fn joint_logdet_matches_constructed_covariance() {
        // y = a + b + c + 2·e with independent standard normals:
        // I = ½·log2(var(y)/var(e·2)) = ½·log2(7/4)
        let n = 10_000;
        let (a, b, c, e) = (normals(n, 15), normals(n, 16), normals(n, 17), normals(n, 18));
        let y: Vec<f64> = (0..n).map(|t| a[t] + b[t] + c[t] + 2.0 * e[t]).collect();
        let est = mi_estimate_joint(&[col(a), col(b), col(c)], &col(y), &EstimatorConfig::default()).unwrap();
        let truth = 0.5 * (7.0f64 / 4.0).log2();
        assert!((est.bits - truth).abs() < 0.03, "{} vs {truth}", est.bits);
    }

    #[test]
    fn te_white_noise_null_and_lagged_copy() {
        let n = 10_000;
        let x = normals(n, 19);
        let y = normals(n, 20);
        let knn = EstimatorConfig::with_method(Method::Knn);
        let null = bidirectional_te_mi(&col(x.clone()), &col(y), &knn).unwrap();
        assert!(null.bits <= 0.1, "{}", null.bits);

        let mut lagged = vec![0.0; n];
        lagged[1..].copy_from_slice(&x[..n - 1]);
        lagged[0] = 0.3;
        let strong = bidirectional_te_mi(&col(x.clone()), &col(lagged), &knn).unwrap();
        assert!(strong.bits > 10.0 * null.bits.max(0.05), "{}", strong.bits);

        let same = bidirectional_te_mi(&col(x.clone()), &col(x), &knn).unwrap();
        assert!(same.bits <= 0.1, "{}", same.bits);
    }

    #[test]
    fn te_too_short() {
        let x = col(normals(4, 21));
        let cfg = EstimatorConfig::default();
        assert!(matches!(bidirectional_te_mi(&x, &x, &cfg), Err(HociError::DegenerateInput(_))));
    }

    #[test]
    fn config_validation() {
        assert!(EstimatorConfig { k: 0, ..Default::default() }.validate().is_err());
        assert!(EstimatorConfig { bins: 1, ..Default::default() }.validate().is_err());
        assert!(EstimatorConfig { ts_lag: 0, ..Default::default() }.validate().is_err());
        assert_eq!("gaussian".parse::<Method>().unwrap(), Method::GaussianLogdet);
        assert!("kde".parse::<Method>().is_err());
    }
}
