//! Closed-form information quantities for the correlated-observation model
//! `X_i = X + N_i`, `X ~ N(0, σ_X²)`, `N_i ~ N(0, σ_N²)` with pairwise noise
//! correlation `ρ`, plus a seeded sampler for Monte Carlo cross-checks.
//!
//! All public values are in bits. Quantities that diverge (fully correlated
//! noise) are reported as [`Info::Infinite`].
//!
//! The bound chain is evaluated through `t = Δ_ρ/Δ` so that
//! `r4_lower ≤ r3_lower ≤ r2` holds bit-for-bit in floating point:
//!
//! * `R2 = −½·log2(1 − t²)`
//! * `R3_lower = R2 − ½·log2(1 + t²)`
//! * `R4_lower = R3_lower + ½·log2(1 − t⁴/2)`

use crate::channels::ChannelMatrix;
use crate::error::{HociError, Result};
use crate::info::Info;
use crate::numeric;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Model parameters `(σ_X², σ_N², ρ, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianEnsembleSpec {
    sigma_x2: f64,
    sigma_n2: f64,
    rho: f64,
    n: usize,
}

impl GaussianEnsembleSpec {
    /// Validates positivity and positive semidefiniteness of the `n × n`
    /// noise covariance, which needs `ρ ≥ −1/(n−1)`.
    pub fn new(sigma_x2: f64, sigma_n2: f64, rho: f64, n: usize) -> Result<Self> {
        if !(sigma_x2 > 0.0 && sigma_x2.is_finite()) {
            return Err(HociError::domain(format!("sigma_x2 must be positive and finite, got {sigma_x2}")));
        }
        if !(sigma_n2 > 0.0 && sigma_n2.is_finite()) {
            return Err(HociError::domain(format!("sigma_n2 must be positive and finite, got {sigma_n2}")));
        }
        if !(-1.0..=1.0).contains(&rho) {
            return Err(HociError::domain(format!("rho must lie in [-1, 1], got {rho}")));
        }
        if n < 2 {
            return Err(HociError::domain(format!("need at least 2 variables, got {n}")));
        }
        let psd_bound = -1.0 / (n as f64 - 1.0);
        if rho < psd_bound - 1e-12 {
            return Err(HociError::domain(format!(
                "rho = {rho} is below the PSD bound -1/(n-1) = {psd_bound} for n = {n}"
            )));
        }
        Ok(GaussianEnsembleSpec {
            sigma_x2,
            sigma_n2,
            rho,
            n,
        })
    }

    pub fn sigma_x2(&self) -> f64 {
        self.sigma_x2
    }
    pub fn sigma_n2(&self) -> f64 {
        self.sigma_n2
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn n(&self) -> usize {
        self.n
    }

    /// `Δ_ρ/Δ`, the correlation coefficient between any two observations.
    fn t(&self) -> f64 {
        let d = delta_quantities(self);
        d.delta_rho / d.delta
    }
}

/// The scalars `Δ, Δ_ρ, Δ1, Δ2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaQuantities {
    pub delta: f64,
    pub delta_rho: f64,
    pub delta1: f64,
    pub delta2: f64,
}

/// MMSE coefficients and estimation-error variances used to build the
/// analytic sufficient-common-information variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmseCoefficients {
    /// Coefficient of `E[X_j | X_i]`.
    pub alpha: f64,
    /// Coefficient of `E[X_i | X_j, X_k]` on `X_j + X_k`.
    pub beta: f64,
    pub sigma_eps_j2: f64,
    pub sigma_eps_k2: f64,
}

pub fn delta_quantities(spec: &GaussianEnsembleSpec) -> DeltaQuantities {
    let (sx, sn, rho) = (spec.sigma_x2, spec.sigma_n2, spec.rho);
    let delta = sx + sn;
    let delta_rho = sx + rho * sn;
    // factored forms avoid cancellation as rho -> 1
    let delta1 = sn * (1.0 - rho) * ((1.0 + rho) * sn + 2.0 * sx);
    let delta2 = delta * delta + delta_rho * delta_rho;
    DeltaQuantities {
        delta,
        delta_rho,
        delta1,
        delta2,
    }
}

pub fn mmse_coefficients(spec: &GaussianEnsembleSpec) -> Result<MmseCoefficients> {
    let d = delta_quantities(spec);
    if spec.rho >= 1.0 {
        return Err(HociError::domain(
            "fully correlated noise (rho = 1): estimation errors vanish",
        ));
    }
    if d.delta_rho == 0.0 {
        return Err(HociError::NoCommonInformation(
            "Δ_ρ = 0: observations are uncorrelated".into(),
        ));
    }
    let dr2 = d.delta_rho * d.delta_rho;
    Ok(MmseCoefficients {
        alpha: d.delta_rho / d.delta,
        beta: d.delta_rho / (d.delta + d.delta_rho),
        sigma_eps_j2: d.delta * d.delta1 / dr2,
        sigma_eps_k2: d.delta1 * d.delta2 / (d.delta * dr2),
    })
}

/// `−½·log2(1 − c²)` for a correlation coefficient, accurate for small `c`.
fn gaussian_mi_from_corr(c: f64) -> f64 {
    -0.5 * (-c * c).ln_1p() / LN_2
}

/// `I(X; X_i) = ½·log2((σ_X² + σ_N²)/σ_N²)`.
pub fn mi_x_xi(spec: &GaussianEnsembleSpec) -> Info {
    Info::finite(0.5 * (spec.sigma_x2 / spec.sigma_n2).ln_1p() / LN_2)
}

/// `I(X_i; X_j) = ½·log2(Δ²/Δ1)`, the closed-form pairwise common information.
pub fn mi_xi_xj(spec: &GaussianEnsembleSpec) -> Info {
    let d = delta_quantities(spec);
    if d.delta1 <= 0.0 {
        return Info::Infinite;
    }
    let t = d.delta_rho / d.delta;
    if t * t < 0.5 {
        Info::finite(gaussian_mi_from_corr(t))
    } else {
        Info::half_log2(d.delta * d.delta / d.delta1)
    }
}

/// `I(X_i; X_j | X_k)`. Fails when the denominator
/// `(σ_X²+σ_N²)((1+2ρ)σ_N²+3σ_X²)` is not positive.
pub fn cond_mi_xi_xj_given_xk(spec: &GaussianEnsembleSpec) -> Result<Info> {
    let (sx, sn, rho) = (spec.sigma_x2, spec.sigma_n2, spec.rho);
    let inner = (1.0 + 2.0 * rho) * sn + 3.0 * sx;
    if inner <= 0.0 {
        return Err(HociError::domain(format!(
            "conditional MI undefined: (1+2ρ)σ_N²+3σ_X² = {inner} ≤ 0 at ρ = {rho}"
        )));
    }
    // numerator (Δ+Δ_ρ)², denominator Δ(Δ+2Δ_ρ) = (Δ+Δ_ρ)² − Δ_ρ²
    let d = delta_quantities(spec);
    let s = d.delta_rho / (d.delta + d.delta_rho);
    Ok(Info::finite(gaussian_mi_from_corr(s)))
}

/// `I(X_i;X_j) − I(X_i;X_j|X_k)`; negative values indicate synergy.
pub fn interaction_information(spec: &GaussianEnsembleSpec) -> Result<Info> {
    let cmi = cond_mi_xi_xj_given_xk(spec)?;
    Ok(match (mi_xi_xj(spec), cmi) {
        (Info::Finite { bits: a }, Info::Finite { bits: b }) => Info::finite(a - b),
        _ => Info::Infinite,
    })
}

/// `R3_lower = R2 + ½·log2(Δ²/Δ2)`.
pub fn r3_lower(spec: &GaussianEnsembleSpec) -> Info {
    match mi_xi_xj(spec) {
        Info::Finite { bits } => {
            let t = spec.t();
            Info::finite(bits - 0.5 * (t * t).ln_1p() / LN_2)
        }
        Info::Infinite => Info::Infinite,
    }
}

/// `R4_lower = R3_lower + ½·log2(½ + Δ1Δ2/(2Δ⁴))`.
pub fn r4_lower(spec: &GaussianEnsembleSpec) -> Info {
    match r3_lower(spec) {
        Info::Finite { bits } => {
            let t2 = spec.t().powi(2);
            Info::finite(bits + 0.5 * (-0.5 * t2 * t2).ln_1p() / LN_2)
        }
        Info::Infinite => Info::Infinite,
    }
}

/// Limits of `R2` and `R3_lower` as the noise variance goes to 0 or ∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticLimits {
    /// `R2 − R3` as `σ_N² → 0` (bits).
    pub small_noise_gap: f64,
    /// `R2 / R3` as `σ_N² → 0`.
    pub small_noise_ratio: f64,
    /// Common value of `R2` and `R3` as `σ_N² → 0` (divergent).
    pub small_noise_r2: Info,
    pub large_noise_r2: Info,
    pub large_noise_r3: Info,
}

/// Noise-variance asymptotics; depend only on `ρ`.
pub fn asymptotic_limits(rho: f64) -> Result<AsymptoticLimits> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(HociError::domain(format!("rho must lie in [-1, 1], got {rho}")));
    }
    let (r2, r3) = if rho.abs() == 1.0 {
        (Info::Infinite, Info::Infinite)
    } else {
        let r2 = gaussian_mi_from_corr(rho);
        (Info::finite(r2), Info::finite(r2 - 0.5 * (rho * rho).ln_1p() / LN_2))
    };
    Ok(AsymptoticLimits {
        small_noise_gap: 0.5,
        small_noise_ratio: 1.0,
        small_noise_r2: Info::Infinite,
        large_noise_r2: r2,
        large_noise_r3: r3,
    })
}

/// Wyner's common information of two standard normal sources with
/// correlation `ρ`: `½·log2((1+|ρ|)/(1−|ρ|))`.
pub fn wyner_ci_standard_normal(rho: f64) -> Result<Info> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(HociError::domain(format!("rho must lie in [-1, 1], got {rho}")));
    }
    let a = rho.abs();
    if a == 1.0 {
        return Ok(Info::Infinite);
    }
    Ok(Info::finite(0.5 * ((1.0 + a) / (1.0 - a)).log2()))
}

/// Draws `num_samples` i.i.d. realizations of `(X_1, …, X_n)`.
///
/// The correlated noise is built from `n` independent standard normals `E`
/// with mean `Ē` as `N_i = σ_N·(√(1−ρ)·(E_i − Ē) + √(1+(n−1)ρ)·Ē)`, which is
/// exact for every `ρ ≥ −1/(n−1)` including the singular boundary.
pub fn sample_ensemble(spec: &GaussianEnsembleSpec, num_samples: usize, seed: u64) -> Result<ChannelMatrix> {
    let n = spec.n;
    let c_dev = (1.0 - spec.rho).max(0.0).sqrt();
    let c_common = ((1.0 + (n as f64 - 1.0) * spec.rho).max(0.0) / n as f64).sqrt();
    let sx = spec.sigma_x2.sqrt();
    let sn = spec.sigma_n2.sqrt();
    let sqrt_n = (n as f64).sqrt();

    let mut rng = numeric::rng(seed);
    let mut data = vec![Vec::with_capacity(num_samples); n];
    let mut e = vec![0.0; n];
    for _ in 0..num_samples {
        let x: f64 = StandardNormal.sample(&mut rng);
        for v in e.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let e_bar = e.iter().sum::<f64>() / n as f64;
        for (row, &ei) in data.iter_mut().zip(&e) {
            let noise = c_dev * (ei - e_bar) + c_common * sqrt_n * e_bar;
            row.push(sx * x + sn * noise);
        }
    }
    ChannelMatrix::unnamed(data, None)
}
