//! Sufficient common information (SCI) variables built by noise injection.
//!
//! `T_{i,j} = X_j + Z` where the variance of the Gaussian `Z` is tuned so that
//! `Î(T; X_j) = Î(X_i; X_j)`. Higher orders repeat the step on top of an
//! existing SCI: `T_{i,j,k} = T_{i,j} + Z'` with `Î(T_{i,j,k}; T_{i,j})`
//! matched to `Î(X_k; T_{i,j})`.
//!
//! The injected noise for one descriptor is a single standard-normal draw
//! that is centered, projected off the carrier column in-sample and rescaled
//! to unit sample variance. Every candidate variance reuses it, so the
//! matched information is a smooth monotone function of the variance.

use crate::channels::{ChannelMatrix, SampleColumn};
use crate::error::{HociError, Result};
use crate::estimate::{self, EstimatorConfig};
use crate::gaussian::{delta_quantities, GaussianEnsembleSpec};
use crate::numeric;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Width in log-variance below which the bisection is allowed to stop.
const LOG_BRACKET_TOL: f64 = 1e-3;

/// Reference sample size for the verification slack.
const SLACK_REFERENCE_SAMPLES: f64 = 1e5;
/// Verification slack in bits at the reference sample size.
pub const DEFAULT_SLACK_BITS: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SciDescriptor {
    /// Channel that carries the noise (`j`).
    pub base_channel: usize,
    /// Channel whose shared information is matched (`i`).
    pub partner_channel: usize,
    /// Variance of the noise added at this stage, in the carrier's units.
    pub noise_variance: f64,
    pub seed: u64,
    /// `|achieved_bits − target_bits|`.
    pub residual: f64,
    /// Bisection iterations after bracketing.
    pub iterations: usize,
    pub bracket_steps: usize,
    /// 2 for `T_{i,j}`, 3 for `T_{i,j,k}`, and so on.
    pub order: usize,
    pub target_bits: f64,
    pub achieved_bits: f64,
}

impl SciDescriptor {
    /// Replaces the channel indices, which default to argument positions.
    pub fn with_channels(mut self, partner: usize, base: usize) -> Self {
        self.partner_channel = partner;
        self.base_channel = base;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectionConfig {
    /// Residual tolerance in bits.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub bracket_growth: f64,
    /// Starting variance; `None` means `1e-3` times the carrier's variance.
    pub initial_variance: Option<f64>,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        BisectionConfig {
            epsilon: 1e-3,
            max_iterations: 60,
            bracket_growth: 2.0,
            initial_variance: None,
        }
    }
}

impl BisectionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HociError::Configuration(m.into()));
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if self.max_iterations < 10 {
            return bad("max_iterations must be at least 10");
        }
        if !(self.bracket_growth > 1.0) {
            return bad("bracket_growth must exceed 1");
        }
        if let Some(v) = self.initial_variance {
            if !(v > 0.0 && v.is_finite()) {
                return bad("initial_variance must be positive");
            }
        }
        Ok(())
    }
}

fn stage_deltas(spec: &GaussianEnsembleSpec) -> Result<crate::gaussian::DeltaQuantities> {
    if spec.rho() >= 1.0 {
        return Err(HociError::domain("SCI variance needs ρ < 1"));
    }
    let d = delta_quantities(spec);
    if d.delta_rho == 0.0 {
        return Err(HociError::NoCommonInformation(
            "Δ_ρ = 0: channels are uncorrelated, SCI noise diverges".into(),
        ));
    }
    Ok(d)
}

/// Noise variance that turns `X_j` into an SCI for `X_i`: `Δ·Δ1/Δ_ρ²`.
pub fn analytic_sci_variance(spec: &GaussianEnsembleSpec) -> Result<f64> {
    let d = stage_deltas(spec)?;
    Ok(d.delta * d.delta1 / (d.delta_rho * d.delta_rho))
}

/// MMSE error variance of `T_{i,j}` given `X_k`: `Δ1·Δ2/(Δ·Δ_ρ²)`.
pub fn analytic_sci_variance_stage2(spec: &GaussianEnsembleSpec) -> Result<f64> {
    let d = stage_deltas(spec)?;
    Ok(d.delta1 * d.delta2 / (d.delta * d.delta_rho * d.delta_rho))
}

/// Second-stage variance implied by the matching rule used in
/// [`build_sci_higher`]: `Δ³·Δ1·Δ2/Δ_ρ⁶`.
///
/// `T_{i,j}` has variance `Δ³/Δ_ρ²` and squared correlation `(Δ_ρ/Δ)⁴` with
/// `X_k`; adding this much noise gives the same squared correlation between
/// `T_{i,j,k}` and `T_{i,j}`.
pub fn analytic_matched_variance_stage2(spec: &GaussianEnsembleSpec) -> Result<f64> {
    let d = stage_deltas(spec)?;
    let r2 = d.delta_rho * d.delta_rho;
    Ok(d.delta.powi(3) * d.delta1 * d.delta2 / (r2 * r2 * r2))
}

/// Unit-variance noise, centered and orthogonal to `carrier` in-sample.
fn shaped_noise(carrier: &[f64], seed: u64) -> Result<Vec<f64>> {
    let mut rng = numeric::rng(seed);
    let mut e: Vec<f64> = (0..carrier.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let cm = numeric::mean(carrier);
    let xc: Vec<f64> = carrier.iter().map(|v| v - cm).collect();
    let em = numeric::mean(&e);
    e.iter_mut().for_each(|v| *v -= em);
    let sxx: f64 = xc.iter().map(|v| v * v).sum();
    if sxx > 0.0 {
        let proj = e.iter().zip(&xc).map(|(a, b)| a * b).sum::<f64>() / sxx;
        e.iter_mut().zip(&xc).for_each(|(v, x)| *v -= proj * x);
    }
    let sd = numeric::variance(&e).sqrt();
    if !(sd > 0.0) {
        return Err(HociError::degenerate("too few samples to shape SCI noise"));
    }
    e.iter_mut().for_each(|v| *v /= sd);
    Ok(e)
}

fn noisy(carrier: &[f64], noise: &[f64], variance: f64) -> Result<SampleColumn> {
    let s = variance.sqrt();
    SampleColumn::new(carrier.iter().zip(noise).map(|(c, z)| c + s * z).collect())
}

/// Finds `v` with `|Î(carrier + √v·Z; carrier) − target| < ε`.
fn tune(
    carrier: &SampleColumn,
    target: f64,
    cfg: &EstimatorConfig,
    bis: &BisectionConfig,
    seed: u64,
    order: usize,
) -> Result<(SciDescriptor, SampleColumn)> {
    cfg.validate()?;
    bis.validate()?;
    if target.is_infinite() {
        return Err(HociError::Convergence {
            iterations: 0,
            reason: "target information is divergent; no finite noise variance matches it".into(),
        });
    }
    if target <= bis.epsilon {
        return Err(HociError::NoCommonInformation(format!(
            "target information {target:.3e} bits is within ε = {:.1e}",
            bis.epsilon
        )));
    }
    let noise = shaped_noise(carrier.values(), seed)?;
    let eval = |log_v: f64| -> Result<(f64, SampleColumn)> {
        let t = noisy(carrier.values(), &noise, log_v.exp())?;
        let bits = estimate::pair_mi(&t, carrier, cfg)?.bits;
        Ok((bits - target, t))
    };

    let v0 = bis
        .initial_variance
        .unwrap_or_else(|| 1e-3 * numeric::variance(carrier.values()));
    let step = bis.bracket_growth.ln();
    let (mut lo, mut hi);
    let mut bracket_steps = 0;
    let (f0, _) = eval(v0.ln())?;
    if f0 > 0.0 {
        lo = v0.ln();
        hi = lo + step;
        loop {
            bracket_steps += 1;
            if bracket_steps > bis.max_iterations {
                return Err(HociError::Convergence {
                    iterations: bracket_steps - 1,
                    reason: "bracket expansion never pushed the information below the target".into(),
                });
            }
            let (f, _) = eval(hi)?;
            if f <= 0.0 {
                break;
            }
            lo = hi;
            hi += step;
        }
    } else {
        hi = v0.ln();
        lo = hi - step;
        loop {
            bracket_steps += 1;
            if bracket_steps > bis.max_iterations {
                return Err(HociError::Convergence {
                    iterations: bracket_steps - 1,
                    reason: "bracket contraction never raised the information above the target".into(),
                });
            }
            let (f, _) = eval(lo)?;
            if f > 0.0 {
                break;
            }
            hi = lo;
            lo -= step;
        }
    }

    let mut best_residual = f64::INFINITY;
    for it in 1..=bis.max_iterations {
        let mid = 0.5 * (lo + hi);
        let (f, t) = eval(mid)?;
        if f.abs() < bis.epsilon && hi - lo < LOG_BRACKET_TOL {
            let desc = SciDescriptor {
                base_channel: 1,
                partner_channel: 0,
                noise_variance: mid.exp(),
                seed,
                residual: f.abs(),
                iterations: it,
                bracket_steps,
                order,
                target_bits: target,
                achieved_bits: f + target,
            };
            return Ok((desc, t));
        }
        best_residual = best_residual.min(f.abs());
        if f > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(HociError::Convergence {
        iterations: bis.max_iterations,
        reason: format!("bisection stalled with residual {best_residual:.3e} bits"),
    })
}

/// Builds `T = x_j + Z` matching `Î(T; x_j) = Î(x_i; x_j)` within ε.
///
/// The descriptor's channel indices are the argument positions (0 for
/// `x_i`, 1 for `x_j`); see [`SciDescriptor::with_channels`].
pub fn build_sci(
    x_i: &SampleColumn,
    x_j: &SampleColumn,
    cfg: &EstimatorConfig,
    bis: &BisectionConfig,
    seed: u64,
) -> Result<(SciDescriptor, SampleColumn)> {
    let target = estimate::pair_mi(x_i, x_j, cfg)?.bits;
    tune(x_j, target, cfg, bis, seed, 2)
}

/// Builds an order `m + 1` SCI on top of an order-`m` one:
/// `T_new = T_base + Z'` with `Î(T_new; T_base)` matched to `Î(x_k; T_base)`.
pub fn build_sci_higher(
    base: (&SciDescriptor, &SampleColumn),
    x_k: &SampleColumn,
    cfg: &EstimatorConfig,
    bis: &BisectionConfig,
    seed: u64,
) -> Result<(SciDescriptor, SampleColumn)> {
    let (base_desc, t_base) = base;
    let target = estimate::pair_mi(x_k, t_base, cfg)?.bits;
    let (desc, t) = tune(t_base, target, cfg, bis, seed, base_desc.order + 1)?;
    Ok((desc.with_channels(base_desc.partner_channel, base_desc.base_channel), t))
}

/// Verification slack `δ = 0.02·√(10⁵/N)` bits.
pub fn default_slack(num_samples: usize) -> f64 {
    DEFAULT_SLACK_BITS * (SLACK_REFERENCE_SAMPLES / num_samples as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SciMargin {
    pub channel: usize,
    pub t_bits: f64,
    /// `min(Î(X_i; X_γ), Î(X_j; X_γ))`; infinite only when both are self terms.
    pub bound_bits: f64,
    /// `bound + δ − Î(T; X_γ)`; negative means violated.
    pub margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SciVerification {
    pub partner_channel: usize,
    pub base_channel: usize,
    pub slack_bits: f64,
    pub margins: Vec<SciMargin>,
    pub passed: bool,
}

/// Checks `Î(T; X_γ) ≤ min(Î(X_i; X_γ), Î(X_j; X_γ)) + δ` for every channel.
///
/// Self terms `Î(X_γ; X_γ)` are taken as infinite. `slack` defaults to
/// [`default_slack`].
pub fn verify_sci(
    t: &SampleColumn,
    channels: &ChannelMatrix,
    i: usize,
    j: usize,
    cfg: &EstimatorConfig,
    slack: Option<f64>,
) -> Result<SciVerification> {
    let n = channels.num_channels();
    if i >= n || j >= n {
        return Err(HociError::Configuration(format!(
            "channel index out of range for {n} channels"
        )));
    }
    let delta = slack.unwrap_or_else(|| default_slack(channels.num_samples()));
    let info = |a: usize, g: usize| -> Result<f64> {
        if a == g {
            Ok(f64::INFINITY)
        } else {
            Ok(estimate::pair_mi(channels.channel(a), channels.channel(g), cfg)?.bits)
        }
    };
    let mut margins = Vec::with_capacity(n);
    for g in 0..n {
        let t_bits = estimate::pair_mi(t, channels.channel(g), cfg)?.bits;
        let bound_bits = info(i, g)?.min(info(j, g)?);
        let margin = bound_bits + delta - t_bits;
        let passed = if t_bits.is_infinite() {
            false
        } else {
            margin >= 0.0
        };
        margins.push(SciMargin {
            channel: g,
            t_bits,
            bound_bits,
            margin,
            passed,
        });
    }
    let passed = margins.iter().all(|m| m.passed);
    Ok(SciVerification {
        partner_channel: i,
        base_channel: j,
        slack_bits: delta,
        margins,
        passed,
    })
}
