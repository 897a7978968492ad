//! End-to-end estimation of `R̂2`, `R̂3`, `R̂4`, the averages `R̄_ℓ` and the
//! scaled approximation `R̃_ℓ` over a [`ChannelMatrix`], plus the lag scan
//! and region minimization used for stimulus-locked recordings.
//!
//! Every information value inside one report comes from the same
//! [`EstimatorConfig`]. Per-pair seeds are derived from the run seed, so the
//! parallel schedule never changes the output.

use crate::channels::{ChannelMatrix, SampleColumn};
use crate::error::{HociError, Result};
use crate::estimate::{self, EstimatorConfig};
use crate::info::Info;
use crate::numeric;
use crate::sci::{self, BisectionConfig, SciDescriptor};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A minimum over index tuples together with the minimizing tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinEstimate {
    pub value: Info,
    /// Channel indices; `None` when no term could be evaluated and the value
    /// is zero because every candidate pair lacked common information.
    pub argmin: Option<Vec<usize>>,
}

impl MinEstimate {
    pub fn bits(&self) -> f64 {
        self.value.as_f64()
    }
}

/// A SCI construction that did not produce a variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SciFailure {
    pub partner_channel: usize,
    pub base_channel: usize,
    pub code: String,
    pub message: String,
}

/// All pairwise SCIs `T_{i,j}` of a channel matrix, in `(i, j)` order.
#[derive(Debug, Clone)]
pub struct SciSet {
    pub descriptors: Vec<SciDescriptor>,
    pub columns: Vec<SampleColumn>,
    pub failures: Vec<SciFailure>,
}

impl SciSet {
    /// Called when no term is available. That is a zero, not a failure, when
    /// every missing construction lacked common information.
    fn no_terms(&self, what: &str) -> Result<MinEstimate> {
        let no_info = HociError::NoCommonInformation(String::new()).code();
        if self.failures.iter().all(|f| f.code == no_info) {
            return Ok(MinEstimate {
                value: Info::finite(0.0),
                argmin: None,
            });
        }
        let detail: Vec<String> = self
            .failures
            .iter()
            .map(|f| format!("T({},{}): {} {}", f.partner_channel, f.base_channel, f.code, f.message))
            .collect();
        Err(HociError::Pipeline(format!(
            "no {what} term could be evaluated; SCI diagnostics: [{}]",
            detail.join("; ")
        )))
    }
}

fn pair_label(channels: &ChannelMatrix, i: usize, j: usize) -> String {
    format!("'{}'/'{}'", channels.names()[i], channels.names()[j])
}

fn annotate(err: HociError, label: &str) -> HociError {
    match err {
        HociError::DegenerateInput(m) => HociError::DegenerateInput(format!("channels {label}: {m}")),
        other => other,
    }
}

fn need_channels(channels: &ChannelMatrix, min: usize, what: &str) -> Result<()> {
    if channels.num_channels() < min {
        return Err(HociError::Configuration(format!(
            "{what} needs at least {min} channels, got {}",
            channels.num_channels()
        )));
    }
    Ok(())
}

/// First minimum in iteration order.
fn first_min(items: impl IntoIterator<Item = (f64, Vec<usize>)>) -> Option<MinEstimate> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for (v, idx) in items {
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, idx));
        }
    }
    best.map(|(v, idx)| MinEstimate {
        value: Info::from_f64(v),
        argmin: Some(idx),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairInfo {
    pub i: usize,
    pub j: usize,
    pub value: Info,
}

/// Pairwise information for all unordered pairs `i < j`.
pub fn pairwise(channels: &ChannelMatrix, cfg: &EstimatorConfig) -> Result<Vec<PairInfo>> {
    cfg.validate()?;
    let n = channels.num_channels();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let e = estimate::pair_mi(channels.channel(i), channels.channel(j), cfg)
                .map_err(|e| annotate(e, &pair_label(channels, i, j)))?;
            Ok(PairInfo { i, j, value: e.info() })
        })
        .collect()
}

/// `R̂2 = min_{i<j} Î(X_i; X_j)`.
pub fn estimate_r2(channels: &ChannelMatrix, cfg: &EstimatorConfig) -> Result<MinEstimate> {
    need_channels(channels, 2, "R2")?;
    let pairs = pairwise(channels, cfg)?;
    Ok(r2_from_pairs(&pairs))
}

fn r2_from_pairs(pairs: &[PairInfo]) -> MinEstimate {
    first_min(pairs.iter().map(|p| (p.value.as_f64(), vec![p.i, p.j]))).expect("at least one pair")
}

/// Builds `T_{i,j}` for every ordered pair `i ≠ j`.
pub fn build_sci_set(
    channels: &ChannelMatrix,
    cfg: &EstimatorConfig,
    bis: &BisectionConfig,
    seed: u64,
) -> Result<SciSet> {
    cfg.validate()?;
    bis.validate()?;
    let n = channels.num_channels();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let outcomes: Vec<_> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let s = numeric::derive_seed(seed, &[i as u64, j as u64, 2]);
            let r = sci::build_sci(channels.channel(i), channels.channel(j), cfg, bis, s);
            (i, j, r.map(|(d, t)| (d.with_channels(i, j), t)))
        })
        .collect();
    let mut set = SciSet {
        descriptors: Vec::new(),
        columns: Vec::new(),
        failures: Vec::new(),
    };
    for (i, j, r) in outcomes {
        match r {
            Ok((d, t)) => {
                set.descriptors.push(d);
                set.columns.push(t);
            }
            Err(e @ (HociError::NoCommonInformation(_) | HociError::Convergence { .. })) => {
                set.failures.push(SciFailure {
                    partner_channel: i,
                    base_channel: j,
                    code: e.code().into(),
                    message: e.to_string(),
                })
            }
            Err(e) => return Err(annotate(e, &pair_label(channels, i, j))),
        }
    }
    Ok(set)
}

/// `Î(T_{i,j}; X_k)` for every built SCI and every `k ∉ {i, j}`.
fn sci_channel_terms(channels: &ChannelMatrix, set: &SciSet, cfg: &EstimatorConfig) -> Result<Vec<(f64, Vec<usize>)>> {
    let n = channels.num_channels();
    let jobs: Vec<(usize, usize)> = set
        .descriptors
        .iter()
        .enumerate()
        .flat_map(|(s, d)| {
            let (i, j) = (d.partner_channel, d.base_channel);
            (0..n).filter(move |&k| k != i && k != j).map(move |k| (s, k))
        })
        .collect();
    jobs.par_iter()
        .map(|&(s, k)| {
            let d = &set.descriptors[s];
            let e = estimate::pair_mi(&set.columns[s], channels.channel(k), cfg)?;
            Ok((e.bits, vec![d.partner_channel, d.base_channel, k]))
        })
        .collect()
}

/// `R̂3 = min_{i,j,k distinct} Î(T_{i,j}; X_k)` over a prebuilt SCI set.
pub fn r3_from_set(channels: &ChannelMatrix, set: &SciSet, cfg: &EstimatorConfig) -> Result<MinEstimate> {
    need_channels(channels, 3, "R3")?;
    let terms = sci_channel_terms(channels, set, cfg)?;
    match first_min(terms) {
        Some(m) => Ok(m),
        None => set.no_terms("R3"),
    }
}

/// Builds the SCI set and returns `R̂3` with it.
pub fn estimate_r3_lower(
    channels: &ChannelMatrix,
    cfg: &EstimatorConfig,
    bis: &BisectionConfig,
    seed: u64,
) -> Result<(MinEstimate, SciSet)> {
    need_channels(channels, 3, "R3")?;
    let set = build_sci_set(channels, cfg, bis, seed)?;
    Ok((r3_from_set(channels, &set, cfg)?, set))
}

/// `R̂4 = min Î(T_{i,j}; T_{k,m})` over disjoint `{i,j}`, `{k,m}`.
pub fn r4_from_set(channels: &ChannelMatrix, set: &SciSet, cfg: &EstimatorConfig) -> Result<MinEstimate> {
    need_channels(channels, 4, "R4")?;
    let d = &set.descriptors;
    let jobs: Vec<(usize, usize)> = (0..d.len())
        .flat_map(|a| (a + 1..d.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| {
            let (i, j, k, m) = (d[a].partner_channel, d[a].base_channel, d[b].partner_channel, d[b].base_channel);
            i != k && i != m && j != k && j != m
        })
        .collect();
    let terms: Vec<(f64, Vec<usize>)> = jobs
        .par_iter()
        .map(|&(a, b)| {
            let e = estimate::pair_mi(&set.columns[a], &set.columns[b], cfg)?;
            Ok((
                e.bits,
                vec![d[a].partner_channel, d[a].base_channel, d[b].partner_channel, d[b].base_channel],
            ))
        })
        .collect::<Result<_>>()?;
    match first_min(terms) {
        Some(m) => Ok(m),
        None => set.no_terms("R4"),
    }
}

pub fn estimate_r4_lower(
    channels: &ChannelMatrix,
    cfg: &EstimatorConfig,
    bis: &BisectionConfig,
    seed: u64,
) -> Result<(MinEstimate, SciSet)> {
    need_channels(channels, 4, "R4")?;
    let set = build_sci_set(channels, cfg, bis, seed)?;
    Ok((r4_from_set(channels, &set, cfg)?, set))
}

/// Average information at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbarEstimate {
    /// Sum of the evaluated terms divided by their count.
    pub value: Info,
    pub terms: usize,
    /// Same sum divided by `C(|T_{ℓ−1}|, 2)` instead of the term count;
    /// absent when that set has fewer than two members.
    pub value_pair_normalized: Option<Info>,
}

fn rbar_from_terms(sum: f64, terms: usize, set_size: usize) -> Result<RbarEstimate> {
    if terms == 0 {
        return Err(HociError::Pipeline("no terms available for the average".into()));
    }
    let pairs = set_size * set_size.saturating_sub(1) / 2;
    Ok(RbarEstimate {
        value: Info::from_f64(sum / terms as f64),
        terms,
        value_pair_normalized: (pairs > 0).then(|| Info::from_f64(sum / pairs as f64)),
    })
}

fn rbar2_from_pairs(pairs: &[PairInfo], n: usize) -> Result<RbarEstimate> {
    let sum: f64 = pairs.iter().map(|p| p.value.as_f64()).sum();
    rbar_from_terms(sum, pairs.len(), n)
}

fn rbar3_from_set(channels: &ChannelMatrix, set: &SciSet, cfg: &EstimatorConfig) -> Result<RbarEstimate> {
    let terms = sci_channel_terms(channels, set, cfg)?;
    let sum: f64 = terms.iter().map(|(v, _)| v).sum();
    rbar_from_terms(sum, terms.len(), set.descriptors.len())
}

/// `R̄_ℓ` for `ℓ ∈ {2, 3}`.
///
/// Level 2 averages all pairwise estimates. Level 3 averages `Î(T_{i,j}; X_k)`
/// over built SCIs and channels `k ∉ {i, j}`.
pub fn average_rbar(
    channels: &ChannelMatrix,
    cfg: &EstimatorConfig,
    bis: &BisectionConfig,
    seed: u64,
    level: usize,
) -> Result<RbarEstimate> {
    match level {
        2 => {
            need_channels(channels, 2, "R̄2")?;
            rbar2_from_pairs(&pairwise(channels, cfg)?, channels.num_channels())
        }
        3 => {
            need_channels(channels, 3, "R̄3")?;
            let set = build_sci_set(channels, cfg, bis, seed)?;
            rbar3_from_set(channels, &set, cfg)
        }
        other => Err(HociError::domain(format!("average level must be 2 or 3, got {other}"))),
    }
}

/// `R̃_ℓ = (n − ℓ)/(n − 2) · R̂2`.
pub fn approx_rtilde(r2_bits: f64, n_vars: usize, level: usize) -> Result<f64> {
    if n_vars <= 2 {
        return Err(HociError::domain(format!("R̃ needs more than 2 variables, got {n_vars}")));
    }
    if level < 2 || level > n_vars {
        return Err(HociError::domain(format!("level {level} outside 2..={n_vars}")));
    }
    Ok((n_vars - level) as f64 / (n_vars - 2) as f64 * r2_bits)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagCorrelation {
    /// `|corr(x_{t−τ}, y_t)|` at the best lag.
    pub abs_corr: f64,
    pub lag_samples: usize,
    /// Present when the scan was specified in seconds.
    pub lag_seconds: Option<f64>,
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (numeric::mean(a), numeric::mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Maximizes `|corr(x_{t−τ}, y_t)|` over integer lags `lag_min..=lag_max`.
pub fn lag_max_correlation_samples(
    x: &SampleColumn,
    y: &SampleColumn,
    lag_min: usize,
    lag_max: usize,
) -> Result<LagCorrelation> {
    if lag_min > lag_max {
        return Err(HociError::domain(format!("empty lag grid {lag_min}..={lag_max}")));
    }
    if x.len() != y.len() {
        return Err(HociError::degenerate(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < lag_max + 2 {
        return Err(HociError::domain(format!(
            "series of length {} too short for lag {lag_max}",
            x.len()
        )));
    }
    let (xv, yv) = (x.values(), y.values());
    let mut best = LagCorrelation {
        abs_corr: -1.0,
        lag_samples: lag_min,
        lag_seconds: None,
    };
    for tau in lag_min..=lag_max {
        let c = pearson(&xv[..xv.len() - tau], &yv[tau..]).abs();
        if c > best.abs_corr {
            best.abs_corr = c;
            best.lag_samples = tau;
        }
    }
    Ok(best)
}

/// Lag scan in seconds at one-sample steps.
pub fn lag_max_correlation(
    x: &SampleColumn,
    y: &SampleColumn,
    lag_min_s: f64,
    lag_max_s: f64,
    sample_rate_hz: f64,
) -> Result<LagCorrelation> {
    if !(sample_rate_hz > 0.0) || !(lag_min_s >= 0.0) || !(lag_max_s >= lag_min_s) {
        return Err(HociError::domain("lag range and sample rate must satisfy 0 ≤ min ≤ max, rate > 0"));
    }
    // tolerate representation error of e.g. 0.19·64
    let lo = (lag_min_s * sample_rate_hz - 1e-9).ceil().max(0.0) as usize;
    let hi = (lag_max_s * sample_rate_hz + 1e-9).floor() as usize;
    if lo > hi {
        return Err(HociError::domain(format!(
            "no whole-sample lag in [{lag_min_s}, {lag_max_s}] s at {sample_rate_hz} Hz"
        )));
    }
    let mut r = lag_max_correlation_samples(x, y, lo, hi)?;
    r.lag_seconds = Some(r.lag_samples as f64 / sample_rate_hz);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionMode {
    R2,
    R3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionEstimate {
    pub value: Info,
    /// `[φ]` in r2 mode, `[ζ, φ]` in r3 mode; empty when no SCI could be built.
    pub argmin: Vec<String>,
    pub scis: Vec<SciDescriptor>,
}

/// Region minimum against an external reference signal.
///
/// r2 mode: `min_φ Î(φ; ref)`. r3 mode: `T_ζ = ref + Z` is tuned to
/// `Î(ζ; ref)` for each region channel ζ, and the result is
/// `min_{φ,ζ} Î(T_ζ; φ)` with `φ = ζ` allowed. In the returned descriptors
/// the reference carries the index one past the last channel.
pub fn region_min(
    channels: &ChannelMatrix,
    region: &[String],
    reference: &SampleColumn,
    mode: RegionMode,
    cfg: &EstimatorConfig,
    bis: &BisectionConfig,
    seed: u64,
) -> Result<RegionEstimate> {
    if region.is_empty() {
        return Err(HociError::Configuration("region is empty".into()));
    }
    let idx: Vec<usize> = region
        .iter()
        .map(|name| {
            channels
                .index_of(name)
                .ok_or_else(|| HociError::Configuration(format!("unknown channel '{name}' in region")))
        })
        .collect::<Result<_>>()?;
    let name = |i: usize| channels.names()[i].clone();
    match mode {
        RegionMode::R2 => {
            let vals: Vec<f64> = idx
                .par_iter()
                .map(|&p| Ok(estimate::pair_mi(channels.channel(p), reference, cfg)?.bits))
                .collect::<Result<_>>()?;
            let m = first_min(vals.into_iter().zip(&idx).map(|(v, &p)| (v, vec![p]))).expect("non-empty region");
            Ok(RegionEstimate {
                value: m.value,
                argmin: m.argmin.unwrap_or_default().into_iter().map(name).collect(),
                scis: Vec::new(),
            })
        }
        RegionMode::R3 => {
            let built: Vec<(usize, Result<(SciDescriptor, SampleColumn)>)> = idx
                .par_iter()
                .map(|&z| {
                    let s = numeric::derive_seed(seed, &[z as u64, u64::MAX, 2]);
                    (z, sci::build_sci(channels.channel(z), reference, cfg, bis, s))
                })
                .collect();
            let mut scis = Vec::new();
            let mut cols = Vec::new();
            let mut failures = Vec::new();
            for (z, r) in built {
                match r {
                    Ok((d, t)) => {
                        scis.push((z, d.with_channels(z, channels.num_channels())));
                        cols.push(t);
                    }
                    Err(e @ (HociError::NoCommonInformation(_) | HociError::Convergence { .. })) => failures.push(e),
                    Err(e) => return Err(e),
                }
            }
            if scis.is_empty() {
                if failures.iter().all(|e| matches!(e, HociError::NoCommonInformation(_))) {
                    return Ok(RegionEstimate {
                        value: Info::finite(0.0),
                        argmin: Vec::new(),
                        scis: Vec::new(),
                    });
                }
                let msgs: Vec<String> = failures.iter().map(|e| e.to_string()).collect();
                return Err(HociError::Pipeline(format!(
                    "no region SCI could be built: [{}]",
                    msgs.join("; ")
                )));
            }
            let jobs: Vec<(usize, usize)> = (0..scis.len()).flat_map(|s| idx.iter().map(move |&p| (s, p))).collect();
            let vals: Vec<(f64, Vec<usize>)> = jobs
                .par_iter()
                .map(|&(s, p)| Ok((estimate::pair_mi(&cols[s], channels.channel(p), cfg)?.bits, vec![scis[s].0, p])))
                .collect::<Result<_>>()?;
            let m = first_min(vals).expect("non-empty");
            Ok(RegionEstimate {
                value: m.value,
                argmin: m.argmin.unwrap_or_default().into_iter().map(name).collect(),
                scis: scis.into_iter().map(|(_, d)| d).collect(),
            })
        }
    }
}

/// Slack-adjusted ordering checks between the reported levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub slack_bits: f64,
    /// `R̂3 ≤ R̂2 + δ`; `None` when R̂3 was not requested.
    pub r3_within_r2: Option<bool>,
    /// `R̂4 ≤ R̂3 + δ`.
    pub r4_within_r3: Option<bool>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Highest level to estimate: 2, 3 or 4.
    pub order: usize,
    pub seed: u64,
    pub estimator: EstimatorConfig,
    pub bisection: BisectionConfig,
}

impl RunOptions {
    pub fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.order) {
            return Err(HociError::Configuration(format!("order must be 2, 3 or 4, got {}", self.order)));
        }
        self.estimator.validate()?;
        self.bisection.validate()
    }
}

/// Everything one run produces, in a stable field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommonInfoReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub order: usize,
    pub channels: Vec<String>,
    pub num_samples: usize,
    pub estimator: EstimatorConfig,
    pub bisection: BisectionConfig,
    pub r2: MinEstimate,
    pub r3_lower: Option<MinEstimate>,
    pub r4_lower: Option<MinEstimate>,
    /// Keyed by level.
    pub rbar: BTreeMap<usize, RbarEstimate>,
    /// Keyed by level; empty for two channels.
    pub rtilde: BTreeMap<usize, f64>,
    pub chain: ChainCheck,
    pub pairwise: Vec<PairInfo>,
    pub scis: Vec<SciDescriptor>,
    pub sci_failures: Vec<SciFailure>,
}

/// Runs every estimate up to `opts.order`, building the SCI set once.
pub fn run(channels: &ChannelMatrix, opts: &RunOptions) -> Result<CommonInfoReport> {
    opts.validate()?;
    need_channels(channels, opts.order, &format!("order {}", opts.order))?;
    let cfg = &opts.estimator;
    let pairs = pairwise(channels, cfg)?;
    let r2 = r2_from_pairs(&pairs);
    let n = channels.num_channels();

    let mut rbar = BTreeMap::new();
    rbar.insert(2, rbar2_from_pairs(&pairs, n)?);
    let mut rtilde = BTreeMap::new();
    if n > 2 && r2.value.bits().is_some() {
        for level in 2..=n {
            rtilde.insert(level, approx_rtilde(r2.bits(), n, level)?);
        }
    }

    let (mut r3, mut r4, mut scis, mut failures) = (None, None, Vec::new(), Vec::new());
    if opts.order >= 3 {
        let set = build_sci_set(channels, cfg, &opts.bisection, opts.seed)?;
        r3 = Some(r3_from_set(channels, &set, cfg)?);
        if !set.descriptors.is_empty() {
            rbar.insert(3, rbar3_from_set(channels, &set, cfg)?);
        }
        if opts.order >= 4 {
            r4 = Some(r4_from_set(channels, &set, cfg)?);
        }
        scis = set.descriptors;
        failures = set.failures;
    }

    let slack = sci::default_slack(channels.num_samples());
    let r3_within_r2 = r3.as_ref().map(|m| m.bits() <= r2.bits() + slack);
    let r4_within_r3 = match (&r4, &r3) {
        (Some(a), Some(b)) => Some(a.bits() <= b.bits() + slack),
        _ => None,
    };
    let chain = ChainCheck {
        slack_bits: slack,
        r3_within_r2,
        r4_within_r3,
        passed: r3_within_r2.unwrap_or(true) && r4_within_r3.unwrap_or(true),
    };

    Ok(CommonInfoReport {
        tool: "hoci".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: opts.seed,
        order: opts.order,
        channels: channels.names().to_vec(),
        num_samples: channels.num_samples(),
        estimator: *cfg,
        bisection: opts.bisection,
        r2,
        r3_lower: r3,
        r4_lower: r4,
        rbar,
        rtilde,
        chain,
        pairwise: pairs,
        scis,
        sci_failures: failures,
    })
}
