//! Shared fixtures for the estimator benchmarks.

use hoci_core::gaussian::{self, GaussianEnsembleSpec};
use hoci_core::ChannelMatrix;

/// Sample sizes the benches sweep over.
pub const SIZES: [usize; 3] = [1_000, 10_000, 100_000];

/// A four-channel exchangeable Gaussian ensemble at `σX² = σN² = 1`, `ρ = 0.3`.
pub fn gaussian_channels(num_samples: usize, seed: u64) -> ChannelMatrix {
    let spec = GaussianEnsembleSpec::new(1.0, 1.0, 0.3, 4).expect("valid spec");
    gaussian::sample_ensemble(&spec, num_samples, seed).expect("sampling succeeds")
}
