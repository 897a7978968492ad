//! Higher-order common information.
//!
//! `R_ℓ` is the information shared by every `ℓ`-subset of a set of variables.
//! This crate provides:
//!
//! * closed-form bounds for the Gaussian model `X_i = X + N_i` ([`gaussian`]);
//! * an exact oracle for the discrete shared-symbol construction ([`discrete`]);
//! * sample-based mutual-information estimators ([`estimate`]);
//! * noise-injection SCI variables ([`sci`]) and the estimation pipeline
//!   built on them ([`pipeline`]);
//! * CSV/JSON input and output ([`io`]).

pub mod channels;
pub mod discrete;
pub mod error;
pub mod estimate;
pub mod gaussian;
pub mod info;
pub mod io;
pub mod numeric;
pub mod pipeline;
pub mod sci;

pub use channels::{ChannelMatrix, ChannelScale, SampleColumn};
pub use error::{HociError, Result};
pub use estimate::{EstimatorConfig, Method, MiEstimate, SampleMode};
pub use gaussian::GaussianEnsembleSpec;
pub use info::Info;
pub use pipeline::{CommonInfoReport, MinEstimate, RunOptions};
pub use sci::{BisectionConfig, SciDescriptor};
