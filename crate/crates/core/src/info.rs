//! An information value in bits that may diverge.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Mutual information in bits, or a divergent ("infinite information") result.
///
/// Divergence is kept distinct from large finite numbers so that minimizations
/// treat it as dominating. Serialized as a tagged object:
/// `{"kind":"finite","bits":0.2}` or `{"kind":"infinite"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Info {
    Finite { bits: f64 },
    Infinite,
}

impl Info {
    pub fn finite(bits: f64) -> Self {
        Info::Finite { bits }
    }

    /// Maps `+inf` to [`Info::Infinite`].
    pub fn from_f64(bits: f64) -> Self {
        if bits == f64::INFINITY {
            Info::Infinite
        } else {
            Info::Finite { bits }
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Info::Infinite)
    }

    pub fn bits(&self) -> Option<f64> {
        match *self {
            Info::Finite { bits } => Some(bits),
            Info::Infinite => None,
        }
    }

    /// Value as an `f64`, with divergence mapped to `+inf`.
    pub fn as_f64(&self) -> f64 {
        match *self {
            Info::Finite { bits } => bits,
            Info::Infinite => f64::INFINITY,
        }
    }

    /// `½·log2(ratio)`, divergent when the ratio is infinite.
    pub(crate) fn half_log2(ratio: f64) -> Self {
        Info::from_f64(0.5 * ratio.log2())
    }
}

impl PartialOrd for Info {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.as_f64().partial_cmp(&other.as_f64())
    }
}

impl fmt::Display for Info {
    /// CSV rendering: `inf` for divergent values.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Info::Finite { bits } => write!(f, "{bits}"),
            Info::Infinite => f.write_str("inf"),
        }
    }
}
