//! Sample containers: single columns and named multichannel matrices.

use crate::error::{HociError, Result};
use crate::numeric;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Minimum number of samples per channel in a [`ChannelMatrix`].
pub const MIN_CHANNEL_SAMPLES: usize = 32;

/// A finite sample sequence of length at least 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SampleColumn(Vec<f64>);

impl SampleColumn {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(HociError::degenerate(format!(
                "sample column needs at least 2 values, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(HociError::degenerate(format!(
                "non-finite value {} at index {pos}",
                values[pos]
            )));
        }
        Ok(SampleColumn(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for SampleColumn {
    type Error = HociError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SampleColumn::new(v)
    }
}

impl From<SampleColumn> for Vec<f64> {
    fn from(c: SampleColumn) -> Self {
        c.0
    }
}

/// Location and scale removed from a channel during standardization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelScale {
    pub mean: f64,
    pub std: f64,
}

/// Channels × samples data with labels and an optional sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    names: Vec<String>,
    channels: Vec<SampleColumn>,
    sample_rate_hz: Option<f64>,
    scales: Option<Vec<ChannelScale>>,
}

impl ChannelMatrix {
    pub fn new(names: Vec<String>, data: Vec<Vec<f64>>, sample_rate_hz: Option<f64>) -> Result<Self> {
        if names.len() != data.len() {
            return Err(HociError::Configuration(format!(
                "{} channel names for {} data rows",
                names.len(),
                data.len()
            )));
        }
        if data.is_empty() {
            return Err(HociError::Configuration("no channels".into()));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(HociError::Configuration(format!("duplicate channel name '{name}'")));
            }
        }
        if let Some(rate) = sample_rate_hz {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(HociError::domain(format!("sample rate must be positive, got {rate}")));
            }
        }
        let len = data[0].len();
        let mut channels = Vec::with_capacity(data.len());
        for (name, row) in names.iter().zip(data) {
            if row.len() != len {
                return Err(HociError::Configuration(format!(
                    "channel '{name}' has {} samples, expected {len}",
                    row.len()
                )));
            }
            if row.len() < MIN_CHANNEL_SAMPLES {
                return Err(HociError::degenerate(format!(
                    "channel '{name}' has {} samples, need at least {MIN_CHANNEL_SAMPLES}",
                    row.len()
                )));
            }
            channels.push(
                SampleColumn::new(row)
                    .map_err(|e| HociError::degenerate(format!("channel '{name}': {e}")))?,
            );
        }
        Ok(ChannelMatrix {
            names,
            channels,
            sample_rate_hz,
            scales: None,
        })
    }

    /// Default names `X1..Xn`.
    pub fn unnamed(data: Vec<Vec<f64>>, sample_rate_hz: Option<f64>) -> Result<Self> {
        let names = (1..=data.len()).map(|i| format!("X{i}")).collect();
        Self::new(names, data, sample_rate_hz)
    }

    /// Zero mean, unit variance per channel; records the removed scales.
    pub fn standardized(&self) -> Result<Self> {
        let mut channels = Vec::with_capacity(self.channels.len());
        let mut scales = Vec::with_capacity(self.channels.len());
        for (name, col) in self.names.iter().zip(&self.channels) {
            let (z, mean, std) = numeric::standardize(col.values())
                .map_err(|_| HociError::degenerate(format!("channel '{name}' is constant")))?;
            channels.push(SampleColumn(z));
            scales.push(ChannelScale { mean, std });
        }
        Ok(ChannelMatrix {
            names: self.names.clone(),
            channels,
            sample_rate_hz: self.sample_rate_hz,
            scales: Some(scales),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn channels(&self) -> &[SampleColumn] {
        &self.channels
    }

    pub fn channel(&self, index: usize) -> &SampleColumn {
        &self.channels[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn num_samples(&self) -> usize {
        self.channels[0].len()
    }

    pub fn sample_rate_hz(&self) -> Option<f64> {
        self.sample_rate_hz
    }

    pub fn scales(&self) -> Option<&[ChannelScale]> {
        self.scales.as_deref()
    }
}
