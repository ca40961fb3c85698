//! Sample-size formulas and the global scale factor applied to them.
//!
//! The theoretical constants (10⁹, 10¹¹, ...) are far beyond desk scale, so
//! every formula is evaluated unscaled, multiplied by a scale factor, and both
//! values are kept for reporting.

use serde::{Deserialize, Serialize};

/// Base of every `log` in a sample-size formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

/// One evaluated formula: its name, the raw value and the count actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledCount {
    pub name: String,
    pub unscaled: f64,
    /// `None` when the count was fixed by the caller.
    pub scale: Option<f64>,
    pub scaled: usize,
}

impl ScaledCount {
    /// `⌈scale · unscaled⌉`. A zero scale yields zero.
    pub fn new(name: &str, unscaled: f64, scale: f64) -> Self {
        let v = (unscaled * scale).ceil();
        let scaled = if v.is_finite() && v > 0.0 {
            v.min(usize::MAX as f64 / 2.0) as usize
        } else {
            0
        };
        log::debug!("{name}: unscaled {unscaled:.4e}, scale {scale:e}, using {scaled}");
        ScaledCount {
            name: name.to_string(),
            unscaled,
            scale: Some(scale),
            scaled,
        }
    }

    /// A count fixed by the caller rather than derived from a formula.
    pub fn fixed(name: &str, unscaled: f64, value: usize) -> Self {
        ScaledCount {
            name: name.to_string(),
            unscaled,
            scale: None,
            scaled: value,
        }
    }

    pub fn at_least_one(mut self) -> Self {
        self.scaled = self.scaled.max(1);
        self
    }
}

/// `400 · log n · k² / (η δ²)`: seeds needed for every cluster count to be
/// within `1 ± δ` of its expectation.
pub fn cluster_size_samples(n: usize, k: usize, eta: f64, delta: f64, log: LogBase) -> f64 {
    400.0 * log.log(n as f64) * (k * k) as f64 / (eta * delta * delta)
}
