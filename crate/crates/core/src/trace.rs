//! Sampled one-dimensional curves.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("length mismatch: x has {x} points, {what} has {other}")]
    LengthMismatch { x: usize, what: &'static str, other: usize },
    #[error("abscissa not strictly increasing at rows {0} and {1}")]
    NotIncreasing(usize, usize),
    #[error("uncertainty at row {0} must be positive, got {1}")]
    BadSigma(usize, f64),
    #[error("non-finite value at row {0}")]
    NonFinite(usize),
    #[error("trace is empty")]
    Empty,
}

/// A sampled curve `y(x)` with optional per-point uncertainties.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTrace {
    x: Vec<f64>,
    y: Vec<f64>,
    sigma_y: Option<Vec<f64>>,
    pub x_unit: String,
    pub y_unit: String,
}

impl SignalTrace {
    pub fn new(
        x: Vec<f64>,
        y: Vec<f64>,
        sigma_y: Option<Vec<f64>>,
        x_unit: impl Into<String>,
        y_unit: impl Into<String>,
    ) -> Result<Self, TraceError> {
        if x.is_empty() {
            return Err(TraceError::Empty);
        }
        if y.len() != x.len() {
            return Err(TraceError::LengthMismatch { x: x.len(), what: "y", other: y.len() });
        }
        if let Some(s) = &sigma_y {
            if s.len() != x.len() {
                return Err(TraceError::LengthMismatch { x: x.len(), what: "sigma_y", other: s.len() });
            }
            if let Some((i, &v)) = s.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
                return Err(TraceError::BadSigma(i, v));
            }
        }
        if let Some(i) = (0..x.len()).find(|&i| !x[i].is_finite() || !y[i].is_finite()) {
            return Err(TraceError::NonFinite(i));
        }
        if let Some(i) = (1..x.len()).find(|&i| x[i] <= x[i - 1]) {
            return Err(TraceError::NotIncreasing(i - 1, i));
        }
        Ok(Self { x, y, sigma_y, x_unit: x_unit.into(), y_unit: y_unit.into() })
    }

    /// Samples `f` on the grid `x`.
    pub fn from_fn(
        x: Vec<f64>,
        x_unit: impl Into<String>,
        y_unit: impl Into<String>,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, TraceError> {
        let y = x.iter().map(|&v| f(v)).collect();
        Self::new(x, y, None, x_unit, y_unit)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn sigma_y(&self) -> Option<&[f64]> {
        self.sigma_y.as_deref()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
        (self.x, self.y, self.sigma_y)
    }

    /// Keeps the points whose abscissa lies in `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> Option<Self> {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.x[i] >= lo && self.x[i] <= hi).collect();
        if keep.is_empty() {
            return None;
        }
        Some(Self {
            x: keep.iter().map(|&i| self.x[i]).collect(),
            y: keep.iter().map(|&i| self.y[i]).collect(),
            sigma_y: self.sigma_y.as_ref().map(|s| keep.iter().map(|&i| s[i]).collect()),
            x_unit: self.x_unit.clone(),
            y_unit: self.y_unit.clone(),
        })
    }
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { stop } else { start + step * i as f64 }).collect()
        }
    }
}
