//! Ordinary least-squares line fits, used for log-log slopes.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square of the residuals `y − (slope·x + intercept)`.
    pub rms_residual: f64,
    pub max_abs_residual: f64,
    pub points: usize,
}

impl LineFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(LabError::DimensionMismatch { expected: xs.len(), got: ys.len() });
    }
    let n = xs.len();
    if n < 2 {
        return Err(LabError::InsufficientPoints { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(LabError::InvalidParameter("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - (slope * x + intercept)).collect();
    let rms_residual = (res.iter().map(|r| r * r).sum::<f64>() / nf).sqrt();
    let max_abs_residual = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(LineFit { slope, intercept, rms_residual, max_abs_residual, points: n })
}

/// Fit `ln y` against `ln x`, skipping pairs where either value is not a
/// positive finite number.
pub fn log_log(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite() && **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    least_squares(&lx, &ly)
}
