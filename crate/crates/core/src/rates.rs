//! Empirical convergence exponents from traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fewest tail rows a fit accepts.
pub const MIN_FIT_ROWS: usize = 10;

/// Rows with suboptimality at or below `FLOOR_RTOL * max(1, |F*|)` are
/// rounding noise and left out of the fit.
pub const FLOOR_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Least-squares slope of `log(subopt)` against `log(k)`.
    pub slope: f64,
    pub intercept: f64,
    pub rows_used: usize,
}

/// Fits `log(subopt_k) ≈ intercept + slope · log(k)` over the last
/// `tail` fraction of `(k, subopt_k)` pairs.
pub fn fit_rate(points: &[(usize, f64)], tail: f64, reference_value: f64) -> Result<RateFit> {
    if !(tail > 0.0 && tail <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail fraction {tail} outside (0, 1]"
        )));
    }
    let floor = FLOOR_RTOL * reference_value.abs().max(1.0);
    let skip = points.len() - ((points.len() as f64 * tail).ceil() as usize).min(points.len());
    let (xs, ys): (Vec<f64>, Vec<f64>) = points[skip..]
        .iter()
        .filter(|&&(k, e)| k > 0 && e.is_finite() && e > floor)
        .map(|&(k, e)| ((k as f64).ln(), e.ln()))
        .unzip();
    if xs.len() < MIN_FIT_ROWS {
        return Err(Error::InsufficientData {
            usable: xs.len(),
            needed: MIN_FIT_ROWS,
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData {
            usable: 1,
            needed: MIN_FIT_ROWS,
        });
    }
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        rows_used: xs.len(),
    })
}
