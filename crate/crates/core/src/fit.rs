//! Least-squares rate fitting shared by the linear and nonlinear decay
//! measurements.

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("fit abscissae and ordinates must be positive and finite")]
    BadSample,
}

/// Fitted power law y ~ C t^slope from log-log least squares.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerLawFit<T: Real> {
    pub slope: T,
    pub stderr: T,
    pub intercept: T,
    pub samples: usize,
}

/// Least-squares slope of log(y) against log(t).
pub fn loglog_fit<T: Real>(ts: &[T], ys: &[T]) -> Result<PowerLawFit<T>, FitError> {
    if ts.len() != ys.len() || ts.len() < 3 {
        return Err(FitError::TooFewSamples { need: 3, got: ts.len().min(ys.len()) });
    }
    let n = T::from_usize(ts.len()).unwrap();
    let mut xs = Vec::with_capacity(ts.len());
    let mut zs = Vec::with_capacity(ts.len());
    for (&t, &y) in ts.iter().zip(ys) {
        if t <= T::zero() || y <= T::zero() || !t.is_finite() || !y.is_finite() {
            return Err(FitError::BadSample);
        }
        xs.push(t.ln());
        zs.push(y.ln());
    }
    let mean_x = xs.iter().copied().sum::<T>() / n;
    let mean_z = zs.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxz = T::zero();
    for (&x, &z) in xs.iter().zip(&zs) {
        sxx += (x - mean_x) * (x - mean_x);
        sxz += (x - mean_x) * (z - mean_z);
    }
    let slope = sxz / sxx;
    let intercept = mean_z - slope * mean_x;
    let mut ss_res = T::zero();
    for (&x, &z) in xs.iter().zip(&zs) {
        let r = z - (intercept + slope * x);
        ss_res += r * r;
    }
    let dof = n - T::from_f64(2.0).unwrap();
    let stderr = if dof > T::zero() { (ss_res / dof / sxx).sqrt() } else { T::zero() };
    Ok(PowerLawFit { slope, stderr, intercept, samples: ts.len() })
}
