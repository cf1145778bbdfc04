use crate::error::{Error, Result};

pub const DEFAULT_LENGTH: usize = 50;
/// Standard deviations below this count as constant input.
pub const CONSTANT_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedTrajectory {
    pub values: Vec<f64>,
    /// Index of the source episode in the caller's list.
    pub source: usize,
    pub original_length: usize,
}

/// Linear interpolation of `values` at `m` evenly spaced points over the
/// normalized time axis `[0, 1]`.
pub fn resample(values: &[f64], m: usize) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidInput("cannot resample an empty trajectory".into()));
    }
    if m < 2 {
        return Err(Error::InvalidInput(format!("resample length must be at least 2, got {m}")));
    }
    let n = values.len();
    if n == 1 {
        return Ok(vec![values[0]; m]);
    }
    Ok((0..m)
        .map(|i| {
            let x = i as f64 * (n - 1) as f64 / (m - 1) as f64;
            let lo = (x.floor() as usize).min(n - 2);
            let w = x - lo as f64;
            values[lo] * (1.0 - w) + values[lo + 1] * w
        })
        .collect())
}

/// Subtracts the mean and divides by the population standard deviation.
/// Constant input maps to zeros.
pub fn z_normalize(values: &mut [f64]) {
    let n = values.len() as f64;
    if values.is_empty() {
        return;
    }
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    for v in values.iter_mut() {
        *v = if sd < CONSTANT_EPS { 0.0 } else { (*v - mean) / sd };
    }
}

/// Resamples `ranks` to `m` points and z-normalizes. With `m = None` the
/// original length is kept.
pub fn normalize_trajectory(ranks: &[f64], m: Option<usize>, source: usize) -> Result<NormalizedTrajectory> {
    if ranks.is_empty() {
        return Err(Error::InvalidInput("trajectory is empty".into()));
    }
    if ranks.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidInput("trajectory values must be finite".into()));
    }
    let mut values = match m {
        Some(m) => resample(ranks, m)?,
        None => ranks.to_vec(),
    };
    z_normalize(&mut values);
    Ok(NormalizedTrajectory { values, source, original_length: ranks.len() })
}
