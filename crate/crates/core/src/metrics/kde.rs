use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bandwidth {
    /// `sigma * n^(-1/5)` with the sample standard deviation.
    Scott,
    Fixed(f64),
}

/// Gaussian kernel density evaluated on an even grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub bandwidth: f64,
}

impl Density {
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["x", "density"])?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            w.write_record([x.to_string(), y.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Trapezoid-rule integral over the grid.
    pub fn integral(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }
}

pub fn scott_bandwidth(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Bandwidth(format!(
            "Scott bandwidth needs at least 2 samples, got {n}; use a fixed bandwidth"
        )));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sigma = var.sqrt();
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Bandwidth("samples have zero spread; use a fixed bandwidth".into()));
    }
    Ok(sigma * (n as f64).powf(-0.2))
}

pub fn kde_1d(samples: &[f64], bandwidth: Bandwidth) -> Result<Density> {
    kde_1d_on_grid(samples, bandwidth, DEFAULT_GRID_POINTS)
}

/// Density on `points` evenly spaced values over `[min - 3h, max + 3h]`.
pub fn kde_1d_on_grid(samples: &[f64], bandwidth: Bandwidth, points: usize) -> Result<Density> {
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("KDE samples must be finite".into()));
    }
    let h = match bandwidth {
        Bandwidth::Scott => scott_bandwidth(samples)?,
        Bandwidth::Fixed(h) if h > 0.0 && h.is_finite() => h,
        Bandwidth::Fixed(h) => return Err(Error::Bandwidth(format!("bandwidth must be positive, got {h}"))),
    };
    if samples.is_empty() {
        return Err(Error::InvalidInput("KDE needs at least one sample".into()));
    }
    let points = points.max(2);
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let step = (hi - lo) / (points - 1) as f64;
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * PI).sqrt());
    let xs: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    let ys = xs
        .iter()
        .map(|&x| {
            norm * samples
                .iter()
                .map(|&s| {
                    let z = (x - s) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        })
        .collect();
    Ok(Density { xs, ys, bandwidth: h })
}
