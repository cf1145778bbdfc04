use super::dtw::{dtw_path, dtw_sq};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Barycenter {
    pub values: Vec<f64>,
    /// Sum of squared DTW distances from the set to `values`.
    pub inertia: f64,
    pub iterations: usize,
}

pub fn set_inertia<S: AsRef<[f64]>>(set: &[S], center: &[f64], band: Option<usize>) -> Result<f64> {
    set.iter().map(|s| dtw_sq(s.as_ref(), center, band)).sum()
}

/// DTW barycenter averaging starting from `init`. An iterate is kept only if
/// it does not raise the inertia; iteration stops when the relative change
/// drops below `tol` or after `max_iter` updates.
pub fn dba_barycenter<S: AsRef<[f64]>>(
    set: &[S],
    init: &[f64],
    max_iter: usize,
    tol: f64,
    band: Option<usize>,
) -> Result<Barycenter> {
    if set.is_empty() {
        return Err(Error::InvalidInput("DBA needs at least one sequence".into()));
    }
    if init.is_empty() {
        return Err(Error::InvalidInput("DBA initializer is empty".into()));
    }
    let mut center = init.to_vec();
    let mut inertia = set_inertia(set, &center, band)?;
    let mut iterations = 0;
    let mut sums = vec![0.0; center.len()];
    let mut counts = vec![0usize; center.len()];
    while iterations < max_iter && inertia > 0.0 {
        sums.iter_mut().for_each(|s| *s = 0.0);
        counts.iter_mut().for_each(|c| *c = 0);
        for s in set {
            let s = s.as_ref();
            let (_, path) = dtw_path(s, &center, band)?;
            for (i, j) in path {
                sums[j] += s[i];
                counts[j] += 1;
            }
        }
        let next: Vec<f64> = sums
            .iter()
            .zip(&counts)
            .zip(&center)
            .map(|((&s, &c), &old)| if c == 0 { old } else { s / c as f64 })
            .collect();
        let next_inertia = set_inertia(set, &next, band)?;
        if next_inertia > inertia {
            break;
        }
        iterations += 1;
        let change = (inertia - next_inertia) / inertia;
        center = next;
        inertia = next_inertia;
        if change < tol {
            break;
        }
    }
    Ok(Barycenter { values: center, inertia, iterations })
}

/// Index-wise mean of equal-length sequences.
pub fn pointwise_mean<S: AsRef<[f64]>>(set: &[S]) -> Result<Vec<f64>> {
    let Some(first) = set.first() else {
        return Err(Error::InvalidInput("mean of an empty set".into()));
    };
    let m = first.as_ref().len();
    if set.iter().any(|s| s.as_ref().len() != m) {
        return Err(Error::InvalidInput("pointwise mean needs equal lengths".into()));
    }
    Ok((0..m).map(|i| set.iter().map(|s| s.as_ref()[i]).sum::<f64>() / set.len() as f64).collect())
}
