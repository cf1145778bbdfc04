use crate::error::{Error, Result};

fn check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("DTW needs two non-empty sequences".into()));
    }
    Ok(())
}

/// Sakoe-Chiba band scaled to the diagonal of an `n x m` cost matrix.
#[inline]
fn allowed(i: usize, j: usize, n: usize, m: usize, band: Option<usize>) -> bool {
    match band {
        None => true,
        Some(w) => {
            if n == 1 || m == 1 {
                return true;
            }
            let (x, y) = (i * (m - 1), j * (n - 1));
            x.abs_diff(y) <= w * (n - 1).max(m - 1)
        }
    }
}

/// Minimal sum of squared differences over all monotone warping paths.
pub fn dtw_sq(a: &[f64], b: &[f64], band: Option<usize>) -> Result<f64> {
    check(a, b)?;
    let (n, m) = (a.len(), b.len());
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    for i in 0..n {
        for j in 0..m {
            if !allowed(i, j, n, m, band) {
                cur[j] = f64::INFINITY;
                continue;
            }
            let d = (a[i] - b[j]).powi(2);
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let up = if i > 0 { prev[j] } else { f64::INFINITY };
                let left = if j > 0 { cur[j - 1] } else { f64::INFINITY };
                let diag = if i > 0 && j > 0 { prev[j - 1] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            cur[j] = d + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// Square root of [`dtw_sq`] without a band.
pub fn dtw(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(dtw_sq(a, b, None)?.sqrt())
}

pub fn dtw_banded(a: &[f64], b: &[f64], band: Option<usize>) -> Result<f64> {
    Ok(dtw_sq(a, b, band)?.sqrt())
}

/// Optimal warping path as `(index in a, index in b)` pairs from `(0, 0)`
/// to the last cell, together with its squared cost.
pub fn dtw_path(a: &[f64], b: &[f64], band: Option<usize>) -> Result<(f64, Vec<(usize, usize)>)> {
    check(a, b)?;
    let (n, m) = (a.len(), b.len());
    let mut acc = vec![f64::INFINITY; n * m];
    for i in 0..n {
        for j in 0..m {
            if !allowed(i, j, n, m, band) {
                continue;
            }
            let d = (a[i] - b[j]).powi(2);
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let up = if i > 0 { acc[(i - 1) * m + j] } else { f64::INFINITY };
                let left = if j > 0 { acc[i * m + j - 1] } else { f64::INFINITY };
                let diag = if i > 0 && j > 0 { acc[(i - 1) * m + j - 1] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc[i * m + j] = d + best;
        }
    }
    let mut path = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while i > 0 || j > 0 {
        let (ni, nj) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = acc[(i - 1) * m + j - 1];
            let up = acc[(i - 1) * m + j];
            let left = acc[i * m + j - 1];
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        i = ni;
        j = nj;
        path.push((i, j));
    }
    path.reverse();
    Ok((acc[n * m - 1], path))
}
