use std::cmp::Ordering;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dba::dba_barycenter;
use super::dtw::dtw_sq;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansOptions {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub restarts: usize,
    /// DBA updates per centroid per iteration.
    pub dba_iter: usize,
    pub band: Option<usize>,
}

impl KMeansOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansOptions { k, seed, max_iter: 50, tol: 1e-6, restarts: 5, dba_iter: 10, band: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    pub k: usize,
    /// `assignments[i]` is the cluster of input `i`.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared DTW distances to the assigned centroids.
    pub inertia: f64,
    /// Inertia after each assignment step of the winning restart.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub restart: usize,
    pub seed: u64,
}

impl Clustering {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &a in &self.assignments {
            s[a] += 1;
        }
        s
    }
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

struct Run {
    assignments: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    history: Vec<f64>,
    iterations: usize,
}

/// Nearest centroid of every point, first centroid on ties.
fn assign(
    set: &[&[f64]],
    centroids: &[Vec<f64>],
    band: Option<usize>,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let rows = set
        .par_iter()
        .map(|s| {
            let mut best = (0, f64::INFINITY);
            for (c, centroid) in centroids.iter().enumerate() {
                let d = dtw_sq(s, centroid, band)?;
                if d < best.1 {
                    best = (c, d);
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().unzip())
}

fn seed_centroids(set: &[&[f64]], k: usize, rng: &mut ChaCha8Rng, band: Option<usize>) -> Result<Vec<Vec<f64>>> {
    let n = set.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = set.iter().map(|s| dtw_sq(s, set[chosen[0]], band)).collect::<Result<_>>()?;
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && u < d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            while d2[pick] == 0.0 {
                pick -= 1;
            }
            pick
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.gen_range(0..free.len())]
        };
        chosen.push(next);
        for (i, s) in set.iter().enumerate() {
            d2[i] = d2[i].min(dtw_sq(s, set[next], band)?);
        }
    }
    Ok(chosen.into_iter().map(|i| set[i].to_vec()).collect())
}

fn one_restart(set: &[&[f64]], opts: &KMeansOptions, restart: usize) -> Result<Run> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(opts.seed, "restart", restart as u64));
    let k = opts.k;
    let mut centroids = seed_centroids(set, k, &mut rng, opts.band)?;
    let mut history: Vec<f64> = Vec::new();
    let mut prev_assign: Option<Vec<usize>> = None;
    let mut iterations = 0;
    loop {
        let (mut labels, mut dists) = assign(set, &centroids, opts.band)?;
        // Reseed empty clusters with the point farthest from its centroid.
        loop {
            let mut sizes = vec![0usize; k];
            labels.iter().for_each(|&l| sizes[l] += 1);
            let Some(empty) = sizes.iter().position(|&s| s == 0) else { break };
            let far = (0..set.len())
                .filter(|&i| sizes[labels[i]] > 1)
                .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
            let Some(far) = far else { break };
            centroids[empty] = set[far].to_vec();
            labels[far] = empty;
            dists[far] = 0.0;
        }
        let inertia: f64 = dists.iter().sum();
        let converged = match history.last() {
            Some(&last) => last - inertia <= opts.tol * last.max(f64::MIN_POSITIVE),
            None => false,
        };
        history.push(inertia);
        let unchanged = prev_assign.as_ref() == Some(&labels);
        prev_assign = Some(labels.clone());
        if converged || unchanged || iterations >= opts.max_iter || inertia == 0.0 {
            return Ok(Run { assignments: labels, centroids, history, iterations });
        }
        iterations += 1;
        let updated = (0..k)
            .into_par_iter()
            .map(|c| {
                let members: Vec<&[f64]> = set.iter().zip(&labels).filter(|(_, &l)| l == c).map(|(s, _)| *s).collect();
                if members.is_empty() {
                    return Ok(centroids[c].clone());
                }
                Ok(dba_barycenter(&members, &centroids[c], opts.dba_iter, opts.tol, opts.band)?.values)
            })
            .collect::<Result<Vec<_>>>()?;
        centroids = updated;
    }
}

/// DTW k-means with k-means++ seeding and DBA centroid updates, best of
/// `opts.restarts` restarts. Inputs are processed in a canonical order and
/// clusters are numbered by their first member in that order, so the result
/// does not depend on the order of `set`.
pub fn kmeans_dtw<S: AsRef<[f64]> + Sync>(set: &[S], opts: &KMeansOptions) -> Result<Clustering> {
    let n = set.len();
    if opts.k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if n < opts.k {
        return Err(Error::InvalidInput(format!("{n} sequences cannot form {} clusters", opts.k)));
    }
    if set.iter().any(|s| s.as_ref().is_empty()) {
        return Err(Error::InvalidInput("sequences must be non-empty".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lex(set[a].as_ref(), set[b].as_ref()));
    let canonical: Vec<&[f64]> = order.iter().map(|&i| set[i].as_ref()).collect();

    let runs = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| one_restart(&canonical, opts, r))
        .collect::<Result<Vec<_>>>()?;
    let (restart, best) = runs
        .into_iter()
        .enumerate()
        .min_by(|a, b| a.1.history.last().unwrap().total_cmp(b.1.history.last().unwrap()).then(a.0.cmp(&b.0)))
        .expect("at least one restart");

    let mut relabel = vec![usize::MAX; opts.k];
    let mut next = 0;
    for &l in &best.assignments {
        if relabel[l] == usize::MAX {
            relabel[l] = next;
            next += 1;
        }
    }
    for r in relabel.iter_mut().filter(|r| **r == usize::MAX) {
        *r = next;
        next += 1;
    }
    let mut centroids = vec![Vec::new(); opts.k];
    for (old, c) in best.centroids.into_iter().enumerate() {
        centroids[relabel[old]] = c;
    }
    let mut assignments = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        assignments[i] = relabel[best.assignments[pos]];
    }
    Ok(Clustering {
        k: opts.k,
        assignments,
        centroids,
        inertia: *best.history.last().unwrap(),
        history: best.history,
        iterations: best.iterations,
        restart,
        seed: opts.seed,
    })
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput("labelings differ in length".into()));
    }
    let n = a.len();
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![0u64; ka * kb];
    for (&x, &y) in a.iter().zip(b) {
        table[x * kb + y] += 1;
    }
    let pairs = |c: u64| (c * c.saturating_sub(1) / 2) as f64;
    let index: f64 = table.iter().map(|&c| pairs(c)).sum();
    let rows: f64 = (0..ka).map(|i| pairs(table[i * kb..(i + 1) * kb].iter().sum())).sum();
    let cols: f64 = (0..kb).map(|j| pairs((0..ka).map(|i| table[i * kb + j]).sum())).sum();
    let total = pairs(n as u64);
    let expected = if total > 0.0 { rows * cols / total } else { 0.0 };
    let max = 0.5 * (rows + cols);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

pub fn write_clusters_csv<W: Write>(ids: &[String], clustering: &Clustering, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["episode_id", "cluster"])?;
    for (id, c) in ids.iter().zip(&clustering.assignments) {
        w.write_record([id.clone(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_centroids_csv<W: Write>(clustering: &Clustering, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["cluster", "index", "value"])?;
    for (c, values) in clustering.centroids.iter().enumerate() {
        for (i, v) in values.iter().enumerate() {
            w.write_record([c.to_string(), i.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
