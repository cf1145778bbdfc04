//! Diffusive ranking model with optional anchors, observed through its top
//! `L` ranks.

mod system;

use rayon::prelude::*;

pub use system::{Anchor, RankSystem, StepCase};

use crate::error::{Error, Result};
use crate::seed;
use crate::snapshots::{RankedSnapshot, RawEntry, SnapshotStream, TzOffset, DEFAULT_DELTA_T};

pub const DEFAULT_ELEMENTS: usize = 500;
pub const DEFAULT_BARRIER: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub list_length: usize,
    pub anchors: Vec<Anchor>,
    /// Steps after burn-in.
    pub steps: u64,
    pub burn_in: u64,
    pub sample_every: u64,
    pub runs: usize,
    pub seed: u64,
    /// Spacing of the synthetic snapshot timestamps.
    pub delta_t: i64,
}

impl SimConfig {
    /// `n` elements viewed through the top `list_length` ranks, with the
    /// default burn-in of `10 n` steps and a sample every `n / 10` steps.
    pub fn new(n: usize, list_length: usize) -> Self {
        SimConfig {
            n,
            list_length,
            anchors: Vec::new(),
            steps: 100 * n as u64,
            burn_in: 10 * n as u64,
            sample_every: (n as u64 / 10).max(1),
            runs: 1,
            seed: 0,
            delta_t: DEFAULT_DELTA_T,
        }
    }

    pub fn with_anchor(mut self, rank: usize, delta: f64) -> Self {
        self.anchors.push(Anchor::new(rank, delta));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.list_length == 0 || self.list_length > self.n {
            return Err(Error::Config(format!(
                "list length {} must lie in 1..={}",
                self.list_length, self.n
            )));
        }
        if let Some(a) = self.anchors.iter().find(|a| a.rank < 2 || a.rank > self.list_length) {
            return Err(Error::Config(format!("anchor rank {} must lie in 2..={}", a.rank, self.list_length)));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("sample_every must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.delta_t <= 0 {
            return Err(Error::Config("delta_t must be positive".into()));
        }
        Ok(())
    }

    fn with_seed(&self, seed: u64) -> SimConfig {
        SimConfig { seed, ..self.clone() }
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig::new(DEFAULT_ELEMENTS, 48)
    }
}

pub fn init_system(config: &SimConfig) -> Result<RankSystem> {
    config.validate()?;
    RankSystem::new(config.n, config.anchors.clone(), config.seed)
}

/// Runs burn-in, then calls `observe` with the system every `sample_every`
/// steps.
fn drive(config: &SimConfig, mut observe: impl FnMut(&RankSystem)) -> Result<()> {
    let mut sys = init_system(config)?;
    for _ in 0..config.burn_in {
        sys.step();
    }
    let samples = config.steps / config.sample_every;
    for _ in 0..samples {
        for _ in 0..config.sample_every {
            sys.step();
        }
        observe(&sys);
    }
    Ok(())
}

/// One run seeded with `config.seed`, as a stream of top-`L` snapshots.
/// Element ids are the names and scores the hotness values.
pub fn run_simulation(config: &SimConfig) -> Result<SnapshotStream> {
    let mut stream = SnapshotStream::new(config.delta_t, config.list_length as u32, TzOffset::UTC);
    drive(config, |sys| {
        let t = stream.snapshots.len() as i64 * config.delta_t;
        let entries = sys.ranking()[..config.list_length]
            .iter()
            .enumerate()
            .map(|(r, &e)| RawEntry::new(e.to_string(), r as u32 + 1).with_hotness(sys.score(e)))
            .collect();
        stream.snapshots.push(RankedSnapshot { t, entries });
    })?;
    Ok(stream)
}

/// Normalized diversity of one run, counted directly on element ids. Empty
/// when the run takes no samples.
pub fn run_diversity(config: &SimConfig) -> Result<Vec<f64>> {
    let (n, l) = (config.n, config.list_length);
    let mut seen = vec![false; n * l];
    let mut counts = vec![0u32; l];
    let mut samples = 0usize;
    drive(config, |sys| {
        samples += 1;
        for (k, &e) in sys.ranking()[..l].iter().enumerate() {
            let cell = &mut seen[k * n + e as usize];
            if !*cell {
                *cell = true;
                counts[k] += 1;
            }
        }
    })?;
    if samples == 0 {
        return Ok(Vec::new());
    }
    Ok(counts.iter().map(|&c| c as f64 / samples as f64).collect())
}

/// Normalized diversity averaged over independent runs.
#[derive(Clone, Debug, PartialEq)]
pub struct AveragedDiversity {
    pub mean: Vec<f64>,
    /// Standard error of the mean; zero with a single run.
    pub stderr: Vec<f64>,
    pub runs: usize,
    /// Per-run curves in run order.
    pub curves: Vec<Vec<f64>>,
}

impl AveragedDiversity {
    pub fn from_curves(curves: Vec<Vec<f64>>) -> Result<Self> {
        let runs = curves.len();
        let Some(l) = curves.first().map(Vec::len) else {
            return Err(Error::InvalidInput("no curves to average".into()));
        };
        if curves.iter().any(|c| c.len() != l) {
            return Err(Error::InvalidInput("curves differ in length".into()));
        }
        let mean: Vec<f64> = (0..l).map(|k| curves.iter().map(|c| c[k]).sum::<f64>() / runs as f64).collect();
        let stderr = (0..l)
            .map(|k| {
                if runs < 2 {
                    return 0.0;
                }
                let var = curves.iter().map(|c| (c[k] - mean[k]).powi(2)).sum::<f64>() / (runs - 1) as f64;
                (var / runs as f64).sqrt()
            })
            .collect();
        Ok(AveragedDiversity { mean, stderr, runs, curves })
    }

    pub fn write_csv<W: std::io::Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["k", "mean", "stderr"])?;
        for (k, (m, s)) in self.mean.iter().zip(&self.stderr).enumerate() {
            w.write_record([(k + 1).to_string(), m.to_string(), s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Seed of run `index` under master seed `seed`.
pub fn run_seed(seed: u64, index: usize) -> u64 {
    seed::derive(seed, "run", index as u64)
}

/// `config.runs` runs with seeds derived from `config.seed`.
pub fn averaged_diversity(config: &SimConfig) -> Result<AveragedDiversity> {
    let seeds: Vec<u64> = (0..config.runs).map(|i| run_seed(config.seed, i)).collect();
    averaged_diversity_seeds(config, &seeds)
}

/// One run per explicit seed; runs execute in parallel and merge in order.
pub fn averaged_diversity_seeds(config: &SimConfig, seeds: &[u64]) -> Result<AveragedDiversity> {
    config.validate()?;
    let curves = seeds
        .par_iter()
        .map(|&s| run_diversity(&config.with_seed(s)))
        .collect::<Result<Vec<_>>>()?;
    AveragedDiversity::from_curves(curves)
}

#[cfg(test)]
mod tests;
