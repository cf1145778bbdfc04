use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::snapshots::{Episode, DEFAULT_GAP_SLACK};

/// Time one episode spent at one rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dwell {
    pub rank: u32,
    /// Longest run of consecutive samples at this rank, times `delta_t`.
    pub max_contiguous_s: i64,
    /// All samples at this rank, times `delta_t`.
    pub total_s: i64,
}

/// Per-rank dwell times, ordered by rank. Two samples are consecutive when
/// they are adjacent in the trajectory and no more than `1.5 * delta_t` apart.
pub fn dwell_times(episode: &Episode, delta_t: i64) -> Vec<Dwell> {
    let mut best: BTreeMap<u32, (i64, i64)> = BTreeMap::new();
    let traj = &episode.trajectory;
    let limit = (DEFAULT_GAP_SLACK * delta_t as f64) as i64;
    let mut i = 0;
    while i < traj.len() {
        let mut j = i + 1;
        while j < traj.len() && traj[j].rank == traj[i].rank && traj[j].t - traj[j - 1].t <= limit {
            j += 1;
        }
        let run = (j - i) as i64 * delta_t;
        let slot = best.entry(traj[i].rank).or_insert((0, 0));
        slot.0 = slot.0.max(run);
        slot.1 += run;
        i = j;
    }
    best.into_iter()
        .map(|(rank, (max_contiguous_s, total_s))| Dwell { rank, max_contiguous_s, total_s })
        .collect()
}

/// Category shares among the labeled episodes that held one rank for at least
/// the minimum dwell. Empty when no episode qualifies.
#[derive(Clone, Debug, PartialEq)]
pub struct RankShares {
    pub rank: u32,
    pub qualifying: usize,
    pub shares: BTreeMap<String, f64>,
}

impl RankShares {
    pub fn is_empty(&self) -> bool {
        self.qualifying == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategoryReport {
    pub ranks: Vec<RankShares>,
    pub baseline_ranks: Vec<RankShares>,
    /// Mean of the non-empty baseline ranks' shares; categories absent at a
    /// rank count as zero there.
    pub baseline: BTreeMap<String, f64>,
}

pub fn category_proportions(
    episodes: &[Episode],
    ranks: &[u32],
    min_dwell_s: i64,
    baseline_ranks: &[u32],
    delta_t: i64,
) -> Result<CategoryReport> {
    if let Some(r) = ranks.iter().chain(baseline_ranks).find(|&&r| r == 0) {
        return Err(Error::InvalidInput(format!("rank {r} is not a list position")));
    }
    let wanted: BTreeSet<u32> = ranks.iter().chain(baseline_ranks).copied().collect();
    let mut tallies: BTreeMap<u32, BTreeMap<&str, usize>> = BTreeMap::new();
    for e in episodes {
        let Some(cat) = e.category.as_deref() else { continue };
        for d in dwell_times(e, delta_t) {
            if d.max_contiguous_s >= min_dwell_s && wanted.contains(&d.rank) {
                *tallies.entry(d.rank).or_default().entry(cat).or_default() += 1;
            }
        }
    }
    let shares_at = |rank: u32| -> RankShares {
        let tally = tallies.get(&rank);
        let qualifying = tally.map_or(0, |t| t.values().sum());
        let shares = tally
            .into_iter()
            .flatten()
            .map(|(c, &n)| (c.to_string(), n as f64 / qualifying as f64))
            .collect();
        RankShares { rank, qualifying, shares }
    };
    let ranks: Vec<RankShares> = ranks.iter().map(|&r| shares_at(r)).collect();
    let baseline_ranks: Vec<RankShares> = baseline_ranks.iter().map(|&r| shares_at(r)).collect();

    let used: Vec<&RankShares> = baseline_ranks.iter().filter(|r| !r.is_empty()).collect();
    let mut baseline: BTreeMap<String, f64> = BTreeMap::new();
    for r in &used {
        for (c, s) in &r.shares {
            *baseline.entry(c.clone()).or_default() += s / used.len() as f64;
        }
    }
    Ok(CategoryReport { ranks, baseline_ranks, baseline })
}
