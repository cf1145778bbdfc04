use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::snapshots::{RankedSnapshot, SnapshotStream, Timestamp};

/// Number of distinct items seen at each rank over a set of snapshots.
///
/// `counts[k - 1]` is `D(k)`; `normalized[k - 1]` divides it by the number
/// of snapshots, so a rank held by one item throughout scores
/// `1 / n_timestamps` and a rank with a new occupant in every snapshot
/// scores 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DiversityCurve {
    pub counts: Vec<u32>,
    pub normalized: Vec<f64>,
    pub window: (Timestamp, Timestamp),
    pub n_timestamps: usize,
}

impl DiversityCurve {
    pub fn list_length(&self) -> usize {
        self.counts.len()
    }

    /// `D(k)` for 1-based `k`.
    pub fn count(&self, k: usize) -> u32 {
        self.counts[k - 1]
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["k", "count", "normalized"])?;
        for (i, (c, d)) in self.counts.iter().zip(&self.normalized).enumerate() {
            w.write_record([(i + 1).to_string(), c.to_string(), d.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Rank diversity over the snapshots with `t_min <= t <= t_max`.
pub fn rank_diversity(stream: &SnapshotStream, window: (Timestamp, Timestamp)) -> Result<DiversityCurve> {
    let (t_min, t_max) = window;
    let inside = stream.snapshots.iter().filter(|s| s.t >= t_min && s.t <= t_max);
    let mut curve =
        rank_diversity_of(inside, stream.list_length as usize).ok_or(Error::EmptyWindow { t_min, t_max })?;
    curve.window = window;
    Ok(curve)
}

/// Rank diversity over an arbitrary collection of snapshots; `None` if empty.
/// Entries ranked below `list_length` are ignored.
pub fn rank_diversity_of<'a, I>(snapshots: I, list_length: usize) -> Option<DiversityCurve>
where
    I: IntoIterator<Item = &'a RankedSnapshot>,
{
    let mut ids: HashMap<&'a str, u32> = HashMap::new();
    let mut occupants: Vec<Vec<u32>> = vec![Vec::new(); list_length];
    let mut n = 0usize;
    let mut window = (Timestamp::MAX, Timestamp::MIN);
    for s in snapshots {
        n += 1;
        window = (window.0.min(s.t), window.1.max(s.t));
        for e in &s.entries {
            let k = e.rank as usize;
            if k == 0 || k > list_length {
                continue;
            }
            let next = ids.len() as u32;
            let id = *ids.entry(e.name.as_str()).or_insert(next);
            occupants[k - 1].push(id);
        }
    }
    if n == 0 {
        return None;
    }
    let counts: Vec<u32> = occupants
        .into_iter()
        .map(|mut v| {
            v.sort_unstable();
            v.dedup();
            v.len() as u32
        })
        .collect();
    let normalized = counts.iter().map(|&c| c as f64 / n as f64).collect();
    Some(DiversityCurve { counts, normalized, window, n_timestamps: n })
}
