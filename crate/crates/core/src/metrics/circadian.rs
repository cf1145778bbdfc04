use std::io::Write;

use super::median;
use crate::error::{Error, Result};
use crate::snapshots::{Episode, RankedSnapshot, SnapshotStream, Timestamp, TzOffset};

/// Snapshots with fewer hotness values than this are left out of the median series.
pub const MIN_HOTNESS_VALUES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    /// Number of items entering the list per bin.
    NewItemIncrements,
    /// Mean over the bin of each snapshot's median hotness.
    MedianHotness,
}

/// Values over consecutive half-open bins `[edge[i], edge[i + 1])`.
/// Bins without data hold `NaN` in the median series.
#[derive(Clone, Debug, PartialEq)]
pub struct BinnedSeries {
    pub bin_edges: Vec<Timestamp>,
    pub values: Vec<f64>,
}

impl BinnedSeries {
    pub fn write_csv<W: Write>(&self, tz: TzOffset, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["bin_start", "value"])?;
        for (edge, v) in self.bin_edges.iter().zip(&self.values) {
            let v = if v.is_nan() { String::new() } else { v.to_string() };
            w.write_record([tz.format(*edge), v])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn snapshot_median_hotness(snapshot: &RankedSnapshot) -> Option<f64> {
    let mut values: Vec<f64> = snapshot.entries.iter().filter_map(|e| e.hotness).collect();
    if values.len() < MIN_HOTNESS_VALUES {
        return None;
    }
    median(&mut values)
}

/// Bins aligned to local midnight in the stream's offset, covering the
/// stream's time span.
///
/// Left-censored episodes are not counted as entries: their first sighting
/// is the start of observation, not an arrival.
pub fn circadian_series(
    stream: &SnapshotStream,
    episodes: &[Episode],
    kind: SeriesKind,
    bin: i64,
) -> Result<BinnedSeries> {
    if bin < stream.delta_t || bin <= 0 {
        return Err(Error::InvalidInput(format!(
            "bin width {bin}s is shorter than the sampling interval {}s",
            stream.delta_t
        )));
    }
    let (first, last) = stream
        .time_span()
        .ok_or_else(|| Error::InvalidInput("cannot bin an empty stream".into()))?;
    let offset = stream.tz_offset.seconds() as i64;
    let start = (first + offset).div_euclid(bin) * bin - offset;
    let n_bins = ((last - start) / bin + 1) as usize;
    let bin_edges: Vec<Timestamp> = (0..=n_bins).map(|i| start + bin * i as i64).collect();
    let index = |t: Timestamp| -> Option<usize> {
        (t >= start).then(|| ((t - start) / bin) as usize).filter(|&i| i < n_bins)
    };

    let values = match kind {
        SeriesKind::NewItemIncrements => {
            let mut counts = vec![0.0; n_bins];
            for e in episodes.iter().filter(|e| !e.censored_left) {
                if let Some(i) = index(e.t_enter) {
                    counts[i] += 1.0;
                }
            }
            counts
        }
        SeriesKind::MedianHotness => {
            if !stream.snapshots.iter().any(|s| s.entries.iter().any(|e| e.hotness.is_some())) {
                return Err(Error::InvalidInput("median hotness requested but the stream has no hotness values".into()));
            }
            let mut sums = vec![0.0; n_bins];
            let mut counts = vec![0usize; n_bins];
            for s in &stream.snapshots {
                if let (Some(m), Some(i)) = (snapshot_median_hotness(s), index(s.t)) {
                    sums[i] += m;
                    counts[i] += 1;
                }
            }
            sums.iter()
                .zip(&counts)
                .map(|(&s, &c)| if c == 0 { f64::NAN } else { s / c as f64 })
                .collect()
        }
    };
    Ok(BinnedSeries { bin_edges, values })
}
