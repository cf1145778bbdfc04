//! Localized dips in rank-diversity curves, day/night splits and long dwells.

use std::io::Write;

use crate::error::{Error, Result};
use crate::metrics::{dwell_times, median, rank_diversity_of, DiversityCurve};
use crate::snapshots::{Episode, SnapshotStream, TzOffset};

pub const DEFAULT_HALF_WINDOW: usize = 3;
pub const DEFAULT_THRESHOLD: f64 = 0.15;
/// Start of the day partition, seconds after local midnight.
pub const DAY_START_S: i64 = 7 * 3600;
pub const DEFAULT_MIN_DWELL_S: i64 = 7200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnchorFlag {
    pub rank: usize,
    pub observed: f64,
    pub baseline: f64,
    /// `1 - observed / baseline`.
    pub drop_ratio: f64,
}

/// Flags local minima of `values` (indexed from rank 1) that fall at least
/// `threshold` below the median of their `half_window` neighbors on each
/// side. The first and last ranks are never flagged.
pub fn detect_dips(values: &[f64], half_window: usize, threshold: f64) -> Result<Vec<AnchorFlag>> {
    let n = values.len();
    if half_window == 0 {
        return Err(Error::InvalidInput("half_window must be at least 1".into()));
    }
    if n < 2 * half_window + 1 {
        return Err(Error::InvalidInput(format!(
            "curve has {n} ranks, needs at least {} for half_window {half_window}",
            2 * half_window + 1
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("curve values must be finite".into()));
    }
    if values.iter().all(|&v| v == values[0]) {
        return Ok(Vec::new());
    }
    let mut flags = Vec::new();
    let mut window = Vec::with_capacity(2 * half_window);
    for k in 1..n - 1 {
        let d = values[k];
        if !(d < values[k - 1] && d < values[k + 1]) {
            continue;
        }
        window.clear();
        let lo = k.saturating_sub(half_window);
        let hi = (k + half_window).min(n - 1);
        window.extend((lo..=hi).filter(|&i| i != k).map(|i| values[i]));
        let b = median(&mut window).unwrap_or(0.0);
        if !(b > 0.0) {
            continue;
        }
        let rho = 1.0 - d / b;
        if rho >= threshold {
            flags.push(AnchorFlag { rank: k + 1, observed: d, baseline: b, drop_ratio: rho });
        }
    }
    Ok(flags)
}

/// [`detect_dips`] on the normalized values of a diversity curve.
pub fn detect_anchor_ranks(curve: &DiversityCurve, half_window: usize, threshold: f64) -> Result<Vec<AnchorFlag>> {
    detect_dips(&curve.normalized, half_window, threshold)
}

pub fn write_flags_csv<W: Write>(flags: &[AnchorFlag], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["rank", "observed", "baseline", "drop_ratio"])?;
    for f in flags {
        w.write_record([
            f.rank.to_string(),
            f.observed.to_string(),
            f.baseline.to_string(),
            f.drop_ratio.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Diversity over day snapshots (`[07:00, 24:00)` local) and night
/// snapshots. A partition without snapshots yields `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct DayNight {
    pub day: Option<DiversityCurve>,
    pub night: Option<DiversityCurve>,
}

pub fn is_day(t: i64, tz: TzOffset) -> bool {
    tz.time_of_day(t) >= DAY_START_S
}

pub fn day_night_curves(stream: &SnapshotStream) -> DayNight {
    let tz = stream.tz_offset;
    let l = stream.list_length as usize;
    let (day, night): (Vec<_>, Vec<_>) = stream.snapshots.iter().partition(|s| is_day(s.t, tz));
    DayNight { day: rank_diversity_of(day, l), night: rank_diversity_of(night, l) }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LongDwell {
    pub name: String,
    pub rank: u32,
    pub dwell_s: i64,
    pub t_enter: i64,
}

/// Every (episode, rank) pair held contiguously for at least `min_dwell_s`,
/// longest first, then by name and rank.
pub fn long_dwell_report(episodes: &[Episode], min_dwell_s: i64, delta_t: i64) -> Vec<LongDwell> {
    let mut out: Vec<LongDwell> = episodes
        .iter()
        .flat_map(|e| {
            dwell_times(e, delta_t)
                .into_iter()
                .filter(|d| d.max_contiguous_s >= min_dwell_s)
                .map(|d| LongDwell { name: e.name.clone(), rank: d.rank, dwell_s: d.max_contiguous_s, t_enter: e.t_enter })
        })
        .collect();
    out.sort_by(|a, b| {
        b.dwell_s
            .cmp(&a.dwell_s)
            .then_with(|| a.name.cmp(&b.name))
            .then(a.rank.cmp(&b.rank))
            .then(a.t_enter.cmp(&b.t_enter))
    });
    out
}

pub fn write_long_dwell_csv<W: Write>(rows: &[LongDwell], tz: TzOffset, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["name", "rank", "dwell_s", "t_enter"])?;
    for r in rows {
        w.write_record([r.name.clone(), r.rank.to_string(), r.dwell_s.to_string(), tz.format(r.t_enter)])?;
    }
    w.flush()?;
    Ok(())
}
