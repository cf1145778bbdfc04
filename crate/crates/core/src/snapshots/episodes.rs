use std::collections::HashMap;
use std::io::Write;

use super::{detect_gaps, SnapshotStream, Timestamp, TzOffset, DEFAULT_GAP_SLACK};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrajectoryPoint {
    pub t: Timestamp,
    pub rank: u32,
}

/// One item's stay on the list.
///
/// `t_leave` is the timestamp of the first snapshot in which the item is
/// absent again. When no such snapshot exists because the stream ends or a
/// gap follows, `t_leave` is the last sighting plus the sampling interval and
/// the episode is marked right-censored.
#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub name: String,
    pub t_enter: Timestamp,
    pub t_leave: Timestamp,
    pub enter_rank: u32,
    pub leave_rank: u32,
    pub min_rank: u32,
    pub trajectory: Vec<TrajectoryPoint>,
    pub censored_left: bool,
    pub censored_right: bool,
    /// Time from the item's first post to its first list appearance.
    pub prehistory_s: Option<i64>,
    pub category: Option<String>,
}

impl Episode {
    pub fn duration(&self) -> i64 {
        self.t_leave - self.t_enter
    }

    pub fn is_censored(&self) -> bool {
        self.censored_left || self.censored_right
    }

    pub fn ranks(&self) -> impl Iterator<Item = u32> + '_ {
        self.trajectory.iter().map(|p| p.rank)
    }
}

#[derive(Clone, Debug)]
pub struct EpisodeOptions {
    /// Absences of at most this many consecutive snapshots are bridged.
    pub gap_tolerance: usize,
    /// Spacing factor above which consecutive snapshots count as a stream gap.
    pub gap_slack: f64,
}

impl Default for EpisodeOptions {
    fn default() -> Self {
        EpisodeOptions { gap_tolerance: 0, gap_slack: DEFAULT_GAP_SLACK }
    }
}

pub fn extract_episodes(stream: &SnapshotStream, gap_tolerance: usize) -> Vec<Episode> {
    extract_episodes_with(stream, &EpisodeOptions { gap_tolerance, ..Default::default() })
}

/// Segments every item's presence into maximal runs.
///
/// Episodes are returned ordered by entry time, then entry rank.
pub fn extract_episodes_with(stream: &SnapshotStream, options: &EpisodeOptions) -> Vec<Episode> {
    let snaps = &stream.snapshots;
    if snaps.is_empty() {
        return Vec::new();
    }

    // Segment index per snapshot; a stream gap starts a new segment.
    let gaps = detect_gaps(stream, options.gap_slack.max(1.0)).expect("slack clamped to >= 1");
    let mut segment = Vec::with_capacity(snaps.len());
    let mut seg = 0usize;
    let mut gap_iter = gaps.iter().peekable();
    for (i, s) in snaps.iter().enumerate() {
        if i > 0 {
            if let Some(g) = gap_iter.peek() {
                if g.t_end == s.t {
                    seg += 1;
                    gap_iter.next();
                }
            }
        }
        segment.push(seg);
    }

    let mut sightings: HashMap<&str, Vec<(usize, u32)>> = HashMap::new();
    for (i, s) in snaps.iter().enumerate() {
        for e in &s.entries {
            sightings.entry(e.name.as_str()).or_default().push((i, e.rank));
        }
    }

    let mut episodes = Vec::new();
    for (name, seen) in sightings {
        let mut start = 0;
        for k in 1..=seen.len() {
            let breaks = k == seen.len() || {
                let (prev, _) = seen[k - 1];
                let (next, _) = seen[k];
                next - prev - 1 > options.gap_tolerance || segment[prev] != segment[next]
            };
            if breaks {
                episodes.push(build_episode(stream, &segment, name, &seen[start..k]));
                start = k;
            }
        }
    }
    episodes.sort_by(|a, b| {
        (a.t_enter, a.enter_rank, &a.name).cmp(&(b.t_enter, b.enter_rank, &b.name))
    });
    episodes
}

fn build_episode(stream: &SnapshotStream, segment: &[usize], name: &str, run: &[(usize, u32)]) -> Episode {
    let snaps = &stream.snapshots;
    let (first, enter_rank) = run[0];
    let (last, leave_rank) = *run.last().expect("runs are non-empty");
    let censored_left = first == 0 || segment[first - 1] != segment[first];
    let censored_right = last + 1 == snaps.len() || segment[last + 1] != segment[last];
    let t_leave = if censored_right {
        snaps[last].t + stream.delta_t
    } else {
        snaps[last + 1].t
    };
    let trajectory: Vec<TrajectoryPoint> = run
        .iter()
        .map(|&(i, rank)| TrajectoryPoint { t: snaps[i].t, rank })
        .collect();
    Episode {
        name: name.to_owned(),
        t_enter: snaps[first].t,
        t_leave,
        enter_rank,
        leave_rank,
        min_rank: trajectory.iter().map(|p| p.rank).min().expect("non-empty"),
        trajectory,
        censored_left,
        censored_right,
        prehistory_s: None,
        category: None,
    }
}

pub const EPISODES_HEADER: [&str; 11] = [
    "name",
    "t_enter",
    "t_leave",
    "duration_s",
    "enter_rank",
    "leave_rank",
    "min_rank",
    "censored_left",
    "censored_right",
    "prehistory_s",
    "category",
];

pub fn write_episodes_csv<W: Write>(episodes: &[Episode], tz: TzOffset, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(EPISODES_HEADER)?;
    for e in episodes {
        w.write_record([
            e.name.clone(),
            tz.format(e.t_enter),
            tz.format(e.t_leave),
            e.duration().to_string(),
            e.enter_rank.to_string(),
            e.leave_rank.to_string(),
            e.min_rank.to_string(),
            e.censored_left.to_string(),
            e.censored_right.to_string(),
            e.prehistory_s.map(|p| p.to_string()).unwrap_or_default(),
            e.category.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
