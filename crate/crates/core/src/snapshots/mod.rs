//! Snapshot streams of a ranked top-`L` list, their cleaning, and the
//! segmentation of per-item presence into episodes.

mod episodes;
mod io;
mod labels;

pub use episodes::{extract_episodes, extract_episodes_with, write_episodes_csv, Episode, EpisodeOptions, TrajectoryPoint};
pub use io::{parse_stream, write_stream, Format, ParseOptions, ParseReport, RowIssue};
pub use labels::{attach_labels, Label, LabelTable};

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, SecondsFormat};

use crate::error::{Error, Result};

/// UTC seconds since the Unix epoch.
pub type Timestamp = i64;

pub const DEFAULT_DELTA_T: i64 = 300;
pub const DEFAULT_LIST_LENGTH: u32 = 48;
pub const DEFAULT_GAP_SLACK: f64 = 1.5;
pub const SECONDS_PER_DAY: i64 = 86_400;

/// Fixed offset from UTC used for all time-of-day arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TzOffset(i32);

impl TzOffset {
    pub const UTC: TzOffset = TzOffset(0);

    pub fn from_hours(hours: i32) -> Self {
        TzOffset(hours * 3600)
    }

    pub fn from_seconds(seconds: i32) -> Result<Self> {
        if seconds.abs() >= SECONDS_PER_DAY as i32 {
            return Err(Error::InvalidInput(format!("timezone offset {seconds}s out of range")));
        }
        Ok(TzOffset(seconds))
    }

    pub fn seconds(self) -> i32 {
        self.0
    }

    /// Seconds since local midnight, in `0..86400`.
    pub fn time_of_day(self, t: Timestamp) -> i64 {
        (t + self.0 as i64).rem_euclid(SECONDS_PER_DAY)
    }

    /// UTC timestamp of the local midnight at or before `t`.
    pub fn local_midnight(self, t: Timestamp) -> Timestamp {
        t - self.time_of_day(t)
    }

    pub fn format(self, t: Timestamp) -> String {
        let offset = FixedOffset::east_opt(self.0).expect("offset validated at construction");
        DateTime::from_timestamp(t, 0)
            .expect("timestamp in chrono range")
            .with_timezone(&offset)
            .to_rfc3339_opts(SecondsFormat::Secs, false)
    }
}

impl Default for TzOffset {
    fn default() -> Self {
        TzOffset::from_hours(8)
    }
}

impl fmt::Display for TzOffset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { '-' } else { '+' };
        let abs = self.0.abs();
        write!(f, "{sign}{:02}:{:02}", abs / 3600, (abs % 3600) / 60)
    }
}

impl FromStr for TzOffset {
    type Err = Error;

    /// Accepts `+8`, `-3`, `+05:30`, `UTC`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("utc") || s == "Z" {
            return Ok(TzOffset::UTC);
        }
        let bad = || Error::InvalidInput(format!("cannot parse timezone offset {s:?}"));
        let (sign, rest) = match s.as_bytes().first() {
            Some(b'+') => (1, &s[1..]),
            Some(b'-') => (-1, &s[1..]),
            Some(_) => (1, s),
            None => return Err(bad()),
        };
        let (h, m) = match rest.split_once(':') {
            Some((h, m)) => (h, m),
            None => (rest, "0"),
        };
        let h: i32 = h.parse().map_err(|_| bad())?;
        let m: i32 = m.parse().map_err(|_| bad())?;
        if !(0..60).contains(&m) {
            return Err(bad());
        }
        TzOffset::from_seconds(sign * (h * 3600 + m * 60))
    }
}

/// One row of a list snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct RawEntry {
    pub name: String,
    pub rank: u32,
    pub hotness: Option<f64>,
    pub label: Option<String>,
}

impl RawEntry {
    pub fn new(name: impl Into<String>, rank: u32) -> Self {
        RawEntry { name: name.into(), rank, hotness: None, label: None }
    }

    pub fn with_hotness(mut self, hotness: f64) -> Self {
        self.hotness = Some(hotness);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

/// The list as observed at one instant, entries ordered by rank.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedSnapshot {
    pub t: Timestamp,
    pub entries: Vec<RawEntry>,
}

impl RankedSnapshot {
    /// Builds a snapshot from names listed top to bottom.
    pub fn from_names<S: AsRef<str>>(t: Timestamp, names: &[S]) -> Self {
        let entries = names
            .iter()
            .enumerate()
            .map(|(i, n)| RawEntry::new(n.as_ref(), i as u32 + 1))
            .collect();
        RankedSnapshot { t, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks that ranks are exactly `1..=m` and names are unique.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::with_capacity(self.entries.len());
        for (i, e) in self.entries.iter().enumerate() {
            if e.rank as usize != i + 1 {
                return Err(Error::InvalidInput(format!(
                    "snapshot at t={} has rank {} in position {}",
                    self.t,
                    e.rank,
                    i + 1
                )));
            }
            if e.name.is_empty() {
                return Err(Error::InvalidInput(format!("snapshot at t={} has an empty name", self.t)));
            }
            if !seen.insert(e.name.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "snapshot at t={} lists {:?} twice",
                    self.t, e.name
                )));
            }
        }
        Ok(())
    }
}

/// Time-ordered sequence of snapshots together with its sampling metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotStream {
    pub snapshots: Vec<RankedSnapshot>,
    /// Nominal sampling interval in seconds.
    pub delta_t: i64,
    pub list_length: u32,
    pub tz_offset: TzOffset,
}

impl SnapshotStream {
    pub fn new(delta_t: i64, list_length: u32, tz_offset: TzOffset) -> Self {
        SnapshotStream { snapshots: Vec::new(), delta_t, list_length, tz_offset }
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn time_span(&self) -> Option<(Timestamp, Timestamp)> {
        Some((self.snapshots.first()?.t, self.snapshots.last()?.t))
    }

    /// Checks every stream invariant: strictly increasing timestamps, and
    /// each snapshot well-formed with at most `list_length` entries.
    pub fn validate(&self) -> Result<()> {
        if self.delta_t <= 0 {
            return Err(Error::InvalidInput("delta_t must be positive".into()));
        }
        for w in self.snapshots.windows(2) {
            if w[1].t <= w[0].t {
                return Err(Error::InvalidInput(format!(
                    "timestamps not strictly increasing: {} then {}",
                    w[0].t, w[1].t
                )));
            }
        }
        for s in &self.snapshots {
            s.validate()?;
            if s.len() > self.list_length as usize {
                return Err(Error::InvalidInput(format!(
                    "snapshot at t={} has {} entries, list length is {}",
                    s.t,
                    s.len(),
                    self.list_length
                )));
            }
        }
        Ok(())
    }

    /// Applies [`filter_and_rerank`] to every snapshot and sets the list length.
    pub fn filter_and_rerank(&self, ad_label: &str, list_length: u32) -> SnapshotStream {
        SnapshotStream {
            snapshots: self
                .snapshots
                .iter()
                .map(|s| filter_and_rerank(s, ad_label, list_length))
                .collect(),
            delta_t: self.delta_t,
            list_length,
            tz_offset: self.tz_offset,
        }
    }
}

/// Drops entries labeled `ad_label`, renumbers the survivors `1..=m` in their
/// original order, and keeps at most the first `list_length`.
pub fn filter_and_rerank(snapshot: &RankedSnapshot, ad_label: &str, list_length: u32) -> RankedSnapshot {
    let mut survivors: Vec<&RawEntry> = snapshot
        .entries
        .iter()
        .filter(|e| e.label.as_deref() != Some(ad_label))
        .collect();
    survivors.sort_by_key(|e| e.rank);
    let entries = survivors
        .into_iter()
        .take(list_length as usize)
        .enumerate()
        .map(|(i, e)| RawEntry { rank: i as u32 + 1, ..e.clone() })
        .collect();
    RankedSnapshot { t: snapshot.t, entries }
}

/// A hole in the stream: two consecutive snapshots further apart than
/// `slack * delta_t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gap {
    pub t_start: Timestamp,
    pub t_end: Timestamp,
    pub missing_count: u64,
}

pub fn detect_gaps(stream: &SnapshotStream, slack: f64) -> Result<Vec<Gap>> {
    if !(slack >= 1.0) {
        return Err(Error::InvalidInput(format!("gap slack must be >= 1, got {slack}")));
    }
    let limit = slack * stream.delta_t as f64;
    Ok(stream
        .snapshots
        .windows(2)
        .filter_map(|w| {
            let spacing = (w[1].t - w[0].t) as f64;
            (spacing > limit).then(|| Gap {
                t_start: w[0].t,
                t_end: w[1].t,
                missing_count: ((spacing / stream.delta_t as f64).round() as u64).saturating_sub(1),
            })
        })
        .collect())
}
