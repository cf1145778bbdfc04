use std::io::Write;

use crate::error::Result;
use crate::snapshots::{Episode, Timestamp, TzOffset, SECONDS_PER_DAY};

/// End of the nightly pause, seconds after local midnight.
pub const NIGHT_END_S: i64 = 7 * 3600;

/// Flat per-episode record feeding every scatter and distribution export.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRow {
    pub name: String,
    pub t_enter: Timestamp,
    pub duration_s: i64,
    /// `t_enter` modulo 24 h in local time.
    pub enter_time_of_day_s: i64,
    /// The episode spans a whole night window `[00:00, 07:00)`.
    pub overnight: bool,
    pub enter_rank: u32,
    pub leave_rank: u32,
    pub min_rank: u32,
    pub prehistory_s: Option<i64>,
    pub category: Option<String>,
    pub cluster: Option<usize>,
}

pub fn is_overnight(t_enter: Timestamp, t_leave: Timestamp, tz: TzOffset) -> bool {
    let midnight = if tz.time_of_day(t_enter) == 0 {
        t_enter
    } else {
        tz.local_midnight(t_enter) + SECONDS_PER_DAY
    };
    t_leave >= midnight + NIGHT_END_S
}

/// `clusters[i]`, when given, is the cluster of `episodes[i]`.
pub fn episode_table(episodes: &[Episode], tz: TzOffset, clusters: Option<&[Option<usize>]>) -> Vec<EpisodeRow> {
    episodes
        .iter()
        .enumerate()
        .map(|(i, e)| EpisodeRow {
            name: e.name.clone(),
            t_enter: e.t_enter,
            duration_s: e.duration(),
            enter_time_of_day_s: tz.time_of_day(e.t_enter),
            overnight: is_overnight(e.t_enter, e.t_leave, tz),
            enter_rank: e.enter_rank,
            leave_rank: e.leave_rank,
            min_rank: e.min_rank,
            prehistory_s: e.prehistory_s,
            category: e.category.clone(),
            cluster: clusters.and_then(|c| c.get(i).copied().flatten()),
        })
        .collect()
}

pub const TABLE_HEADER: [&str; 11] = [
    "name",
    "t_enter",
    "duration_s",
    "enter_time_of_day_s",
    "overnight",
    "enter_rank",
    "leave_rank",
    "min_rank",
    "prehistory_s",
    "category",
    "cluster",
];

pub fn write_episode_table<W: Write>(rows: &[EpisodeRow], tz: TzOffset, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TABLE_HEADER)?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        w.write_record([
            r.name.clone(),
            tz.format(r.t_enter),
            r.duration_s.to_string(),
            r.enter_time_of_day_s.to_string(),
            r.overnight.to_string(),
            r.enter_rank.to_string(),
            r.leave_rank.to_string(),
            r.min_rank.to_string(),
            opt(r.prehistory_s.map(|p| p.to_string())),
            opt(r.category.clone()),
            opt(r.cluster.map(|c| c.to_string())),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn episode(t_enter: Timestamp, duration: i64) -> Episode {
        Episode {
            name: "e".into(),
            t_enter,
            t_leave: t_enter + duration,
            enter_rank: 45,
            leave_rank: 47,
            min_rank: 12,
            trajectory: vec![],
            censored_left: false,
            censored_right: false,
            prehistory_s: None,
            category: None,
        }
    }

    #[test]
    fn late_entry_spanning_the_night() {
        let tz = TzOffset::from_hours(8);
        // 2020-07-17T23:50:00+08:00
        let t = 1_595_001_000;
        let rows = episode_table(&[episode(t, 8 * 3600)], tz, None);
        assert_eq!(rows[0].enter_time_of_day_s, 85_800);
        assert!(rows[0].overnight);
        assert!(!is_overnight(t, t + 3600, tz));
        assert_eq!(rows[0].category, None);
    }

    #[test]
    fn empty_table_keeps_header() {
        let mut buf = Vec::new();
        write_episode_table(&[], TzOffset::UTC, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), TABLE_HEADER.join(","));
    }

    #[test]
    fn uncategorized_row_has_empty_field() {
        let rows = episode_table(&[episode(0, 300)], TzOffset::UTC, Some(&[Some(2)]));
        let mut buf = Vec::new();
        write_episode_table(&rows, TzOffset::UTC, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(",,2"));
    }
}
