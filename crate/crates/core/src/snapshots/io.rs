//! Canonical CSV and JSON-lines snapshot formats.
//!
//! Both carry one entry per row with the keys
//! `timestamp,rank,name,hotness,label`; `timestamp` is ISO-8601 with an
//! explicit offset, `hotness` and `label` may be empty (CSV) or null (JSONL).
//! Rows must be grouped by timestamp in time order.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};

use chrono::DateTime;
use serde::{Deserialize, Serialize};

use super::{RankedSnapshot, RawEntry, SnapshotStream, Timestamp, TzOffset};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 5] = ["timestamp", "rank", "name", "hotness", "label"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// Guesses the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &std::path::Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("jsonl") || e.eq_ignore_ascii_case("ndjson") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParseOptions {
    pub delta_t: i64,
    pub list_length: u32,
    /// Overrides the offset found on the first row.
    pub tz_offset: Option<TzOffset>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            delta_t: super::DEFAULT_DELTA_T,
            list_length: super::DEFAULT_LIST_LENGTH,
            tz_offset: None,
        }
    }
}

/// A row that was skipped during parsing.
#[derive(Clone, Debug, PartialEq)]
pub struct RowIssue {
    pub line: u64,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct ParseReport {
    pub stream: SnapshotStream,
    pub rows: u64,
    pub malformed: Vec<RowIssue>,
    /// Snapshots whose ranks were not exactly `1..=m` as read.
    pub rank_holes: Vec<Timestamp>,
}

struct Row {
    line: u64,
    t: Timestamp,
    offset: i32,
    entry: RawEntry,
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    timestamp: String,
    rank: i64,
    name: String,
    #[serde(default)]
    hotness: Option<f64>,
    #[serde(default)]
    label: Option<String>,
}

fn parse_timestamp(s: &str) -> std::result::Result<(Timestamp, i32), String> {
    let dt = DateTime::parse_from_rfc3339(s.trim()).map_err(|e| format!("bad timestamp {s:?}: {e}"))?;
    Ok((dt.timestamp(), dt.offset().local_minus_utc()))
}

fn build_row(
    line: u64,
    timestamp: &str,
    rank: std::result::Result<i64, String>,
    name: &str,
    hotness: Option<std::result::Result<f64, String>>,
    label: Option<&str>,
) -> std::result::Result<Row, String> {
    let (t, offset) = parse_timestamp(timestamp)?;
    let rank = rank?;
    if rank < 1 || rank > u32::MAX as i64 {
        return Err(format!("rank {rank} out of range"));
    }
    if name.is_empty() {
        return Err("empty name".into());
    }
    let hotness = match hotness {
        None => None,
        Some(h) => {
            let h = h?;
            if !(h.is_finite() && h >= 0.0) {
                return Err(format!("hotness {h} is not a non-negative number"));
            }
            Some(h)
        }
    };
    Ok(Row {
        line,
        t,
        offset,
        entry: RawEntry {
            name: name.to_owned(),
            rank: rank as u32,
            hotness,
            label: label.filter(|l| !l.is_empty()).map(str::to_owned),
        },
    })
}

/// Accumulates rows into time-ordered snapshots, enforcing the hard errors.
struct Grouper {
    snapshots: Vec<RankedSnapshot>,
    current: Option<RankedSnapshot>,
    ranks: HashSet<u32>,
    names: HashSet<String>,
    first_offset: Option<i32>,
    rank_holes: Vec<Timestamp>,
}

impl Grouper {
    fn new() -> Self {
        Grouper {
            snapshots: Vec::new(),
            current: None,
            ranks: HashSet::new(),
            names: HashSet::new(),
            first_offset: None,
            rank_holes: Vec::new(),
        }
    }

    fn push(&mut self, row: Row) -> Result<()> {
        self.first_offset.get_or_insert(row.offset);
        match &self.current {
            Some(cur) if row.t < cur.t => {
                return Err(Error::Parse {
                    line: row.line,
                    message: format!(
                        "timestamp {} is earlier than the preceding snapshot",
                        TzOffset(row.offset).format(row.t)
                    ),
                })
            }
            Some(cur) if row.t > cur.t => self.finish_current(),
            Some(_) => {}
            None => {}
        }
        let cur = self.current.get_or_insert_with(|| RankedSnapshot { t: row.t, entries: Vec::new() });
        if !self.ranks.insert(row.entry.rank) {
            return Err(Error::Parse {
                line: row.line,
                message: format!("duplicate rank {} at this timestamp", row.entry.rank),
            });
        }
        if !self.names.insert(row.entry.name.clone()) {
            return Err(Error::Parse {
                line: row.line,
                message: format!("duplicate name {:?} at this timestamp", row.entry.name),
            });
        }
        cur.entries.push(row.entry);
        Ok(())
    }

    fn finish_current(&mut self) {
        if let Some(mut s) = self.current.take() {
            s.entries.sort_by_key(|e| e.rank);
            if s.entries.iter().enumerate().any(|(i, e)| e.rank as usize != i + 1) {
                self.rank_holes.push(s.t);
            }
            self.snapshots.push(s);
            self.ranks.clear();
            self.names.clear();
        }
    }
}

/// Reads a snapshot stream. Unparseable rows are skipped and reported;
/// out-of-order timestamps and duplicate ranks or names within a
/// timestamp abort with the offending line number.
pub fn parse_stream<R: Read>(source: R, format: Format, options: &ParseOptions) -> Result<ParseReport> {
    let mut grouper = Grouper::new();
    let mut malformed = Vec::new();
    let mut rows = 0u64;

    match format {
        Format::Csv => {
            let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
            let headers = reader.headers()?.clone();
            if headers.iter().map(str::trim).ne(CSV_HEADER.iter().copied()) {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header {:?}, found {:?}", CSV_HEADER.join(","), headers),
                });
            }
            let mut record = csv::StringRecord::new();
            loop {
                let line = reader.position().line() + 1;
                match reader.read_record(&mut record) {
                    Ok(false) => break,
                    Ok(true) => {}
                    Err(e) => {
                        if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                            return Err(e.into());
                        }
                        let line = e.position().map_or(line, |p| p.line());
                        malformed.push(RowIssue { line, message: e.to_string() });
                        continue;
                    }
                }
                let line = record.position().map_or(line, |p| p.line());
                rows += 1;
                let hotness = record.get(3).filter(|h| !h.trim().is_empty());
                let built = build_row(
                    line,
                    &record[0],
                    record[1].trim().parse::<i64>().map_err(|_| format!("bad rank {:?}", &record[1])),
                    &record[2],
                    hotness.map(|h| h.trim().parse::<f64>().map_err(|_| format!("bad hotness {h:?}"))),
                    record.get(4),
                );
                match built {
                    Ok(row) => grouper.push(row)?,
                    Err(message) => malformed.push(RowIssue { line, message }),
                }
            }
        }
        Format::Jsonl => {
            for (i, line) in BufReader::new(source).lines().enumerate() {
                let line_no = i as u64 + 1;
                let text = line?;
                if text.trim().is_empty() {
                    continue;
                }
                rows += 1;
                let built = serde_json::from_str::<JsonRow>(&text)
                    .map_err(|e| e.to_string())
                    .and_then(|r| {
                        build_row(line_no, &r.timestamp, Ok(r.rank), &r.name, r.hotness.map(Ok), r.label.as_deref())
                    });
                match built {
                    Ok(row) => grouper.push(row)?,
                    Err(message) => malformed.push(RowIssue { line: line_no, message }),
                }
            }
        }
    }
    grouper.finish_current();

    let tz_offset = options
        .tz_offset
        .or(grouper.first_offset.map(TzOffset))
        .unwrap_or_default();
    Ok(ParseReport {
        stream: SnapshotStream {
            snapshots: grouper.snapshots,
            delta_t: options.delta_t,
            list_length: options.list_length,
            tz_offset,
        },
        rows,
        malformed,
        rank_holes: grouper.rank_holes,
    })
}

fn format_hotness(h: Option<f64>) -> String {
    h.map(|h| h.to_string()).unwrap_or_default()
}

/// Writes the stream in canonical form, timestamps rendered in the
/// stream's offset.
pub fn write_stream<W: Write>(stream: &SnapshotStream, format: Format, sink: W) -> Result<()> {
    let tz = stream.tz_offset;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(CSV_HEADER)?;
            for s in &stream.snapshots {
                let ts = tz.format(s.t);
                for e in &s.entries {
                    w.write_record([
                        ts.as_str(),
                        &e.rank.to_string(),
                        &e.name,
                        &format_hotness(e.hotness),
                        e.label.as_deref().unwrap_or(""),
                    ])?;
                }
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut w = std::io::BufWriter::new(sink);
            for s in &stream.snapshots {
                let ts = tz.format(s.t);
                for e in &s.entries {
                    let row = JsonRow {
                        timestamp: ts.clone(),
                        rank: e.rank as i64,
                        name: e.name.clone(),
                        hotness: e.hotness,
                        label: e.label.clone(),
                    };
                    serde_json::to_writer(&mut w, &row)?;
                    w.write_all(b"\n")?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_csv(text: &str) -> Result<ParseReport> {
        parse_stream(text.as_bytes(), Format::Csv, &ParseOptions::default())
    }

    #[test]
    fn two_timestamps_three_entries() {
        let text = "timestamp,rank,name,hotness,label\n\
            2020-07-17T10:00:00+08:00,1,a,100,\n\
            2020-07-17T10:00:00+08:00,2,b,90,\n\
            2020-07-17T10:00:00+08:00,3,c,,\n\
            2020-07-17T10:05:00+08:00,1,b,120,\n\
            2020-07-17T10:05:00+08:00,3,a,80,\n\
            2020-07-17T10:05:00+08:00,2,d,85,\n";
        let report = parse_csv(text).unwrap();
        let s = &report.stream;
        assert_eq!(s.len(), 2);
        assert!(s.snapshots.iter().all(|x| x.len() == 3));
        assert_eq!(s.snapshots[0].entries[2].hotness, None);
        assert_eq!(s.snapshots[1].entries[1].name, "d");
        assert_eq!(s.tz_offset, TzOffset::from_hours(8));
        assert_eq!(s.snapshots[1].t - s.snapshots[0].t, 300);
        assert!(report.malformed.is_empty());
        s.validate().unwrap();
    }

    #[test]
    fn empty_file_gives_empty_stream() {
        let report = parse_csv("timestamp,rank,name,hotness,label\n").unwrap();
        assert!(report.stream.is_empty());
        let report = parse_stream(&b""[..], Format::Jsonl, &ParseOptions::default()).unwrap();
        assert!(report.stream.is_empty());
    }

    #[test]
    fn swapped_timestamps_name_the_line() {
        let text = "timestamp,rank,name,hotness,label\n\
            2020-07-17T10:05:00+08:00,1,a,,\n\
            2020-07-17T10:00:00+08:00,1,b,,\n";
        match parse_csv(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_rank_is_hard_error() {
        let text = "timestamp,rank,name,hotness,label\n\
            2020-07-17T10:00:00+08:00,1,a,,\n\
            2020-07-17T10:00:00+08:00,1,b,,\n";
        assert!(matches!(parse_csv(text), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn malformed_rows_are_reported_and_skipped() {
        let text = "timestamp,rank,name,hotness,label\n\
            2020-07-17T10:00:00+08:00,1,a,,\n\
            not-a-time,2,b,,\n\
            2020-07-17T10:00:00+08:00,0,c,,\n\
            2020-07-17T10:00:00+08:00,2,d,-4,\n\
            2020-07-17T10:00:00+08:00,2,e,7,荐\n";
        let report = parse_csv(text).unwrap();
        let lines: Vec<u64> = report.malformed.iter().map(|m| m.line).collect();
        assert_eq!(lines, vec![3, 4, 5]);
        assert_eq!(report.stream.snapshots[0].len(), 2);
        assert_eq!(report.stream.snapshots[0].entries[1].label.as_deref(), Some("荐"));
    }

    #[test]
    fn jsonl_reads_nulls() {
        let text = r#"{"timestamp":"2020-07-17T10:00:00+08:00","rank":1,"name":"热搜","hotness":null,"label":null}
{"timestamp":"2020-07-17T10:00:00+08:00","rank":2,"name":"b","hotness":3.5,"label":"荐"}
{"timestamp":"2020-07-17T10:00:00+08:00","rank":"x","name":"c"}
"#;
        let report = parse_stream(text.as_bytes(), Format::Jsonl, &ParseOptions::default()).unwrap();
        assert_eq!(report.stream.snapshots[0].entries[0].name, "热搜");
        assert_eq!(report.stream.snapshots[0].entries[1].hotness, Some(3.5));
        assert_eq!(report.malformed.len(), 1);
        assert_eq!(report.malformed[0].line, 3);
    }

    #[test]
    fn csv_quotes_names_with_commas() {
        let mut s = SnapshotStream::new(300, 48, TzOffset::UTC);
        s.snapshots.push(RankedSnapshot {
            t: 1_600_000_000,
            entries: vec![RawEntry::new("a, \"quoted\"", 1).with_hotness(0.1)],
        });
        let mut buf = Vec::new();
        write_stream(&s, Format::Csv, &mut buf).unwrap();
        let opts = ParseOptions { tz_offset: None, ..Default::default() };
        let back = parse_stream(&buf[..], Format::Csv, &opts).unwrap().stream;
        assert_eq!(back, s);
    }
}
