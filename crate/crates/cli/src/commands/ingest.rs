use anyhow::{Context, Result};
use rankdyn::snapshots::{detect_gaps, parse_stream, write_stream, Format, ParseOptions};
use serde_json::json;

use super::{format_for, usage, warn, Context_};
use crate::output::Run;
use crate::IngestArgs;

pub fn run(ctx: &Context_, args: &IngestArgs, out: &mut Run) -> Result<()> {
    if args.l == 0 {
        return Err(usage("--l must be at least 1"));
    }
    if args.delta_t <= 0 {
        return Err(usage(format!("--delta-t must be positive, got {}", args.delta_t)));
    }
    if !(args.gap_slack >= 1.0) {
        return Err(usage(format!("--gap-slack must be at least 1, got {}", args.gap_slack)));
    }
    let bytes = out.read_input(&args.input)?;
    let opts = ParseOptions { delta_t: args.delta_t, list_length: args.l, tz_offset: ctx.tz };
    let report = parse_stream(&bytes[..], format_for(&args.input, args.format), &opts)
        .with_context(|| format!("parsing {}", args.input.display()))?;
    for issue in &report.malformed {
        warn(format!("{}:{}: {}", args.input.display(), issue.line, issue.message));
    }
    let raw = &report.stream;
    let ads: usize = raw.snapshots.iter().map(|s| ads_in(s, &args.ad_label)).sum();
    let mut stream = raw.filter_and_rerank(&args.ad_label, args.l);
    stream.delta_t = args.delta_t;
    let gaps = detect_gaps(&stream, args.gap_slack)?;
    let truncated: usize = raw
        .snapshots
        .iter()
        .zip(&stream.snapshots)
        .map(|(r, s)| r.entries.len() - ads_in(r, &args.ad_label) - s.entries.len())
        .sum();

    out.resolve("tz", stream.tz_offset.to_string());
    out.write_with("stream.csv", |w| Ok(write_stream(&stream, Format::Csv, w)?))?;
    let tz = stream.tz_offset;
    let summary = json!({
        "rows": report.rows,
        "snapshots": stream.len(),
        "malformed_rows": report.malformed.iter().map(|i| json!({"line": i.line, "message": i.message})).collect::<Vec<_>>(),
        "rank_holes": report.rank_holes.iter().map(|&t| tz.format(t)).collect::<Vec<_>>(),
        "ads_removed": ads,
        "truncated_entries": truncated,
        "gaps": gaps.iter().map(|g| json!({
            "t_start": tz.format(g.t_start),
            "t_end": tz.format(g.t_end),
            "missing_count": g.missing_count,
        })).collect::<Vec<_>>(),
    });
    out.write_text("ingest_report.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    println!(
        "{} rows, {} snapshots, {} malformed, {} ads removed, {} gaps, {} snapshots with rank holes",
        report.rows,
        stream.len(),
        report.malformed.len(),
        ads,
        gaps.len(),
        report.rank_holes.len()
    );
    Ok(())
}

fn ads_in(s: &rankdyn::snapshots::RankedSnapshot, label: &str) -> usize {
    s.entries.iter().filter(|e| e.label.as_deref() == Some(label)).count()
}
