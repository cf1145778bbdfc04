mod analyze;
mod ingest;
mod simulate;

use std::path::Path;

use anyhow::{bail, Context, Result};
use rankdyn::metrics::median;
use rankdyn::snapshots::{
    attach_labels, extract_episodes_with, parse_stream, Episode, EpisodeOptions, Format, LabelTable, ParseOptions,
    SnapshotStream, TzOffset, DEFAULT_DELTA_T,
};

use crate::output::Run;
use crate::{Cli, Command, EpisodeArgs, StreamArgs};

/// Invalid flag values found after parsing; exits with the usage code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn parse_anchor(s: &str) -> std::result::Result<(usize, f64), String> {
    let (rank, delta) = s.split_once(':').ok_or_else(|| format!("expected RANK:DELTA, got {s:?}"))?;
    let rank = rank.trim().parse().map_err(|_| format!("bad anchor rank {rank:?}"))?;
    let delta = delta.trim().parse().map_err(|_| format!("bad barrier {delta:?}"))?;
    Ok((rank, delta))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest(_) => "ingest",
        Command::Episodes(_) => "episodes",
        Command::Diversity(_) => "diversity",
        Command::Circadian(_) => "circadian",
        Command::Cluster(_) => "cluster",
        Command::Dwell(_) => "dwell",
        Command::Categories(_) => "categories",
        Command::Simulate(_) => "simulate",
        Command::Detect(_) => "detect",
    }
}

pub struct Context_ {
    pub tz: Option<TzOffset>,
    pub seed: u64,
}

pub fn run(cli: &Cli, argv: Vec<String>) -> Result<()> {
    let tz = cli
        .global
        .tz
        .as_deref()
        .map(|s| s.parse::<TzOffset>().map_err(|e| usage(format!("--tz: {e}"))))
        .transpose()?;
    let ctx = Context_ { tz, seed: cli.global.seed };
    let name = command_name(&cli.command);
    let params = serde_json::to_value(cli)?;
    let mut out = Run::new(&cli.global.out, name, argv[1..].to_vec(), params, cli.global.seed)?;
    match &cli.command {
        Command::Ingest(a) => ingest::run(&ctx, a, &mut out)?,
        Command::Episodes(a) => analyze::episodes(&ctx, a, &mut out)?,
        Command::Diversity(a) => analyze::diversity(&ctx, a, &mut out)?,
        Command::Circadian(a) => analyze::circadian(&ctx, a, &mut out)?,
        Command::Cluster(a) => analyze::cluster(&ctx, a, &mut out)?,
        Command::Dwell(a) => analyze::dwell(&ctx, a, &mut out)?,
        Command::Categories(a) => analyze::categories(&ctx, a, &mut out)?,
        Command::Simulate(a) => simulate::run(&ctx, a, &mut out)?,
        Command::Detect(a) => simulate::detect(&ctx, a, &mut out)?,
    }
    out.finish()
}

pub fn warn(msg: impl std::fmt::Display) {
    eprintln!("warning: {msg}");
}

/// Median spacing of consecutive snapshots.
fn infer_delta_t(stream: &SnapshotStream) -> i64 {
    let mut spacing: Vec<f64> = stream.snapshots.windows(2).map(|w| (w[1].t - w[0].t) as f64).collect();
    median(&mut spacing).map_or(DEFAULT_DELTA_T, |m| m.round() as i64).max(1)
}

pub fn load_stream(ctx: &Context_, args: &StreamArgs, out: &mut Run) -> Result<SnapshotStream> {
    let bytes = out.read_input(&args.input)?;
    let opts = ParseOptions { tz_offset: ctx.tz, ..Default::default() };
    let report = parse_stream(&bytes[..], Format::from_path(&args.input), &opts)
        .with_context(|| format!("parsing {}", args.input.display()))?;
    for issue in &report.malformed {
        warn(format!("{}:{}: {}", args.input.display(), issue.line, issue.message));
    }
    let mut stream = report.stream;
    if stream.is_empty() {
        bail!("{} holds no snapshots", args.input.display());
    }
    stream.delta_t = match args.delta_t {
        Some(d) if d > 0 => d,
        Some(d) => return Err(usage(format!("--delta-t must be positive, got {d}"))),
        None => infer_delta_t(&stream),
    };
    stream.list_length = match args.l {
        Some(0) => return Err(usage("--l must be at least 1")),
        Some(l) => l,
        None => stream.snapshots.iter().flat_map(|s| s.entries.iter().map(|e| e.rank)).max().unwrap_or(1),
    };
    out.resolve("delta_t", stream.delta_t);
    out.resolve("list_length", stream.list_length);
    out.resolve("tz", stream.tz_offset.to_string());
    Ok(stream)
}

pub fn load_episodes(stream: &SnapshotStream, args: &EpisodeArgs, out: &mut Run) -> Result<Vec<Episode>> {
    if !(args.gap_slack >= 1.0) {
        return Err(usage(format!("--gap-slack must be at least 1, got {}", args.gap_slack)));
    }
    let opts = EpisodeOptions { gap_tolerance: args.gap_tolerance, gap_slack: args.gap_slack };
    let mut episodes = extract_episodes_with(stream, &opts);
    if let Some(path) = &args.labels {
        let bytes = out.read_input(path)?;
        let table = LabelTable::read_csv(&bytes[..]).with_context(|| format!("reading labels {}", path.display()))?;
        attach_labels(&mut episodes, &table);
    }
    Ok(episodes)
}

pub fn format_for(path: &Path, explicit: Option<crate::FormatArg>) -> Format {
    match explicit {
        Some(crate::FormatArg::Csv) => Format::Csv,
        Some(crate::FormatArg::Jsonl) => Format::Jsonl,
        None => Format::from_path(path),
    }
}
