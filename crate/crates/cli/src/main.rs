mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Serialize)]
#[command(name = "rankdyn", version, about = "Ranking dynamics of trending lists")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Serialize)]
pub struct Global {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// UTC offset for local-time math, e.g. +8, -05:30, UTC.
    #[arg(long, global = true)]
    pub tz: Option<String>,
    /// File of key=value settings; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Serialize)]
pub enum Command {
    /// Parse raw snapshots, drop ads, re-rank and write the canonical stream.
    Ingest(IngestArgs),
    /// Segment the stream into episodes.
    Episodes(EpisodesArgs),
    /// Rank diversity of the stream.
    Diversity(DiversityArgs),
    /// Entry counts and median hotness in time bins.
    Circadian(CircadianArgs),
    /// DTW k-means of normalized rank trajectories.
    Cluster(ClusterArgs),
    /// Items that held one rank for a long time.
    Dwell(DwellArgs),
    /// Category shares at selected ranks.
    Categories(CategoriesArgs),
    /// Run the ranking model and average its rank diversity.
    Simulate(SimulateArgs),
    /// Flag localized dips in a diversity curve.
    Detect(DetectArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Args, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to the input's extension.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Entries with this label are dropped before re-ranking.
    #[arg(long, default_value = "荐")]
    pub ad_label: String,
    #[arg(long, default_value_t = 48)]
    pub l: u32,
    /// Sampling interval in seconds.
    #[arg(long, default_value_t = 300)]
    pub delta_t: i64,
    #[arg(long, default_value_t = 1.5)]
    pub gap_slack: f64,
}

#[derive(Args, Serialize)]
pub struct StreamArgs {
    /// Canonical stream CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Sampling interval in seconds; inferred from the stream when omitted.
    #[arg(long)]
    pub delta_t: Option<i64>,
    /// List length; the largest rank in the stream when omitted.
    #[arg(long)]
    pub l: Option<u32>,
}

#[derive(Args, Serialize)]
pub struct EpisodeArgs {
    /// Absences of up to this many snapshots do not end an episode.
    #[arg(long, default_value_t = 0)]
    pub gap_tolerance: usize,
    #[arg(long, default_value_t = 1.5)]
    pub gap_slack: f64,
    /// CSV with name, category and prehistory_s columns.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct EpisodesArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    #[command(flatten)]
    pub episodes: EpisodeArgs,
    /// Short/long section boundary in seconds.
    #[arg(long, default_value_t = 3600)]
    pub boundary: i64,
    #[arg(long)]
    pub include_censored: bool,
}

#[derive(Args, Serialize)]
pub struct DiversityArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    /// Window start (RFC 3339 or Unix seconds).
    #[arg(long)]
    pub from: Option<String>,
    /// Window end, inclusive.
    #[arg(long)]
    pub to: Option<String>,
    /// Also split into day [07:00, 24:00) and night snapshots.
    #[arg(long)]
    pub day_night: bool,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Increments,
    Hotness,
    Both,
}

#[derive(Args, Serialize)]
pub struct CircadianArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    #[command(flatten)]
    pub episodes: EpisodeArgs,
    /// Bin width in seconds.
    #[arg(long, default_value_t = 3600)]
    pub bin: i64,
    #[arg(long, value_enum, default_value = "both")]
    pub kind: KindArg,
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SectionArg {
    #[value(alias = "1")]
    Short,
    #[value(alias = "2")]
    Long,
    All,
}

#[derive(Args, Serialize)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    #[command(flatten)]
    pub episodes: EpisodeArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub section: SectionArg,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Resampled length; 0 keeps each trajectory's own length.
    #[arg(long, default_value_t = 50)]
    pub m: usize,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// Sakoe-Chiba band half-width.
    #[arg(long)]
    pub band: Option<usize>,
    #[arg(long, default_value_t = 3600)]
    pub boundary: i64,
    #[arg(long)]
    pub include_censored: bool,
}

#[derive(Args, Serialize)]
pub struct DwellArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    #[command(flatten)]
    pub episodes: EpisodeArgs,
    #[arg(long, default_value_t = 7200)]
    pub min_dwell: i64,
}

#[derive(Args, Serialize)]
pub struct CategoriesArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    #[command(flatten)]
    pub episodes: EpisodeArgs,
    #[arg(long, value_delimiter = ',', default_value = "8,16,28,33")]
    pub ranks: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "5,12,21,25,30,37")]
    pub baseline: Vec<u32>,
    #[arg(long, default_value_t = 7200)]
    pub min_dwell: i64,
}

#[derive(Args, Serialize)]
pub struct DetectorArgs {
    #[arg(long, default_value_t = 3)]
    pub half_window: usize,
    #[arg(long, default_value_t = 0.15)]
    pub threshold: f64,
}

#[derive(Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 48)]
    pub l: usize,
    /// Anchors as RANK:DELTA, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = commands::parse_anchor)]
    pub anchor: Vec<(usize, f64)>,
    /// Steps after burn-in; default 100 N.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Default 10 N.
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Default N / 10.
    #[arg(long)]
    pub sample_every: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[arg(long, default_value_t = 300)]
    pub delta_t: i64,
    /// Skip writing the first run's snapshot stream.
    #[arg(long)]
    pub no_stream: bool,
    /// Run the dip detector on the averaged curve.
    #[arg(long)]
    pub detect: bool,
    #[command(flatten)]
    pub detector: DetectorArgs,
}

#[derive(Args, Serialize)]
pub struct DetectArgs {
    /// A canonical stream or a diversity CSV written by this tool.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// With a stream input, detect on day and night curves separately.
    #[arg(long)]
    pub day_night: bool,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let mut cmd = Cli::command().args_override_self(true);
    let argv = match config::merge(&mut cmd, argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let mut cmd = Cli::command().args_override_self(true).mut_subcommands(|s| s.args_override_self(true));
    let matches = match cmd.try_get_matches_from_mut(&argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<commands::UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
