use anyhow::{bail, Context, Result};
use rankdyn::anomaly::{day_night_curves, detect_dips, write_flags_csv, AnchorFlag};
use rankdyn::metrics::rank_diversity;
use rankdyn::ranksim::{averaged_diversity, init_system, run_seed, run_simulation, Anchor, SimConfig};
use rankdyn::snapshots::{write_stream, Format};

use super::{load_stream, usage, warn, Context_};
use crate::output::Run;
use crate::svg::{render, Chart, Mark, Series};
use crate::{DetectArgs, DetectorArgs, SimulateArgs, StreamArgs};

fn check_detector(d: &DetectorArgs) -> Result<()> {
    if d.half_window == 0 {
        return Err(usage("--half-window must be at least 1"));
    }
    if !(d.threshold > 0.0 && d.threshold < 1.0) {
        return Err(usage(format!("--threshold must lie in (0, 1), got {}", d.threshold)));
    }
    Ok(())
}

fn print_flags(label: &str, flags: &[AnchorFlag]) {
    if flags.is_empty() {
        println!("{label}: no anchors flagged");
    }
    for f in flags {
        println!(
            "{label}: rank {} observed {:.4} baseline {:.4} drop {:.3}",
            f.rank, f.observed, f.baseline, f.drop_ratio
        );
    }
}

fn detect_or_warn(values: &[f64], d: &DetectorArgs) -> Vec<AnchorFlag> {
    match detect_dips(values, d.half_window, d.threshold) {
        Ok(f) => f,
        Err(e) => {
            warn(format!("detector skipped: {e}"));
            Vec::new()
        }
    }
}

pub fn run(ctx: &Context_, args: &SimulateArgs, out: &mut Run) -> Result<()> {
    check_detector(&args.detector)?;
    let mut config = SimConfig::new(args.n, args.l);
    config.anchors = args.anchor.iter().map(|&(rank, delta)| Anchor::new(rank, delta)).collect();
    if let Some(s) = args.steps {
        config.steps = s;
    }
    if let Some(b) = args.burn_in {
        config.burn_in = b;
    }
    if let Some(s) = args.sample_every {
        config.sample_every = s;
    }
    config.runs = args.runs;
    config.seed = ctx.seed;
    config.delta_t = args.delta_t;
    init_system(&config).map_err(|e| usage(e.to_string()))?;
    out.resolve("steps", config.steps);
    out.resolve("burn_in", config.burn_in);
    out.resolve("sample_every", config.sample_every);
    out.resolve("run_seeds", (0..config.runs).map(|i| run_seed(config.seed, i)).collect::<Vec<_>>());

    let avg = averaged_diversity(&config)?;
    out.write_with("diversity_sim.csv", |w| Ok(avg.write_csv(w)?))?;
    let ks: Vec<f64> = (1..=avg.mean.len()).map(|k| k as f64).collect();
    let chart =
        Chart { title: "Simulated rank diversity", x_label: "rank", y_label: "rank diversity", mark: Mark::Line, log_y: false };
    out.write_text("diversity_sim.svg", &render(&chart, &[Series::new("mean", ks, avg.mean.clone())]))?;
    if avg.mean.is_empty() {
        warn("no samples were taken; the curve is empty");
    } else {
        println!("{} runs, {} ranks", avg.runs, avg.mean.len());
    }

    if !args.no_stream {
        let first = SimConfig { seed: run_seed(config.seed, 0), ..config.clone() };
        let stream = run_simulation(&first)?;
        out.write_with("stream.csv", |w| Ok(write_stream(&stream, Format::Csv, w)?))?;
    }
    if args.detect && !avg.mean.is_empty() {
        let flags = detect_or_warn(&avg.mean, &args.detector);
        out.write_with("flags.csv", |w| Ok(write_flags_csv(&flags, w)?))?;
        print_flags("mean", &flags);
    }
    Ok(())
}

/// Columns of a diversity CSV that carry curve values, by header.
fn curve_columns(header: &[&str]) -> Option<Vec<(usize, &'static str)>> {
    match header {
        ["k", "count", "normalized"] => Some(vec![(2, "flags.csv")]),
        ["k", "mean", "stderr"] => Some(vec![(1, "flags.csv")]),
        ["k", "day", "night"] => Some(vec![(1, "flags_day.csv"), (2, "flags_night.csv")]),
        _ => None,
    }
}

fn write_flags(out: &mut Run, name: &str, flags: &[AnchorFlag]) -> Result<()> {
    out.write_with(name, |w| Ok(write_flags_csv(flags, w)?))
}

pub fn detect(ctx: &Context_, args: &DetectArgs, out: &mut Run) -> Result<()> {
    check_detector(&args.detector)?;
    let d = &args.detector;
    let bytes = out.read_input(&args.input)?;
    let text = String::from_utf8_lossy(&bytes);
    let first = text.lines().next().unwrap_or("").trim();
    let header: Vec<&str> = first.split(',').map(str::trim).collect();

    if header.first() == Some(&"timestamp") {
        let sargs = StreamArgs { input: args.input.clone(), delta_t: None, l: None };
        let stream = load_stream(ctx, &sargs, out)?;
        if args.day_night {
            let split = day_night_curves(&stream);
            for (part, curve) in [("day", split.day), ("night", split.night)] {
                let Some(curve) = curve else {
                    warn(format!("no {part} snapshots"));
                    continue;
                };
                let flags = detect_or_warn(&curve.normalized, d);
                write_flags(out, &format!("flags_{part}.csv"), &flags)?;
                print_flags(part, &flags);
            }
        } else {
            let span = stream.time_span().expect("non-empty stream");
            let curve = rank_diversity(&stream, span)?;
            let flags = detect_or_warn(&curve.normalized, d);
            write_flags(out, "flags.csv", &flags)?;
            print_flags("curve", &flags);
        }
        return Ok(());
    }

    let Some(columns) = curve_columns(&header) else {
        bail!("{}: unrecognized header {first:?}", args.input.display());
    };
    let rows: Vec<Vec<&str>> = text.lines().skip(1).filter(|l| !l.trim().is_empty()).map(|l| l.split(',').collect()).collect();
    for (col, name) in columns {
        let values = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cell = r.get(col).map(|c| c.trim()).unwrap_or("");
                cell.parse::<f64>().with_context(|| format!("line {}: bad value {cell:?}", i + 2))
            })
            .collect::<Result<Vec<f64>>>();
        let values = match values {
            Ok(v) => v,
            Err(e) if header[col] == "day" || header[col] == "night" => {
                warn(format!("{} column skipped: {e:#}", header[col]));
                continue;
            }
            Err(e) => return Err(e),
        };
        let flags = detect_or_warn(&values, d);
        write_flags(out, name, &flags)?;
        print_flags(header[col], &flags);
    }
    Ok(())
}
