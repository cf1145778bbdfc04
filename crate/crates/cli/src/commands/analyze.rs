use anyhow::{bail, Context, Result};
use rankdyn::anomaly::{day_night_curves, long_dwell_report, write_long_dwell_csv};
use rankdyn::metrics::{
    category_proportions, circadian_series, duration_sections, episode_table, kde_1d, median, rank_diversity,
    write_episode_table, Bandwidth, BinnedSeries, DiversityCurve, SectionOptions, SeriesKind,
};
use rankdyn::snapshots::{write_episodes_csv, Episode, SnapshotStream, Timestamp};
use rankdyn::trajectories::{kmeans_dtw, normalize_trajectory, Clustering, KMeansOptions};

use super::{load_episodes, load_stream, usage, warn, Context_};
use crate::output::Run;
use crate::svg::{render, Chart, Mark, Series};
use crate::{
    CategoriesArgs, CircadianArgs, ClusterArgs, DiversityArgs, DwellArgs, EpisodesArgs, KindArg, SectionArg,
};

fn ranks_axis(l: usize) -> Vec<f64> {
    (1..=l).map(|k| k as f64).collect()
}

fn svg(out: &mut Run, name: &str, chart: &Chart, series: &[Series]) -> Result<()> {
    out.write_text(name, &render(chart, series))
}

fn section_options(boundary: i64, include_censored: bool) -> Result<SectionOptions> {
    if boundary <= 0 {
        return Err(usage(format!("--boundary must be positive, got {boundary}")));
    }
    Ok(SectionOptions { boundary_s: boundary, include_censored, ..Default::default() })
}

pub fn episodes(ctx: &Context_, args: &EpisodesArgs, out: &mut Run) -> Result<()> {
    let stream = load_stream(ctx, &args.stream, out)?;
    let episodes = load_episodes(&stream, &args.episodes, out)?;
    let tz = stream.tz_offset;
    let l = stream.list_length as usize;
    out.write_with("episodes.csv", |w| Ok(write_episodes_csv(&episodes, tz, w)?))?;
    let table = episode_table(&episodes, tz, None);
    out.write_with("episode_table.csv", |w| Ok(write_episode_table(&table, tz, w)?))?;

    // Entry ranks exclude left-censored episodes, exit ranks right-censored ones.
    let mut enter = vec![0u64; l];
    let mut leave = vec![0u64; l];
    for e in &episodes {
        if !e.censored_left && (e.enter_rank as usize) <= l {
            enter[e.enter_rank as usize - 1] += 1;
        }
        if !e.censored_right && (e.leave_rank as usize) <= l {
            leave[e.leave_rank as usize - 1] += 1;
        }
    }
    let pmf = |c: &[u64]| -> Vec<f64> {
        let total: u64 = c.iter().sum();
        c.iter().map(|&n| if total == 0 { 0.0 } else { n as f64 / total as f64 }).collect()
    };
    let (p_enter, p_leave) = (pmf(&enter), pmf(&leave));
    out.write_with("enter_leave.csv", |w| {
        writeln!(w, "rank,enter_count,enter_share,leave_count,leave_share")?;
        for k in 0..l {
            writeln!(w, "{},{},{},{},{}", k + 1, enter[k], p_enter[k], leave[k], p_leave[k])?;
        }
        Ok(())
    })?;
    let chart = Chart { title: "Entry and exit ranks", x_label: "rank", y_label: "share", mark: Mark::Line, log_y: false };
    svg(
        out,
        "enter_leave.svg",
        &chart,
        &[Series::new("enter", ranks_axis(l), p_enter), Series::new("leave", ranks_axis(l), p_leave)],
    )?;

    let sections = duration_sections(&episodes, &section_options(args.boundary, args.include_censored)?);
    let h = &sections.histogram;
    let centers: Vec<f64> = (0..h.counts.len()).map(|i| h.center(i)).collect();
    out.write_with("durations.csv", |w| {
        writeln!(w, "bin_lo_s,bin_hi_s,center_s,count,smoothed")?;
        for i in 0..h.counts.len() {
            writeln!(w, "{},{},{},{},{}", h.edges[i], h.edges[i + 1], centers[i], h.counts[i], h.smoothed[i])?;
        }
        Ok(())
    })?;
    let log_centers: Vec<f64> = centers.iter().map(|c| c.log10()).collect();
    let counts: Vec<f64> = h.counts.iter().map(|&c| c as f64).collect();
    let chart = Chart {
        title: "Episode durations",
        x_label: "log10 duration (s)",
        y_label: "episodes",
        mark: Mark::Line,
        log_y: false,
    };
    svg(
        out,
        "durations.svg",
        &chart,
        &[Series::new("count", log_centers.clone(), counts), Series::new("smoothed", log_centers, h.smoothed.clone())],
    )?;

    let scatter = |section: &[&Episode], label: &str| {
        let xs = section.iter().map(|e| tz.time_of_day(e.t_enter) as f64 / 3600.0).collect();
        let ys = section.iter().map(|e| e.duration() as f64).collect();
        Series::new(label, xs, ys)
    };
    let chart = Chart {
        title: "Duration against entry time",
        x_label: "entry hour (local)",
        y_label: "duration (s)",
        mark: Mark::Dots,
        log_y: true,
    };
    svg(
        out,
        "duration_vs_enter.svg",
        &chart,
        &[scatter(&sections.short, "short"), scatter(&sections.long, "long")],
    )?;

    let prehistory: Vec<f64> =
        episodes.iter().filter_map(|e| e.prehistory_s).filter(|&p| p > 0).map(|p| (p as f64).log10()).collect();
    if prehistory.len() >= 2 {
        match kde_1d(&prehistory, Bandwidth::Scott) {
            Ok(d) => {
                out.resolve("prehistory_bandwidth", d.bandwidth);
                out.write_with("prehistory_kde.csv", |w| Ok(d.write_csv(w)?))?;
                let chart = Chart {
                    title: "Prehistory density",
                    x_label: "log10 prehistory (s)",
                    y_label: "density",
                    mark: Mark::Line,
                    log_y: false,
                };
                svg(out, "prehistory_kde.svg", &chart, &[Series::new("density", d.xs, d.ys)])?;
            }
            Err(e) => warn(format!("prehistory density skipped: {e}")),
        }
    }

    let censored = episodes.iter().filter(|e| e.is_censored()).count();
    println!(
        "{} episodes ({} censored), {} short, {} long",
        episodes.len(),
        censored,
        sections.short.len(),
        sections.long.len()
    );
    if !sections.local_minima.is_empty() {
        let m: Vec<String> = sections.local_minima.iter().map(|d| format!("{d:.0}s")).collect();
        println!("duration histogram minima at {}", m.join(", "));
    }
    Ok(())
}

fn parse_time(s: &str) -> Result<Timestamp> {
    if let Ok(t) = s.trim().parse::<i64>() {
        return Ok(t);
    }
    chrono::DateTime::parse_from_rfc3339(s.trim())
        .map(|d| d.timestamp())
        .map_err(|e| usage(format!("cannot parse time {s:?}: {e}")))
}

fn write_curve(out: &mut Run, stem: &str, title: &str, curve: &DiversityCurve) -> Result<()> {
    out.write_with(&format!("{stem}.csv"), |w| Ok(curve.write_csv(w)?))?;
    let chart = Chart { title, x_label: "rank", y_label: "rank diversity", mark: Mark::Line, log_y: false };
    let series = Series::new("normalized", ranks_axis(curve.list_length()), curve.normalized.clone());
    svg(out, &format!("{stem}.svg"), &chart, &[series])
}

pub fn diversity(ctx: &Context_, args: &DiversityArgs, out: &mut Run) -> Result<()> {
    let stream = load_stream(ctx, &args.stream, out)?;
    let (first, last) = stream.time_span().expect("non-empty stream");
    let from = args.from.as_deref().map(parse_time).transpose()?.unwrap_or(first);
    let to = args.to.as_deref().map(parse_time).transpose()?.unwrap_or(last);
    if from > to {
        return Err(usage("--from is after --to"));
    }
    let curve = rank_diversity(&stream, (from, to))?;
    out.resolve("window", [stream.tz_offset.format(from), stream.tz_offset.format(to)]);
    write_curve(out, "diversity", "Rank diversity", &curve)?;
    println!("{} snapshots over {} ranks", curve.n_timestamps, curve.list_length());

    if args.day_night {
        let inside = SnapshotStream {
            snapshots: stream.snapshots.iter().filter(|s| s.t >= from && s.t <= to).cloned().collect(),
            ..stream.clone()
        };
        let split = day_night_curves(&inside);
        let l = stream.list_length as usize;
        let column = |c: &Option<DiversityCurve>| c.as_ref().map_or(vec![f64::NAN; l], |c| c.normalized.clone());
        let (day, night) = (column(&split.day), column(&split.night));
        out.write_with("diversity_day_night.csv", |w| {
            writeln!(w, "k,day,night")?;
            let cell = |v: f64| if v.is_nan() { String::new() } else { v.to_string() };
            for k in 0..l {
                writeln!(w, "{},{},{}", k + 1, cell(day[k]), cell(night[k]))?;
            }
            Ok(())
        })?;
        let chart = Chart {
            title: "Rank diversity by day and night",
            x_label: "rank",
            y_label: "rank diversity",
            mark: Mark::Line,
            log_y: false,
        };
        svg(
            out,
            "diversity_day_night.svg",
            &chart,
            &[Series::new("day", ranks_axis(l), day), Series::new("night", ranks_axis(l), night)],
        )?;
        for (part, c) in [("day", &split.day), ("night", &split.night)] {
            match c {
                Some(c) => println!("{part}: {} snapshots", c.n_timestamps),
                None => warn(format!("no {part} snapshots in the window")),
            }
        }
    }
    Ok(())
}

pub fn circadian(ctx: &Context_, args: &CircadianArgs, out: &mut Run) -> Result<()> {
    let stream = load_stream(ctx, &args.stream, out)?;
    if args.bin < stream.delta_t {
        return Err(usage(format!("--bin {} is shorter than the sampling interval {}", args.bin, stream.delta_t)));
    }
    let episodes = load_episodes(&stream, &args.episodes, out)?;
    let kinds: &[(SeriesKind, &str, &str)] = match args.kind {
        KindArg::Increments => &[(SeriesKind::NewItemIncrements, "increments", "new items")],
        KindArg::Hotness => &[(SeriesKind::MedianHotness, "hotness", "median hotness")],
        KindArg::Both => &[
            (SeriesKind::NewItemIncrements, "increments", "new items"),
            (SeriesKind::MedianHotness, "hotness", "median hotness"),
        ],
    };
    for &(kind, stem, y_label) in kinds {
        let series = circadian_series(&stream, &episodes, kind, args.bin)?;
        write_binned(out, &format!("circadian_{stem}"), y_label, &series, stream.tz_offset)?;
    }
    Ok(())
}

fn write_binned(
    out: &mut Run,
    stem: &str,
    y_label: &str,
    series: &BinnedSeries,
    tz: rankdyn::snapshots::TzOffset,
) -> Result<()> {
    out.write_with(&format!("{stem}.csv"), |w| Ok(series.write_csv(tz, w)?))?;
    let start = series.bin_edges.first().copied().unwrap_or(0);
    let xs = series.bin_edges[..series.values.len()].iter().map(|&e| (e - start) as f64 / 3600.0).collect();
    let chart = Chart { title: y_label, x_label: "hours since first bin", y_label, mark: Mark::Line, log_y: false };
    svg(out, &format!("{stem}.svg"), &chart, &[Series::new(y_label, xs, series.values.clone())])
}

pub fn cluster(ctx: &Context_, args: &ClusterArgs, out: &mut Run) -> Result<()> {
    if args.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    if args.m == 1 {
        return Err(usage("--m must be 0 or at least 2"));
    }
    if args.restarts == 0 {
        return Err(usage("--restarts must be at least 1"));
    }
    let stream = load_stream(ctx, &args.stream, out)?;
    let episodes = load_episodes(&stream, &args.episodes, out)?;
    let opts = section_options(args.boundary, args.include_censored)?;
    let used: Vec<usize> =
        (0..episodes.len()).filter(|&i| opts.include_censored || !episodes[i].is_censored()).collect();
    let (short, long): (Vec<usize>, Vec<usize>) =
        used.into_iter().partition(|&i| episodes[i].duration() < opts.boundary_s);
    let groups: Vec<(&str, Vec<usize>)> = match args.section {
        SectionArg::Short => vec![("short", short)],
        SectionArg::Long => vec![("long", long)],
        SectionArg::All => vec![("short", short), ("long", long)],
    };
    let m = (args.m > 0).then_some(args.m);

    let mut assigned: Vec<Option<usize>> = vec![None; episodes.len()];
    let mut results: Vec<(&str, Vec<usize>, Clustering, usize)> = Vec::new();
    let mut offset = 0;
    for (name, members) in groups {
        if members.len() < args.k {
            warn(format!("{name} section has {} episodes, fewer than k = {}; skipped", members.len(), args.k));
            continue;
        }
        let set = members
            .iter()
            .map(|&i| {
                let ranks: Vec<f64> = episodes[i].ranks().map(f64::from).collect();
                normalize_trajectory(&ranks, m, i)
            })
            .collect::<rankdyn::Result<Vec<_>>>()?;
        let mut km = KMeansOptions::new(args.k, rankdyn::seed::derive(ctx.seed, name, 0));
        km.restarts = args.restarts;
        km.max_iter = args.max_iter;
        km.band = args.band;
        let c = kmeans_dtw(&set, &km).with_context(|| format!("clustering the {name} section"))?;
        for (&i, &a) in members.iter().zip(&c.assignments) {
            assigned[i] = Some(offset + a);
        }
        println!(
            "{name}: {} episodes, cluster sizes {:?}, inertia {:.4}, {} iterations",
            members.len(),
            c.sizes(),
            c.inertia,
            c.iterations
        );
        out.resolve(&format!("{name}_seed"), c.seed);
        out.resolve(&format!("{name}_restart"), c.restart);
        out.resolve(&format!("{name}_inertia_history"), &c.history);
        results.push((name, members, c, offset));
        offset += args.k;
    }
    if results.is_empty() {
        bail!("no section had enough episodes to cluster");
    }

    out.write_with("clusters.csv", |w| {
        writeln!(w, "episode_id,section,cluster")?;
        for (name, members, c, off) in &results {
            for (&i, &a) in members.iter().zip(&c.assignments) {
                writeln!(w, "{i},{name},{}", off + a)?;
            }
        }
        Ok(())
    })?;
    out.write_with("centroids.csv", |w| {
        writeln!(w, "cluster,index,value")?;
        for (_, _, c, off) in &results {
            for (j, values) in c.centroids.iter().enumerate() {
                for (t, v) in values.iter().enumerate() {
                    writeln!(w, "{},{t},{v}", off + j)?;
                }
            }
        }
        Ok(())
    })?;
    let tz = stream.tz_offset;
    let table = episode_table(&episodes, tz, Some(&assigned));
    out.write_with("episode_table.csv", |w| Ok(write_episode_table(&table, tz, w)?))?;

    for (name, members, c, off) in &results {
        for (j, centroid) in c.centroids.iter().enumerate() {
            let axis = |n: usize| -> Vec<f64> {
                (0..n).map(|t| if n > 1 { t as f64 / (n - 1) as f64 } else { 0.0 }).collect()
            };
            let mut series: Vec<Series> = members
                .iter()
                .zip(&c.assignments)
                .filter(|(_, &a)| a == j)
                .map(|(&i, _)| {
                    let ranks: Vec<f64> = episodes[i].ranks().map(f64::from).collect();
                    let values = normalize_trajectory(&ranks, m, i).map(|t| t.values).unwrap_or_default();
                    Series::new(format!("episode {i}"), axis(values.len()), values).faint()
                })
                .collect();
            series.push(Series::new("centroid", axis(centroid.len()), centroid.clone()));
            let title = format!("{name} section, cluster {}", off + j);
            let chart = Chart {
                title: &title,
                x_label: "normalized time",
                y_label: "z-scored rank",
                mark: Mark::Line,
                log_y: false,
            };
            svg(out, &format!("cluster_{}.svg", off + j), &chart, &series)?;
        }
    }
    Ok(())
}

pub fn dwell(ctx: &Context_, args: &DwellArgs, out: &mut Run) -> Result<()> {
    if args.min_dwell <= 0 {
        return Err(usage("--min-dwell must be positive"));
    }
    let stream = load_stream(ctx, &args.stream, out)?;
    let episodes = load_episodes(&stream, &args.episodes, out)?;
    let rows = long_dwell_report(&episodes, args.min_dwell, stream.delta_t);
    out.write_with("long_dwell.csv", |w| Ok(write_long_dwell_csv(&rows, stream.tz_offset, w)?))?;
    println!("{} long dwells of at least {}s", rows.len(), args.min_dwell);
    let mut dwell_s: Vec<f64> = rows.iter().map(|r| r.dwell_s as f64).collect();
    if let Some(m) = median(&mut dwell_s) {
        println!("median long dwell {m}s");
    }
    Ok(())
}

pub fn categories(ctx: &Context_, args: &CategoriesArgs, out: &mut Run) -> Result<()> {
    if args.episodes.labels.is_none() {
        return Err(usage("categories needs --labels"));
    }
    if args.min_dwell <= 0 {
        return Err(usage("--min-dwell must be positive"));
    }
    let stream = load_stream(ctx, &args.stream, out)?;
    let episodes = load_episodes(&stream, &args.episodes, out)?;
    let report = category_proportions(&episodes, &args.ranks, args.min_dwell, &args.baseline, stream.delta_t)
        .map_err(|e| usage(e.to_string()))?;
    let baseline_qualifying: usize = report.baseline_ranks.iter().map(|r| r.qualifying).sum();
    out.write_with("categories.csv", |w| {
        writeln!(w, "rank,category,share,qualifying")?;
        for r in report.ranks.iter().chain(&report.baseline_ranks) {
            for (c, s) in &r.shares {
                writeln!(w, "{},{},{s},{}", r.rank, csv_field(c), r.qualifying)?;
            }
        }
        for (c, s) in &report.baseline {
            writeln!(w, "baseline,{},{s},{baseline_qualifying}", csv_field(c))?;
        }
        Ok(())
    })?;
    for r in &report.ranks {
        if r.is_empty() {
            warn(format!("no labeled episode dwelt {}s at rank {}", args.min_dwell, r.rank));
        }
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}
