use std::path::Path;
use std::process::{Command, Output};

use chrono::{FixedOffset, TimeZone};

const BIN: &str = env!("CARGO_BIN_EXE_rankdyn");
// 2020-07-17T00:00:00+08:00
const DAY0: i64 = 1_594_915_200;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn rankdyn")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn iso(t: i64) -> String {
    FixedOffset::east_opt(8 * 3600).unwrap().timestamp_opt(t, 0).unwrap().to_rfc3339()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn csv_column(text: &str, col: usize) -> Vec<String> {
    text.lines().skip(1).map(|l| l.split(',').nth(col).unwrap_or("").to_owned()).collect()
}

/// Raw export at 5-minute spacing with an ad at rank 2 and a 12-snapshot outage.
fn raw_export(dir: &Path) -> std::path::PathBuf {
    let mut s = String::from("timestamp,rank,name,hotness,label\n");
    for i in 0..40i64 {
        if (20..32).contains(&i) {
            continue;
        }
        let t = DAY0 + 36_000 + 300 * i;
        let names = [format!("n{}", i / 4), "promo".to_owned(), format!("m{}", i / 8), "x".to_owned(), format!("y{}", i % 3)];
        for (r, name) in names.iter().enumerate() {
            let label = if r == 1 { "荐" } else { "" };
            s += &format!("{},{},{},{},{}\n", iso(t), r + 1, name, 1000 - 10 * r as i64, label);
        }
    }
    s += "not-a-time,1,broken,,\n";
    let path = dir.join("raw.csv");
    std::fs::write(&path, s).unwrap();
    path
}

#[test]
fn ingest_drops_ads_and_reports_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let raw = raw_export(dir.path());
    let out = dir.path().join("out");
    let stdout = ok(&["ingest", "--input", raw.to_str().unwrap(), "--l", "4", "--out", out.to_str().unwrap()]);
    assert!(stdout.contains("28 ads removed"), "{stdout}");

    let stream = read(&out.join("stream.csv"));
    assert!(!stream.contains("promo"));
    let ranks = csv_column(&stream, 1);
    assert_eq!(ranks.len(), 28 * 4);
    for chunk in ranks.chunks(4) {
        assert_eq!(chunk, ["1", "2", "3", "4"]);
    }
    let report: serde_json::Value = serde_json::from_str(&read(&out.join("ingest_report.json"))).unwrap();
    assert_eq!(report["ads_removed"], 28);
    assert_eq!(report["snapshots"], 28);
    assert_eq!(report["truncated_entries"], 0);
    assert_eq!(report["malformed_rows"].as_array().unwrap().len(), 1);
    let gaps = report["gaps"].as_array().unwrap();
    assert_eq!(gaps.len(), 1);
    assert_eq!(gaps[0]["missing_count"], 12);

    let manifest: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "ingest");
    assert!(manifest["inputs"].as_object().unwrap().values().all(|d| d.as_str().unwrap().len() == 64));
    assert!(manifest["outputs"].as_array().unwrap().iter().any(|o| o == "stream.csv"));
}

#[test]
fn ingest_reads_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    for i in 0..3i64 {
        for (r, name) in ["a", "ad", "b"].iter().enumerate() {
            let label = if *name == "ad" { "\"荐\"" } else { "null" };
            text += &format!(
                "{{\"timestamp\":\"{}\",\"rank\":{},\"name\":\"{name}\",\"hotness\":null,\"label\":{label}}}\n",
                iso(DAY0 + 300 * i),
                r + 1
            );
        }
    }
    let input = dir.path().join("raw.jsonl");
    std::fs::write(&input, text).unwrap();
    let out = dir.path().join("out");
    ok(&["ingest", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let stream = read(&out.join("stream.csv"));
    assert_eq!(csv_column(&stream, 2), ["a", "b", "a", "b", "a", "b"]);
}

/// Hourly stream over two local days: ranks rotate by day and freeze at night.
fn day_night_stream(dir: &Path) -> std::path::PathBuf {
    let mut s = String::from("timestamp,rank,name,hotness,label\n");
    for h in 0..48i64 {
        let hour = h % 24;
        for r in 1..=6 {
            let name = if hour >= 7 { format!("d{h}_{r}") } else { format!("night_{r}") };
            s += &format!("{},{r},{name},,\n", iso(DAY0 + 3600 * h));
        }
    }
    let path = dir.join("stream.csv");
    std::fs::write(&path, s).unwrap();
    path
}

#[test]
fn diversity_splits_day_and_night() {
    let dir = tempfile::tempdir().unwrap();
    let input = day_night_stream(dir.path());
    let out = dir.path().join("out");
    ok(&["diversity", "--input", input.to_str().unwrap(), "--day-night", "--out", out.to_str().unwrap()]);
    let text = read(&out.join("diversity_day_night.csv"));
    assert_eq!(text.lines().next(), Some("k,day,night"));
    for line in text.lines().skip(1) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells[1], 1.0);
        assert!((cells[2] - 1.0 / 14.0).abs() < 1e-12);
    }
    let manifest: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["resolved"]["delta_t"], 3600);
    assert_eq!(manifest["resolved"]["list_length"], 6);
    assert_eq!(manifest["resolved"]["tz"], "+08:00");
}

#[test]
fn diversity_window_restricts_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let input = day_night_stream(dir.path());
    let out = dir.path().join("out");
    let from = (DAY0 + 8 * 3600).to_string();
    let to = iso(DAY0 + 9 * 3600);
    ok(&["diversity", "--input", input.to_str().unwrap(), "--from", &from, "--to", &to, "--out", out.to_str().unwrap()]);
    let text = read(&out.join("diversity.csv"));
    assert!(csv_column(&text, 1).iter().all(|c| c == "2"));
    let bad = run(&["diversity", "--input", input.to_str().unwrap(), "--from", &to, "--to", &from, "--out", out.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn svg_series_carry_csv_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    ok(&["simulate", "--n", "60", "--l", "12", "--runs", "3", "--anchor", "6:5", "--out", out.to_str().unwrap()]);
    let svg = read(&out.join("diversity_sim.svg"));
    let doc = roxmltree::Document::parse(&svg).expect("well-formed svg");
    let series: Vec<_> = doc.descendants().filter(|n| n.attribute("class") == Some("series")).collect();
    assert_eq!(series.len(), 1);
    let values: Vec<&str> = series[0].attribute("data-values").unwrap().split(' ').collect();
    let csv = read(&out.join("diversity_sim.csv"));
    assert_eq!(values, csv_column(&csv, 1));

    let input = day_night_stream(dir.path());
    let out2 = dir.path().join("out2");
    ok(&["diversity", "--input", input.to_str().unwrap(), "--day-night", "--out", out2.to_str().unwrap()]);
    let svg = read(&out2.join("diversity_day_night.svg"));
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let csv = read(&out2.join("diversity_day_night.csv"));
    for (node, col) in doc.descendants().filter(|n| n.attribute("class") == Some("series")).zip([1, 2]) {
        let values: Vec<f64> = node.attribute("data-values").unwrap().split(' ').map(|v| v.parse().unwrap()).collect();
        let expected: Vec<f64> = csv_column(&csv, col).iter().map(|v| v.parse().unwrap()).collect();
        assert_eq!(values, expected);
    }
}

#[test]
fn simulate_without_steps_writes_an_empty_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = run(&["simulate", "--runs", "1", "--steps", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(read(&out.join("diversity_sim.csv")), "k,mean,stderr\n");
}

#[test]
fn invalid_flags_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    for args in [
        &["simulate", "--anchor", "60:5", "--out", out][..],
        &["simulate", "--anchor", "1:5", "--out", out],
        &["simulate", "--anchor", "8", "--out", out],
        &["simulate", "--anchor", "8:5,9:5", "--out", out],
        &["simulate", "--threshold", "1.5", "--out", out],
        &["simulate", "--no-such-flag"],
        &["cluster", "--input", "missing.csv", "--k", "0", "--out", out],
    ] {
        let output = run(args);
        assert_eq!(output.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&output.stderr));
    }
    let missing = run(&["diversity", "--input", "/nonexistent/stream.csv", "--out", out]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn command_line_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.cfg");
    std::fs::write(&cfg, "# simulation\nn = 80\nl = 10\nruns = 2\nseed = 5\nno_stream = true\n").unwrap();
    let out = dir.path().join("out");
    ok(&["simulate", "--config", cfg.to_str().unwrap(), "--l", "12", "--out", out.to_str().unwrap()]);
    let manifest: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    let params = &manifest["parameters"]["command"]["Simulate"];
    assert_eq!(params["n"], 80);
    assert_eq!(params["l"], 12);
    assert_eq!(params["runs"], 2);
    assert_eq!(manifest["seed"], 5);
    assert!(!out.join("stream.csv").exists());
    assert_eq!(read(&out.join("diversity_sim.csv")).lines().count(), 13);

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    let output = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let dirs = [dir.path().join("a"), dir.path().join("b")];
    for d in &dirs {
        ok(&["simulate", "--n", "80", "--l", "16", "--runs", "2", "--seed", "11", "--out", d.to_str().unwrap()]);
        let stream = d.join("stream.csv");
        let c = d.join("cluster");
        ok(&["cluster", "--input", stream.to_str().unwrap(), "--k", "2", "--restarts", "2", "--seed", "11", "--out", c.to_str().unwrap()]);
    }
    for name in ["diversity_sim.csv", "stream.csv", "cluster/clusters.csv", "cluster/centroids.csv"] {
        assert_eq!(read(&dirs[0].join(name)), read(&dirs[1].join(name)), "{name}");
    }
}

#[test]
fn analysis_commands_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(&["simulate", "--n", "80", "--l", "16", "--anchor", "8:5", "--out", sim.to_str().unwrap()]);
    let stream = sim.join("stream.csv");
    let s = stream.to_str().unwrap();
    let cases: [(&str, &[&str]); 4] = [
        ("episodes", &["episodes.csv", "episode_table.csv", "enter_leave.csv", "durations.csv", "duration_vs_enter.svg"]),
        ("circadian", &["circadian_increments.csv", "circadian_hotness.csv"]),
        ("dwell", &["long_dwell.csv"]),
        ("detect", &["flags.csv"]),
    ];
    for (cmd, files) in cases {
        let out = dir.path().join(cmd);
        ok(&[cmd, "--input", s, "--out", out.to_str().unwrap()]);
        for f in files {
            assert!(out.join(f).exists(), "{cmd} did not write {f}");
        }
    }
    let flags = read(&dir.path().join("detect/flags.csv"));
    assert_eq!(csv_column(&flags, 0), ["8"]);

    let detect_curve = dir.path().join("detect_curve");
    let curve = sim.join("diversity_sim.csv");
    ok(&["detect", "--input", curve.to_str().unwrap(), "--out", detect_curve.to_str().unwrap()]);
    assert!(detect_curve.join("flags.csv").exists());
}

#[test]
fn categories_use_labels() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = String::from("timestamp,rank,name,hotness,label\n");
    for i in 0..40i64 {
        let t = DAY0 + 36_000 + 300 * i;
        let rotating = format!("r{}", i);
        for (r, name) in ["top", rotating.as_str(), "third"].iter().enumerate() {
            s += &format!("{},{},{name},,\n", iso(t), r + 1);
        }
    }
    let input = dir.path().join("stream.csv");
    std::fs::write(&input, s).unwrap();
    let labels = dir.path().join("labels.csv");
    std::fs::write(&labels, "name,category,prehistory_s\ntop,news,600\nthird,\"sport, misc\",1200\n").unwrap();
    let out = dir.path().join("out");
    ok(&[
        "categories", "--input", input.to_str().unwrap(), "--labels", labels.to_str().unwrap(), "--ranks", "1,3",
        "--baseline", "2", "--min-dwell", "3600", "--out", out.to_str().unwrap(),
    ]);
    let text = read(&out.join("categories.csv"));
    assert!(text.contains("1,news,1,1\n"), "{text}");
    assert!(text.contains("3,\"sport, misc\",1,1\n"), "{text}");
    let no_labels = run(&["categories", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(no_labels.status.code(), Some(2));
}

#[test]
fn ingest_reports_a_missing_week_as_one_gap() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = String::from("timestamp,rank,name,hotness,label\n");
    let hours: Vec<i64> = (0..48).chain(48 + 7 * 24..96 + 7 * 24).collect();
    for h in &hours {
        for r in 1..=3 {
            s += &format!("{},{r},item{}_{r},{},\n", iso(DAY0 + 3600 * h), h / 6, 100 * r);
        }
    }
    let input = dir.path().join("raw.csv");
    std::fs::write(&input, s).unwrap();
    let out = dir.path().join("out");
    let output = run(&["ingest", "--input", input.to_str().unwrap(), "--delta-t", "3600", "--out", out.to_str().unwrap()]);
    assert!(output.status.success());
    assert!(output.stderr.is_empty(), "{}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(&out.join("ingest_report.json"))).unwrap();
    let gaps = report["gaps"].as_array().unwrap();
    assert_eq!(gaps.len(), 1);
    assert_eq!(gaps[0]["missing_count"], 7 * 24);
    assert_eq!(report["malformed_rows"].as_array().unwrap().len(), 0);
}

#[test]
fn long_section_clustering_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(&["simulate", "--n", "100", "--l", "20", "--out", sim.to_str().unwrap()]);
    let stream = sim.join("stream.csv");
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        ok(&["cluster", "--input", stream.to_str().unwrap(), "--section", "2", "--k", "3", "--seed", "7", "--out", out.to_str().unwrap()]);
        let text = read(&out.join("clusters.csv"));
        assert!(text.lines().skip(1).all(|l| l.split(',').nth(1) == Some("long")));
        assert!(out.join("cluster_2.svg").exists());
        outputs.push(text);
    }
    assert_eq!(outputs[0], outputs[1]);
}
