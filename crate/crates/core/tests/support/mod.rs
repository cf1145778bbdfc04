//! Fixtures and brute-force oracles shared by the integration and
//! acceptance tests.
#![allow(dead_code)]

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankdyn::snapshots::{RankedSnapshot, SnapshotStream, TzOffset};

/// Minimal squared-cost warping over every monotone path, by recursion.
pub fn brute_dtw_sq(a: &[f64], b: &[f64]) -> f64 {
    fn walk(a: &[f64], b: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (a[i] - b[j]).powi(2);
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

/// Distinct names per rank, counted with one set per rank.
pub fn brute_diversity(snapshots: &[RankedSnapshot], list_length: usize) -> Vec<u32> {
    let mut sets: Vec<HashSet<&str>> = vec![HashSet::new(); list_length];
    for s in snapshots {
        for e in &s.entries {
            if (1..=list_length).contains(&(e.rank as usize)) {
                sets[e.rank as usize - 1].insert(&e.name);
            }
        }
    }
    sets.iter().map(|s| s.len() as u32).collect()
}

/// Up to `max_names` names shuffled into up to `max_snapshots` lists.
pub fn random_stream(rng: &mut ChaCha8Rng, max_names: usize, max_snapshots: usize) -> SnapshotStream {
    let names: Vec<String> = (0..rng.gen_range(1..=max_names)).map(|i| format!("n{i}")).collect();
    let l = rng.gen_range(1..=names.len());
    let mut s = SnapshotStream::new(300, l as u32, TzOffset::UTC);
    for i in 0..rng.gen_range(1..=max_snapshots) {
        let mut pool = names.clone();
        pool.shuffle(rng);
        pool.truncate(rng.gen_range(0..=l));
        s.snapshots.push(RankedSnapshot::from_names(300 * i as i64, &pool));
    }
    s
}

pub fn ranks_of(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman correlation of `v` with its index.
pub fn spearman_with_index(v: &[f64]) -> f64 {
    let x = ranks_of(v);
    let y: Vec<f64> = (0..v.len()).map(|i| i as f64).collect();
    let n = v.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = y.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    cov / (sx * sy)
}

const ENTRY_RANK: f64 = 46.0;

fn noisy(rng: &mut ChaCha8Rng, rank: f64, spread: f64) -> f64 {
    (rank + spread * (rng.gen::<f64>() - 0.5)).round().clamp(1.0, 48.0)
}

/// Rank trajectories in three shapes: a fast rise and fall, a rise to a
/// long plateau followed by a fall, and a rise to a fluctuating plateau that
/// lasts until the item leaves. Returns `(trajectories, family labels)`.
pub fn trajectory_families(seed: u64, per_family: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut labels = Vec::new();
    for family in 0..3 {
        for _ in 0..per_family {
            let len = rng.gen_range(24..90);
            let top = rng.gen_range(1.0..12.0);
            let peak = rng.gen_range(0.3..0.5);
            let (rise, fall) = (rng.gen_range(0.12..0.22), rng.gen_range(0.72..0.85));
            let wobble_phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let series: Vec<f64> = (0..len)
                .map(|i| {
                    let x = i as f64 / (len - 1) as f64;
                    let rank = match family {
                        0 => {
                            let up = if x < peak { x / peak } else { (1.0 - x) / (1.0 - peak) };
                            ENTRY_RANK - (ENTRY_RANK - top) * up
                        }
                        1 => {
                            let up = if x < rise {
                                x / rise
                            } else if x < fall {
                                1.0
                            } else {
                                (1.0 - x) / (1.0 - fall)
                            };
                            ENTRY_RANK - (ENTRY_RANK - top) * up
                        }
                        _ => {
                            let up = (x / rise).min(1.0);
                            let wobble = 4.0 * (8.0 * x * std::f64::consts::PI + wobble_phase).sin();
                            ENTRY_RANK - (ENTRY_RANK - top - 6.0) * up + if x >= rise { wobble } else { 0.0 }
                        }
                    };
                    noisy(&mut rng, rank, 2.0)
                })
                .collect();
            out.push(series);
            labels.push(family);
        }
    }
    (out, labels)
}

/// Smooth increasing curve over `l` ranks with multiplicative dips.
pub fn dipped_curve(l: usize, dips: &[usize], depth: f64) -> Vec<f64> {
    (1..=l)
        .map(|k| {
            let base = 0.3 + 0.5 * (k as f64 / l as f64).sqrt();
            if dips.contains(&k) {
                base * (1.0 - depth)
            } else {
                base
            }
        })
        .collect()
}

pub const HOUR: i64 = 3600;
// 2020-07-17T00:00:00+08:00
pub const DAY0: i64 = 1_594_915_200;

/// Hourly snapshots over three days with snapshots 30..=35 missing.
///
/// a: 0..=4 and again 10..=14     (left-censored first stay, re-entry)
/// b: 20..=29                     (ends just before the gap)
/// c: 36..=40                     (starts just after the gap)
/// d: 60..=71                     (runs to the end)
/// e: 45..=47 and 49..=50         (one-snapshot absence)
/// f: 0..=71 except the gap       (always present)
pub fn three_day_fixture() -> SnapshotStream {
    let present = |name: &str, i: usize| match name {
        "a" => i <= 4 || (10..=14).contains(&i),
        "b" => (20..=29).contains(&i),
        "c" => (36..=40).contains(&i),
        "d" => i >= 60,
        "e" => (45..=47).contains(&i) || (49..=50).contains(&i),
        "f" => true,
        _ => unreachable!(),
    };
    let mut s = SnapshotStream::new(HOUR, 6, TzOffset::from_hours(8));
    for i in (0..72).filter(|i| !(30..=35).contains(i)) {
        let names: Vec<&str> = ["a", "b", "c", "d", "e", "f"].into_iter().filter(|n| present(n, i)).collect();
        s.snapshots.push(RankedSnapshot::from_names(DAY0 + i as i64 * HOUR, &names));
    }
    s
}

pub fn at(i: i64) -> i64 {
    DAY0 + i * HOUR
}

/// `(name, t_enter, t_leave, censored_left, censored_right)`, sorted.
pub type Expected = (&'static str, i64, i64, bool, bool);

/// Hand-enumerated episodes of [`three_day_fixture`] with no gap tolerance.
pub fn three_day_expected() -> Vec<Expected> {
    vec![
        ("a", at(0), at(5), true, false),
        ("a", at(10), at(15), false, false),
        ("b", at(20), at(30), false, true),
        ("c", at(36), at(41), true, false),
        ("d", at(60), at(72), false, true),
        ("e", at(45), at(48), false, false),
        ("e", at(49), at(51), false, false),
        ("f", at(0), at(30), true, true),
        ("f", at(36), at(72), true, true),
    ]
}
