use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct transcription of the single-anchor rules with full range sorts.
struct Mirror {
    scores: Vec<f64>,
    order: Vec<u32>,
    anchor: Option<Anchor>,
}

impl Mirror {
    fn new(scores: &[f64], anchor: Option<Anchor>) -> Self {
        let mut m = Mirror { scores: scores.to_vec(), order: (0..scores.len() as u32).collect(), anchor };
        let n = m.order.len();
        m.sort(0, n);
        m
    }

    fn sort(&mut self, lo: usize, hi: usize) {
        let s = &self.scores;
        self.order[lo..hi].sort_by(|&a, &b| s[b as usize].total_cmp(&s[a as usize]).then(a.cmp(&b)));
    }

    fn bump(&mut self, j: u32) {
        self.scores[j as usize] += 1.0;
        let n = self.order.len();
        let r = self.order.iter().position(|&e| e == j).unwrap();
        let Some(Anchor { rank, delta }) = self.anchor else {
            self.sort(0, n);
            return;
        };
        let a = rank - 1;
        if r < a {
            self.sort(0, a);
        } else if r == a {
            let k = self.order[a - 1];
            if self.scores[j as usize] > self.scores[k as usize] + delta {
                self.sort(0, a + 1);
            }
        } else {
            let l = self.order[a];
            self.sort(a + 1, n);
            if self.order[a + 1] == j && self.scores[j as usize] > self.scores[l as usize] + delta {
                self.sort(0, a + 2);
            }
        }
    }
}

fn random_scores(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

#[test]
fn single_element_system() {
    let sys = RankSystem::new(1, vec![], 3).unwrap();
    assert_eq!(sys.ranking(), &[0]);
    assert_eq!(sys.rank_of(0), 1);
}

#[test]
fn init_is_seeded_and_sorted() {
    let a = RankSystem::new(500, vec![], 11).unwrap();
    let b = RankSystem::new(500, vec![], 11).unwrap();
    assert_eq!(a.scores(), b.scores());
    assert_eq!(a.ranking(), b.ranking());
    assert!(a.ranking().windows(2).all(|w| a.score(w[0]) >= a.score(w[1])));
    assert!(a.scores().iter().all(|&s| s > 0.0 && s < 1.0));
    a.check_invariants().unwrap();
}

#[test]
fn null_bump_swaps_two() {
    let mut sys = RankSystem::from_scores(vec![0.2, 0.9], vec![]).unwrap();
    assert_eq!(sys.ranking(), &[1, 0]);
    sys.bump_null(0);
    assert_eq!(sys.scores(), &[1.2, 0.9]);
    assert_eq!(sys.ranking(), &[0, 1]);
    sys.bump_null(0);
    assert_eq!(sys.ranking(), &[0, 1]);
}

#[test]
fn null_step_refused_with_anchor() {
    let mut sys = RankSystem::new(10, vec![Anchor::new(3, 1.0)], 1).unwrap();
    assert!(sys.step_null().is_err());
}

#[test]
fn null_ranking_is_always_sorted() {
    let mut sys = RankSystem::new(500, vec![], 5).unwrap();
    for _ in 0..10_000 {
        sys.step_null().unwrap();
        let mut sorted = sys.ranking().to_vec();
        sorted.sort_by(|&a, &b| sys.score(b).total_cmp(&sys.score(a)).then(a.cmp(&b)));
        assert_eq!(sys.ranking(), &sorted[..]);
    }
}

#[test]
fn blocked_below_anchor() {
    let scores = [5.0, 4.0, 3.0, 2.5, 2.0];
    let mut sys = RankSystem::from_scores(scores.to_vec(), vec![Anchor::new(3, 10.0)]).unwrap();
    assert_eq!(sys.bump_anchored(4), StepCase::Blocked);
    assert_eq!(sys.ranking(), &[0, 1, 2, 4, 3]);
    assert_eq!(sys.score(4), 3.0);
}

#[test]
fn barrier_pass_depends_on_delta() {
    let scores = vec![5.0, 4.0, 3.0, 2.55, 2.5];
    let mut sys = RankSystem::from_scores(scores.clone(), vec![Anchor::new(3, 0.4)]).unwrap();
    // 3.5 > 3.0 + 0.4: the occupant of rank 3 falls to rank 4
    assert_eq!(sys.bump_anchored(4), StepCase::Admitted);
    assert_eq!(sys.ranking(), &[0, 1, 4, 2, 3]);

    let mut sys = RankSystem::from_scores(scores, vec![Anchor::new(3, 0.6)]).unwrap();
    assert_eq!(sys.bump_anchored(4), StepCase::Blocked);
    assert_eq!(sys.ranking(), &[0, 1, 2, 4, 3]);
}

#[test]
fn above_anchor_leaves_occupant() {
    let mut sys = RankSystem::from_scores(vec![5.0, 4.5, 3.0, 2.5, 2.0], vec![Anchor::new(3, 0.1)]).unwrap();
    assert_eq!(sys.bump_anchored(0), StepCase::Within);
    assert_eq!(sys.ranking(), &[0, 1, 2, 3, 4]);
    sys.bump_anchored(1);
    assert_eq!(sys.ranking(), &[0, 1, 2, 3, 4]);
    assert_eq!(sys.bump_anchored(1), StepCase::Within);
    assert_eq!(sys.ranking(), &[1, 0, 2, 3, 4]);
}

#[test]
fn occupant_needs_to_clear_barrier() {
    let mut sys = RankSystem::from_scores(vec![5.0, 3.5, 3.0, 1.0], vec![Anchor::new(3, 1.0)]).unwrap();
    // 4.0 is not above 3.5 + 1
    assert_eq!(sys.bump_anchored(2), StepCase::OccupantHeld);
    assert_eq!(sys.ranking(), &[0, 1, 2, 3]);
    assert_eq!(sys.bump_anchored(2), StepCase::OccupantPassed);
    assert_eq!(sys.ranking(), &[0, 2, 1, 3]);
}

#[test]
fn matches_full_sort_mirror() {
    for (case, &(n, rank, delta)) in [(30, 5, 0.5), (30, 16, 2.0), (60, 2, 1.0), (12, 12, 0.0), (40, 20, 5.0)]
        .iter()
        .enumerate()
    {
        let scores = random_scores(n, case as u64);
        let anchor = Anchor::new(rank, delta);
        let mut sys = RankSystem::from_scores(scores.clone(), vec![anchor]).unwrap();
        let mut mirror = Mirror::new(&scores, Some(anchor));
        let mut rng = ChaCha8Rng::seed_from_u64(100 + case as u64);
        for step in 0..20_000 {
            let j = rng.gen_range(0..n as u32);
            sys.bump_anchored(j);
            mirror.bump(j);
            assert_eq!(sys.ranking(), &mirror.order[..], "case {case} step {step}");
            sys.check_invariants().unwrap();
        }
    }
}

#[test]
fn unbounded_barrier_equals_null_model() {
    let scores = random_scores(200, 9);
    let mut null = RankSystem::from_scores(scores.clone(), vec![]).unwrap();
    let mut anchored = RankSystem::from_scores(scores, vec![Anchor::new(16, f64::NEG_INFINITY)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50_000 {
        let j = rng.gen_range(0..200);
        null.bump_null(j);
        anchored.bump_anchored(j);
        assert_eq!(null.ranking(), anchored.ranking());
    }
}

#[test]
fn several_anchors_keep_segments_sorted() {
    let anchors = vec![Anchor::new(8, 3.0), Anchor::new(16, 3.0), Anchor::new(28, 3.0), Anchor::new(33, 3.0)];
    let mut sys = RankSystem::new(100, anchors, 2).unwrap();
    for _ in 0..50_000 {
        sys.step();
        sys.check_invariants().unwrap();
    }
    assert!(RankSystem::new(100, vec![Anchor::new(8, 1.0), Anchor::new(9, 1.0)], 0).is_err());
}

#[test]
fn several_unbounded_anchors_equal_null_model() {
    let scores = random_scores(80, 1);
    let anchors: Vec<Anchor> = [5, 9, 20, 40].iter().map(|&r| Anchor::new(r, f64::NEG_INFINITY)).collect();
    let mut null = RankSystem::from_scores(scores.clone(), vec![]).unwrap();
    let mut anchored = RankSystem::from_scores(scores, anchors).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20_000 {
        let j = rng.gen_range(0..80);
        null.bump_null(j);
        anchored.bump_anchored(j);
        assert_eq!(null.ranking(), anchored.ranking());
    }
}

#[test]
fn simulation_is_deterministic_and_sized() {
    let mut config = SimConfig::new(60, 10);
    config.steps = 600;
    config.seed = 5;
    let a = run_simulation(&config).unwrap();
    let b = run_simulation(&config).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 100);
    assert!(a.snapshots.iter().all(|s| s.len() == 10));
    a.validate().unwrap();
    assert_eq!(a.snapshots[1].t - a.snapshots[0].t, config.delta_t);

    config.steps = 0;
    assert!(run_simulation(&config).unwrap().is_empty());
}

#[test]
fn fast_diversity_matches_stream_route() {
    let mut config = SimConfig::new(80, 20).with_anchor(6, 2.0);
    config.steps = 4000;
    config.seed = 12;
    let stream = run_simulation(&config).unwrap();
    let slow = crate::metrics::rank_diversity(&stream, (i64::MIN, i64::MAX)).unwrap();
    assert_eq!(run_diversity(&config).unwrap(), slow.normalized);
}

#[test]
fn repeated_seed_has_zero_stderr() {
    let mut config = SimConfig::new(50, 10);
    config.steps = 1000;
    let avg = averaged_diversity_seeds(&config, &[3, 3]).unwrap();
    assert!(avg.stderr.iter().all(|&s| s == 0.0));
    config.runs = 3;
    let a = averaged_diversity(&config).unwrap();
    assert_eq!(a, averaged_diversity(&config).unwrap());
    assert_eq!(a.runs, 3);
}

#[test]
fn config_checks() {
    assert!(SimConfig::new(10, 11).validate().is_err());
    assert!(SimConfig::new(10, 5).with_anchor(6, 1.0).validate().is_err());
    assert!(SimConfig::new(10, 5).with_anchor(5, 1.0).validate().is_ok());
    let mut c = SimConfig::new(10, 5);
    c.runs = 0;
    assert!(c.validate().is_err());
}
