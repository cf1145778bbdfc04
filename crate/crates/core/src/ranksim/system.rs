//! State and update rules of the diffusive ranking model.
//!
//! Every step picks one element uniformly at random and adds 1 to its
//! score. Without anchors the element then climbs to its score-ordered
//! place. An anchor at rank `A` with barrier `delta` splits the list: the
//! occupant of `A` only rises past rank `A - 1` when its score exceeds that
//! neighbor's by more than `delta`, and an element climbing from below only
//! displaces the occupant when it exceeds the occupant's score by more than
//! `delta`; the displaced occupant falls to `A + 1`.
//!
//! Ranges that a rule "updates" are re-sorted by descending score (ties by
//! element id). Only the bumped element and, after a demotion, the head of
//! the segment below an anchor can be out of order, so re-sorting reduces
//! to moving those elements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Rank `rank` (1-based) with barrier increment `delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Anchor {
    pub rank: usize,
    pub delta: f64,
}

impl Anchor {
    pub fn new(rank: usize, delta: f64) -> Self {
        Anchor { rank, delta }
    }
}

/// What the last anchored step did; exposed for tests and tracing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepCase {
    /// Rose inside a segment without reaching an anchor.
    Within,
    /// The anchor occupant was bumped and cleared the barrier above it.
    OccupantPassed,
    /// The anchor occupant was bumped and stayed.
    OccupantHeld,
    /// An element reached the rank below an anchor and cleared the barrier.
    Admitted,
    /// An element reached the rank below an anchor and was held there.
    Blocked,
}

#[derive(Clone, Debug)]
pub struct RankSystem {
    scores: Vec<f64>,
    /// `order[r]` is the element at 0-based rank `r`.
    order: Vec<u32>,
    /// `position[i]` is the 0-based rank of element `i`.
    position: Vec<u32>,
    anchors: Vec<Anchor>,
    /// `dirty[m]`: the head of the segment below anchor `m` may be out of order.
    dirty: Vec<bool>,
    rng: ChaCha8Rng,
    steps: u64,
}

fn validate_anchors(n: usize, anchors: &[Anchor]) -> Result<()> {
    for (i, a) in anchors.iter().enumerate() {
        if a.rank < 2 || a.rank > n {
            return Err(Error::Config(format!("anchor rank {} must lie in 2..={n}", a.rank)));
        }
        if a.delta.is_nan() {
            return Err(Error::Config("anchor barrier is NaN".into()));
        }
        if i > 0 && a.rank < anchors[i - 1].rank + 2 {
            return Err(Error::Config(format!(
                "anchors at {} and {} must be sorted and at least 2 ranks apart",
                anchors[i - 1].rank,
                a.rank
            )));
        }
    }
    Ok(())
}

impl RankSystem {
    /// `n` elements with i.i.d. uniform(0, 1) scores drawn from `seed`.
    pub fn new(n: usize, anchors: Vec<Anchor>, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let mut sys = Self::from_scores(scores, anchors)?;
        sys.rng = rng;
        Ok(sys)
    }

    /// A system with the given scores ranked in descending order.
    pub fn from_scores(scores: Vec<f64>, mut anchors: Vec<Anchor>) -> Result<Self> {
        let n = scores.len();
        if n == 0 {
            return Err(Error::Config("a ranking needs at least one element".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::Config("too many elements".into()));
        }
        if scores.iter().any(|s| s.is_nan()) {
            return Err(Error::Config("scores must not be NaN".into()));
        }
        anchors.sort_by_key(|a| a.rank);
        validate_anchors(n, &anchors)?;
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by(|&a, &b| scores[b as usize].total_cmp(&scores[a as usize]).then(a.cmp(&b)));
        let mut position = vec![0u32; n];
        for (r, &e) in order.iter().enumerate() {
            position[e as usize] = r as u32;
        }
        Ok(RankSystem {
            scores,
            order,
            position,
            dirty: vec![false; anchors.len()],
            anchors,
            rng: ChaCha8Rng::seed_from_u64(0),
            steps: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, element: u32) -> f64 {
        self.scores[element as usize]
    }

    /// Elements from rank 1 downwards.
    pub fn ranking(&self) -> &[u32] {
        &self.order
    }

    /// Element at 1-based `rank`.
    pub fn at_rank(&self, rank: usize) -> u32 {
        self.order[rank - 1]
    }

    /// 1-based rank of `element`.
    pub fn rank_of(&self, element: u32) -> usize {
        self.position[element as usize] as usize + 1
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn draw(&mut self) -> u32 {
        self.steps += 1;
        self.rng.gen_range(0..self.scores.len() as u32)
    }

    /// `a` belongs above `b`.
    #[inline]
    fn above(&self, a: u32, b: u32) -> bool {
        let (sa, sb) = (self.scores[a as usize], self.scores[b as usize]);
        sa > sb || (sa == sb && a < b)
    }

    #[inline]
    fn swap_ranks(&mut self, r: usize, s: usize) {
        self.order.swap(r, s);
        self.position[self.order[r] as usize] = r as u32;
        self.position[self.order[s] as usize] = s as u32;
    }

    /// Moves the element at 0-based rank `r` upwards while it belongs above
    /// its neighbor, never past `lo`. Returns its final rank.
    fn bubble_up(&mut self, mut r: usize, lo: usize) -> usize {
        while r > lo && self.above(self.order[r], self.order[r - 1]) {
            self.swap_ranks(r, r - 1);
            r -= 1;
        }
        r
    }

    fn bubble_down(&mut self, mut r: usize, hi: usize) -> usize {
        while r < hi && self.above(self.order[r + 1], self.order[r]) {
            self.swap_ranks(r, r + 1);
            r += 1;
        }
        r
    }

    /// Full descending sort of 0-based ranks `lo..=hi`.
    fn sort_range(&mut self, lo: usize, hi: usize) {
        let scores = &self.scores;
        self.order[lo..=hi].sort_by(|&a, &b| scores[b as usize].total_cmp(&scores[a as usize]).then(a.cmp(&b)));
        for r in lo..=hi {
            self.position[self.order[r] as usize] = r as u32;
        }
    }

    /// Bumps a uniformly random element of an anchor-free system.
    pub fn step_null(&mut self) -> Result<u32> {
        if !self.anchors.is_empty() {
            return Err(Error::Config("step_null called on an anchored system; use step_anchored".into()));
        }
        let j = self.draw();
        self.bump_null(j);
        Ok(j)
    }

    /// Adds 1 to `element` and moves it to its score-ordered place.
    pub fn bump_null(&mut self, element: u32) {
        self.scores[element as usize] += 1.0;
        let r = self.position[element as usize] as usize;
        self.bubble_up(r, 0);
    }

    /// Bumps a uniformly random element under the anchor rules.
    pub fn step_anchored(&mut self) -> (u32, StepCase) {
        let j = self.draw();
        (j, self.bump_anchored(j))
    }

    /// Dispatches to the null or anchored rule.
    pub fn step(&mut self) -> u32 {
        let j = self.draw();
        if self.anchors.is_empty() {
            self.bump_null(j);
        } else {
            self.bump_anchored(j);
        }
        j
    }

    /// Segment bounds (0-based, inclusive) for the region strictly between
    /// anchor `m - 1` and anchor `m`, where `m == anchors.len()` is the bottom.
    fn segment(&self, m: usize) -> (usize, usize) {
        let lo = if m == 0 { 0 } else { self.anchors[m - 1].rank };
        let hi = if m == self.anchors.len() { self.len() - 1 } else { self.anchors[m].rank - 2 };
        (lo, hi)
    }

    /// Re-sorts segment `m` after `element` (inside it) was bumped.
    fn resort_segment(&mut self, m: usize, element: u32) {
        let (lo, hi) = self.segment(m);
        let r = self.position[element as usize] as usize;
        if m > 0 && self.dirty[m - 1] {
            self.dirty[m - 1] = false;
            if r > lo {
                self.bubble_up(r, lo + 1);
            }
            self.bubble_down(lo, hi);
        } else {
            self.bubble_up(r, lo);
        }
    }

    /// Adds 1 to `element` and applies the anchor rules.
    ///
    /// With several anchors the rules are applied at each anchor the element
    /// reaches while climbing, lowest anchor first.
    pub fn bump_anchored(&mut self, element: u32) -> StepCase {
        self.scores[element as usize] += 1.0;
        if self.anchors.is_empty() {
            let r = self.position[element as usize] as usize;
            self.bubble_up(r, 0);
            return StepCase::Within;
        }
        let r = self.position[element as usize] as usize;
        // Anchor index whose rank the element occupies, or the first anchor below it.
        let m = self.anchors.partition_point(|a| a.rank - 1 < r);
        let mut case;
        let mut seg;
        if m < self.anchors.len() && self.anchors[m].rank - 1 == r {
            let k = self.order[r - 1];
            if self.scores[element as usize] > self.scores[k as usize] + self.anchors[m].delta {
                let (lo, _) = self.segment(m);
                // Segment above plus the anchor rank; k falls to the anchor.
                self.bubble_up(r, lo);
                if m > 0 && self.dirty[m - 1] {
                    self.dirty[m - 1] = false;
                    self.sort_range(lo, r);
                }
                case = StepCase::OccupantPassed;
                seg = m;
            } else {
                return StepCase::OccupantHeld;
            }
        } else {
            seg = m;
            self.resort_segment(seg, element);
            case = StepCase::Within;
        }

        // Challenge each anchor directly above the element's segment.
        loop {
            if seg == 0 {
                return case;
            }
            let (lo, _) = self.segment(seg);
            if self.position[element as usize] as usize != lo {
                return case;
            }
            let a = self.anchors[seg - 1];
            let occupant = self.order[a.rank - 1];
            if self.scores[element as usize] > self.scores[occupant as usize] + a.delta {
                let (above_lo, _) = self.segment(seg - 1);
                // Ranks above_lo..=A+1 (0-based lo is A).
                self.sort_range(above_lo, lo);
                self.dirty[seg - 1] = true;
                if seg > 1 && self.dirty[seg - 2] {
                    self.dirty[seg - 2] = false;
                }
                case = StepCase::Admitted;
                let p = self.position[element as usize] as usize;
                if p == a.rank - 1 {
                    return case;
                }
                seg -= 1;
            } else {
                return StepCase::Blocked;
            }
        }
    }

    /// Checks the permutation and the ordering invariants. Ranks strictly
    /// inside each segment are in descending order except for a flagged
    /// segment head.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.len();
        let mut seen = vec![false; n];
        for (r, &e) in self.order.iter().enumerate() {
            if seen[e as usize] || self.position[e as usize] as usize != r {
                return Err(Error::InvalidInput(format!("ranking is not a permutation at rank {}", r + 1)));
            }
            seen[e as usize] = true;
        }
        for m in 0..=self.anchors.len() {
            let (lo, hi) = self.segment(m);
            let start = if m > 0 && self.dirty[m - 1] { lo + 1 } else { lo };
            for r in start..hi {
                if self.above(self.order[r + 1], self.order[r]) {
                    return Err(Error::InvalidInput(format!("ranks {} and {} out of order", r + 1, r + 2)));
                }
            }
        }
        Ok(())
    }
}
