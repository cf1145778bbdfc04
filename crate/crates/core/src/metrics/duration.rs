use crate::snapshots::Episode;

#[derive(Clone, Debug)]
pub struct SectionOptions {
    /// Episodes with `duration < boundary_s` go to the short section.
    pub boundary_s: i64,
    pub include_censored: bool,
    /// Number of log-spaced histogram bins.
    pub bins: usize,
    /// Moving-average width applied to the histogram.
    pub smoothing: usize,
}

impl Default for SectionOptions {
    fn default() -> Self {
        SectionOptions { boundary_s: 3600, include_censored: false, bins: 40, smoothing: 3 }
    }
}

/// Log-spaced duration histogram. `edges` has one more element than `counts`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DurationHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u32>,
    pub smoothed: Vec<f64>,
}

impl DurationHistogram {
    /// Geometric center of bin `i`.
    pub fn center(&self, i: usize) -> f64 {
        (self.edges[i] * self.edges[i + 1]).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct DurationSections<'a> {
    pub short: Vec<&'a Episode>,
    pub long: Vec<&'a Episode>,
    pub histogram: DurationHistogram,
    /// Durations (seconds) at the interior local minima of the smoothed histogram.
    pub local_minima: Vec<f64>,
}

pub fn duration_sections<'a>(episodes: &'a [Episode], options: &SectionOptions) -> DurationSections<'a> {
    let used: Vec<&Episode> = episodes
        .iter()
        .filter(|e| options.include_censored || !e.is_censored())
        .collect();
    let (short, long) = used.iter().partition(|e| e.duration() < options.boundary_s);
    let durations: Vec<f64> = used.iter().map(|e| e.duration() as f64).collect();
    let histogram = log_histogram(&durations, options.bins.max(1), options.smoothing);
    let local_minima = smoothed_minima(&histogram.smoothed)
        .into_iter()
        .map(|(a, b)| (histogram.center(a) * histogram.center(b)).sqrt())
        .collect();
    DurationSections { short, long, histogram, local_minima }
}

fn log_histogram(durations: &[f64], bins: usize, smoothing: usize) -> DurationHistogram {
    let positive: Vec<f64> = durations.iter().copied().filter(|&d| d > 0.0).collect();
    let Some(lo) = positive.iter().copied().reduce(f64::min) else {
        return DurationHistogram::default();
    };
    let hi = positive.iter().copied().fold(lo, f64::max);
    let (llo, lhi) = (lo.ln(), if hi > lo { hi.ln() } else { lo.ln() + 1.0 });
    let width = (lhi - llo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| (llo + width * i as f64).exp()).collect();
    let mut counts = vec![0u32; bins];
    for d in positive {
        let i = (((d.ln() - llo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let half = smoothing / 2;
    let smoothed = (0..bins)
        .map(|i| {
            let a = i.saturating_sub(half);
            let b = (i + half).min(bins - 1);
            counts[a..=b].iter().map(|&c| c as f64).sum::<f64>() / (b - a + 1) as f64
        })
        .collect();
    DurationHistogram { edges, counts, smoothed }
}

/// Interior runs `[a, b]` of equal values lower than both neighbors.
fn smoothed_minima(values: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut a = 0;
    while a < values.len() {
        let mut b = a;
        while b + 1 < values.len() && values[b + 1] == values[a] {
            b += 1;
        }
        if a > 0 && b + 1 < values.len() && values[a - 1] > values[a] && values[b + 1] > values[b] {
            out.push((a, b));
        }
        a = b + 1;
    }
    out
}
