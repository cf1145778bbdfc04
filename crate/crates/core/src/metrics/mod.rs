//! Scalar and curve statistics over snapshot streams and episodes.

mod circadian;
mod diversity;
mod duration;
mod dwell;
mod kde;
mod table;

pub use circadian::{circadian_series, snapshot_median_hotness, BinnedSeries, SeriesKind};
pub use diversity::{rank_diversity, rank_diversity_of, DiversityCurve};
pub use duration::{duration_sections, DurationHistogram, DurationSections, SectionOptions};
pub use dwell::{category_proportions, dwell_times, CategoryReport, Dwell, RankShares};
pub use kde::{kde_1d, kde_1d_on_grid, scott_bandwidth, Bandwidth, Density, DEFAULT_GRID_POINTS};
pub use table::{episode_table, is_overnight, write_episode_table, EpisodeRow, NIGHT_END_S};

use crate::error::{Error, Result};

/// The four components of the list's published popularity score.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HotnessComponents {
    pub search: f64,
    pub discussion: f64,
    pub reading: f64,
    pub interaction: f64,
}

/// `(search + discussion + reading) * interaction`.
pub fn hotness(c: HotnessComponents) -> Result<f64> {
    let parts = [c.search, c.discussion, c.reading, c.interaction];
    if let Some(bad) = parts.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidInput(format!("hotness component {bad} is not a non-negative number")));
    }
    Ok((c.search + c.discussion + c.reading) * c.interaction)
}

/// Median of finite values; `None` when empty. Reorders the slice.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}
