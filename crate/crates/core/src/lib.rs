//! Ranking dynamics of trending lists.
//!
//! The crate reads timestamped top-`L` snapshots of a ranked list, splits
//! each item's presence into episodes, and measures the list with rank
//! diversity, circadian series, dwell times and DTW trajectory clustering.
//! It also simulates a diffusive ranking model, optionally with rank
//! anchors, and detects anchors as localized dips in rank-diversity curves.
//!
//! ```
//! use rankdyn::metrics::rank_diversity;
//! use rankdyn::snapshots::{RankedSnapshot, SnapshotStream, TzOffset};
//!
//! let mut stream = SnapshotStream::new(300, 2, TzOffset::default());
//! stream.snapshots = vec![
//!     RankedSnapshot::from_names(0, &["a", "b"]),
//!     RankedSnapshot::from_names(300, &["b", "a"]),
//!     RankedSnapshot::from_names(600, &["a", "c"]),
//! ];
//! let curve = rank_diversity(&stream, (0, 600)).unwrap();
//! assert_eq!(curve.counts, vec![2, 3]);
//! ```

pub mod anomaly;
mod error;
pub mod metrics;
pub mod ranksim;
pub mod seed;
pub mod snapshots;
pub mod trajectories;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/snapshots.md")]
    mod snapshots {}
    #[doc = include_str!("../../../book/src/diversity.md")]
    mod diversity {}
    #[doc = include_str!("../../../book/src/trajectories.md")]
    mod trajectories {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/anchors.md")]
    mod anchors {}
}
