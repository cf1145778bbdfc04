//! Shape clustering of rank trajectories under dynamic time warping.

mod dba;
mod dtw;
mod kmeans;
mod normalize;

pub use dba::{dba_barycenter, pointwise_mean, set_inertia, Barycenter};
pub use dtw::{dtw, dtw_banded, dtw_path, dtw_sq};
pub use kmeans::{
    adjusted_rand_index, kmeans_dtw, write_centroids_csv, write_clusters_csv, Clustering, KMeansOptions,
};
pub use normalize::{normalize_trajectory, resample, z_normalize, NormalizedTrajectory, CONSTANT_EPS, DEFAULT_LENGTH};

use crate::error::Result;
use crate::snapshots::Episode;

/// Normalized trajectory of every episode; `source` is the episode index.
pub fn normalize_episodes(episodes: &[Episode], m: Option<usize>) -> Result<Vec<NormalizedTrajectory>> {
    episodes
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let ranks: Vec<f64> = e.ranks().map(f64::from).collect();
            normalize_trajectory(&ranks, m, i)
        })
        .collect()
}

impl AsRef<[f64]> for NormalizedTrajectory {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}
