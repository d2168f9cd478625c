//! Nearest-neighbor style applications: k-NN graphs, k-means assignment and
//! Lloyd iterations, medoids.

mod kmeans;
mod knn;
mod medoid;

pub use kmeans::{assign_step, initial_centroids, lloyd, Assignment, LloydResult};
pub(crate) use kmeans::{lloyd_exact, nearest_exact};
pub use knn::{knn_graph, knn_query, KnnQuery, KnnResult, Points};
pub use medoid::{medoid, medoid_with, MedoidMetric, MedoidOptions, MedoidResult};

use crate::bandit::{ArmRng, Replacement};
use crate::error::{Error, Result};
use crate::util::LazyPermutation;
use rand::Rng;

/// Index draws for a set of arms, with or without replacement per arm.
pub(crate) struct Draws {
    len: usize,
    perms: Option<Vec<LazyPermutation>>,
}

impl Draws {
    pub fn new(arms: usize, len: usize, replacement: Replacement) -> Self {
        let perms = match replacement {
            Replacement::With => None,
            Replacement::Without => Some(vec![LazyPermutation::new(len); arms]),
        };
        Self { len, perms }
    }

    pub fn next(&mut self, arm: usize, rng: &mut ArmRng) -> Result<usize> {
        match &mut self.perms {
            None => Ok(rng.random_range(0..self.len)),
            Some(p) => p[arm]
                .next(rng)
                .ok_or_else(|| Error::state(format!("arm {arm} has no draws left"))),
        }
    }
}
