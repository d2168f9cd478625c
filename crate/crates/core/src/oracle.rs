//! Exact reference computations for every application and the accuracy
//! scores used to compare race results against them.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::DenseMatrix;
use crate::error::{Error, Result};
use crate::estimators::{exact_mean, CoordMetric};
use crate::hierarchical::{Dendrogram, Merge};
use crate::mmi::{mi_batch, KlConstants};
use crate::neighbors::{lloyd_exact, nearest_exact, LloydResult, MedoidMetric, Points};
use crate::sparse::sparse_exact;
use crate::util::mix_seed;

/// Random trees averaged by [`tree_accuracy`] unless told otherwise.
pub const DEFAULT_RANDOM_TREES: usize = 32;

/// Exact `k` nearest neighbors of every point, ordered by distance then id.
pub fn brute_knn(points: Points<'_>, k: usize) -> Result<Vec<Vec<usize>>> {
    (0..points.len())
        .map(|i| brute_knn_query(points, i, k))
        .collect()
}

/// Exact `k` nearest neighbors of point `i`, ordered by distance then id.
pub fn brute_knn_query(points: Points<'_>, i: usize, k: usize) -> Result<Vec<usize>> {
    let n = points.len();
    if i >= n {
        return Err(Error::OutOfRange { index: i, len: n });
    }
    if k == 0 || k >= n {
        return Err(Error::invalid(format!(
            "k must be in 1..{n} for {n} points, got {k}"
        )));
    }
    let mut dist: Vec<(f64, usize)> = (0..n)
        .filter(|&j| j != i)
        .map(|j| {
            let v = match points {
                Points::Dense(m) => exact_mean(m.row(i), m.row(j))?,
                Points::Sparse(v) => {
                    if v[j].dim() != v[i].dim() {
                        return Err(Error::DimensionMismatch {
                            expected: v[i].dim(),
                            got: v[j].dim(),
                        });
                    }
                    sparse_exact(&v[i], &v[j])?
                }
            };
            Ok((v, j))
        })
        .collect::<Result<_>>()?;
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(dist.into_iter().take(k).map(|(_, j)| j).collect())
}

/// Exact nearest centroid of every point, lowest id on ties.
pub fn brute_assign(data: &DenseMatrix, centroids: &DenseMatrix) -> Result<Vec<usize>> {
    if centroids.n() == 0 {
        return Err(Error::invalid("at least one centroid is required"));
    }
    if centroids.d() != data.d() {
        return Err(Error::DimensionMismatch {
            expected: data.d(),
            got: centroids.d(),
        });
    }
    Ok(data.rows().map(|r| nearest_exact(r, centroids)).collect())
}

/// Lloyd iterations with exact assignment, started like the raced version.
pub fn brute_lloyd(
    data: &DenseMatrix,
    k: usize,
    max_iters: usize,
    seed: u64,
) -> Result<LloydResult> {
    lloyd_exact(data, k, max_iters, seed)
}

/// Exact average distance of every point to the others.
pub fn medoid_values(data: &DenseMatrix, metric: MedoidMetric) -> Result<Vec<f64>> {
    let n = data.n();
    if n < 2 {
        return Err(Error::invalid("a medoid needs at least two points"));
    }
    let coord = match metric {
        MedoidMetric::L1 => CoordMetric::L1,
        MedoidMetric::L2Sq | MedoidMetric::L2 => CoordMetric::SqEuclidean,
    };
    Ok((0..n)
        .map(|i| {
            let s: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| coord.row_sum(data.row(i), data.row(j)))
                .sum();
            let mean = s / (n - 1) as f64;
            if metric == MedoidMetric::L2 {
                mean.sqrt()
            } else {
                mean
            }
        })
        .collect())
}

pub fn brute_medoid(data: &DenseMatrix, metric: MedoidMetric) -> Result<usize> {
    let v = medoid_values(data, metric)?;
    Ok(argbest(&v, |a, b| a < b))
}

/// Exact mutual information of every feature with the target.
pub fn mmi_values(features: &DenseMatrix, target: &[f64]) -> Result<Vec<f64>> {
    if target.len() != features.n() {
        return Err(Error::DimensionMismatch {
            expected: features.n(),
            got: target.len(),
        });
    }
    let k = KlConstants::default();
    (0..features.d())
        .map(|t| mi_batch(&features.column(t), target, &k))
        .collect()
}

pub fn brute_mmi(features: &DenseMatrix, target: &[f64]) -> Result<usize> {
    let v = mmi_values(features, target)?;
    if v.is_empty() {
        return Err(Error::invalid("no features"));
    }
    Ok(argbest(&v, |a, b| a > b))
}

fn argbest(v: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if better(x, v[best]) {
            best = i;
        }
    }
    best
}

/// Exact average-linkage agglomeration. The merged pair is the one with the
/// smallest linkage, lowest `(a, b)` on ties; new linkages come from the
/// size-weighted average of the parents' linkages.
pub fn brute_hier(data: &DenseMatrix) -> Result<Dendrogram> {
    let n = data.n();
    if n < 2 {
        return Err(Error::invalid("clustering needs at least two points"));
    }
    let d = data.d() as f64;
    let total = 2 * n - 1;
    let mut link = vec![f64::NAN; total * total];
    for a in 0..n {
        for b in (a + 1)..n {
            let v = CoordMetric::SqEuclidean.row_sum(data.row(a), data.row(b)) / d;
            link[a * total + b] = v;
            link[b * total + a] = v;
        }
    }
    let mut size = vec![1usize; total];
    let mut live: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);
    for t in 0..n - 1 {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
        for (p, &a) in live.iter().enumerate() {
            for &b in &live[p + 1..] {
                let v = link[a * total + b];
                if v < best.0 {
                    best = (v, a, b);
                }
            }
        }
        let (value, a, b) = best;
        let new_id = n + t;
        size[new_id] = size[a] + size[b];
        live.retain(|&c| c != a && c != b);
        let (sa, sb) = (size[a] as f64, size[b] as f64);
        for &c in &live {
            let v = (sa * link[a * total + c] + sb * link[b * total + c]) / (sa + sb);
            link[new_id * total + c] = v;
            link[c * total + new_id] = v;
        }
        live.push(new_id);
        merges.push(Merge {
            a,
            b,
            value,
            new_id,
            size: size[new_id],
            exact: true,
        });
    }
    Ok(Dendrogram {
        n_leaves: n,
        merges,
    })
}

/// Fraction of points whose neighbor sets agree.
pub fn knn_accuracy(exact: &[Vec<usize>], approx: &[Vec<usize>]) -> Result<f64> {
    if exact.len() != approx.len() {
        return Err(Error::DimensionMismatch {
            expected: exact.len(),
            got: approx.len(),
        });
    }
    if exact.is_empty() {
        return Ok(1.0);
    }
    let hits = exact
        .iter()
        .zip(approx)
        .filter(|(e, a)| {
            e.len() == a.len()
                && e.iter().collect::<HashSet<_>>() == a.iter().collect::<HashSet<_>>()
        })
        .count();
    Ok(hits as f64 / exact.len() as f64)
}

/// Fraction of points given the same label.
pub fn assign_accuracy(exact: &[usize], approx: &[usize]) -> Result<f64> {
    if exact.len() != approx.len() {
        return Err(Error::DimensionMismatch {
            expected: exact.len(),
            got: approx.len(),
        });
    }
    if exact.is_empty() {
        return Ok(1.0);
    }
    let hits = exact.iter().zip(approx).filter(|(e, a)| e == a).count();
    Ok(hits as f64 / exact.len() as f64)
}

pub fn mmi_accuracy(exact: usize, approx: usize) -> f64 {
    if exact == approx {
        1.0
    } else {
        0.0
    }
}

/// A tree over `n` leaves built by merging two uniformly chosen live
/// clusters until one remains.
pub fn random_tree(n: usize, seed: u64) -> Dendrogram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut live: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; (2 * n).saturating_sub(1)];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for t in 0..n.saturating_sub(1) {
        let i = rng.random_range(0..live.len());
        let a = live.swap_remove(i);
        let j = rng.random_range(0..live.len());
        let b = live.swap_remove(j);
        let new_id = n + t;
        size[new_id] = size[a] + size[b];
        live.push(new_id);
        merges.push(Merge {
            a: a.min(b),
            b: a.max(b),
            value: 0.0,
            new_id,
            size: size[new_id],
            exact: false,
        });
    }
    Dendrogram {
        n_leaves: n,
        merges,
    }
}

fn l1_gap(x: &[u32], y: &[u32]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| (a as f64 - b as f64).abs())
        .sum()
}

/// `1 - E|D* - D| / E_rand|D* - D_rand|`, where `D` is the leaf-to-leaf path
/// length matrix and the baseline averages `random_trees` random trees. One
/// when no tree can differ from the exact one (`n <= 2`). Unclamped, so a tree
/// worse than random scores below zero.
pub fn tree_accuracy_raw(
    exact: &Dendrogram,
    approx: &Dendrogram,
    random_trees: usize,
    seed: u64,
) -> Result<f64> {
    if exact.n_leaves != approx.n_leaves {
        return Err(Error::DimensionMismatch {
            expected: exact.n_leaves,
            got: approx.n_leaves,
        });
    }
    if random_trees == 0 {
        return Err(Error::invalid("at least one random tree is required"));
    }
    exact.validate()?;
    approx.validate()?;
    let de = exact.leaf_distances();
    let num = l1_gap(&de, &approx.leaf_distances());
    let den = (0..random_trees)
        .map(|r| {
            l1_gap(
                &de,
                &random_tree(exact.n_leaves, mix_seed(seed, r as u64)).leaf_distances(),
            )
        })
        .sum::<f64>()
        / random_trees as f64;
    if den == 0.0 {
        return Ok(if num == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(1.0 - num / den)
}

/// [`tree_accuracy_raw`] clamped to `[0, 1]`.
pub fn tree_accuracy(
    exact: &Dendrogram,
    approx: &Dendrogram,
    random_trees: usize,
    seed: u64,
) -> Result<f64> {
    Ok(tree_accuracy_raw(exact, approx, random_trees, seed)?.clamp(0.0, 1.0))
}

/// Accuracy of one application averaged over trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub application: String,
    pub score: f64,
    pub trials: usize,
    pub detail: Vec<f64>,
}

impl AccuracyReport {
    /// Scores are clamped to `[0, 1]` before averaging.
    pub fn from_trials(application: impl Into<String>, detail: Vec<f64>) -> Self {
        let detail: Vec<f64> = detail.into_iter().map(|s| s.clamp(0.0, 1.0)).collect();
        let score = if detail.is_empty() {
            0.0
        } else {
            detail.iter().sum::<f64>() / detail.len() as f64
        };
        Self {
            application: application.into(),
            score,
            trials: detail.len(),
            detail,
        }
    }
}
