use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::knn::DenseQueryArms;
use crate::bandit::{BanditConfig, Engine, EvalLedger};
use crate::data::DenseMatrix;
use crate::error::{Error, Result};
use crate::estimators::CoordMetric;
use crate::util::mix_seed;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Assignment {
    pub labels: Vec<usize>,
    pub centroids: DenseMatrix,
    /// Sum over points of the squared distance to the assigned centroid.
    pub inertia: f64,
    pub ledger: EvalLedger,
}

fn inertia(data: &DenseMatrix, centroids: &DenseMatrix, labels: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &c)| CoordMetric::SqEuclidean.row_sum(data.row(i), centroids.row(c)))
        .sum()
}

/// Labels every point with its nearest centroid through a best-1 race over
/// the centroids. Point `i` uses seed `mix_seed(cfg.seed, i)`.
pub fn assign_step(
    data: &DenseMatrix,
    centroids: &DenseMatrix,
    cfg: &BanditConfig,
) -> Result<Assignment> {
    cfg.validate()?;
    if centroids.n() == 0 {
        return Err(Error::invalid("at least one centroid is required"));
    }
    if centroids.d() != data.d() {
        return Err(Error::DimensionMismatch {
            expected: data.d(),
            got: centroids.d(),
        });
    }
    let k = centroids.n();
    let per_point: Vec<(usize, EvalLedger)> = (0..data.n())
        .into_par_iter()
        .map(|i| {
            let local = cfg.clone().with_seed(mix_seed(cfg.seed, i as u64));
            let mut src = DenseQueryArms::new(data.row(i), centroids, (0..k).collect(), &local);
            let best = Engine::new(local)?.best_k(&mut src, 1)?;
            Ok((best.arms[0], best.ledger))
        })
        .collect::<Result<_>>()?;
    let labels: Vec<usize> = per_point.iter().map(|&(c, _)| c).collect();
    Ok(Assignment {
        inertia: inertia(data, centroids, &labels),
        ledger: EvalLedger::sum(per_point.iter().map(|(_, l)| l)),
        labels,
        centroids: centroids.clone(),
    })
}

/// `k` distinct data points chosen uniformly under `seed`.
pub fn initial_centroids(data: &DenseMatrix, k: usize, seed: u64) -> Result<DenseMatrix> {
    if k == 0 || k > data.n() {
        return Err(Error::invalid(format!(
            "k must be in 1..={} for {} points, got {k}",
            data.n(),
            data.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x1217));
    let mut picks = rand::seq::index::sample(&mut rng, data.n(), k).into_vec();
    picks.sort_unstable();
    let rows: Vec<Vec<f64>> = picks.iter().map(|&i| data.row(i).to_vec()).collect();
    DenseMatrix::from_rows(&rows)
}

/// Exact nearest centroid, lowest id on ties.
pub(crate) fn nearest_exact(row: &[f64], centroids: &DenseMatrix) -> usize {
    let mut best = (f64::INFINITY, 0);
    for c in 0..centroids.n() {
        let v = CoordMetric::SqEuclidean.row_sum(row, centroids.row(c));
        if v < best.0 {
            best = (v, c);
        }
    }
    best.1
}

/// Means of the points assigned to each centroid. A centroid left without
/// points moves to the point farthest from its own centroid (each such point
/// used at most once).
pub(crate) fn update_centroids(
    data: &DenseMatrix,
    centroids: &DenseMatrix,
    labels: &[usize],
) -> Result<DenseMatrix> {
    let (k, d) = (centroids.n(), data.d());
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (i, &c) in labels.iter().enumerate() {
        counts[c] += 1;
        for (s, x) in sums[c * d..(c + 1) * d].iter_mut().zip(data.row(i)) {
            *s += x;
        }
    }
    let mut far: Vec<(f64, usize)> = labels
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            (
                CoordMetric::SqEuclidean.row_sum(data.row(i), centroids.row(c)),
                i,
            )
        })
        .collect();
    far.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut far = far.into_iter();
    for c in 0..k {
        let row = &mut sums[c * d..(c + 1) * d];
        if counts[c] == 0 {
            let (_, i) = far.next().ok_or_else(|| {
                Error::Degenerate("no point left to reseed an empty cluster".into())
            })?;
            row.copy_from_slice(data.row(i));
        } else {
            let inv = 1.0 / counts[c] as f64;
            row.iter_mut().for_each(|s| *s *= inv);
        }
    }
    DenseMatrix::new(k, d, sums)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LloydResult {
    pub assignment: Assignment,
    /// Assignment steps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
}

/// Lloyd iterations with race-based assignment and exact mean updates.
///
/// Centroids start at `k` random data points; the initial labels are their
/// exact nearest centroids. Each iteration moves the centroids to the cluster
/// means and reassigns (iteration `it` uses seed `mix_seed(cfg.seed, it)`),
/// stopping once the labels no longer change. The returned centroids are the
/// ones the final labels were assigned against.
pub fn lloyd(
    data: &DenseMatrix,
    k: usize,
    max_iters: usize,
    cfg: &BanditConfig,
) -> Result<LloydResult> {
    lloyd_with(data, k, max_iters, cfg, |data, c, it| {
        assign_step(
            data,
            c,
            &cfg.clone().with_seed(mix_seed(cfg.seed, it as u64)),
        )
    })
}

/// Same iteration with exact assignment; the reference for [`lloyd`].
pub(crate) fn lloyd_exact(
    data: &DenseMatrix,
    k: usize,
    max_iters: usize,
    seed: u64,
) -> Result<LloydResult> {
    let cfg = BanditConfig::default().with_seed(seed);
    lloyd_with(data, k, max_iters, &cfg, |data, c, _| {
        Ok(exact_assignment(data, c))
    })
}

pub(crate) fn exact_assignment(data: &DenseMatrix, centroids: &DenseMatrix) -> Assignment {
    let labels: Vec<usize> = data.rows().map(|r| nearest_exact(r, centroids)).collect();
    Assignment {
        inertia: inertia(data, centroids, &labels),
        labels,
        centroids: centroids.clone(),
        ledger: EvalLedger::default(),
    }
}

fn lloyd_with<F>(
    data: &DenseMatrix,
    k: usize,
    max_iters: usize,
    cfg: &BanditConfig,
    mut assign: F,
) -> Result<LloydResult>
where
    F: FnMut(&DenseMatrix, &DenseMatrix, usize) -> Result<Assignment>,
{
    cfg.validate()?;
    let centroids = initial_centroids(data, k, cfg.seed)?;
    let mut current = exact_assignment(data, &centroids);
    let mut ledger = EvalLedger::default();
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        let centroids = update_centroids(data, &current.centroids, &current.labels)?;
        let next = assign(data, &centroids, iterations)?;
        iterations += 1;
        ledger.merge(&next.ledger);
        history.push(next.inertia);
        let stable = next.labels == current.labels;
        current = next;
        if stable {
            converged = true;
            break;
        }
    }
    current.inertia = inertia(data, &current.centroids, &current.labels);
    current.ledger = ledger;
    Ok(LloydResult {
        assignment: current,
        iterations,
        converged,
        inertia_history: history,
    })
}
