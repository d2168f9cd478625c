use rayon::prelude::*;

use super::Draws;
use crate::bandit::{
    ArmCost, ArmRng, ArmSource, BanditConfig, BestK, Engine, EvalLedger, Observation,
};
use crate::data::DenseMatrix;
use crate::error::{Error, Result};
use crate::estimators::{exact_mean, CoordMetric};
use crate::sparse::{
    sparse_exact, sparse_max_pulls, sparse_pair_cost, sparse_sample, SparseVector,
};
use crate::util::mix_seed;

/// The point set a k-NN graph is built over.
#[derive(Debug, Clone, Copy)]
pub enum Points<'a> {
    Dense(&'a DenseMatrix),
    Sparse(&'a [SparseVector]),
}

impl Points<'_> {
    pub fn len(&self) -> usize {
        match self {
            Points::Dense(m) => m.n(),
            Points::Sparse(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            Points::Dense(m) => m.d(),
            Points::Sparse(v) => v.first().map_or(0, SparseVector::dim),
        }
    }
}

/// Arms are rows of `targets`; a pull is one squared coordinate difference
/// between the query and the arm's row.
pub(crate) struct DenseQueryArms<'a> {
    pub query: &'a [f64],
    pub targets: &'a DenseMatrix,
    pub cands: Vec<usize>,
    pub draws: Draws,
}

impl<'a> DenseQueryArms<'a> {
    pub fn new(
        query: &'a [f64],
        targets: &'a DenseMatrix,
        cands: Vec<usize>,
        cfg: &BanditConfig,
    ) -> Self {
        let draws = Draws::new(cands.len(), targets.d(), cfg.replacement);
        Self {
            query,
            targets,
            cands,
            draws,
        }
    }
}

impl ArmSource for DenseQueryArms<'_> {
    fn num_arms(&self) -> usize {
        self.cands.len()
    }

    fn max_pulls(&self, _arm: usize) -> u64 {
        self.targets.d() as u64
    }

    fn cost(&self, _arm: usize) -> ArmCost {
        ArmCost::dense(self.targets.d())
    }

    fn pull(&mut self, arm: usize, rng: &mut ArmRng) -> Result<Observation> {
        let t = self.draws.next(arm, rng)?;
        let row = self.cands[arm];
        Ok(Observation::Sample(
            CoordMetric::SqEuclidean.term(self.query[t], self.targets.get(row, t)),
        ))
    }

    fn exact(&mut self, arm: usize) -> Result<f64> {
        exact_mean(self.query, self.targets.row(self.cands[arm]))
    }

    fn arm_id(&self, arm: usize) -> u64 {
        self.cands[arm] as u64
    }
}

struct SparseQueryArms<'a> {
    query: &'a SparseVector,
    targets: &'a [SparseVector],
    cands: Vec<usize>,
}

impl ArmSource for SparseQueryArms<'_> {
    fn num_arms(&self) -> usize {
        self.cands.len()
    }

    fn max_pulls(&self, arm: usize) -> u64 {
        sparse_max_pulls(self.query, &self.targets[self.cands[arm]])
    }

    fn cost(&self, arm: usize) -> ArmCost {
        sparse_pair_cost(self.query, &self.targets[self.cands[arm]])
    }

    fn pull(&mut self, arm: usize, rng: &mut ArmRng) -> Result<Observation> {
        sparse_sample(self.query, &self.targets[self.cands[arm]], rng).map(Observation::Sample)
    }

    fn exact(&mut self, arm: usize) -> Result<f64> {
        sparse_exact(self.query, &self.targets[self.cands[arm]])
    }

    fn arm_id(&self, arm: usize) -> u64 {
        self.cands[arm] as u64
    }
}

/// One point's neighbor search.
#[derive(Debug, Clone)]
pub struct KnnQuery {
    /// Neighbor ids ordered by estimated distance, then id.
    pub neighbors: Vec<usize>,
    /// Raw race output; arm `a` is `best.states[a].id`.
    pub best: BestK,
}

#[derive(Debug, Clone)]
pub struct KnnResult {
    pub neighbors: Vec<Vec<usize>>,
    pub ledger: EvalLedger,
}

/// `k` nearest neighbors of point `i` among all other points, using `cfg`
/// unchanged (including its seed).
pub fn knn_query(points: Points<'_>, i: usize, k: usize, cfg: &BanditConfig) -> Result<KnnQuery> {
    let n = points.len();
    if i >= n {
        return Err(Error::OutOfRange { index: i, len: n });
    }
    if k == 0 || k >= n {
        return Err(Error::invalid(format!(
            "k must be in 1..{n} for {n} points, got {k}"
        )));
    }
    let cands: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let engine = Engine::new(cfg.clone())?;
    let best = match points {
        Points::Dense(m) => {
            let mut src = DenseQueryArms::new(m.row(i), m, cands, cfg);
            engine.best_k(&mut src, k)?
        }
        Points::Sparse(v) => {
            if let Some(bad) = v.iter().find(|x| x.dim() != v[i].dim()) {
                return Err(Error::DimensionMismatch {
                    expected: v[i].dim(),
                    got: bad.dim(),
                });
            }
            let mut src = SparseQueryArms {
                query: &v[i],
                targets: v,
                cands,
            };
            engine.best_k(&mut src, k)?
        }
    };
    let mut picked: Vec<usize> = best.arms.clone();
    picked.sort_by(|&a, &b| {
        let (sa, sb) = (&best.states[a], &best.states[b]);
        sa.mean().total_cmp(&sb.mean()).then(sa.id.cmp(&sb.id))
    });
    let neighbors = picked.iter().map(|&a| best.states[a].id as usize).collect();
    Ok(KnnQuery { neighbors, best })
}

/// The k-NN graph: one independent race per point, run in parallel. Point
/// `i` uses seed `mix_seed(cfg.seed, i)`, so results do not depend on the
/// thread count.
pub fn knn_graph(points: Points<'_>, k: usize, cfg: &BanditConfig) -> Result<KnnResult> {
    cfg.validate()?;
    let n = points.len();
    if k == 0 || k >= n {
        return Err(Error::invalid(format!(
            "k must be in 1..{n} for {n} points, got {k}"
        )));
    }
    let per_point: Vec<(Vec<usize>, EvalLedger)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let local = cfg.clone().with_seed(mix_seed(cfg.seed, i as u64));
            knn_query(points, i, k, &local).map(|q| (q.neighbors, q.best.ledger))
        })
        .collect::<Result<_>>()?;
    let ledger = EvalLedger::sum(per_point.iter().map(|(_, l)| l));
    Ok(KnnResult {
        neighbors: per_point.into_iter().map(|(nb, _)| nb).collect(),
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::Replacement;

    fn line() -> DenseMatrix {
        DenseMatrix::from_rows(&[vec![0.0], vec![1.0], vec![10.0]]).unwrap()
    }

    #[test]
    fn collinear_points_d1() {
        let m = line();
        let r = knn_graph(Points::Dense(&m), 1, &BanditConfig::default()).unwrap();
        assert_eq!(r.neighbors, vec![vec![1], vec![0], vec![1]]);
        assert_eq!(r.ledger.effective_total, 6.0);
        assert_eq!(r.ledger.brute_total, 6.0);
    }

    #[test]
    fn k_must_be_below_n() {
        let m = line();
        assert!(knn_graph(Points::Dense(&m), 3, &BanditConfig::default()).is_err());
        assert!(knn_graph(Points::Dense(&m), 0, &BanditConfig::default()).is_err());
    }

    #[test]
    fn never_self_neighbor() {
        let spec = crate::data::BlobSpec {
            n: 40,
            d: 64,
            centers: 4,
            ..Default::default()
        };
        let m = crate::data::blobs(&spec, 1).unwrap().data;
        for rep in [Replacement::With, Replacement::Without] {
            let cfg = BanditConfig::default().with_replacement(rep);
            let r = knn_graph(Points::Dense(&m), 3, &cfg).unwrap();
            for (i, nb) in r.neighbors.iter().enumerate() {
                assert_eq!(nb.len(), 3);
                assert!(!nb.contains(&i));
            }
        }
    }

    #[test]
    fn sparse_mode_runs() {
        let (rows, _) = crate::data::sparse_blobs(30, 300, 3, 0.07, 0.1, 2).unwrap();
        let r = knn_graph(Points::Sparse(&rows), 2, &BanditConfig::default()).unwrap();
        assert_eq!(r.neighbors.len(), 30);
        assert!(r.ledger.effective_total <= r.ledger.brute_total + 1e-9);
    }
}
