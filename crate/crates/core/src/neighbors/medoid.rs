use serde::{Deserialize, Serialize};

use super::Draws;
use crate::bandit::{ArmCost, ArmRng, ArmSource, BanditConfig, Engine, EvalLedger, Observation};
use crate::data::DenseMatrix;
use crate::error::{Error, Result};
use crate::estimators::{CoordMetric, SmoothWrap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MedoidMetric {
    #[default]
    L1,
    /// Squared Euclidean distance.
    L2Sq,
    /// Races on the square root of the mean squared Euclidean distance; same
    /// argmin as `L2Sq`, with intervals carried through the square root.
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct MedoidOptions {
    pub metric: MedoidMetric,
    /// Sample a random other point and a random coordinate per pull instead
    /// of a whole row distance.
    pub doubly_sampled: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MedoidResult {
    pub medoid: usize,
    /// Final estimate of every point's average distance (exact where the
    /// point was evaluated exactly), before any square-root transform.
    pub estimates: Vec<f64>,
    pub exact: Vec<bool>,
    pub ledger: EvalLedger,
}

struct MedoidArms<'a> {
    data: &'a DenseMatrix,
    coord: CoordMetric,
    doubly: bool,
    draws: Draws,
    wrap: Option<SmoothWrap>,
}

impl MedoidArms<'_> {
    /// Index `j` in `0..n-1` mapped to a point other than `i`.
    fn other(i: usize, j: usize) -> usize {
        if j >= i {
            j + 1
        } else {
            j
        }
    }
}

impl ArmSource for MedoidArms<'_> {
    fn num_arms(&self) -> usize {
        self.data.n()
    }

    fn max_pulls(&self, _arm: usize) -> u64 {
        let others = (self.data.n() - 1) as u64;
        if self.doubly {
            others * self.data.d() as u64
        } else {
            others
        }
    }

    fn cost(&self, _arm: usize) -> ArmCost {
        let full = ((self.data.n() - 1) * self.data.d()) as u64;
        ArmCost {
            pull_touches: if self.doubly { 1 } else { self.data.d() as u64 },
            exact_touches: full,
            full_touches: full,
            unit: full as f64,
        }
    }

    fn pull(&mut self, arm: usize, rng: &mut ArmRng) -> Result<Observation> {
        let d = self.data.d();
        let x = self.data.row(arm);
        let draw = self.draws.next(arm, rng)?;
        let value = if self.doubly {
            let j = Self::other(arm, draw / d);
            let t = draw % d;
            d as f64 * self.coord.term(x[t], self.data.get(j, t))
        } else {
            self.coord.row_sum(x, self.data.row(Self::other(arm, draw)))
        };
        Ok(Observation::Sample(value))
    }

    fn exact(&mut self, arm: usize) -> Result<f64> {
        let x = self.data.row(arm);
        let n = self.data.n();
        let total: f64 = (0..n)
            .filter(|&j| j != arm)
            .map(|j| self.coord.row_sum(x, self.data.row(j)))
            .sum();
        Ok(total / (n - 1) as f64)
    }

    fn transform(&self) -> Option<&SmoothWrap> {
        self.wrap.as_ref()
    }
}

/// Lower bound on every point's mean squared distance to the others:
/// `n V / (n - 1)`, with `V` the mean squared distance to the centroid.
fn mean_sq_floor(data: &DenseMatrix) -> f64 {
    let (n, d) = (data.n(), data.d());
    let mut centroid = vec![0.0; d];
    for r in data.rows() {
        centroid.iter_mut().zip(r).for_each(|(c, x)| *c += x);
    }
    centroid.iter_mut().for_each(|c| *c /= n as f64);
    let v = data
        .rows()
        .map(|r| CoordMetric::SqEuclidean.row_sum(r, &centroid))
        .sum::<f64>()
        / n as f64;
    n as f64 * v / (n - 1) as f64
}

pub fn medoid(
    data: &DenseMatrix,
    metric: MedoidMetric,
    cfg: &BanditConfig,
) -> Result<MedoidResult> {
    medoid_with(
        data,
        MedoidOptions {
            metric,
            ..Default::default()
        },
        cfg,
    )
}

/// The point with the smallest average distance to all other points.
pub fn medoid_with(
    data: &DenseMatrix,
    opts: MedoidOptions,
    cfg: &BanditConfig,
) -> Result<MedoidResult> {
    if data.n() < 2 {
        return Err(Error::invalid("a medoid needs at least two points"));
    }
    if data.d() == 0 {
        return Err(Error::invalid("points have zero dimension"));
    }
    let coord = match opts.metric {
        MedoidMetric::L1 => CoordMetric::L1,
        MedoidMetric::L2Sq | MedoidMetric::L2 => CoordMetric::SqEuclidean,
    };
    let wrap = match opts.metric {
        // Half the floor leaves room for estimates below every true mean.
        MedoidMetric::L2 => Some(SmoothWrap::sqrt_above(
            (0.5 * mean_sq_floor(data)).max(f64::MIN_POSITIVE),
        )),
        _ => None,
    };
    let len = if opts.doubly_sampled {
        (data.n() - 1) * data.d()
    } else {
        data.n() - 1
    };
    let mut src = MedoidArms {
        data,
        coord,
        doubly: opts.doubly_sampled,
        draws: Draws::new(data.n(), len, cfg.replacement),
        wrap,
    };
    let best = Engine::new(cfg.clone())?.best_k(&mut src, 1)?;
    Ok(MedoidResult {
        medoid: best.arms[0],
        estimates: best.states.iter().map(|s| s.mean()).collect(),
        exact: best.states.iter().map(|s| s.exact).collect(),
        ledger: best.ledger,
    })
}
