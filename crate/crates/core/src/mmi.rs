//! Maximum-mutual-information feature selection.
//!
//! Each feature is an arm whose value is the Kozachenko-Leonenko mutual
//! information between the feature and the target over all rows. A pull adds
//! one more row, sampled without replacement, to the arm's subsample and
//! updates the nearest-neighbor distances in the feature, target and joint
//! spaces in `O(l)`. Intervals come from a normal approximation to the mean of
//! the per-row contributions.
//!
//! With `R` the nearest-neighbor distance of a sample among `l` samples,
//! `h = (dim/l) sum log R + c(dim, l)` and `c(dim, l) = log(l - 1) + gamma + log V_dim`
//! with `V_1 = 2`, `V_2 = pi`. The mutual information is `h_W + h_Z - h_joint`.
//! Setting [`KlConstants::dim_weighted`] to false drops the `dim` factor.

use serde::{Deserialize, Serialize};

use crate::bandit::{
    ArmCost, ArmRng, ArmSource, BanditConfig, Engine, EvalLedger, IntervalKind, Objective,
    Observation,
};
use crate::data::DenseMatrix;
use crate::error::{Error, Result};
use crate::util::LazyPermutation;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Rows every feature samples before its interval is trusted, unless the
/// configuration sets a warm-up. With only a handful of rows the spread of
/// the per-row contributions can be near zero by accident (at two rows it is
/// exactly zero), which would certify an arbitrary feature.
pub const MIN_ROWS: u32 = 32;

/// Constants of the entropy estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlConstants {
    /// `log V_1`, the log-length of the unit 1-D ball.
    pub log_volume_1d: f64,
    /// `log V_2`, the log-area of the unit disc.
    pub log_volume_2d: f64,
    /// Distances below this are raised to it before taking logs.
    pub r_floor: f64,
    /// Multiply the mean log distance by the dimension. Without it the joint
    /// entropy's bias depends on the sample size, so arms estimated from
    /// different numbers of rows are not comparable.
    pub dim_weighted: bool,
}

impl Default for KlConstants {
    fn default() -> Self {
        Self {
            log_volume_1d: 2f64.ln(),
            log_volume_2d: std::f64::consts::PI.ln(),
            r_floor: 1e-12,
            dim_weighted: true,
        }
    }
}

impl KlConstants {
    /// `c(dim, l)`; `dim` is 1 or 2.
    pub fn c(&self, dim: usize, ell: usize) -> f64 {
        let log_v = if dim == 1 {
            self.log_volume_1d
        } else {
            self.log_volume_2d
        };
        ((ell - 1) as f64).ln() + EULER_GAMMA + log_v
    }

    /// `c(1, l) + c(1, l) - c(2, l)`.
    pub fn mi_offset(&self, ell: usize) -> f64 {
        2.0 * self.c(1, ell) - self.c(2, ell)
    }

    /// Weight of the joint-space mean log distance.
    pub fn joint_weight(&self) -> f64 {
        if self.dim_weighted {
            2.0
        } else {
            1.0
        }
    }

    #[inline]
    fn log_r(&self, r: f64) -> f64 {
        r.max(self.r_floor).ln()
    }
}

#[inline]
fn joint_dist(dw: f64, dz: f64) -> f64 {
    (dw * dw + dz * dz).sqrt()
}

/// Nearest-neighbor distance of every sample on the line.
pub fn nn_distances_1d(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![f64::INFINITY; x.len()];
    for p in 0..order.len() {
        let i = order[p];
        if p > 0 {
            out[i] = out[i].min(x[i] - x[order[p - 1]]);
        }
        if p + 1 < order.len() {
            out[i] = out[i].min(x[order[p + 1]] - x[i]);
        }
    }
    out
}

/// Nearest-neighbor distance of every point in the plane: sort by the first
/// coordinate and scan outward until the first-coordinate gap exceeds the
/// best distance so far.
pub fn nn_distances_2d(w: &[f64], z: &[f64]) -> Vec<f64> {
    let n = w.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[a].total_cmp(&w[b]));
    let mut out = vec![f64::INFINITY; n];
    for p in 0..n {
        let i = order[p];
        let mut best = f64::INFINITY;
        for q in (0..p).rev() {
            let j = order[q];
            let dw = (w[i] - w[j]).abs();
            if dw > best {
                break;
            }
            best = best.min(joint_dist(dw, (z[i] - z[j]).abs()));
        }
        for &j in &order[p + 1..] {
            let dw = (w[i] - w[j]).abs();
            if dw > best {
                break;
            }
            best = best.min(joint_dist(dw, (z[i] - z[j]).abs()));
        }
        out[i] = best;
    }
    out
}

pub fn kl_entropy_1d(samples: &[f64], k: &KlConstants) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::invalid("entropy needs at least two samples"));
    }
    let r = nn_distances_1d(samples);
    let s: f64 = r.iter().map(|&x| k.log_r(x)).sum();
    Ok(s / samples.len() as f64 + k.c(1, samples.len()))
}

pub fn kl_entropy_2d(samples: &[(f64, f64)], k: &KlConstants) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::invalid("entropy needs at least two samples"));
    }
    let (w, z): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
    let r = nn_distances_2d(&w, &z);
    let s: f64 = r.iter().map(|&x| k.log_r(x)).sum();
    Ok(k.joint_weight() * s / samples.len() as f64 + k.c(2, samples.len()))
}

/// `h(W) + h(Z) - h(W, Z)` over all given pairs.
pub fn mi_batch(w: &[f64], z: &[f64], k: &KlConstants) -> Result<f64> {
    if w.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            got: z.len(),
        });
    }
    if w.len() < 2 {
        return Err(Error::invalid(
            "mutual information needs at least two samples",
        ));
    }
    let (rw, rz, rj) = (
        nn_distances_1d(w),
        nn_distances_1d(z),
        nn_distances_2d(w, z),
    );
    let sum = |r: &[f64]| r.iter().map(|&x| k.log_r(x)).sum::<f64>();
    let ell = w.len();
    Ok((sum(&rw) + sum(&rz) - k.joint_weight() * sum(&rj)) / ell as f64 + k.mi_offset(ell))
}

/// Subsample state of one feature arm, with nearest-neighbor distances, their
/// log sums and the per-row contributions maintained as rows arrive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MIArmState {
    pub feature: usize,
    pub rows: Vec<usize>,
    w: Vec<f64>,
    z: Vec<f64>,
    pub nn_w: Vec<f64>,
    pub nn_z: Vec<f64>,
    pub nn_joint: Vec<f64>,
    pub logsum_w: f64,
    pub logsum_z: f64,
    pub logsum_joint: f64,
    /// `log R_W + log R_Z - w log R_joint` per row; NaN while a row has no
    /// neighbor yet.
    contrib: Vec<f64>,
    contrib_sum: f64,
    contrib_sumsq: f64,
}

impl MIArmState {
    pub fn new(feature: usize) -> Self {
        Self {
            feature,
            rows: Vec::new(),
            w: Vec::new(),
            z: Vec::new(),
            nn_w: Vec::new(),
            nn_z: Vec::new(),
            nn_joint: Vec::new(),
            logsum_w: 0.0,
            logsum_z: 0.0,
            logsum_joint: 0.0,
            contrib: Vec::new(),
            contrib_sum: 0.0,
            contrib_sumsq: 0.0,
        }
    }

    pub fn count(&self) -> usize {
        self.rows.len()
    }

    fn set_contrib(&mut self, i: usize, k: &KlConstants) {
        let old = self.contrib[i];
        if !old.is_nan() {
            self.contrib_sum -= old;
            self.contrib_sumsq -= old * old;
        }
        let c = k.log_r(self.nn_w[i]) + k.log_r(self.nn_z[i])
            - k.joint_weight() * k.log_r(self.nn_joint[i]);
        self.contrib[i] = c;
        self.contrib_sum += c;
        self.contrib_sumsq += c * c;
    }

    /// Adds row `row` with feature value `w` and target value `z`.
    pub fn push(&mut self, row: usize, w: f64, z: f64, k: &KlConstants) {
        fn relax(nn: &mut f64, d: f64, logsum: &mut f64, k: &KlConstants) -> bool {
            if d < *nn {
                if nn.is_finite() {
                    *logsum -= k.log_r(*nn);
                }
                *logsum += k.log_r(d);
                *nn = d;
                true
            } else {
                false
            }
        }
        let (mut bw, mut bz, mut bj) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        for i in 0..self.rows.len() {
            let dw = (self.w[i] - w).abs();
            let dz = (self.z[i] - z).abs();
            let dj = joint_dist(dw, dz);
            let a = relax(&mut self.nn_w[i], dw, &mut self.logsum_w, k);
            let b = relax(&mut self.nn_z[i], dz, &mut self.logsum_z, k);
            let c = relax(&mut self.nn_joint[i], dj, &mut self.logsum_joint, k);
            if a || b || c {
                self.set_contrib(i, k);
            }
            bw = bw.min(dw);
            bz = bz.min(dz);
            bj = bj.min(dj);
        }
        self.rows.push(row);
        self.w.push(w);
        self.z.push(z);
        for (nn, b, sum) in [
            (&mut self.nn_w, bw, &mut self.logsum_w),
            (&mut self.nn_z, bz, &mut self.logsum_z),
            (&mut self.nn_joint, bj, &mut self.logsum_joint),
        ] {
            nn.push(b);
            if b.is_finite() {
                *sum += k.log_r(b);
            }
        }
        self.contrib.push(f64::NAN);
        if self.rows.len() > 1 {
            self.set_contrib(self.rows.len() - 1, k);
        }
    }

    /// `h_W + h_Z - h_joint` from the cached log sums.
    pub fn estimate(&self, k: &KlConstants) -> Result<f64> {
        let ell = self.count();
        if ell < 2 {
            return Err(Error::state("estimate needs at least two sampled rows"));
        }
        let joint = k.joint_weight() * self.logsum_joint;
        Ok((self.logsum_w + self.logsum_z - joint) / ell as f64 + k.mi_offset(ell))
    }

    /// Sample standard deviation of the per-row contributions
    /// `log R_W + log R_Z - w log R_joint`, `w` the joint weight, from the
    /// running sums.
    pub fn spread(&self) -> f64 {
        let ell = self.count();
        if ell < 2 {
            return 0.0;
        }
        let n = ell as f64;
        let ss = self.contrib_sumsq - self.contrib_sum * self.contrib_sum / n;
        (ss.max(0.0) / (n - 1.0)).sqrt()
    }

    /// Recomputes distances, log sums and contributions from scratch over the
    /// sampled rows.
    pub fn recomputed(&self, k: &KlConstants) -> Self {
        let mut out = self.clone();
        out.nn_w = nn_distances_1d(&self.w);
        out.nn_z = nn_distances_1d(&self.z);
        out.nn_joint = nn_distances_2d(&self.w, &self.z);
        let sum = |r: &[f64]| {
            r.iter()
                .filter(|x| x.is_finite())
                .map(|&x| k.log_r(x))
                .sum()
        };
        out.logsum_w = sum(&out.nn_w);
        out.logsum_z = sum(&out.nn_z);
        out.logsum_joint = sum(&out.nn_joint);
        out.contrib = vec![f64::NAN; self.count()];
        out.contrib_sum = 0.0;
        out.contrib_sumsq = 0.0;
        if self.count() > 1 {
            for i in 0..self.count() {
                out.set_contrib(i, k);
            }
        }
        out
    }

    /// Two-pass standard deviation of the contributions, for checking
    /// [`Self::spread`].
    pub fn spread_two_pass(&self) -> f64 {
        let c: Vec<f64> = self
            .contrib
            .iter()
            .copied()
            .filter(|x| !x.is_nan())
            .collect();
        if c.len() < 2 {
            return 0.0;
        }
        let mean = c.iter().sum::<f64>() / c.len() as f64;
        let ss: f64 = c.iter().map(|x| (x - mean).powi(2)).sum();
        (ss / (c.len() - 1) as f64).sqrt()
    }
}

struct MmiArms<'a> {
    features: &'a DenseMatrix,
    target: &'a [f64],
    consts: KlConstants,
    states: Vec<MIArmState>,
    perms: Vec<LazyPermutation>,
}

impl MmiArms<'_> {
    fn add_row(&mut self, arm: usize, rng: &mut ArmRng) -> Result<()> {
        let row = self.perms[arm]
            .next(rng)
            .ok_or_else(|| Error::state(format!("feature {arm} has no rows left")))?;
        let w = self.features.get(row, arm);
        self.states[arm].push(row, w, self.target[row], &self.consts);
        Ok(())
    }
}

impl ArmSource for MmiArms<'_> {
    fn num_arms(&self) -> usize {
        self.features.d()
    }

    fn max_pulls(&self, _arm: usize) -> u64 {
        self.features.n() as u64
    }

    fn cost(&self, arm: usize) -> ArmCost {
        let n = self.features.n() as u64;
        let have = self.states[arm].count() as u64;
        ArmCost {
            // The first pull takes two rows so every estimate is defined.
            pull_touches: if have == 0 { 2 } else { 1 },
            exact_touches: n - have,
            full_touches: n,
            unit: 1.0,
        }
    }

    fn pull(&mut self, arm: usize, rng: &mut ArmRng) -> Result<Observation> {
        if self.states[arm].count() == 0 {
            self.add_row(arm, rng)?;
        }
        self.add_row(arm, rng)?;
        let st = &self.states[arm];
        Ok(Observation::Estimate {
            value: st.estimate(&self.consts)?,
            spread: st.spread(),
            samples: st.count() as u64,
        })
    }

    fn exact(&mut self, arm: usize) -> Result<f64> {
        mi_batch(&self.features.column(arm), self.target, &self.consts)
    }

    fn interval(&self) -> IntervalKind {
        IntervalKind::Clt
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MmiResult {
    pub feature: usize,
    /// Final estimate per feature.
    pub estimates: Vec<f64>,
    /// Rows sampled per feature (all `n` for exactly evaluated features).
    pub samples: Vec<u64>,
    pub exact: Vec<bool>,
    pub ledger: EvalLedger,
}

fn check_target(features: &DenseMatrix, target: &[f64]) -> Result<()> {
    if target.len() != features.n() {
        return Err(Error::DimensionMismatch {
            expected: features.n(),
            got: target.len(),
        });
    }
    if features.n() < 2 || features.d() == 0 {
        return Err(Error::invalid("need at least two rows and one feature"));
    }
    if target.iter().all(|&y| y == target[0]) {
        return Err(Error::Degenerate(
            "target is constant, so no feature carries information about it".into(),
        ));
    }
    Ok(())
}

pub fn select_feature(
    features: &DenseMatrix,
    target: &[f64],
    cfg: &BanditConfig,
) -> Result<MmiResult> {
    select_feature_with(features, target, KlConstants::default(), cfg)
}

/// The feature with the largest mutual information with `target`. The race
/// always maximizes, whatever `cfg.objective` says, and warms every feature
/// up to [`MIN_ROWS`] rows when `cfg.warmup_pulls` is unset.
pub fn select_feature_with(
    features: &DenseMatrix,
    target: &[f64],
    consts: KlConstants,
    cfg: &BanditConfig,
) -> Result<MmiResult> {
    check_target(features, target)?;
    let d = features.d();
    let mut src = MmiArms {
        features,
        target,
        consts,
        states: (0..d).map(MIArmState::new).collect(),
        perms: vec![LazyPermutation::new(features.n()); d],
    };
    let mut cfg = cfg.clone().with_objective(Objective::Maximize);
    if cfg.warmup_pulls.is_none() {
        cfg = cfg.with_warmup(MIN_ROWS);
    }
    let best = Engine::new(cfg)?.best_k(&mut src, 1)?;
    Ok(MmiResult {
        feature: best.arms[0],
        estimates: best.states.iter().map(|s| s.mean()).collect(),
        samples: best
            .states
            .iter()
            .map(|s| {
                if s.exact {
                    features.n() as u64
                } else {
                    s.pulls()
                }
            })
            .collect(),
        exact: best.states.iter().map(|s| s.exact).collect(),
        ledger: best.ledger,
    })
}
