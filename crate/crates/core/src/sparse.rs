//! Sparse vectors and the unbiased sparse squared-distance estimator.
//!
//! For nonzero sets `S0`, `S1` of sizes `n0`, `n1`, one draw picks `t0` from
//! `S0` and `t1` from `S1` and returns
//!
//! ```text
//! n0/(2d) (x0[t0] - x1[t0])^2 (1 + [x1[t0] = 0])
//!   + n1/(2d) (x0[t1] - x1[t1])^2 (1 + [x0[t1] = 0])
//! ```
//!
//! whose expectation is `(1/d) sum_j (x0[j] - x1[j])^2`. Each draw costs two
//! uniform nonzero draws and two membership probes; the union of supports is
//! never formed.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::ArmCost;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    values: Vec<f64>,
    coords: Vec<usize>,
    index: HashMap<usize, usize>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            values: Vec::new(),
            coords: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Builds from `(coordinate, value)` pairs. Zero values are dropped;
    /// repeated coordinates, out-of-range coordinates and non-finite values
    /// are errors.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut v = Self::zeros(dim);
        for (t, x) in pairs {
            if t >= dim {
                return Err(Error::OutOfRange { index: t, len: dim });
            }
            if !x.is_finite() {
                return Err(Error::invalid(format!(
                    "non-finite value at coordinate {t}"
                )));
            }
            if v.index.contains_key(&t) {
                return Err(Error::invalid(format!("coordinate {t} given twice")));
            }
            if x != 0.0 {
                v.push_new(t, x);
            }
        }
        Ok(v)
    }

    pub fn from_dense(row: &[f64]) -> Result<Self> {
        Self::from_pairs(row.len(), row.iter().copied().enumerate())
    }

    fn push_new(&mut self, t: usize, x: f64) {
        self.index.insert(t, self.values.len());
        self.values.push(x);
        self.coords.push(t);
    }

    /// Writes one coordinate. Setting zero removes it from the support.
    pub fn set(&mut self, t: usize, x: f64) -> Result<()> {
        if t >= self.dim {
            return Err(Error::OutOfRange {
                index: t,
                len: self.dim,
            });
        }
        if !x.is_finite() {
            return Err(Error::invalid(format!(
                "non-finite value at coordinate {t}"
            )));
        }
        match (self.index.get(&t).copied(), x != 0.0) {
            (Some(slot), true) => self.values[slot] = x,
            (Some(slot), false) => {
                self.index.remove(&t);
                self.values.swap_remove(slot);
                self.coords.swap_remove(slot);
                if slot < self.coords.len() {
                    self.index.insert(self.coords[slot], slot);
                }
            }
            (None, true) => self.push_new(t, x),
            (None, false) => {}
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Value at `t`, zero when absent or out of range.
    pub fn get(&self, t: usize) -> f64 {
        self.index.get(&t).map_or(0.0, |&s| self.values[s])
    }

    pub fn membership(&self, t: usize) -> Result<(bool, f64)> {
        if t >= self.dim {
            return Err(Error::OutOfRange {
                index: t,
                len: self.dim,
            });
        }
        Ok(match self.index.get(&t) {
            Some(&s) => (true, self.values[s]),
            None => (false, 0.0),
        })
    }

    /// Uniform over the nonzero coordinates.
    pub fn sample_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        if self.values.is_empty() {
            return Err(Error::invalid(
                "cannot sample a nonzero coordinate of a zero vector",
            ));
        }
        Ok(self.coords[rng.random_range(0..self.coords.len())])
    }

    /// `(coordinate, value)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coords.iter().copied().zip(self.values.iter().copied())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (t, x) in self.iter() {
            out[t] = x;
        }
        out
    }
}

fn check_dims(x0: &SparseVector, x1: &SparseVector) -> Result<()> {
    if x0.dim != x1.dim {
        return Err(Error::DimensionMismatch {
            expected: x0.dim,
            got: x1.dim,
        });
    }
    Ok(())
}

/// `d~` for the draw that picked storage slot `s0` of `x0` and `s1` of `x1`.
///
/// When one vector has no nonzeros its slot is ignored and the other side is
/// scaled by `n_other / d` (no halving), which keeps the draw unbiased.
pub fn sparse_term(x0: &SparseVector, x1: &SparseVector, s0: usize, s1: usize) -> f64 {
    let d = x0.dim as f64;
    let (n0, n1) = (x0.nnz(), x1.nnz());
    match (n0, n1) {
        (0, 0) => 0.0,
        (0, _) => n1 as f64 / d * x1.values[s1] * x1.values[s1],
        (_, 0) => n0 as f64 / d * x0.values[s0] * x0.values[s0],
        _ => {
            let a = x0.values[s0];
            let b = x1.get(x0.coords[s0]);
            let first =
                n0 as f64 / (2.0 * d) * (a - b) * (a - b) * if b == 0.0 { 2.0 } else { 1.0 };
            let c = x1.values[s1];
            let e = x0.get(x1.coords[s1]);
            let second =
                n1 as f64 / (2.0 * d) * (e - c) * (e - c) * if e == 0.0 { 2.0 } else { 1.0 };
            first + second
        }
    }
}

/// One draw of the unbiased sparse estimator.
pub fn sparse_sample<R: Rng + ?Sized>(
    x0: &SparseVector,
    x1: &SparseVector,
    rng: &mut R,
) -> Result<f64> {
    check_dims(x0, x1)?;
    let s0 = if x0.nnz() > 0 {
        rng.random_range(0..x0.nnz())
    } else {
        0
    };
    let s1 = if x1.nnz() > 0 {
        rng.random_range(0..x1.nnz())
    } else {
        0
    };
    Ok(sparse_term(x0, x1, s0, s1))
}

/// `(1/d) sum_j (x0[j] - x1[j])^2` by walking both supports.
pub fn sparse_exact(x0: &SparseVector, x1: &SparseVector) -> Result<f64> {
    check_dims(x0, x1)?;
    let mut acc = 0.0;
    for (t, a) in x0.iter() {
        let diff = a - x1.get(t);
        acc += diff * diff;
    }
    for (t, b) in x1.iter() {
        if !x0.index.contains_key(&t) {
            acc += b * b;
        }
    }
    Ok(acc / x0.dim as f64)
}

/// Average of `d~` over every `(t0, t1)` draw pair.
pub fn sparse_enumerated_mean(x0: &SparseVector, x1: &SparseVector) -> Result<f64> {
    check_dims(x0, x1)?;
    let r0 = x0.nnz().max(1);
    let r1 = x1.nnz().max(1);
    let mut acc = 0.0;
    for s0 in 0..r0 {
        for s1 in 0..r1 {
            acc += sparse_term(x0, x1, s0, s1);
        }
    }
    Ok(acc / (r0 * r1) as f64)
}

/// Cost of one sparse pair arm: two touches per draw, the union walk on exact
/// evaluation, `n0 + n1` touches to one effective evaluation.
pub fn sparse_pair_cost(x0: &SparseVector, x1: &SparseVector) -> ArmCost {
    let total = (x0.nnz() + x1.nnz()).max(1) as u64;
    ArmCost {
        pull_touches: 2,
        exact_touches: total,
        full_touches: total,
        unit: total as f64,
    }
}

/// Draws after which the union walk is no more expensive than sampling.
pub fn sparse_max_pulls(x0: &SparseVector, x1: &SparseVector) -> u64 {
    ((x0.nnz() + x1.nnz()) as u64).div_ceil(2).max(1)
}
