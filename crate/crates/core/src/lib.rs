//! Adaptive Monte Carlo optimization.
//!
//! Many problems of the form `min_i f(i)` over a finite set have an `f` that is
//! an average of many cheap terms: a squared distance is an average over
//! coordinates, an average-linkage distance is an average over point pairs.
//! Instead of evaluating every `f(i)` exactly, this crate treats each candidate
//! as a bandit arm, draws random terms to estimate `f(i)`, and focuses the
//! sampling on candidates that could still be optimal. An arm sampled as often
//! as an exact evaluation would cost is evaluated exactly instead.
//!
//! The [`bandit`] engine is generic; [`neighbors`], [`hierarchical`] and
//! [`mmi`] build k-NN graphs, k-means assignments, medoids, average-linkage
//! dendrograms and mutual-information feature rankings on top of it.
//! [`oracle`] holds the exact reference implementations and accuracy metrics.

pub mod bandit;
pub mod data;
mod error;
pub mod estimators;
pub mod hierarchical;
pub mod mmi;
pub mod neighbors;
pub mod oracle;
pub mod sparse;
mod util;

pub use bandit::{
    run_best_approx, run_best_k, ArmCost, ArmSource, ArmState, BanditConfig, BestK,
    ConfidenceBound, Engine, EvalLedger, Objective, Observation, Replacement, SigmaMode,
};
pub use data::DenseMatrix;
pub use error::{Error, Result};
pub use sparse::SparseVector;
pub use util::{mix_seed, LazyPermutation};
