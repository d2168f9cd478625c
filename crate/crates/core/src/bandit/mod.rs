//! Best-k arm identification with an exact-evaluation fallback.
//!
//! The engine is a UCB-style race: every arm keeps a running estimate and a
//! confidence interval, the arm with the most optimistic bound is pulled next,
//! and an arm is emitted once its interval lies strictly on the good side of
//! every other arm still racing. An arm sampled `max_pulls` times is evaluated
//! exactly and keeps a zero-width interval from then on.
//!
//! Applications describe their arms through [`ArmSource`].

mod engine;
mod ledger;
mod log;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub(crate) use engine::{race, Slot};
pub use engine::{run_best_approx, run_best_k, select_next, BestK, Candidate, Engine};
pub use ledger::EvalLedger;
pub use log::{write_ndjson, PullEvent, PullRecord};

use crate::error::{Error, Result};
pub use crate::estimators::ConfidenceBound;
use crate::estimators::{RunningEstimate, SmoothWrap};

/// Per-arm random stream. Each arm owns one, seeded from the run seed and the
/// arm id, so an arm's sample sequence does not depend on how pulls interleave.
pub type ArmRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// Welford estimate per arm, refreshed on every pull.
    #[default]
    PerArm,
    /// Second moments pooled across all racing arms.
    Global,
    /// A known sub-Gaussian parameter.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Replacement {
    #[default]
    With,
    Without,
}

/// How an arm's spread turns into an interval radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntervalKind {
    /// `sqrt(2 sigma^2 ln(2/delta) / l)`
    #[default]
    SubGaussian,
    /// `z_{1 - delta/2} * s / sqrt(l)`
    Clt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditConfig {
    /// Per-interval failure probability, in (0, 1).
    pub delta: f64,
    /// Approximation slack; 0 runs the exact race.
    pub epsilon: f64,
    /// Pulls per arm before the race starts. `None` uses `max(2, ceil(log2 n))`.
    pub warmup_pulls: Option<u32>,
    pub sigma_mode: SigmaMode,
    pub replacement: Replacement,
    pub seed: u64,
    pub objective: Objective,
}

impl Default for BanditConfig {
    fn default() -> Self {
        Self {
            delta: 0.01,
            epsilon: 0.0,
            warmup_pulls: None,
            sigma_mode: SigmaMode::PerArm,
            replacement: Replacement::With,
            seed: 0,
            objective: Objective::Minimize,
        }
    }
}

impl BanditConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_sigma_mode(mut self, mode: SigmaMode) -> Self {
        self.sigma_mode = mode;
        self
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn with_warmup(mut self, pulls: u32) -> Self {
        self.warmup_pulls = Some(pulls);
        self
    }

    pub fn with_replacement(mut self, replacement: Replacement) -> Self {
        self.replacement = replacement;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        if self.warmup_pulls == Some(0) {
            return Err(Error::invalid("warmup_pulls must be at least 1"));
        }
        if let SigmaMode::Fixed(s) = self.sigma_mode {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid(format!(
                    "fixed sigma must be positive, got {s}"
                )));
            }
        }
        Ok(())
    }
}

/// `2 / (n^3 d)`: the per-interval failure probability under which every
/// interval of an `n`-point, `d`-dimensional run holds with probability
/// `1 - 1/n^2`.
pub fn theory_delta(n: usize, d: usize) -> f64 {
    2.0 / ((n as f64).powi(3) * d as f64)
}

/// Sampling state of one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmState {
    pub id: u64,
    pub estimate: RunningEstimate,
    /// Spread reported by arms that supply their own estimate
    /// ([`Observation::Estimate`]); `None` for plain sample averages.
    pub spread: Option<f64>,
    pub exact: bool,
    pub max_pulls: u64,
}

impl ArmState {
    pub fn new(id: u64, max_pulls: u64) -> Self {
        Self {
            id,
            estimate: RunningEstimate::new(),
            spread: None,
            exact: false,
            max_pulls,
        }
    }

    pub fn pulls(&self) -> u64 {
        self.estimate.count
    }

    pub fn mean(&self) -> f64 {
        self.estimate.mean
    }
}

/// Cost model of one arm, in raw touches (coordinates, samples, rows).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmCost {
    pub pull_touches: u64,
    pub exact_touches: u64,
    /// Touches of a full exact evaluation; caps the arm's effective count.
    pub full_touches: u64,
    /// Touches that make up one effective evaluation.
    pub unit: f64,
}

impl ArmCost {
    /// One coordinate per pull, `d` coordinates per exact evaluation.
    pub fn dense(d: usize) -> Self {
        Self {
            pull_touches: 1,
            exact_touches: d as u64,
            full_touches: d as u64,
            unit: d as f64,
        }
    }

    pub fn effective(&self, touches: u64) -> f64 {
        touches.min(self.full_touches) as f64 / self.unit
    }
}

/// Result of one pull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    /// An unbiased sample of the arm value; the engine averages samples.
    Sample(f64),
    /// The arm recomputed its own estimate from `samples` underlying draws,
    /// with `spread` the standard deviation of one draw's contribution (for
    /// estimators that are not plain sample averages).
    Estimate {
        value: f64,
        spread: f64,
        samples: u64,
    },
}

/// The arm contract an application hands to the engine.
pub trait ArmSource {
    fn num_arms(&self) -> usize;

    /// Pulls after which the arm is evaluated exactly instead.
    fn max_pulls(&self, arm: usize) -> u64;

    /// `pull_touches` and `exact_touches` are read just before each pull or
    /// exact evaluation and may change as the arm progresses; `full_touches`
    /// and `unit` are read once when the arm enters a race.
    fn cost(&self, arm: usize) -> ArmCost;

    fn pull(&mut self, arm: usize, rng: &mut ArmRng) -> Result<Observation>;

    fn exact(&mut self, arm: usize) -> Result<f64>;

    /// Stable id used for tie-breaking and for seeding the arm's stream.
    fn arm_id(&self, arm: usize) -> u64 {
        arm as u64
    }

    fn interval(&self) -> IntervalKind {
        IntervalKind::SubGaussian
    }

    /// Optional smooth map applied to the arm value before comparison.
    fn transform(&self) -> Option<&SmoothWrap> {
        None
    }
}

/// Arms described by two closures.
pub struct FnArms<P, X> {
    max_pulls: Vec<u64>,
    puller: P,
    exact: X,
}

impl<P, X> FnArms<P, X>
where
    P: FnMut(usize, &mut ArmRng) -> Result<f64>,
    X: FnMut(usize) -> Result<f64>,
{
    pub fn new(max_pulls: Vec<u64>, puller: P, exact: X) -> Self {
        Self {
            max_pulls,
            puller,
            exact,
        }
    }

    pub fn uniform(n: usize, max_pulls: u64, puller: P, exact: X) -> Self {
        Self::new(vec![max_pulls; n], puller, exact)
    }
}

impl<P, X> ArmSource for FnArms<P, X>
where
    P: FnMut(usize, &mut ArmRng) -> Result<f64>,
    X: FnMut(usize) -> Result<f64>,
{
    fn num_arms(&self) -> usize {
        self.max_pulls.len()
    }

    fn max_pulls(&self, arm: usize) -> u64 {
        self.max_pulls[arm]
    }

    fn cost(&self, arm: usize) -> ArmCost {
        let m = self.max_pulls[arm].max(1);
        ArmCost {
            pull_touches: 1,
            exact_touches: m,
            full_touches: m,
            unit: m as f64,
        }
    }

    fn pull(&mut self, arm: usize, rng: &mut ArmRng) -> Result<Observation> {
        (self.puller)(arm, rng).map(Observation::Sample)
    }

    fn exact(&mut self, arm: usize) -> Result<f64> {
        (self.exact)(arm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(BanditConfig::default().validate().is_ok());
        assert!(BanditConfig::default().with_delta(0.0).validate().is_err());
        assert!(BanditConfig::default().with_delta(1.0).validate().is_err());
        assert!(BanditConfig::default()
            .with_epsilon(-0.1)
            .validate()
            .is_err());
        assert!(BanditConfig::default().with_warmup(0).validate().is_err());
        assert!(BanditConfig::default()
            .with_sigma_mode(SigmaMode::Fixed(0.0))
            .validate()
            .is_err());
    }

    #[test]
    fn theory_delta_value() {
        assert_eq!(theory_delta(10, 5), 2.0 / 5000.0);
    }

    #[test]
    fn effective_is_capped() {
        let c = ArmCost::dense(10);
        assert_eq!(c.effective(5), 0.5);
        assert_eq!(c.effective(25), 1.0);
    }
}
