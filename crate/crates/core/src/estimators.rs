//! Additive distance estimators, running moments and confidence intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound applied to estimated standard deviations before building an
/// interval, so a run of identical samples never produces a zero-width
/// interval on an arm that has not been evaluated exactly.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Welford accumulator for the mean and second central moment of a stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningEstimate {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl RunningEstimate {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds one sample in, O(1).
    pub fn update(&mut self, sample: f64) {
        self.count += 1;
        let delta = sample - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (sample - self.mean);
    }

    /// Returns a copy with `sample` folded in.
    pub fn updated(mut self, sample: f64) -> Self {
        self.update(sample);
        self
    }

    /// `sqrt(m2 / max(count - 1, 1))`, without the floor.
    pub fn sigma_hat(&self) -> f64 {
        let dof = self.count.saturating_sub(1).max(1) as f64;
        (self.m2.max(0.0) / dof).sqrt()
    }

    pub fn from_samples(samples: &[f64]) -> Self {
        samples.iter().fold(Self::new(), |est, &x| est.updated(x))
    }
}

/// A confidence interval `[lcb, ucb]`; `width = ucb - lcb`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBound {
    pub lcb: f64,
    pub ucb: f64,
    pub width: f64,
}

impl ConfidenceBound {
    pub fn around(center: f64, radius: f64) -> Self {
        Self {
            lcb: center - radius,
            ucb: center + radius,
            width: 2.0 * radius,
        }
    }

    pub fn exact(value: f64) -> Self {
        Self {
            lcb: value,
            ucb: value,
            width: 0.0,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lcb <= value && value <= self.ucb
    }
}

/// Half-width of a `(1 - delta)` interval for the mean of `count`
/// `sigma`-sub-Gaussian samples: `sqrt(2 sigma^2 ln(2/delta) / count)`.
pub fn sub_gaussian_radius(sigma: f64, delta: f64, count: u64) -> f64 {
    (2.0 * sigma * sigma * (2.0 / delta).ln() / count as f64).sqrt()
}

/// Interval around the running mean using the per-arm sigma estimate.
///
/// Exact arms get a zero-width interval. An arm with no samples that is not
/// exact has no interval at all.
pub fn confidence(est: &RunningEstimate, delta: f64, exact: bool) -> Result<ConfidenceBound> {
    if exact {
        return Ok(ConfidenceBound::exact(est.mean));
    }
    if est.count == 0 {
        return Err(Error::state(
            "interval requested before any sample was drawn",
        ));
    }
    let sigma = est.sigma_hat().max(SIGMA_FLOOR);
    Ok(ConfidenceBound::around(
        est.mean,
        sub_gaussian_radius(sigma, delta, est.count),
    ))
}

/// Per-coordinate term whose average over coordinates is the arm value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CoordMetric {
    /// `(a - b)^2`
    #[default]
    SqEuclidean,
    /// `|a - b|`
    L1,
    /// `|a - b|^p`
    Lp(f64),
}

impl CoordMetric {
    #[inline]
    pub fn term(self, a: f64, b: f64) -> f64 {
        let diff = a - b;
        match self {
            CoordMetric::SqEuclidean => diff * diff,
            CoordMetric::L1 => diff.abs(),
            CoordMetric::Lp(p) => diff.abs().powf(p),
        }
    }

    /// Sum of per-coordinate terms over two equal-length rows.
    pub fn row_sum(self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            CoordMetric::SqEuclidean => x
                .iter()
                .zip(y)
                .map(|(a, b)| {
                    let d = a - b;
                    d * d
                })
                .sum(),
            CoordMetric::L1 => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            CoordMetric::Lp(p) => x.iter().zip(y).map(|(a, b)| (a - b).abs().powf(p)).sum(),
        }
    }
}

/// `(x_t - y_t)^2` for one coordinate.
pub fn sample_sq_coord(x: &[f64], y: &[f64], t: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if t >= x.len() {
        return Err(Error::OutOfRange {
            index: t,
            len: x.len(),
        });
    }
    Ok(CoordMetric::SqEuclidean.term(x[t], y[t]))
}

/// `(1/d) sum_t (x_t - y_t)^2`.
pub fn exact_mean(x: &[f64], y: &[f64]) -> Result<f64> {
    exact_mean_with(CoordMetric::SqEuclidean, x, y)
}

pub fn exact_mean_with(metric: CoordMetric, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::invalid("rows have zero dimension"));
    }
    Ok(metric.row_sum(x, y) / x.len() as f64)
}

/// A smooth scalar map `g` applied on top of an estimable mean, with bounds
/// `|g'| <= g_prime_bound` and `|g''| <= g_second_bound` asserted by the caller
/// over the range the estimates can take.
#[derive(Debug, Clone, Copy)]
pub struct SmoothWrap {
    pub g: fn(f64) -> f64,
    pub g_prime: fn(f64) -> f64,
    pub g_prime_bound: f64,
    pub g_second_bound: f64,
}

impl SmoothWrap {
    pub fn identity() -> Self {
        Self {
            g: |x| x,
            g_prime: |_| 1.0,
            g_prime_bound: 1.0,
            g_second_bound: 0.0,
        }
    }

    /// `g = sqrt` on `[lower, inf)`.
    pub fn sqrt_above(lower: f64) -> Self {
        Self {
            g: |x| x.max(0.0).sqrt(),
            g_prime: |x| 0.5 / x.sqrt(),
            g_prime_bound: 0.5 / lower.sqrt(),
            g_second_bound: 0.25 / lower.powf(1.5),
        }
    }

    /// Interval on `g(mean)` from an interval of radius `radius` on the mean:
    /// first-order delta-method term plus a second-order bias guard.
    pub fn bound(&self, mean: f64, radius: f64) -> Result<ConfidenceBound> {
        let center = (self.g)(mean);
        if !center.is_finite() {
            return Err(Error::Degenerate(format!(
                "transform is not finite at mean {mean}"
            )));
        }
        if radius == 0.0 {
            return Ok(ConfidenceBound::exact(center));
        }
        let slope = (self.g_prime)(mean).abs();
        let slope = if slope.is_finite() {
            slope.min(self.g_prime_bound)
        } else {
            self.g_prime_bound
        };
        let half = slope * radius + 0.5 * self.g_second_bound * radius * radius;
        Ok(ConfidenceBound::around(center, half))
    }
}

/// Interval on `g(f)` built from the running estimate of `f`.
pub fn delta_confidence(
    est: &RunningEstimate,
    wrap: &SmoothWrap,
    delta: f64,
    exact: bool,
) -> Result<ConfidenceBound> {
    let base = confidence(est, delta, exact)?;
    wrap.bound(est.mean, 0.5 * base.width)
}
