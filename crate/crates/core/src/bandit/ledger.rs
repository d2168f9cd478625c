use serde::{Deserialize, Serialize};

/// Effective-evaluation accounting.
///
/// Every arm has a full evaluation cost (`ArmCost::full_touches`) and a unit
/// (`ArmCost::unit`, the touches that make up one effective evaluation). The
/// effective total is the sum over arms of `min(touches, full) / unit`, so an
/// exactly evaluated dense pair counts as one distance evaluation no matter how
/// many samples preceded it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalLedger {
    /// Raw per-coordinate (or per-sample) evaluations, including exact fallbacks.
    pub coord_touches: u64,
    pub pulls: u64,
    pub exact_evals: u64,
    pub effective_total: f64,
    /// What evaluating every arm exactly would have cost, in the same units.
    pub brute_total: f64,
}

impl EvalLedger {
    pub fn merge(&mut self, other: &EvalLedger) {
        self.coord_touches += other.coord_touches;
        self.pulls += other.pulls;
        self.exact_evals += other.exact_evals;
        self.effective_total += other.effective_total;
        self.brute_total += other.brute_total;
    }

    /// Sums ledgers in iteration order; callers pass them in a fixed order so
    /// the floating-point totals are reproducible.
    pub fn sum<'a>(ledgers: impl IntoIterator<Item = &'a EvalLedger>) -> EvalLedger {
        ledgers
            .into_iter()
            .fold(EvalLedger::default(), |mut acc, l| {
                acc.merge(l);
                acc
            })
    }

    /// `brute_total / effective_total`; zero when nothing was evaluated.
    pub fn gain(&self) -> f64 {
        if self.effective_total > 0.0 {
            self.brute_total / self.effective_total
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_adds_fields() {
        let a = EvalLedger {
            coord_touches: 10,
            pulls: 8,
            exact_evals: 1,
            effective_total: 1.5,
            brute_total: 4.0,
        };
        let total = EvalLedger::sum([&a, &a]);
        assert_eq!(total.coord_touches, 20);
        assert_eq!(total.pulls, 16);
        assert_eq!(total.exact_evals, 2);
        assert_eq!(total.effective_total, 3.0);
        assert_eq!(total.gain(), 8.0 / 3.0);
        assert_eq!(EvalLedger::default().gain(), 0.0);
    }
}
