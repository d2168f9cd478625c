use std::path::Path;

use amco::oracle::AccuracyReport;
use amco::{BanditConfig, EvalLedger};
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Machine-readable outcome of one run. Everything except `wall_time_secs`
/// is a pure function of the invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub application: String,
    pub seed: u64,
    pub config: BanditConfig,
    /// Application parameters and input description.
    pub params: Value,
    pub result: Value,
    pub ledger: EvalLedger,
    /// Cost of the exact computation in the same units as the ledger.
    pub brute_total: Option<f64>,
    /// `brute_total / effective_total`.
    pub gain: f64,
    pub accuracy: Option<AccuracyReport>,
    pub wall_time_secs: f64,
}

impl RunReport {
    pub fn new(application: &str, config: &BanditConfig, params: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            application: application.to_string(),
            seed: config.seed,
            config: config.clone(),
            params,
            result: Value::Null,
            ledger: EvalLedger::default(),
            brute_total: None,
            gain: 0.0,
            accuracy: None,
            wall_time_secs: 0.0,
        }
    }

    pub fn with_ledger(mut self, ledger: EvalLedger) -> Self {
        self.brute_total = (ledger.brute_total > 0.0).then_some(ledger.brute_total);
        self.gain = ledger.gain();
        self.ledger = ledger;
        self
    }

    pub fn write(&self, path: Option<&Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        match path {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}
