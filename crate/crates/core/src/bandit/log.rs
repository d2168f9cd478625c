use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PullEvent {
    Warmup,
    Pull,
    Exact,
    Certify,
}

/// One engine event with the arm's bounds after it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullRecord {
    pub step: u64,
    pub arm: u64,
    pub event: PullEvent,
    /// The drawn sample (or the reported estimate), absent for certifications.
    pub sample: Option<f64>,
    /// Absent when the arm has no interval yet. Under pooled sigma the logged
    /// bounds use the arm's own sigma estimate.
    pub lcb: Option<f64>,
    pub ucb: Option<f64>,
}

/// Writes one JSON object per line.
pub fn write_ndjson<W: Write>(records: &[PullRecord], mut out: W) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r)
            .map_err(|e| Error::state(format!("cannot serialize pull record: {e}")))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<pull log>", e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ndjson_round_trip() {
        let recs = vec![
            PullRecord {
                step: 0,
                arm: 3,
                event: PullEvent::Warmup,
                sample: Some(1.5),
                lcb: None,
                ucb: None,
            },
            PullRecord {
                step: 1,
                arm: 3,
                event: PullEvent::Certify,
                sample: None,
                lcb: Some(1.0),
                ucb: Some(2.0),
            },
        ];
        let mut buf = Vec::new();
        write_ndjson(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        let back: PullRecord = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
        assert_eq!(back, recs[1]);
    }
}
