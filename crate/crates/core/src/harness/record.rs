//! Stored trials: a header line naming the run followed by its transcript
//! as JSON lines. Replaying reruns the trial and compares byte for byte.

use serde::{Deserialize, Serialize};

use crate::attacks::Script;
use crate::error::ConfigError;

use super::trial::{run_trial, Scenario, ScenarioId, SimKind, TrialOptions, TrialSummary};

/// Version of every machine-readable output.
pub const SCHEMA: &str = "1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordHeader {
    pub schema: String,
    pub scenario: ScenarioId,
    pub sim: SimKind,
    pub seed: u64,
    pub options: TrialOptions,
    pub script: Script,
}

/// A header and the recorded transcript lines.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub header: RecordHeader,
    pub events: String,
}

impl Record {
    /// Runs the trial with recording on and captures it.
    pub fn capture(
        scenario: Scenario,
        script: &Script,
        seed: u64,
        opts: TrialOptions,
    ) -> Result<Record, ConfigError> {
        let opts = TrialOptions {
            record: true,
            ..opts
        };
        let trial = run_trial(scenario, script, seed, opts)?;
        Ok(Record {
            header: RecordHeader {
                schema: SCHEMA.into(),
                scenario: scenario.id,
                sim: scenario.sim,
                seed,
                options: opts,
                script: script.clone(),
            },
            events: trial.transcript.to_jsonl(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        out.push_str(&self.events);
        out
    }

    pub fn parse(text: &str) -> Result<Record, ConfigError> {
        let (head, events) = text.split_once('\n').unwrap_or((text, ""));
        let header: RecordHeader = serde_json::from_str(head)
            .map_err(|e| ConfigError::Other(format!("bad record header: {e}")))?;
        if header.schema != SCHEMA {
            return Err(ConfigError::Other(format!(
                "unsupported record schema {:?}",
                header.schema
            )));
        }
        header.script.validate()?;
        Ok(Record {
            header,
            events: events.to_string(),
        })
    }
}

/// Outcome of rerunning a stored trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Replay {
    pub identical: bool,
    pub events: usize,
    /// 1-based transcript line of the first mismatch.
    pub first_difference: Option<usize>,
    /// Summary of the rerun with wall time zeroed.
    pub summary: TrialSummary,
}

pub fn replay(rec: &Record) -> Result<Replay, ConfigError> {
    let h = &rec.header;
    let scenario = Scenario::new(h.scenario, h.sim)?;
    let trial = run_trial(
        scenario,
        &h.script,
        h.seed,
        TrialOptions {
            record: true,
            ..h.options
        },
    )?;
    let fresh = trial.transcript.to_jsonl();
    let first_difference = if fresh == rec.events {
        None
    } else {
        let mut a = rec.events.lines();
        let mut b = fresh.lines();
        let mut i = 1;
        loop {
            match (a.next(), b.next()) {
                (Some(x), Some(y)) if x == y => i += 1,
                _ => break Some(i),
            }
        }
    };
    Ok(Replay {
        identical: fresh == rec.events,
        events: trial.transcript.len(),
        first_difference,
        summary: trial.summary.stable(),
    })
}
