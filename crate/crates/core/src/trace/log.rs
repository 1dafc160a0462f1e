//! Line-delimited JSON trace logs: one line per step, plus one marker line per
//! rejected scene.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::scenario::Sample;
use super::{ComponentValue, EnvState, Provenance, Trace};
use crate::num::Num;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    pub scenario: String,
    pub seed: u64,
    pub stream: String,
    pub scene: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub rejected: bool,
    pub env: BTreeMap<String, Num>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub value: BTreeMap<String, Num>,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: step {found} out of sequence (expected {expected})")]
    Sequence { line: usize, found: usize, expected: usize },
}

pub fn write_log<W: Write>(mut out: W, samples: &[Sample]) -> Result<(), LogError> {
    for sample in samples {
        match sample {
            Sample::Rejected { provenance, env } => {
                let rec = record(provenance, None, true, env, &ComponentValue::default());
                writeln!(out, "{}", serde_json::to_string(&rec).expect("serializable"))?;
            }
            Sample::Trace(trace) => {
                for (i, (env, value)) in trace.steps.iter().enumerate() {
                    let rec = record(&trace.provenance, Some(i), false, env, value);
                    writeln!(out, "{}", serde_json::to_string(&rec).expect("serializable"))?;
                }
            }
        }
    }
    Ok(())
}

fn record(p: &Provenance, step: Option<usize>, rejected: bool, env: &EnvState, value: &ComponentValue) -> LogRecord {
    LogRecord {
        scenario: p.scenario.clone(),
        seed: p.seed,
        stream: p.stream.clone(),
        scene: p.scene,
        step,
        rejected,
        env: env.vars.clone(),
        value: value.0.clone(),
    }
}

/// Reassembles samples from a log written by [`write_log`].
pub fn read_log<R: BufRead>(input: R) -> Result<Vec<Sample>, LogError> {
    let mut samples = Vec::new();
    let mut current: Option<Trace> = None;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LogRecord = serde_json::from_str(&line).map_err(|source| LogError::Json { line: i + 1, source })?;
        let provenance = Provenance { scenario: rec.scenario, seed: rec.seed, stream: rec.stream, scene: rec.scene };
        let env = EnvState { vars: rec.env, terminal: false };
        if rec.rejected {
            samples.extend(current.take().map(Sample::Trace));
            samples.push(Sample::Rejected { provenance, env });
            continue;
        }
        let step = rec.step.unwrap_or(0);
        let continues = current.as_ref().is_some_and(|t| t.provenance == provenance && step == t.steps.len());
        if !continues {
            samples.extend(current.take().map(Sample::Trace));
            if step != 0 {
                return Err(LogError::Sequence { line: i + 1, found: step, expected: 0 });
            }
            current = Some(Trace { steps: Vec::new(), provenance });
        }
        current.as_mut().expect("set above").steps.push((env, ComponentValue(rec.value)));
    }
    samples.extend(current.take().map(Sample::Trace));
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{draw, CoinScenario};

    #[test]
    fn round_trip() {
        let sc = CoinScenario { heads: 0.5, reject: 0.3, len: 4 };
        let obs = CoinScenario::observer();
        let samples: Vec<Sample> = (0..20).map(|i| draw(&sc, &obs, 5, "log", i).unwrap()).collect();
        let mut buf = Vec::new();
        write_log(&mut buf, &samples).unwrap();
        let back = read_log(buf.as_slice()).unwrap();
        assert_eq!(back.len(), samples.len());
        let mut again = Vec::new();
        write_log(&mut again, &back).unwrap();
        assert_eq!(buf, again);
        assert!(samples.iter().any(|s| matches!(s, Sample::Rejected { .. })));
    }
}
