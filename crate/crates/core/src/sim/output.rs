//! Trace and summary files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{RoundRecord, RunResult, RunSummary, RunTrace, SimError};

pub const TRACE_HEADER: [&str; 12] = [
    "epoch",
    "t",
    "context",
    "arm",
    "reward",
    "mode",
    "pessimistic_feasible",
    "instant_regret",
    "instant_violation",
    "cum_regret",
    "cum_violation",
    "cum_reward",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TraceFormat {
    #[default]
    Csv,
    /// One JSON object per logged round.
    Json,
}

/// Rounds `1, 1 + stride, 1 + 2·stride, …` and always the last one.
fn logged(t: u64, horizon: u64, stride: u64) -> bool {
    (t - 1).is_multiple_of(stride.max(1)) || t == horizon
}

fn logged_records(trace: &RunTrace, stride: u64) -> impl Iterator<Item = &RoundRecord> {
    let horizon = trace.records.len() as u64;
    trace.records.iter().filter(move |r| logged(r.t, horizon, stride))
}

/// Writes the per-round trace. Arms and contexts are 1-based in files.
pub fn write_trace_csv<W: Write>(out: W, traces: &[RunTrace], stride: u64) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for trace in traces {
        for r in logged_records(trace, stride) {
            w.write_record([
                r.epoch.to_string(),
                r.t.to_string(),
                (r.context + 1).to_string(),
                (r.arm + 1).to_string(),
                r.reward.to_string(),
                r.mode.as_str().to_string(),
                r.pessimistic_feasible.to_string(),
                r.instant_regret.to_string(),
                r.instant_violation.to_string(),
                r.cum_regret.to_string(),
                r.cum_violation.to_string(),
                r.cum_reward.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonRow<'a> {
    epoch: u64,
    t: u64,
    context: usize,
    arm: usize,
    reward: f64,
    mode: &'a str,
    pessimistic_feasible: bool,
    instant_regret: f64,
    instant_violation: f64,
    cum_regret: f64,
    cum_violation: f64,
    cum_reward: f64,
}

/// JSON Lines variant of [`write_trace_csv`].
pub fn write_trace_jsonl<W: Write>(mut out: W, traces: &[RunTrace], stride: u64) -> Result<(), SimError> {
    for trace in traces {
        for r in logged_records(trace, stride) {
            let row = JsonRow {
                epoch: r.epoch,
                t: r.t,
                context: r.context + 1,
                arm: r.arm + 1,
                reward: r.reward,
                mode: r.mode.as_str(),
                pessimistic_feasible: r.pessimistic_feasible,
                instant_regret: r.instant_regret,
                instant_violation: r.instant_violation,
                cum_regret: r.cum_regret,
                cum_violation: r.cum_violation,
                cum_reward: r.cum_reward,
            };
            serde_json::to_writer(&mut out, &row)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes `epoch,t,w_1_1,…,w_K_C` every `stride` rounds.
pub fn write_allocations_csv<W: Write>(out: W, traces: &[RunTrace], stride: u64) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    let Some(first) = traces.first().and_then(|t| t.records.first()) else {
        w.flush()?;
        return Ok(());
    };
    let (arms, contexts) = first.allocation.matrix().shape();
    let mut header = vec!["epoch".to_string(), "t".to_string()];
    for k in 1..=arms {
        for c in 1..=contexts {
            header.push(format!("w_{k}_{c}"));
        }
    }
    w.write_record(&header)?;
    for trace in traces {
        for r in logged_records(trace, stride) {
            let mut row = vec![r.epoch.to_string(), r.t.to_string()];
            for k in 0..arms {
                for c in 0..contexts {
                    row.push(r.allocation.get(k, c).to_string());
                }
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> Result<(), SimError> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, summary)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFiles {
    pub trace: PathBuf,
    pub allocations: PathBuf,
    pub summary: PathBuf,
}

/// Writes trace, allocations and summary into `dir` (created if needed).
pub fn write_run(dir: &Path, result: &RunResult, format: TraceFormat, log_stride: u64, alloc_stride: u64) -> Result<OutputFiles, SimError> {
    fs::create_dir_all(dir)?;
    let trace = dir.join(match format {
        TraceFormat::Csv => "trace.csv",
        TraceFormat::Json => "trace.jsonl",
    });
    let out = BufWriter::new(File::create(&trace)?);
    match format {
        TraceFormat::Csv => write_trace_csv(out, &result.traces, log_stride)?,
        TraceFormat::Json => write_trace_jsonl(out, &result.traces, log_stride)?,
    }
    let allocations = dir.join("allocations.csv");
    write_allocations_csv(BufWriter::new(File::create(&allocations)?), &result.traces, alloc_stride)?;
    let summary = dir.join("summary.json");
    write_summary(&summary, &result.summary)?;
    Ok(OutputFiles {
        trace,
        allocations,
        summary,
    })
}
