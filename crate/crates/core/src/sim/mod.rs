//! The interaction protocol, pseudo-metrics and experiment drivers.

mod coverage;
mod output;
mod rng;
mod sweep;

pub use coverage::{coverage_experiment, CoverageConfig, CoverageRow, CoverageTable};
pub use output::{write_allocations_csv, write_run, write_summary, write_trace_csv, write_trace_jsonl, OutputFiles, TraceFormat, TRACE_HEADER};
pub use rng::{stream_seed, EpisodeRng, Stream};
pub use sweep::{gamma_target_instance, plan_sweep, SweepParam, SweepPoint};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::allocation::Allocation;
use crate::instance::{Instance, PublicInfo, RewardModel};
use crate::oracle::{self, OracleConfig, OracleError};
use crate::policy::{self, Algorithm, ConfidenceState, Mode, PolicyConfig, PolicyDecision};

/// Instantaneous metrics below this are solver round-off and read as zero.
pub const METRIC_FLOOR: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("run refused: {0}")]
    Oracle(#[from] OracleError),
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("trace belongs to `{trace}`, not `{expected}`")]
    Mismatch { trace: String, expected: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub instance: Instance,
    pub algorithm: Algorithm,
    pub horizon: u64,
    pub epochs: u64,
    pub base_seed: u64,
    pub policy: PolicyConfig,
}

impl RunConfig {
    pub fn new(instance: Instance, algorithm: Algorithm, horizon: u64, epochs: u64, base_seed: u64) -> Self {
        Self {
            instance,
            algorithm,
            horizon,
            epochs,
            base_seed,
            policy: PolicyConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.horizon == 0 {
            return Err(SimError::Config("horizon must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(SimError::Config("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// One round of the protocol.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub epoch: u64,
    pub t: u64,
    pub context: usize,
    pub arm: usize,
    pub reward: f64,
    pub mode: Mode,
    pub pessimistic_feasible: bool,
    /// Whether the true means lay inside the bounds used for the decision.
    pub in_confidence_set: bool,
    pub surrogate_slack: f64,
    pub rho_radius: f64,
    pub instant_regret: f64,
    pub instant_violation: f64,
    pub cum_regret: f64,
    pub cum_violation: f64,
    pub cum_reward: f64,
    #[serde(skip)]
    pub allocation: Allocation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub instance: String,
    pub algorithm: Algorithm,
    pub epoch: u64,
    pub f_star: f64,
    pub records: Vec<RoundRecord>,
}

impl RunTrace {
    pub fn last(&self) -> &RoundRecord {
        self.records.last().expect("traces have at least one round")
    }

    pub fn terminal_regret(&self) -> f64 {
        self.last().cum_regret
    }

    pub fn terminal_violation(&self) -> f64 {
        self.last().cum_violation
    }

    /// Record of round `t` (1-based).
    pub fn at(&self, t: u64) -> &RoundRecord {
        &self.records[(t - 1) as usize]
    }
}

/// `((f* − f(μ, w))₊, Σ_k (λ_k − g_k(μ, w))₊)` with round-off floored.
pub fn instant_metrics(inst: &Instance, f_star: f64, w: &Allocation) -> (f64, f64) {
    let floor = |v: f64| if v > METRIC_FLOOR { v } else { 0.0 };
    let g = inst.weighted_means();
    let regret = floor(f_star - w.objective(g));
    let violation = w
        .revenues(g)
        .iter()
        .zip(inst.thresholds())
        .map(|(g, l)| floor(l - g))
        .sum();
    (regret, violation)
}

/// Draws one reward.
pub fn sample_reward(noise: RewardModel, mean: f64, z: f64, u: f64) -> f64 {
    match noise {
        RewardModel::Gaussian { sigma } => mean + sigma * z,
        RewardModel::Bernoulli => f64::from(u8::from(u < mean)),
        RewardModel::Deterministic => mean,
    }
}

/// Round-by-round driver of one episode.
pub struct EpisodeRunner {
    inst: Instance,
    info: PublicInfo,
    algorithm: Algorithm,
    cfg: PolicyConfig,
    f_star: f64,
    epoch: u64,
    state: ConfidenceState,
    rng: EpisodeRng,
    cum: (f64, f64, f64),
}

impl EpisodeRunner {
    pub fn new(inst: &Instance, algorithm: Algorithm, f_star: f64, base_seed: u64, epoch: u64, cfg: PolicyConfig) -> Self {
        Self {
            info: inst.public(),
            inst: inst.clone(),
            algorithm,
            cfg,
            f_star,
            epoch,
            state: ConfidenceState::new(inst.arms(), inst.contexts()),
            rng: EpisodeRng::new(base_seed, epoch),
            cum: (0.0, 0.0, 0.0),
        }
    }

    /// Plans with the oracle first; refuses infeasible instances.
    pub fn planned(inst: &Instance, algorithm: Algorithm, base_seed: u64, epoch: u64, cfg: PolicyConfig) -> Result<Self, SimError> {
        let plan = oracle::optimal_allocation(inst, &OracleConfig::default())?;
        Ok(Self::new(inst, algorithm, plan.f_star, base_seed, epoch, cfg))
    }

    /// History before the next round.
    pub fn state(&self) -> &ConfidenceState {
        &self.state
    }

    pub fn round(&self) -> u64 {
        self.state.round()
    }

    /// Plays one round and returns its record with the decision behind it.
    pub fn step_detailed(&mut self) -> (RoundRecord, PolicyDecision) {
        let t = self.state.round();
        let bounds = self.state.bounds_at_round(self.cfg.m_cap);
        let in_confidence_set = bounds.contains(self.inst.means());
        let decision = policy::decide_with(self.algorithm, &bounds, &self.state.mean_matrix(), &self.info, &self.cfg);
        let context = self.rng.context(self.inst.probs());
        let arm = self.rng.arm(decision.allocation.matrix().column(context));
        let (z, u) = self.rng.reward_noise(t);
        let reward = sample_reward(self.inst.noise(), self.inst.means()[(arm, context)], z, u);
        self.state.update(arm, context, reward);
        let (regret, violation) = instant_metrics(&self.inst, self.f_star, &decision.allocation);
        self.cum.0 += regret;
        self.cum.1 += violation;
        self.cum.2 += reward;
        let record = RoundRecord {
            epoch: self.epoch,
            t,
            context,
            arm,
            reward,
            mode: decision.mode,
            pessimistic_feasible: decision.pessimistic_feasible,
            in_confidence_set,
            surrogate_slack: decision.diagnostics.surrogate_slack,
            rho_radius: decision.diagnostics.rho_radius,
            instant_regret: regret,
            instant_violation: violation,
            cum_regret: self.cum.0,
            cum_violation: self.cum.1,
            cum_reward: self.cum.2,
            allocation: decision.allocation.clone(),
        };
        (record, decision)
    }

    pub fn step(&mut self) -> RoundRecord {
        self.step_detailed().0
    }
}

/// Runs epoch `epoch` of `config`.
pub fn run_episode(config: &RunConfig, epoch: u64) -> Result<RunTrace, SimError> {
    config.validate()?;
    let plan = oracle::optimal_allocation(&config.instance, &OracleConfig::default())?;
    Ok(episode_with_plan(config, plan.f_star, epoch))
}

fn episode_with_plan(config: &RunConfig, f_star: f64, epoch: u64) -> RunTrace {
    let mut runner = EpisodeRunner::new(&config.instance, config.algorithm, f_star, config.base_seed, epoch, config.policy);
    let records = (0..config.horizon).map(|_| runner.step()).collect();
    RunTrace {
        instance: config.instance.name().to_string(),
        algorithm: config.algorithm,
        epoch,
        f_star,
        records,
    }
}

/// Per-round cumulative series recomputed from the logged allocations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsSeries {
    pub cum_regret: Vec<f64>,
    pub cum_violation: Vec<f64>,
    pub cum_reward: Vec<f64>,
}

/// Pseudo-regret and pseudo-violation of `trace` against the true means.
pub fn compute_metrics(trace: &RunTrace, inst: &Instance, f_star: f64) -> Result<MetricsSeries, SimError> {
    if trace.instance != inst.name() || (trace.f_star - f_star).abs() > 1e-9 {
        return Err(SimError::Mismatch {
            trace: trace.instance.clone(),
            expected: inst.name().to_string(),
        });
    }
    let n = trace.records.len();
    let mut out = MetricsSeries {
        cum_regret: Vec::with_capacity(n),
        cum_violation: Vec::with_capacity(n),
        cum_reward: Vec::with_capacity(n),
    };
    let (mut r, mut v, mut rew) = (0.0, 0.0, 0.0);
    for rec in &trace.records {
        let (dr, dv) = instant_metrics(inst, f_star, &rec.allocation);
        r += dr;
        v += dv;
        rew += rec.reward;
        out.cum_regret.push(r);
        out.cum_violation.push(v);
        out.cum_reward.push(rew);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub mean: f64,
    /// Sample standard deviation (zero for a single epoch).
    pub std: f64,
    pub per_epoch: Vec<f64>,
}

impl Aggregate {
    pub fn from_values(values: Vec<f64>) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            per_epoch: values,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub instance: String,
    pub instance_source: Option<String>,
    pub algorithm: Algorithm,
    pub horizon: u64,
    pub epochs: u64,
    pub base_seed: u64,
    pub noise: RewardModel,
    pub thresholds: Vec<f64>,
    pub m_cap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleConstants {
    pub f_star: f64,
    pub gamma_star: f64,
    pub s_gamma: Option<f64>,
    pub rho_star: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub config: ConfigEcho,
    pub oracle: OracleConstants,
    pub terminal_regret: Aggregate,
    pub terminal_violation: Aggregate,
    pub terminal_reward: Aggregate,
    /// Fraction of rounds, over all epochs, where the pessimistic program
    /// was feasible.
    pub pessimistic_fraction: f64,
    pub fallback_rounds: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub traces: Vec<RunTrace>,
    pub summary: RunSummary,
}

/// Runs every epoch (in parallel) and aggregates in epoch order.
pub fn run(config: &RunConfig) -> Result<RunResult, SimError> {
    config.validate()?;
    let report = oracle::analyze(&config.instance, &OracleConfig::default())?;
    let constants = OracleConstants {
        f_star: report.f_star,
        gamma_star: report.gamma_star,
        s_gamma: report.s_gamma,
        rho_star: report.rho_star,
    };
    Ok(run_with_constants(config, constants))
}

/// Like [`run`] but skips the `ρ*` enumeration; `rho_star` and `s_gamma`
/// are left empty in the summary.
pub fn run_fast(config: &RunConfig) -> Result<RunResult, SimError> {
    config.validate()?;
    let plan = oracle::optimal_allocation(&config.instance, &OracleConfig::default())?;
    let constants = OracleConstants {
        f_star: plan.f_star,
        gamma_star: oracle::feasibility_margin(&config.instance)?,
        s_gamma: None,
        rho_star: None,
    };
    Ok(run_with_constants(config, constants))
}

fn run_with_constants(config: &RunConfig, oracle: OracleConstants) -> RunResult {
    let traces: Vec<RunTrace> = (0..config.epochs)
        .into_par_iter()
        .map(|e| episode_with_plan(config, oracle.f_star, e))
        .collect();
    let summary = summarize(config, oracle, &traces);
    RunResult { traces, summary }
}

pub fn summarize(config: &RunConfig, oracle: OracleConstants, traces: &[RunTrace]) -> RunSummary {
    let terminal = |f: fn(&RoundRecord) -> f64| Aggregate::from_values(traces.iter().map(|tr| f(tr.last())).collect());
    let rounds: usize = traces.iter().map(|t| t.records.len()).sum();
    let records = || traces.iter().flat_map(|t| &t.records);
    RunSummary {
        config: ConfigEcho {
            instance: config.instance.name().to_string(),
            instance_source: config.instance.source().map(str::to_string),
            algorithm: config.algorithm,
            horizon: config.horizon,
            epochs: config.epochs,
            base_seed: config.base_seed,
            noise: config.instance.noise(),
            thresholds: config.instance.thresholds().to_vec(),
            m_cap: config.policy.m_cap,
        },
        oracle,
        terminal_regret: terminal(|r| r.cum_regret),
        terminal_violation: terminal(|r| r.cum_violation),
        terminal_reward: terminal(|r| r.cum_reward),
        pessimistic_fraction: records().filter(|r| r.pessimistic_feasible).count() as f64 / rounds as f64,
        fallback_rounds: records().filter(|r| r.mode == Mode::Fallback).count() as u64,
    }
}
