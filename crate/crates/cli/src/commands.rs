use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use mabarc_core::instance::{catalog, catalog_get, load_instance, InstanceError};
use mabarc_core::oracle::{analyze, optimal_allocation, OracleConfig, OracleError, OracleReport, Plan};
use mabarc_core::sim::{self, plan_sweep, write_run, RunConfig, RunResult, SimError, SweepParam, TraceFormat};
use mabarc_core::{Instance, PairMatrix};
use serde::Serialize;
use thiserror::Error;

use crate::args::{InstanceArgs, ReportArgs, ReportFormat, RunArgs, TraceFormatArg};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Contract(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Contract(_) => 3,
        }
    }
}

impl From<InstanceError> for CliError {
    fn from(e: InstanceError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            other => CliError::Contract(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Oracle(o) => o.into(),
            SimError::Mismatch { .. } => CliError::Contract(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

pub fn resolve_instance(args: &InstanceArgs) -> Result<Instance, CliError> {
    let inst = match args.instance.strip_prefix("catalog:") {
        Some(name) => catalog_get(name, args.eps)?,
        None if args.eps.is_some() => {
            return Err(CliError::Usage("--eps only applies to catalog instances".into()));
        }
        None => load_instance(&args.instance)?,
    };
    Ok(match args.scale {
        Some(f) => inst.scaled(f)?,
        None => inst,
    })
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn matrix_csv(m: &PairMatrix) -> String {
    let mut out = String::from("arm");
    for c in 1..=m.contexts() {
        let _ = write!(out, ",c{c}");
    }
    out.push('\n');
    for k in 0..m.arms() {
        let _ = write!(out, "{}", k + 1);
        for c in 0..m.contexts() {
            let _ = write!(out, ",{}", m[(k, c)]);
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct SolveDoc<'a> {
    instance: &'a str,
    #[serde(flatten)]
    plan: &'a Plan,
}

pub fn solve(args: &ReportArgs) -> Result<String, CliError> {
    let inst = resolve_instance(&args.instance)?;
    let plan = optimal_allocation(&inst, &OracleConfig::default())?;
    Ok(match args.format {
        ReportFormat::Json => json(&SolveDoc {
            instance: inst.name(),
            plan: &plan,
        }),
        ReportFormat::Csv => matrix_csv(plan.allocation.matrix()),
        ReportFormat::Text => format!(
            "instance {} (K={}, |C|={})\nf* = {}\nw* =\n{}I* = {}\ndegenerate: {}\n",
            inst.name(),
            inst.arms(),
            inst.contexts(),
            plan.f_star,
            plan.allocation.matrix(),
            plan.active_set,
            plan.degenerate
        ),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

fn analyze_text(rep: &OracleReport, top: usize) -> String {
    let mut out = format!(
        "instance {}\nf* = {}\nw* =\n{}I* = {}\ndegenerate: {}\ngamma* = {}\nS_gamma* = {}\n",
        rep.instance,
        rep.f_star,
        rep.w_star.matrix(),
        rep.active_set,
        rep.degenerate,
        rep.gamma_star,
        opt(rep.s_gamma)
    );
    let g = &rep.optimal_set_gap;
    let _ = writeln!(out, "s(I*) = {}  rho(I*) = {}", g.s, g.rho);
    let _ = writeln!(
        out,
        "rho* = {}  ({} of {} candidate sets{})",
        opt(rep.rho_star),
        rep.enumeration.evaluated,
        rep.enumeration.family_size,
        if rep.enumeration.complete { "" } else { ", truncated" }
    );
    let _ = writeln!(out, "{:<40} {:>12} {:>12} {:>12} {:>12}", "set", "s", "L", "P", "rho");
    for gap in rep.top(top) {
        let _ = writeln!(
            out,
            "{:<40} {:>12.6} {:>12} {:>12} {:>12.6}",
            gap.set.to_string(),
            gap.s,
            gap.l.map_or("-".into(), |v| format!("{v:.6}")),
            gap.p.map_or("-".into(), |v| format!("{v:.6}")),
            gap.rho
        );
    }
    out
}

fn analyze_csv(rep: &OracleReport) -> String {
    let mut out = String::from("set,s,z,l,p,rho\n");
    for g in std::iter::once(&rep.optimal_set_gap).chain(&rep.per_set_gaps) {
        let _ = writeln!(out, "\"{}\",{},{},{},{},{}", g.set, g.s, opt(g.z), opt(g.l), opt(g.p), g.rho);
    }
    out
}

pub fn analyze_cmd(args: &ReportArgs, top: usize) -> Result<String, CliError> {
    let inst = resolve_instance(&args.instance)?;
    let rep = analyze(&inst, &OracleConfig::default())?;
    Ok(match args.format {
        ReportFormat::Json => json(&rep),
        ReportFormat::Csv => analyze_csv(&rep),
        ReportFormat::Text => analyze_text(&rep, top),
    })
}

fn trace_format(f: TraceFormatArg) -> TraceFormat {
    match f {
        TraceFormatArg::Csv => TraceFormat::Csv,
        TraceFormatArg::Json => TraceFormat::Json,
    }
}

fn execute(config: &RunConfig, no_gaps: bool) -> Result<RunResult, CliError> {
    Ok(if no_gaps { sim::run_fast(config)? } else { sim::run(config)? })
}

fn run_config(args: &RunArgs, instance: Instance) -> RunConfig {
    RunConfig::new(instance, args.alg, args.horizon, args.epochs, args.seed)
}

fn write(dir: &Path, result: &RunResult, args: &RunArgs) -> Result<(), CliError> {
    if args.log_stride == 0 || args.alloc_stride == 0 {
        return Err(CliError::Usage("strides must be at least 1".into()));
    }
    write_run(dir, result, trace_format(args.format), args.log_stride, args.alloc_stride)?;
    Ok(())
}

fn brief(result: &RunResult, dir: &Path) -> String {
    let s = &result.summary;
    format!(
        "{} on {}: T={} epochs={} R_T={:.4}±{:.4} V_T={:.4}±{:.4} -> {}\n",
        s.config.algorithm.as_str(),
        s.config.instance,
        s.config.horizon,
        s.config.epochs,
        s.terminal_regret.mean,
        s.terminal_regret.std,
        s.terminal_violation.mean,
        s.terminal_violation.std,
        dir.display()
    )
}

pub fn run_cmd(args: &RunArgs) -> Result<String, CliError> {
    let config = run_config(args, resolve_instance(&args.instance)?);
    config.validate()?;
    let result = execute(&config, args.no_gaps)?;
    write(&args.out, &result, args)?;
    Ok(brief(&result, &args.out))
}

#[derive(Serialize)]
struct ManifestPoint {
    value: f64,
    dir: Option<String>,
    gamma_star: Option<f64>,
    skipped: Option<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    param: String,
    algorithm: &'a str,
    base_instance: &'a str,
    horizon: u64,
    epochs: u64,
    base_seed: u64,
    points: Vec<ManifestPoint>,
}

pub fn sweep_cmd(args: &RunArgs, param: SweepParam, values: &[f64]) -> Result<String, CliError> {
    let base = run_config(args, resolve_instance(&args.instance)?);
    base.validate()?;
    fs::create_dir_all(&args.out)?;
    let mut out = String::new();
    let mut points = Vec::new();
    for (i, point) in plan_sweep(&base, param, values).into_iter().enumerate() {
        let Some(config) = point.config else {
            let reason = point.skipped.unwrap_or_default();
            eprintln!("warning: skipping {param}={}: {reason}", point.value);
            points.push(ManifestPoint {
                value: point.value,
                dir: None,
                gamma_star: None,
                skipped: Some(reason),
            });
            continue;
        };
        let name = format!("{i:02}-{param}={}", point.value);
        let dir = args.out.join(&name);
        let result = execute(&config, args.no_gaps)?;
        write(&dir, &result, args)?;
        out.push_str(&brief(&result, &dir));
        points.push(ManifestPoint {
            value: point.value,
            dir: Some(name),
            gamma_star: point.gamma_star,
            skipped: None,
        });
    }
    let manifest = Manifest {
        param: param.to_string(),
        algorithm: args.alg.as_str(),
        base_instance: base.instance.name(),
        horizon: base.horizon,
        epochs: base.epochs,
        base_seed: base.base_seed,
        points,
    };
    let path = args.out.join("manifest.json");
    fs::write(&path, json(&manifest))?;
    let _ = writeln!(out, "manifest -> {}", path.display());
    Ok(out)
}

#[derive(Serialize)]
struct CatalogRow {
    name: &'static str,
    description: &'static str,
    param: Option<&'static str>,
    default: Option<f64>,
    range: Option<&'static str>,
}

pub fn catalog_cmd(format: ReportFormat) -> Result<String, CliError> {
    let rows: Vec<CatalogRow> = catalog()
        .iter()
        .map(|e| CatalogRow {
            name: e.name,
            description: e.description,
            param: e.param.map(|p| p.name),
            default: e.param.map(|p| p.default),
            range: e.param.map(|p| p.range),
        })
        .collect();
    Ok(match format {
        ReportFormat::Json => json(&rows),
        ReportFormat::Csv => {
            let mut out = String::from("name,param,default,range,description\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},\"{}\",\"{}\"",
                    r.name,
                    r.param.unwrap_or(""),
                    opt(r.default).replace('-', ""),
                    r.range.unwrap_or(""),
                    r.description
                );
            }
            out
        }
        ReportFormat::Text => {
            let mut out = String::new();
            for r in &rows {
                let param = match (r.param, r.default, r.range) {
                    (Some(p), Some(d), Some(range)) => format!("{p}={d} in {range}"),
                    _ => String::new(),
                };
                let _ = writeln!(out, "catalog:{:<14} {:<22} {}", r.name, param, r.description);
            }
            out
        }
    })
}
