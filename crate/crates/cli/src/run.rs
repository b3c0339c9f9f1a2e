//! Mode dispatch.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use nehari_core::{
    blowup_rescale, check_bounded_m, check_monotone_dr, classify_scan, el_residual, energy_breakdown, extract_limit,
    gaussian_init, residual_of_limit_candidate, slope_grid, solve, sweep, validate_problem, BoundednessVerdict, Error,
    Field, Grid, MonotoneCheck, ProblemSpec, ScanVerdict, SolitonParams, SolveResult,
};
use serde::Serialize;

use crate::config::{Mode, Radius, Resolution, RunConfig};
use crate::output::{emit_liouville_csv, emit_profile_csv, emit_result_json, emit_trace_csv, write_json, Meta};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    ConfigError,
    NotConverged,
    InvariantViolation,
    CounterexampleFound,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::ConfigError => 1,
            ExitStatus::NotConverged => 2,
            ExitStatus::InvariantViolation => 3,
            ExitStatus::CounterexampleFound => 4,
        }
    }
}

/// A run that stopped before finishing its artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub status: ExitStatus,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

fn failure(status: ExitStatus, message: impl Into<String>) -> Failure {
    Failure {
        status,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let status = match e {
            Error::NotConverged | Error::SweepFailed | Error::RefineFailed(_) => ExitStatus::NotConverged,
            Error::AllTrivial | Error::OffManifold { .. } | Error::TailUndetermined(_) => {
                ExitStatus::InvariantViolation
            }
            _ => ExitStatus::ConfigError,
        };
        failure(status, e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    failure(ExitStatus::ConfigError, format!("cannot write {}: {e}", path.display()))
}

struct Context<'a> {
    config: &'a RunConfig,
    meta: Meta,
    out_dir: PathBuf,
    log: &'a mut dyn Write,
}

impl<'a> Context<'a> {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn say(&mut self, line: impl AsRef<str>) {
        // progress output is best effort
        let _ = writeln!(self.log, "{}", line.as_ref());
    }

    fn problem(&self) -> Result<&'a ProblemSpec, Failure> {
        self.config
            .problem
            .as_ref()
            .ok_or_else(|| failure(ExitStatus::ConfigError, "missing key `problem`"))
    }

    fn admissible_problem(&mut self) -> Result<&'a ProblemSpec, Failure> {
        let spec = self.problem()?;
        let report = validate_problem(spec);
        if let Some(v) = report.violations.first() {
            return Err(failure(
                ExitStatus::InvariantViolation,
                format!("problem is not admissible: {v}"),
            ));
        }
        Ok(spec)
    }

    fn grid(&self) -> Result<Grid, Failure> {
        let grid = self
            .config
            .grid
            .as_ref()
            .ok_or_else(|| failure(ExitStatus::ConfigError, "missing key `grid`"))?;
        let Radius::Single(r) = grid.radius else {
            return Err(failure(ExitStatus::ConfigError, "this mode takes a single radius `R`"));
        };
        Ok(match grid.resolution {
            Resolution::Spacing(h) => Grid::with_spacing(r, h)?,
            Resolution::Nodes(m) => Grid::new(r, m)?,
        })
    }

    fn profile(&self, field: &Field, name: &str) -> Result<PathBuf, Failure> {
        let path = self.path(name);
        emit_profile_csv(field, Some(&self.meta), &path).map_err(|e| io_failure(&path, e))?;
        Ok(path)
    }

    fn json<T: Serialize>(&self, value: &T, name: &str) -> Result<PathBuf, Failure> {
        let path = self.path(name);
        write_json(value, &path).map_err(|e| io_failure(&path, e))?;
        Ok(path)
    }
}

/// Runs one mode, writing artifacts under the configured output directory.
/// `log` receives a human-readable summary.
///
/// `Ok` carries the exit status of a run whose artifacts were all written;
/// a non-zero status there flags the outcome (no convergence, a failed
/// runtime check, a counterexample).
pub fn run(config: &RunConfig, log: &mut dyn Write) -> Result<ExitStatus, Failure> {
    std::fs::create_dir_all(&config.output_dir).map_err(|e| io_failure(&config.output_dir, e))?;
    let mut ctx = Context {
        config,
        meta: Meta::new(config.mode.as_str(), &config.config_hash, config.seed),
        out_dir: config.output_dir.clone(),
        log,
    };
    match config.mode {
        Mode::Validate => run_validate(&mut ctx),
        Mode::Solve => run_solve(&mut ctx),
        Mode::Sweep => run_sweep(&mut ctx),
        Mode::Blowup => run_blowup(&mut ctx),
        Mode::Liouville => run_liouville(&mut ctx),
        Mode::Oracle => run_oracle(&mut ctx),
    }
}

#[derive(Serialize)]
struct ValidationRecord {
    valid: bool,
    violations: Vec<String>,
    q_sup: f64,
    probe_radius: f64,
    meta: Meta,
}

fn run_validate(ctx: &mut Context) -> Result<ExitStatus, Failure> {
    let report = validate_problem(ctx.problem()?);
    let record = ValidationRecord {
        valid: report.is_valid(),
        violations: report.violations.iter().map(|v| v.to_string()).collect(),
        q_sup: report.q_sup,
        probe_radius: report.probe_radius,
        meta: ctx.meta.clone(),
    };
    ctx.json(&record, "validation.json")?;
    if report.is_valid() {
        ctx.say(format!("problem is admissible (sup Q = {:.6e})", report.q_sup));
        Ok(ExitStatus::Success)
    } else {
        for v in &record.violations {
            ctx.say(format!("violation: {v}"));
        }
        Ok(ExitStatus::InvariantViolation)
    }
}

fn solve_once(ctx: &mut Context, spec: &ProblemSpec) -> Result<SolveResult, Failure> {
    let grid = ctx.grid()?;
    let init = gaussian_init(spec, &grid, &vec![1.0; spec.n_components], 1.0)?;
    let result = solve(spec, &grid, &init, &ctx.config.solver)?;
    ctx.say(format!(
        "R = {}, m = {}: d_R = {:.10}, M_R = {:.10}, el residual {:.3e}, {} iterations{}",
        grid.radius(),
        grid.len(),
        result.level,
        result.peak,
        result.el_residual_norm,
        result.iterations,
        if result.converged { "" } else { " (not converged)" }
    ));
    Ok(result)
}

fn solve_status(ctx: &mut Context, result: &SolveResult) -> ExitStatus {
    if !result.converged {
        return ExitStatus::NotConverged;
    }
    match result.check_invariants() {
        Ok(()) => ExitStatus::Success,
        Err(msg) => {
            ctx.say(format!("invariant violated: {msg}"));
            ExitStatus::InvariantViolation
        }
    }
}

fn run_solve(ctx: &mut Context) -> Result<ExitStatus, Failure> {
    let spec = ctx.admissible_problem()?;
    let result = solve_once(ctx, spec)?;
    ctx.profile(&result.field, "profile.csv")?;
    let path = ctx.path("result.json");
    emit_result_json(&result, Some(&ctx.meta), &path).map_err(|e| io_failure(&path, e))?;
    Ok(solve_status(ctx, &result))
}

#[allow(non_snake_case)]
#[derive(Serialize)]
struct LimitRecord {
    R: f64,
    tail_rate: Option<f64>,
    expected_tail_rate: f64,
    d_R_monotone: bool,
    first_monotone_violation: Option<usize>,
    M_R_verdict: Option<BoundednessVerdict>,
    meta: Meta,
}

fn run_sweep(ctx: &mut Context) -> Result<ExitStatus, Failure> {
    let spec = ctx.admissible_problem()?;
    let grid = ctx.config.grid.as_ref().expect("checked at parse time");
    let (Radius::List(radii), Resolution::Spacing(h)) = (&grid.radius, &grid.resolution) else {
        return Err(failure(ExitStatus::ConfigError, "sweep needs `R_list` and `h_target`"));
    };
    let trace = sweep(spec, radii, *h, &ctx.config.solver)?;
    for e in &trace.entries {
        ctx.say(format!(
            "R = {}: d_R = {:.10}, M_R = {:.10}{}",
            e.radius,
            e.level,
            e.peak,
            if e.converged { "" } else { " (not converged)" }
        ));
    }
    let path = ctx.path("trace.csv");
    emit_trace_csv(&trace, Some(&ctx.meta), &path).map_err(|e| io_failure(&path, e))?;

    let n_converged = trace.entries.iter().filter(|e| e.converged).count();
    let (monotone, verdict) = if n_converged >= 2 {
        (
            check_monotone_dr(&trace)?,
            Some(check_bounded_m(&trace, n_converged - 1)?),
        )
    } else {
        (
            MonotoneCheck {
                pass: true,
                first_violation: None,
            },
            None,
        )
    };
    let last = trace.entries.last().expect("sweep returns at least one entry");
    ctx.profile(&last.result.field, "profile.csv")?;
    let tail = extract_limit(&trace).ok().map(|l| l.tail_rate);
    let record = LimitRecord {
        R: last.radius,
        tail_rate: tail,
        expected_tail_rate: -spec.lambda_min().sqrt(),
        d_R_monotone: monotone.pass,
        first_monotone_violation: monotone.first_violation,
        M_R_verdict: verdict,
        meta: ctx.meta.clone(),
    };
    ctx.json(&record, "limit.json")?;
    if let Some(v) = verdict {
        ctx.say(format!(
            "M_R verdict: {}",
            serde_json::to_string(&v).unwrap_or_default().trim_matches('"')
        ));
    }
    if let Some(rate) = tail {
        ctx.say(format!(
            "tail rate {rate:.6} (expected {:.6})",
            record.expected_tail_rate
        ));
    }

    if trace.entries.iter().any(|e| !e.converged) {
        return Ok(ExitStatus::NotConverged);
    }
    if !monotone.pass {
        ctx.say(format!(
            "d_R increases at entry {}",
            monotone.first_violation.map(|i| i.to_string()).unwrap_or_default()
        ));
        return Ok(ExitStatus::InvariantViolation);
    }
    Ok(ExitStatus::Success)
}

#[allow(non_snake_case)]
#[derive(Serialize)]
struct BlowupRecord {
    M_R: f64,
    beta: f64,
    dilation: f64,
    rescaled_radius: f64,
    rescaled_lambdas: Vec<f64>,
    rescaled_el_residual_norm: f64,
    limit_residual_norm: f64,
    q0: f64,
    converged: bool,
    meta: Meta,
}

fn run_blowup(ctx: &mut Context) -> Result<ExitStatus, Failure> {
    let spec = ctx.admissible_problem()?;
    let result = solve_once(ctx, spec)?;
    let rescaled = blowup_rescale(&result.field, result.peak, spec)?;
    let rescaled_spec = rescaled.rescaled_spec(spec);
    let q0 = spec.q_profile.eval(0.0);
    let record = BlowupRecord {
        M_R: result.peak,
        beta: rescaled.beta,
        dilation: rescaled.dilation,
        rescaled_radius: rescaled.field.grid().radius(),
        rescaled_lambdas: rescaled_spec.lambdas.clone(),
        rescaled_el_residual_norm: el_residual(&rescaled.field, &rescaled_spec)?.sup_norm(),
        limit_residual_norm: residual_of_limit_candidate(&rescaled.field, q0, spec.p)?,
        q0,
        converged: result.converged,
        meta: ctx.meta.clone(),
    };
    ctx.profile(&rescaled.field, "rescaled_profile.csv")?;
    ctx.json(&record, "blowup.json")?;
    ctx.say(format!(
        "beta = {}, rescaled radius {:.6}, limit-equation residual {:.6e}",
        record.beta, record.rescaled_radius, record.limit_residual_norm
    ));
    Ok(solve_status(ctx, &result))
}

fn run_liouville(ctx: &mut Context) -> Result<ExitStatus, Failure> {
    let lc = ctx
        .config
        .liouville
        .as_ref()
        .ok_or_else(|| failure(ExitStatus::ConfigError, "missing key `liouville`"))?;
    let slopes = slope_grid(lc.s_min, lc.s_max, lc.s_count);
    let report = classify_scan(lc.q0, lc.p, &slopes, lc.t_max, lc.dt)?;
    let path = ctx.path("liouville.csv");
    emit_liouville_csv(&report, Some(&ctx.meta), &path).map_err(|e| io_failure(&path, e))?;
    ctx.say(format!(
        "{} slopes, {} undetermined: {}",
        report.rows.len(),
        report.undetermined(),
        report.verdict.as_str()
    ));
    Ok(match report.verdict {
        ScanVerdict::NonexistenceConsistent => ExitStatus::Success,
        ScanVerdict::CounterexampleFound => ExitStatus::CounterexampleFound,
    })
}

#[allow(non_snake_case)]
#[derive(Serialize)]
struct OracleRecord {
    amplitude: f64,
    rate: f64,
    lambda: f64,
    q0: f64,
    p: f64,
    A: f64,
    B: f64,
    energy: f64,
    el_residual_norm: f64,
    meta: Meta,
}

/// Samples the closed-form soliton. With `N` components of equal `λ` each
/// component carries `1/√N` of it, so that `|u|` is the scalar soliton.
fn run_oracle(ctx: &mut Context) -> Result<ExitStatus, Failure> {
    let spec = ctx.admissible_problem()?;
    let lambda = spec.lambdas[0];
    if spec.lambdas.iter().any(|l| *l != lambda) {
        return Err(failure(ExitStatus::ConfigError, "oracle mode needs equal lambdas"));
    }
    let q0 = spec.q_profile.eval(0.0);
    let params = SolitonParams::new(lambda, q0, spec.p)?;
    let grid = ctx.grid()?;
    let share = (spec.n_components as f64).sqrt().recip();
    let field = Field::from_fn(spec.n_components, grid, |_, t| share * params.eval(t));
    let breakdown = energy_breakdown(&field, spec)?;
    let record = OracleRecord {
        amplitude: params.amplitude(),
        rate: params.rate(),
        lambda,
        q0,
        p: spec.p,
        A: breakdown.quadratic,
        B: breakdown.nonlinear,
        energy: breakdown.energy,
        el_residual_norm: el_residual(&field, spec)?.sup_norm(),
        meta: ctx.meta.clone(),
    };
    ctx.profile(&field, "oracle_profile.csv")?;
    ctx.json(&record, "oracle.json")?;
    ctx.say(format!(
        "soliton amplitude {:.10}, rate {:.10}, el residual {:.3e}",
        record.amplitude, record.rate, record.el_residual_norm
    ));
    Ok(ExitStatus::Success)
}
