//! Continuation in the truncation radius.
//!
//! Each radius is solved on a grid of (nearly) fixed spacing. Later solves are
//! warm-started from the zero extension of the previous minimizer, which is an
//! admissible competitor on the larger interval.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{gaussian_init, Field, Grid, ProblemSpec};
use crate::solver::{solve, SolveOptions, SolveResult};

/// Relative slack allowed when checking that `d_R` does not increase.
pub const MONOTONE_TOL: f64 = 1e-6;

/// Growth per doubling of `R` above which `M_R` is flagged as growing.
pub const GROWTH_PER_DOUBLING: f64 = 0.05;

/// Ratio successive `|ΔM_R|` must stay under to count as geometric decay.
pub const DECAY_RATIO: f64 = 0.9;

/// `|ΔM_R|` below this fraction of `M_R` is indistinguishable from zero.
pub const NEGLIGIBLE_DELTA: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub radius: f64,
    pub level: f64,
    pub peak: f64,
    pub el_residual_norm: f64,
    /// Sup-norm change against the previous entry on the smaller interval;
    /// `None` for the first entry.
    pub profile_diff: Option<f64>,
    pub converged: bool,
    pub result: SolveResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationTrace {
    pub entries: Vec<TraceEntry>,
    pub spec: ProblemSpec,
    pub h_target: f64,
}

impl ContinuationTrace {
    fn converged(&self) -> impl Iterator<Item = (usize, &TraceEntry)> {
        self.entries.iter().enumerate().filter(|(_, e)| e.converged)
    }
}

fn check_radii(radii: &[f64], h_target: f64) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::Precondition("radius list is empty".into()));
    }
    if !(h_target > 0.0) {
        return Err(Error::Precondition(format!(
            "h_target must be positive, got {h_target}"
        )));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(Error::Precondition(format!("radii must be positive, got {r}")));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("radii must be strictly increasing".into()));
    }
    Ok(())
}

/// Zero extension (by linear interpolation) of `field` onto `grid`.
pub fn extend_to(field: &Field, grid: &Grid) -> Field {
    Field::from_fn(field.n_components(), *grid, |j, t| field.interpolate(j, t))
}

/// Sup-norm difference of `new` and `old` over the nodes of `new` inside the
/// interval of `old`.
pub fn profile_difference(new: &Field, old: &Field) -> f64 {
    let r_old = old.grid().radius();
    let grid = new.grid();
    let mut worst = 0.0f64;
    for i in 0..grid.len() {
        let t = grid.node(i);
        if t.abs() > r_old {
            continue;
        }
        for j in 0..new.n_components() {
            worst = worst.max((new.values()[[j, i]] - old.interpolate(j, t)).abs());
        }
    }
    worst
}

fn cold_start(spec: &ProblemSpec, grid: &Grid) -> Result<Field> {
    gaussian_init(spec, grid, &vec![1.0; spec.n_components], 1.0)
}

fn entry(radius: f64, result: SolveResult, previous: Option<&SolveResult>) -> TraceEntry {
    TraceEntry {
        radius,
        level: result.level,
        peak: result.peak,
        el_residual_norm: result.el_residual_norm,
        profile_diff: previous.map(|p| profile_difference(&result.field, &p.field)),
        converged: result.converged,
        result,
    }
}

fn finish(entries: Vec<TraceEntry>, spec: &ProblemSpec, h_target: f64) -> Result<ContinuationTrace> {
    if entries.iter().all(|e| !e.converged) {
        return Err(Error::SweepFailed);
    }
    Ok(ContinuationTrace {
        entries,
        spec: spec.clone(),
        h_target,
    })
}

/// Sequential warm-started sweep over increasing radii.
pub fn sweep(spec: &ProblemSpec, radii: &[f64], h_target: f64, opts: &SolveOptions) -> Result<ContinuationTrace> {
    check_radii(radii, h_target)?;
    let mut entries: Vec<TraceEntry> = Vec::with_capacity(radii.len());
    let mut warm: Option<Field> = None;
    for &radius in radii {
        let grid = Grid::with_spacing(radius, h_target)?;
        let init = match &warm {
            Some(prev) => extend_to(prev, &grid),
            None => cold_start(spec, &grid)?,
        };
        let result = solve(spec, &grid, &init, opts)?;
        if result.converged {
            warm = Some(result.field.clone());
        }
        let previous = entries.last().map(|e| &e.result);
        entries.push(entry(radius, result, previous));
    }
    finish(entries, spec, h_target)
}

/// Sweep with every radius solved from a cold start, in parallel.
pub fn sweep_independent(
    spec: &ProblemSpec,
    radii: &[f64],
    h_target: f64,
    opts: &SolveOptions,
) -> Result<ContinuationTrace> {
    check_radii(radii, h_target)?;
    let results = radii
        .par_iter()
        .map(|&radius| {
            let grid = Grid::with_spacing(radius, h_target)?;
            solve(spec, &grid, &cold_start(spec, &grid)?, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut entries: Vec<TraceEntry> = Vec::with_capacity(radii.len());
    for (&radius, result) in radii.iter().zip(results) {
        let previous = entries.last().map(|e| &e.result);
        entries.push(entry(radius, result, previous));
    }
    finish(entries, spec, h_target)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCheck {
    pub pass: bool,
    /// Index into the trace of the first offending entry.
    pub first_violation: Option<usize>,
}

/// Checks `d_{R'} <= d_R (1 + 1e-6)` between consecutive converged entries and
/// `d_R > 0` everywhere.
pub fn check_monotone_dr(trace: &ContinuationTrace) -> Result<MonotoneCheck> {
    let converged: Vec<_> = trace.converged().collect();
    if converged.len() < 2 {
        return Err(Error::Precondition("need at least two converged entries".into()));
    }
    let mut first_violation = None;
    for (k, (idx, e)) in converged.iter().enumerate() {
        let positive = e.level > 0.0;
        let monotone = k == 0 || e.level <= converged[k - 1].1.level * (1.0 + MONOTONE_TOL);
        if !(positive && monotone) {
            first_violation = Some(*idx);
            break;
        }
    }
    Ok(MonotoneCheck {
        pass: first_violation.is_none(),
        first_violation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundednessVerdict {
    BoundedConverging,
    BoundedPlateau,
    Growing,
}

/// Classifies the peak values over the last `window` steps of the trace
/// (`window + 1` converged entries).
///
/// *Growing* when the least-squares growth of `log M_R` against `log2 R`
/// exceeds 5% per doubling; *bounded-converging* when every successive
/// `|ΔM_R|` shrinks by at least [`DECAY_RATIO`] or is negligible; otherwise
/// *bounded-plateau*.
pub fn check_bounded_m(trace: &ContinuationTrace, window: usize) -> Result<BoundednessVerdict> {
    let converged: Vec<_> = trace.converged().map(|(_, e)| e).collect();
    if window == 0 || converged.len() < window + 1 {
        return Err(Error::Precondition(format!(
            "need at least {} converged entries, found {}",
            window + 1,
            converged.len()
        )));
    }
    let tail = &converged[converged.len() - window - 1..];
    let xs: Vec<f64> = tail.iter().map(|e| e.radius.log2()).collect();
    let ys: Vec<f64> = tail.iter().map(|e| e.peak.ln()).collect();
    let growth = least_squares_slope(&xs, &ys).exp() - 1.0;
    if growth > GROWTH_PER_DOUBLING {
        return Ok(BoundednessVerdict::Growing);
    }
    let scale = tail.iter().map(|e| e.peak.abs()).fold(0.0, f64::max);
    let floor = NEGLIGIBLE_DELTA * scale;
    let deltas: Vec<f64> = tail.windows(2).map(|w| (w[1].peak - w[0].peak).abs()).collect();
    let geometric = deltas.windows(2).all(|d| d[1] <= floor || d[1] <= DECAY_RATIO * d[0]);
    Ok(if geometric {
        BoundednessVerdict::BoundedConverging
    } else {
        BoundednessVerdict::BoundedPlateau
    })
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitProfile {
    pub field: Field,
    pub radius: f64,
    /// Fitted slope of `log |u|` against `|t|` on the outer quarters.
    pub tail_rate: f64,
}

/// Tail decay rate of `field`: least-squares slope of `log |u(t)|` against
/// `|t|` over interior nodes with `|t| >= R/2`, where `|u|` is the norm
/// across components.
pub fn tail_rate(field: &Field) -> Result<f64> {
    let grid = field.grid();
    let half = 0.5 * grid.radius();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 1..grid.len() - 1 {
        let t = grid.node(i);
        if t.abs() < half {
            continue;
        }
        let norm = field.norm_at(i);
        if norm > 0.0 {
            xs.push(t.abs());
            ys.push(norm.ln());
        }
    }
    if xs.len() < 2 || xs.iter().all(|x| *x == xs[0]) {
        return Err(Error::TailUndetermined("field vanishes on the outer quarters".into()));
    }
    Ok(least_squares_slope(&xs, &ys))
}

/// Largest-radius profile with its fitted tail decay rate.
pub fn extract_limit(trace: &ContinuationTrace) -> Result<LimitProfile> {
    let last = trace.entries.last().ok_or(Error::NotConverged)?;
    if !last.converged {
        return Err(Error::NotConverged);
    }
    Ok(LimitProfile {
        field: last.result.field.clone(),
        radius: last.radius,
        tail_rate: tail_rate(&last.result.field)?,
    })
}
