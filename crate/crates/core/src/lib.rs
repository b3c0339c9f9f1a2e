//! Non-negative bound states of the one-dimensional coupled nonlinear
//! Schrödinger system
//!
//! ```text
//! -(u^j)'' + λ_j u^j = Q(t) |u|^{p-1} u^j,   j = 1..N
//! ```
//!
//! computed by energy minimization on the Nehari manifold over truncated
//! intervals `[-R, R]`, with continuation in `R`, blow-up rescaling
//! diagnostics and a shooting certifier for the limit equation
//! `-f'' = Q(0) f^p`.

// NaN must fail these range checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuation;
pub mod error;
mod linalg;
pub mod liouville;
pub mod model;
pub mod solver;
pub mod variational;

pub use continuation::{
    check_bounded_m, check_monotone_dr, extend_to, extract_limit, profile_difference, sweep, sweep_independent,
    tail_rate, BoundednessVerdict, ContinuationTrace, LimitProfile, MonotoneCheck, TraceEntry,
};
pub use error::{Error, Result};
pub use liouville::{
    classify_scan, residual_of_limit_candidate, shoot, slope_grid, soliton_profile, trajectory, Classification,
    ScanReport, ScanVerdict, ShootResult, SolitonParams,
};
pub use model::{
    gaussian_init, make_grid, validate_problem, Field, Grid, ProblemSpec, QProfile, ValidationReport, Violation,
};
pub use solver::{
    check_symmetry, drop_trivial_components, max_stats, minimize_on_nehari, newton_refine, solve, NewtonOutcome,
    NewtonStatus, Peak, SolveOptions, SolveResult,
};
pub use variational::{
    blowup_rescale, el_residual, energy_breakdown, energy_gradient, inner, integrate, nehari_residual, nehari_scale,
    project_to_nehari, restricted_energy, Discretization, EnergyBreakdown, Rescaled,
};
