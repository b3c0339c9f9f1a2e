//! Nehari-manifold minimization on a fixed interval.
//!
//! The iterate is kept on the manifold at every step by the closed-form ray
//! projection `u -> t* u`. Descent directions are the tangential energy
//! gradient preconditioned by `(-d²/dt² + λ_j)^{-1}`, and step lengths come
//! from Armijo backtracking on the projected energy. A damped Newton solve of
//! the discrete Euler-Lagrange system polishes the result.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_block_tridiagonal, Tridiagonal};
use crate::model::{Field, Grid, ProblemSpec};
use crate::variational::{inner_raw, nonlinear_factor, Discretization, EnergyBreakdown};

/// Smallest line-search step before the flow is declared stalled.
const MIN_STEP: f64 = 1e-12;

/// Relative size of level changes lost to rounding. Below it the line search
/// accepts a step when it lowers the tangential gradient norm instead.
const LEVEL_ROUNDOFF: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Relative tolerance on the tangential gradient norm.
    pub tol_grad: f64,
    /// Initial line-search step in the preconditioned metric.
    pub step0: f64,
    pub backtrack: f64,
    pub armijo: f64,
    pub enforce_symmetry: bool,
    pub newton_refine: bool,
    pub max_newton: usize,
    /// Components whose sup-norm is below `trivial_threshold * M_R` are dropped.
    pub trivial_threshold: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 20_000,
            tol_grad: 1e-8,
            step0: 1.0,
            backtrack: 0.5,
            armijo: 1e-4,
            enforce_symmetry: true,
            newton_refine: true,
            max_newton: 30,
            trivial_threshold: 1e-8,
        }
    }
}

impl SolveOptions {
    /// Human-readable description of the first invalid option, if any.
    pub fn check(&self) -> std::result::Result<(), String> {
        if !(self.tol_grad > 0.0) {
            return Err("tol_grad must be positive".into());
        }
        if !(self.step0 > 0.0) {
            return Err("step0 must be positive".into());
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err("backtrack must lie in (0, 1)".into());
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return Err("armijo must lie in (0, 1)".into());
        }
        if !(self.trivial_threshold > 0.0 && self.trivial_threshold < 1.0) {
            return Err("trivial_threshold must lie in (0, 1)".into());
        }
        Ok(())
    }
}

/// Global maximum of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub value: f64,
    /// Zero-based component index.
    pub component: usize,
    pub location: f64,
    pub node: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NewtonStatus {
    Skipped,
    Converged,
    NoProgress,
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub field: Field,
    /// Ground-state level `d_R`.
    pub level: f64,
    pub breakdown: EnergyBreakdown,
    /// Peak value `M_R`.
    pub peak: f64,
    /// Zero-based index of the component attaining the peak.
    pub peak_component: usize,
    pub peak_location: f64,
    pub el_residual_norm: f64,
    pub nehari_residual: f64,
    /// Trapezoid norm of the tangential gradient at the returned field.
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub newton: NewtonStatus,
    /// Zero-based indices of components removed as trivial.
    pub dropped_components: Vec<usize>,
}

impl SolveResult {
    /// Checks the invariants every converged result must satisfy; returns a
    /// description of the first one violated.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if !self.converged {
            return Ok(());
        }
        if !(self.level > 0.0) {
            return Err(format!("level d_R = {} is not positive", self.level));
        }
        if let Some(v) = self.field.values().iter().find(|v| **v < 0.0) {
            return Err(format!("field takes the negative value {v}"));
        }
        let peak = max_stats(&self.field).map_err(|e| e.to_string())?;
        if peak.value != self.peak || peak.component != self.peak_component {
            return Err("recorded peak does not match the field maximum".into());
        }
        Ok(())
    }
}

/// Global max over components and nodes. Ties go to the lowest component,
/// then to the node closest to the origin, then to the leftmost node.
pub fn max_stats(field: &Field) -> Result<Peak> {
    if field.is_zero() {
        return Err(Error::ZeroField);
    }
    let grid = field.grid();
    let mut best: Option<Peak> = None;
    for (j, row) in field.values().rows().into_iter().enumerate() {
        for (i, &value) in row.iter().enumerate() {
            let location = grid.node(i);
            let better = match &best {
                None => true,
                Some(b) => {
                    value > b.value
                        || (value == b.value
                            && j == b.component
                            && (location.abs() < b.location.abs()
                                || (location.abs() == b.location.abs() && location < b.location)))
                }
            };
            if better {
                best = Some(Peak {
                    value,
                    component: j,
                    location,
                    node: i,
                });
            }
        }
    }
    Ok(best.expect("field has nodes"))
}

/// `sup |u(t) - u(-t)|` over components and nodes.
pub fn check_symmetry(field: &Field) -> f64 {
    let grid = field.grid();
    let mut worst = 0.0f64;
    for row in field.values().rows() {
        for i in 0..grid.center() {
            worst = worst.max((row[i] - row[grid.mirror(i)]).abs());
        }
    }
    worst
}

fn symmetrize(u: &mut Array2<f64>) {
    let m = u.ncols();
    for mut row in u.rows_mut() {
        for i in 0..m / 2 {
            let avg = 0.5 * (row[i] + row[m - 1 - i]);
            row[i] = avg;
            row[m - 1 - i] = avg;
        }
    }
}

/// Applies `|u|`, optional symmetrization and the Nehari projection.
/// Returns the projected array with its `(A, B)`.
fn sanitize(disc: &Discretization, mut u: Array2<f64>, enforce_symmetry: bool) -> Result<(Array2<f64>, f64, f64)> {
    u.mapv_inplace(f64::abs);
    if enforce_symmetry {
        symmetrize(&mut u);
    }
    let (a, b) = disc.quadratic_nonlinear(&u);
    let t = disc.scale_from(a, b)?;
    u *= t;
    Ok((u, t * t * a, t.powf(disc.p() + 1.0) * b))
}

struct Preconditioner {
    factors: Vec<Tridiagonal>,
}

impl Preconditioner {
    fn new(disc: &Discretization) -> Preconditioner {
        let h = disc.grid().spacing();
        let n = disc.grid().len() - 2;
        let factors = disc
            .lambdas()
            .iter()
            .map(|&l| Tridiagonal::new(n, 2.0 / (h * h) + l, -1.0 / (h * h)))
            .collect();
        Preconditioner { factors }
    }

    fn apply(&self, g: &Array2<f64>) -> Array2<f64> {
        let m = g.ncols();
        let mut out = Array2::zeros(g.raw_dim());
        let mut buf = vec![0.0; m - 2];
        for (j, factor) in self.factors.iter().enumerate() {
            for i in 1..m - 1 {
                buf[i - 1] = g[[j, i]];
            }
            factor.solve(&mut buf);
            for i in 1..m - 1 {
                out[[j, i]] = buf[i - 1];
            }
        }
        out
    }
}

/// Tangential gradient and its trapezoid norm.
fn tangent_gradient(disc: &Discretization, u: &Array2<f64>) -> (Array2<f64>, f64) {
    let h = disc.grid().spacing();
    let mut g = Array2::zeros(u.raw_dim());
    disc.residual_raw(u, &mut g);
    let c = inner_raw(&g, u, h) / inner_raw(u, u, h);
    g.scaled_add(-c, u);
    let norm = inner_raw(&g, &g, h).max(0.0).sqrt();
    (g, norm)
}

fn check_init(disc: &Discretization, init: &Field) -> Result<()> {
    disc.check(init)?;
    if init.is_zero() {
        return Err(Error::ZeroField);
    }
    Ok(())
}

/// Minimizes the energy over the Nehari manifold on `grid`, starting from
/// `init`. Non-convergence is reported through `converged = false`, not as
/// an error.
pub fn minimize_on_nehari(spec: &ProblemSpec, grid: &Grid, init: &Field, opts: &SolveOptions) -> Result<SolveResult> {
    opts.check().map_err(Error::Domain)?;
    let disc = Discretization::new(spec, grid)?;
    check_init(&disc, init)?;
    let precond = Preconditioner::new(&disc);
    let h = grid.spacing();
    let factor = disc.level_factor();

    let (mut u, mut a, _) = sanitize(&disc, init.values().clone(), opts.enforce_symmetry)?;
    let mut level = factor * a;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iters {
        let (g, norm) = tangent_gradient(&disc, &u);
        if norm <= opts.tol_grad * a.max(1.0) {
            converged = true;
            break;
        }
        let d = precond.apply(&g);
        let slope = inner_raw(&g, &d, h);
        let mut step = opts.step0;
        let mut accepted = None;
        while step >= MIN_STEP {
            let mut trial = u.clone();
            trial.scaled_add(-step, &d);
            if let Ok((cand, ca, _)) = sanitize(&disc, trial, opts.enforce_symmetry) {
                let cand_level = factor * ca;
                let decrease = level - cand_level;
                let required = opts.armijo * step * slope;
                let roundoff = LEVEL_ROUNDOFF * level.abs();
                let ok = if required > roundoff {
                    decrease >= required
                } else {
                    decrease >= -roundoff && tangent_gradient(&disc, &cand).1 < norm
                };
                if ok {
                    accepted = Some((cand, ca, cand_level));
                    break;
                }
            }
            step *= opts.backtrack;
        }
        let Some((cand, ca, cand_level)) = accepted else {
            break;
        };
        u = cand;
        a = ca;
        level = cand_level;
        iterations += 1;
    }

    let mut field = Field::from_array(u, *grid)?;
    let mut newton = NewtonStatus::Skipped;
    if opts.newton_refine {
        match newton_refine_with(spec, grid, &field, opts.max_newton, opts.enforce_symmetry) {
            Ok(outcome) if outcome.status == NewtonStatus::Converged => {
                if let Ok((polished, _, _)) = sanitize(&disc, outcome.field.into_values(), opts.enforce_symmetry) {
                    let polished = Field::from_array(polished, *grid)?;
                    let (_, before) = tangent_gradient(&disc, field.values());
                    let (_, after) = tangent_gradient(&disc, polished.values());
                    let pl = factor * disc.quadratic_nonlinear(polished.values()).0;
                    // accept when it improves stationarity without raising the level
                    if after <= before && pl <= level * (1.0 + 1e-10) {
                        field = polished;
                        newton = NewtonStatus::Converged;
                    } else {
                        newton = NewtonStatus::NoProgress;
                    }
                }
            }
            Ok(outcome) => newton = outcome.status,
            Err(_) => newton = NewtonStatus::Failed,
        }
    }

    let mut result = summarize(&disc, field, iterations, opts)?;
    result.converged = converged || result.grad_norm <= opts.tol_grad * result.breakdown.quadratic.max(1.0);
    result.newton = newton;
    Ok(result)
}

fn summarize(disc: &Discretization, field: Field, iterations: usize, opts: &SolveOptions) -> Result<SolveResult> {
    let breakdown = disc.breakdown_raw(field.values());
    let (_, grad_norm) = tangent_gradient(disc, field.values());
    let peak = max_stats(&field)?;
    let el_residual_norm = disc.residual(&field)?.sup_norm();
    Ok(SolveResult {
        level: disc.level_factor() * breakdown.quadratic,
        nehari_residual: breakdown.quadratic - breakdown.nonlinear,
        breakdown,
        peak: peak.value,
        peak_component: peak.component,
        peak_location: peak.location,
        el_residual_norm,
        grad_norm,
        iterations,
        converged: grad_norm <= opts.tol_grad * breakdown.quadratic.max(1.0),
        newton: NewtonStatus::Skipped,
        dropped_components: Vec::new(),
        field,
    })
}

/// Outcome of [`newton_refine`].
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub field: Field,
    /// Sup-norm of the Euler-Lagrange residual at `field`.
    pub residual_norm: f64,
    pub iterations: usize,
    pub status: NewtonStatus,
}

/// Damped Newton iteration on the discrete Euler-Lagrange system.
///
/// Stops once the residual sup-norm is below `1e-10 (1 + sup|u|)` and no
/// longer decreasing. If that target cannot be reached the input is returned
/// unchanged with [`NewtonStatus::NoProgress`]. A singular Jacobian yields
/// [`Error::RefineFailed`].
///
/// When `Q` is even on the grid and the input is even (to `1e-12` relative),
/// the steps are restricted to even fields. This removes the near-null
/// translation mode that makes the Jacobian ill-conditioned on long intervals.
pub fn newton_refine(spec: &ProblemSpec, grid: &Grid, field: &Field, max_newton: usize) -> Result<NewtonOutcome> {
    newton_refine_with(spec, grid, field, max_newton, false)
}

fn is_even_problem(disc: &Discretization, field: &Field) -> bool {
    let q = disc.q_samples();
    let m = q.len();
    let q_even = (0..m / 2).all(|i| (q[i] - q[m - 1 - i]).abs() <= 1e-12 * q[i].abs().max(1.0));
    q_even && check_symmetry(field) <= 1e-12 * field.sup_norm()
}

fn newton_refine_with(
    spec: &ProblemSpec,
    grid: &Grid,
    field: &Field,
    max_newton: usize,
    force_even: bool,
) -> Result<NewtonOutcome> {
    let disc = Discretization::new(spec, grid)?;
    disc.check(field)?;
    let even = force_even || is_even_problem(&disc, field);
    let residual_of = |u: &Array2<f64>| {
        let mut r = Array2::zeros(u.raw_dim());
        disc.residual_raw(u, &mut r);
        let norm = r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        (r, norm)
    };
    let (mut r, mut norm) = residual_of(field.values());
    if !(norm < 1.0) {
        return Err(Error::Precondition(format!(
            "Newton refinement needs a residual below 1, got {norm:e}"
        )));
    }
    let target = 1e-10 * (1.0 + field.sup_norm());
    let mut u = field.values().clone();
    let mut iterations = 0;
    while iterations < max_newton {
        if norm == 0.0 {
            break;
        }
        let mut delta = newton_step(&disc, &u, &r).ok_or_else(|| Error::RefineFailed("singular Jacobian".into()))?;
        if even {
            symmetrize(&mut delta);
        }
        let mut damping = 1.0;
        let mut improved = None;
        for _ in 0..12 {
            let mut trial = u.clone();
            trial.scaled_add(damping, &delta);
            let (tr, tn) = residual_of(&trial);
            if tn < norm {
                improved = Some((trial, tr, tn));
                break;
            }
            damping *= 0.5;
        }
        let Some((trial, tr, tn)) = improved else {
            break;
        };
        iterations += 1;
        let was_below = norm <= target;
        u = trial;
        r = tr;
        norm = tn;
        // one polishing step past the target, then stop
        if was_below {
            break;
        }
    }
    if norm <= target {
        Ok(NewtonOutcome {
            field: Field::from_array(u, *grid)?,
            residual_norm: norm,
            iterations,
            status: NewtonStatus::Converged,
        })
    } else {
        let (_, input_norm) = residual_of(field.values());
        Ok(NewtonOutcome {
            field: field.clone(),
            residual_norm: input_norm,
            iterations,
            status: NewtonStatus::NoProgress,
        })
    }
}

/// Solves `J δ = -r` on interior nodes; the Jacobian is block tridiagonal
/// with `N x N` blocks coupling components through `|u|^{p-1}`.
#[allow(clippy::needless_range_loop)]
fn newton_step(disc: &Discretization, u: &Array2<f64>, r: &Array2<f64>) -> Option<Array2<f64>> {
    let h = disc.grid().spacing();
    let h2 = h * h;
    let (n, m) = u.dim();
    let p = disc.p();
    let q = disc.q_samples();
    let mut blocks = Vec::with_capacity(m - 2);
    let mut rhs = Vec::with_capacity(m - 2);
    for i in 1..m - 1 {
        let col = u.column(i);
        let n2: f64 = col.iter().map(|v| v * v).sum();
        let phi = nonlinear_factor(n2, p);
        let cross = if n2 == 0.0 {
            0.0
        } else {
            (p - 1.0) * n2.powf(0.5 * (p - 3.0))
        };
        let block = DMatrix::from_fn(n, n, |j, k| {
            let mut v = -q[i] * cross * col[j] * col[k];
            if j == k {
                v += 2.0 / h2 + disc.lambdas()[j] - q[i] * phi;
            }
            v
        });
        blocks.push(block);
        rhs.push(DVector::from_iterator(n, r.column(i).iter().map(|v| -v)));
    }
    let x = solve_block_tridiagonal(blocks, -1.0 / h2, rhs)?;
    let mut delta = Array2::zeros((n, m));
    for (k, xi) in x.iter().enumerate() {
        for j in 0..n {
            delta[[j, k + 1]] = xi[j];
        }
    }
    Some(delta)
}

/// Zeroes components whose sup-norm is below `trivial_threshold * M_R`,
/// re-projects the remainder and recomputes all statistics.
pub fn drop_trivial_components(result: &SolveResult, spec: &ProblemSpec, opts: &SolveOptions) -> Result<SolveResult> {
    let disc = Discretization::new(spec, result.field.grid())?;
    disc.check(&result.field)?;
    let peak = if result.field.is_zero() {
        0.0
    } else {
        max_stats(&result.field)?.value
    };
    let threshold = opts.trivial_threshold * peak;
    let mut values = result.field.values().clone();
    let mut dropped = result.dropped_components.clone();
    let mut kept = 0;
    for (j, mut row) in values.rows_mut().into_iter().enumerate() {
        let sup = row.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if sup < threshold || sup == 0.0 {
            row.fill(0.0);
            if !dropped.contains(&j) {
                dropped.push(j);
            }
        } else {
            kept += 1;
        }
    }
    if kept == 0 {
        return Err(Error::AllTrivial);
    }
    dropped.sort_unstable();
    if dropped == result.dropped_components {
        return Ok(result.clone());
    }
    let (a, b) = disc.quadratic_nonlinear(&values);
    values *= disc.scale_from(a, b)?;
    let mut out = summarize(
        &disc,
        Field::from_array(values, *result.field.grid())?,
        result.iterations,
        opts,
    )?;
    out.converged = result.converged && out.converged;
    out.newton = result.newton;
    out.dropped_components = dropped;
    Ok(out)
}

/// [`minimize_on_nehari`] followed by [`drop_trivial_components`].
pub fn solve(spec: &ProblemSpec, grid: &Grid, init: &Field, opts: &SolveOptions) -> Result<SolveResult> {
    let result = minimize_on_nehari(spec, grid, init, opts)?;
    drop_trivial_components(&result, spec, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gaussian_init, make_grid, QProfile};
    use crate::variational::{energy_breakdown, restricted_energy};

    fn sech(t: f64) -> f64 {
        1.0 / t.cosh()
    }

    fn scalar_spec() -> ProblemSpec {
        ProblemSpec::scalar(3.0, 1.0, QProfile::Constant(1.0))
    }

    #[test]
    fn peak_of_sech() {
        let grid = make_grid(10.0, 1001).unwrap();
        let f = Field::from_fn(1, grid, |_, t| sech(t));
        let peak = max_stats(&f).unwrap();
        assert_eq!((peak.value, peak.component, peak.location), (1.0, 0, 0.0));
    }

    #[test]
    fn peak_ties_prefer_first_component() {
        let grid = make_grid(10.0, 1001).unwrap();
        let f = Field::from_fn(2, grid, |_, t| sech(t));
        assert_eq!(max_stats(&f).unwrap().component, 0);
    }

    #[test]
    fn peak_ties_prefer_origin_then_left() {
        let grid = make_grid(2.0, 5).unwrap();
        let f = Field::from_array(ndarray::array![[0.0, 1.0, 0.5, 1.0, 0.0]], grid).unwrap();
        assert_eq!(max_stats(&f).unwrap().location, -1.0);
        let g = Field::from_array(ndarray::array![[0.0, 1.0, 1.0, 1.0, 0.0]], grid).unwrap();
        assert_eq!(max_stats(&g).unwrap().location, 0.0);
    }

    #[test]
    fn shifted_bump_peak_location() {
        let grid = make_grid(10.0, 1001).unwrap();
        let f = Field::from_fn(1, grid, |_, t| (-(t - 2.0).powi(2)).exp());
        assert!((max_stats(&f).unwrap().location - 2.0).abs() <= grid.spacing());
        assert!(matches!(max_stats(&Field::zeros(1, grid)), Err(Error::ZeroField)));
    }

    #[test]
    fn symmetry_measure() {
        let grid = make_grid(3.0, 7).unwrap();
        let even = Field::from_fn(1, grid, |_, t| t * t);
        assert_eq!(check_symmetry(&even), 0.0);
        let odd = Field::from_fn(1, grid, |_, t| t);
        // endpoints are clamped, so the largest interior |t| is 2
        assert_eq!(check_symmetry(&odd), 4.0);
    }

    #[test]
    fn zero_init_is_rejected() {
        let grid = make_grid(5.0, 101).unwrap();
        let z = Field::zeros(1, grid);
        assert!(matches!(
            minimize_on_nehari(&scalar_spec(), &grid, &z, &SolveOptions::default()),
            Err(Error::ZeroField)
        ));
    }

    #[test]
    fn scalar_soliton_is_found() {
        let spec = scalar_spec();
        let grid = make_grid(20.0, 2001).unwrap();
        let init = gaussian_init(&spec, &grid, &[1.0], 1.0).unwrap();
        let r = minimize_on_nehari(&spec, &grid, &init, &SolveOptions::default()).unwrap();
        assert!(r.converged, "{r:?}");
        assert!((r.peak - 2f64.sqrt()).abs() < 1e-3, "{}", r.peak);
        assert!((r.level - 4.0 / 3.0).abs() < 2e-3, "{}", r.level);
        assert_eq!(r.peak_location, 0.0);
        assert!(r.el_residual_norm < 1e-9, "{}", r.el_residual_norm);
        assert_eq!(r.newton, NewtonStatus::Converged);
        r.check_invariants().unwrap();
        let d = restricted_energy(&r.field, &spec).unwrap();
        assert!((d - r.level).abs() <= 1e-10 * r.level);
        assert!(r.nehari_residual.abs() <= 1e-8 * r.breakdown.quadratic);
    }

    #[test]
    fn coupled_pair_is_found() {
        let spec = ProblemSpec::new(3.0, vec![1.0, 1.0], QProfile::Constant(1.0));
        let grid = make_grid(20.0, 2001).unwrap();
        let init = gaussian_init(&spec, &grid, &[1.0, 1.0], 1.0).unwrap();
        let r = minimize_on_nehari(&spec, &grid, &init, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.peak - 1.0).abs() < 1e-3);
        let nodes = grid.nodes();
        for j in 0..2 {
            let err = r
                .field
                .component(j)
                .iter()
                .zip(&nodes)
                .fold(0.0f64, |acc, (u, t)| acc.max((u - sech(*t)).abs()));
            assert!(err < 1e-3, "component {j}: {err}");
        }
    }

    #[test]
    fn gradient_flow_alone_converges() {
        let spec = scalar_spec();
        let grid = make_grid(10.0, 501).unwrap();
        let init = gaussian_init(&spec, &grid, &[1.0], 2.0).unwrap();
        let opts = SolveOptions {
            newton_refine: false,
            ..SolveOptions::default()
        };
        let r = minimize_on_nehari(&spec, &grid, &init, &opts).unwrap();
        assert!(r.converged);
        assert_eq!(r.newton, NewtonStatus::Skipped);
        assert!(r.iterations > 0);
        assert!((r.peak - 2f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn flow_does_not_stall_at_the_rounding_floor() {
        // near the minimum the level decrease falls below rounding
        let spec = scalar_spec();
        let opts = SolveOptions {
            newton_refine: false,
            max_iters: 200,
            ..SolveOptions::default()
        };
        for m in [301, 401, 501, 601, 701] {
            let grid = make_grid(10.0, m).unwrap();
            let init = gaussian_init(&spec, &grid, &[1.0], 1.0).unwrap();
            let r = minimize_on_nehari(&spec, &grid, &init, &opts).unwrap();
            assert!(r.converged, "m = {m}");
            assert!(r.iterations < 50, "m = {m}: {} iterations", r.iterations);
        }
    }

    #[test]
    fn symmetry_emerges_without_enforcement() {
        let spec = scalar_spec();
        // the translation mode relaxes like exp(-2R), so keep the interval short
        let grid = make_grid(4.0, 401).unwrap();
        let init = Field::from_fn(1, grid, |_, t| {
            (-(t - 0.4).powi(2) / 2.0).exp() + 0.3 * (-(t + 1.0).powi(2)).exp()
        });
        let free = SolveOptions {
            enforce_symmetry: false,
            ..SolveOptions::default()
        };
        let a = minimize_on_nehari(&spec, &grid, &init, &free).unwrap();
        assert!(a.converged);
        assert!(check_symmetry(&a.field) < 1e-6, "{}", check_symmetry(&a.field));
        let sym_init = gaussian_init(&spec, &grid, &[1.0], 1.0).unwrap();
        let b = minimize_on_nehari(&spec, &grid, &sym_init, &SolveOptions::default()).unwrap();
        let diff = (a.field.values() - b.field.values())
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn newton_on_sampled_soliton_finds_discrete_solution() {
        let spec = scalar_spec();
        let grid = make_grid(20.0, 2001).unwrap();
        let u = Field::from_fn(1, grid, |_, t| 2f64.sqrt() * sech(t));
        let out = newton_refine(&spec, &grid, &u, 30).unwrap();
        assert_eq!(out.status, NewtonStatus::Converged);
        assert!(out.residual_norm <= 1e-10 * (1.0 + u.sup_norm()));
        // the discrete solution is O(h^2) away from the sampled one
        let diff = (out.field.values() - u.values())
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(diff < 1e-3, "{diff}");
        // and is a fixed point
        let again = newton_refine(&spec, &grid, &out.field, 30).unwrap();
        let drift = (again.field.values() - out.field.values())
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(drift < 1e-10);
    }

    #[test]
    fn newton_on_zero_is_a_fixed_point() {
        let grid = make_grid(5.0, 101).unwrap();
        let z = Field::zeros(1, grid);
        let out = newton_refine(&scalar_spec(), &grid, &z, 10).unwrap();
        assert!(out.field.is_zero());
        assert_eq!(out.status, NewtonStatus::Converged);
    }

    #[test]
    fn newton_rejects_far_inputs() {
        let grid = make_grid(5.0, 101).unwrap();
        let noise = Field::from_fn(1, grid, |_, t| (37.0 * t).sin() * 3.0);
        assert!(matches!(
            newton_refine(&scalar_spec(), &grid, &noise, 10),
            Err(Error::Precondition(_)) | Err(Error::RefineFailed(_))
        ));
    }

    #[test]
    fn tiny_component_is_dropped() {
        let spec = ProblemSpec::new(3.0, vec![1.0, 1.0], QProfile::Constant(1.0));
        let grid = make_grid(20.0, 2001).unwrap();
        let field = Field::from_fn(
            2,
            grid,
            |j, t| if j == 0 { 2f64.sqrt() * sech(t) } else { 1e-12 * sech(t) },
        );
        let disc = Discretization::new(&spec, &grid).unwrap();
        let opts = SolveOptions::default();
        let result = summarize(&disc, field, 0, &opts).unwrap();
        let out = drop_trivial_components(&result, &spec, &opts).unwrap();
        assert_eq!(out.dropped_components, vec![1]);
        assert!(out.field.component(1).iter().all(|v| *v == 0.0));
        let b = energy_breakdown(&out.field, &spec).unwrap();
        assert!((b.quadratic - b.nonlinear).abs() < 1e-10 * b.quadratic);
        assert!((out.level - b.quadratic / 4.0).abs() < 1e-14);
    }

    #[test]
    fn equal_components_are_kept() {
        let spec = ProblemSpec::new(3.0, vec![1.0, 1.0], QProfile::Constant(1.0));
        let grid = make_grid(10.0, 501).unwrap();
        let field = Field::from_fn(2, grid, |_, t| sech(t));
        let disc = Discretization::new(&spec, &grid).unwrap();
        let opts = SolveOptions::default();
        let result = summarize(&disc, field, 0, &opts).unwrap();
        let out = drop_trivial_components(&result, &spec, &opts).unwrap();
        assert!(out.dropped_components.is_empty());
        assert_eq!(out.field, result.field);
    }

    #[test]
    fn all_trivial_is_an_error() {
        let spec = scalar_spec();
        let grid = make_grid(10.0, 501).unwrap();
        let disc = Discretization::new(&spec, &grid).unwrap();
        let opts = SolveOptions::default();
        let mut result = summarize(&disc, Field::from_fn(1, grid, |_, t| sech(t)), 0, &opts).unwrap();
        result.field = Field::zeros(1, grid);
        assert!(matches!(
            drop_trivial_components(&result, &spec, &opts),
            Err(Error::AllTrivial)
        ));
    }

    #[test]
    fn heavier_component_decays_and_is_dropped() {
        // with λ = (1, 2) the ground state lives in the first component only
        let spec = ProblemSpec::new(3.0, vec![1.0, 2.0], QProfile::Constant(1.0));
        let grid = make_grid(12.0, 601).unwrap();
        let init = gaussian_init(&spec, &grid, &[1.0, 1.0], 1.0).unwrap();
        let r = solve(&spec, &grid, &init, &SolveOptions::default()).unwrap();
        assert_eq!(r.dropped_components, vec![1]);
        assert!((r.peak - 2f64.sqrt()).abs() < 2e-3, "{}", r.peak);
        assert!(r.converged);
    }
}
