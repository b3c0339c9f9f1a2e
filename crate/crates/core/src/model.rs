//! Problem definitions, coefficient profiles, grids and discrete fields.
//!
//! Everything here is immutable once built. A [`Field`] always satisfies the
//! homogeneous Dirichlet condition at both grid endpoints.

use std::fmt;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Tolerance used when probing a profile for evenness.
pub const EVENNESS_TOL: f64 = 1e-12;

/// Number of sample points used by [`validate_problem`].
pub const PROBE_SAMPLES: usize = 101;

/// Coefficient profile `Q(t)` multiplying the nonlinearity.
#[derive(Debug, Clone, PartialEq)]
pub enum QProfile {
    Constant(f64),
    /// `amplitude * exp(-t^2 / (2 width^2))`
    Gaussian {
        amplitude: f64,
        width: f64,
    },
    /// `amplitude / (1 + (t / scale)^2)`
    Rational {
        amplitude: f64,
        scale: f64,
    },
    /// Piecewise-linear table on ascending nodes; clamps to the end samples
    /// outside the table.
    Tabulated {
        nodes: Vec<f64>,
        values: Vec<f64>,
    },
}

impl QProfile {
    /// Builds a tabulated profile, checking that nodes are strictly ascending.
    pub fn tabulated(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::Dimension {
                expected: nodes.len(),
                found: values.len(),
            });
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("tabulated nodes must be strictly ascending".into()));
        }
        Ok(QProfile::Tabulated { nodes, values })
    }

    /// Value of `Q` at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            QProfile::Constant(c) => *c,
            QProfile::Gaussian { amplitude, width } => amplitude * (-(t * t) / (2.0 * width * width)).exp(),
            QProfile::Rational { amplitude, scale } => {
                let x = t / scale;
                amplitude / (1.0 + x * x)
            }
            QProfile::Tabulated { nodes, values } => interpolate(nodes, values, t),
        }
    }

    /// Length scale over which the profile is probed by [`validate_problem`].
    pub fn probe_radius(&self) -> f64 {
        match self {
            QProfile::Constant(_) => 1.0,
            QProfile::Gaussian { width, .. } => width.abs(),
            QProfile::Rational { scale, .. } => scale.abs(),
            QProfile::Tabulated { nodes, .. } => {
                let extent = nodes
                    .first()
                    .map(|a| a.abs())
                    .unwrap_or(0.0)
                    .max(nodes.last().map(|b| b.abs()).unwrap_or(0.0));
                if extent > 0.0 {
                    extent / 10.0
                } else {
                    1.0
                }
            }
        }
    }
}

fn interpolate(nodes: &[f64], values: &[f64], t: f64) -> f64 {
    let last = nodes.len() - 1;
    if t <= nodes[0] {
        return values[0];
    }
    if t >= nodes[last] {
        return values[last];
    }
    // first index with nodes[k] > t; 1 <= k <= last
    let k = nodes.partition_point(|&x| x <= t);
    let (t0, t1) = (nodes[k - 1], nodes[k]);
    let w = (t - t0) / (t1 - t0);
    values[k - 1] + w * (values[k] - values[k - 1])
}

/// The coupled system `-(u^j)'' + lambda_j u^j = Q(t) |u|^{p-1} u^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub n_components: usize,
    pub p: f64,
    pub lambdas: Vec<f64>,
    pub q_profile: QProfile,
}

impl ProblemSpec {
    pub fn new(p: f64, lambdas: Vec<f64>, q_profile: QProfile) -> Self {
        ProblemSpec {
            n_components: lambdas.len(),
            p,
            lambdas,
            q_profile,
        }
    }

    /// Scalar problem `-u'' + a u = Q(t) |u|^{p-1} u`.
    pub fn scalar(p: f64, a: f64, q_profile: QProfile) -> Self {
        Self::new(p, vec![a], q_profile)
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambdas.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A violated hypothesis of the problem statement.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoComponents,
    LambdaCount { expected: usize, found: usize },
    ExponentTooSmall(f64),
    NonPositiveLambda { index: usize, value: f64 },
    NonPositiveOrigin(f64),
    NotEven { t: f64, difference: f64 },
    Negative { t: f64, value: f64 },
    NonFinite { t: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoComponents => write!(f, "n_components must be at least 1"),
            Violation::LambdaCount { expected, found } => {
                write!(f, "expected {expected} lambdas, found {found}")
            }
            Violation::ExponentTooSmall(p) => write!(f, "p must exceed 1 (got {p})"),
            Violation::NonPositiveLambda { index, value } => {
                write!(f, "lambda_{} must be positive (got {value})", index + 1)
            }
            Violation::NonPositiveOrigin(q0) => write!(f, "Q(0) must be positive (got {q0})"),
            Violation::NotEven { t, difference } => {
                write!(f, "Q is not even: |Q({t}) - Q({})| = {difference:e}", -t)
            }
            Violation::Negative { t, value } => write!(f, "Q must be non-negative: Q({t}) = {value}"),
            Violation::NonFinite { t } => write!(f, "Q is not finite at t = {t}"),
        }
    }
}

/// Hypothesis check of a [`ProblemSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Largest sampled value of `Q`; the upper bound is recorded, not enforced.
    pub q_sup: f64,
    pub probe_radius: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Returns every violated hypothesis. An empty list means the problem is
/// admissible. `Q` is probed on [`PROBE_SAMPLES`] points spanning ten probe
/// radii on each side of the origin.
pub fn validate_problem(spec: &ProblemSpec) -> ValidationReport {
    let mut violations = Vec::new();
    if spec.n_components == 0 {
        violations.push(Violation::NoComponents);
    }
    if spec.lambdas.len() != spec.n_components {
        violations.push(Violation::LambdaCount {
            expected: spec.n_components,
            found: spec.lambdas.len(),
        });
    }
    if !(spec.p > 1.0) {
        violations.push(Violation::ExponentTooSmall(spec.p));
    }
    for (index, &value) in spec.lambdas.iter().enumerate() {
        if !(value > 0.0) {
            violations.push(Violation::NonPositiveLambda { index, value });
        }
    }
    let q = &spec.q_profile;
    let q0 = q.eval(0.0);
    if !(q0 > 0.0) {
        violations.push(Violation::NonPositiveOrigin(q0));
    }

    let radius = 10.0 * q.probe_radius();
    let step = 2.0 * radius / (PROBE_SAMPLES - 1) as f64;
    let mut q_sup = q0.max(0.0);
    let mut first_uneven = None;
    let mut first_negative = None;
    let mut first_nonfinite = None;
    for i in 0..PROBE_SAMPLES {
        let t = -radius + i as f64 * step;
        let (a, b) = (q.eval(t), q.eval(-t));
        if !a.is_finite() {
            first_nonfinite.get_or_insert(Violation::NonFinite { t });
            continue;
        }
        q_sup = q_sup.max(a);
        let difference = (a - b).abs();
        if difference > EVENNESS_TOL {
            first_uneven.get_or_insert(Violation::NotEven { t, difference });
        }
        if a < 0.0 {
            first_negative.get_or_insert(Violation::Negative { t, value: a });
        }
    }
    violations.extend(first_nonfinite);
    violations.extend(first_uneven);
    violations.extend(first_negative);

    ValidationReport {
        violations,
        q_sup,
        probe_radius: q.probe_radius(),
    }
}

/// Uniform grid on `[-R, R]` with an odd number of nodes, so that the origin
/// is the centre node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    radius: f64,
    m: usize,
    h: f64,
}

/// Builds the uniform grid with `m` nodes on `[-radius, radius]`.
pub fn make_grid(radius: f64, m: usize) -> Result<Grid> {
    Grid::new(radius, m)
}

impl Grid {
    pub fn new(radius: f64, m: usize) -> Result<Grid> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidGrid(format!("radius must be positive, got {radius}")));
        }
        if m < 3 || m.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("node count must be odd and >= 3, got {m}")));
        }
        Ok(Grid {
            radius,
            m,
            h: 2.0 * radius / (m - 1) as f64,
        })
    }

    /// Smallest odd node count giving spacing at most `h_target`.
    pub fn with_spacing(radius: f64, h_target: f64) -> Result<Grid> {
        if !(h_target > 0.0) {
            return Err(Error::InvalidGrid(format!("h_target must be positive, got {h_target}")));
        }
        let ratio = 2.0 * radius / h_target;
        // absorb representation error so that 40 / 0.02 does not round up to 2001
        let mut intervals = (ratio * (1.0 - 4.0 * f64::EPSILON)).ceil().max(2.0) as usize;
        if intervals % 2 == 1 {
            intervals += 1;
        }
        Grid::new(radius, intervals + 1)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn center(&self) -> usize {
        (self.m - 1) / 2
    }

    /// Node `t_i`. Nodes are exactly antisymmetric about the centre, with
    /// `t_0 = -R`, `t_c = 0` and `t_{m-1} = R`.
    pub fn node(&self, i: usize) -> f64 {
        let c = self.center();
        match i.cmp(&c) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => self.radius - (self.m - 1 - i) as f64 * self.h,
            std::cmp::Ordering::Less => -(self.radius - i as f64 * self.h),
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.node(i)).collect()
    }

    /// Index of the node mirrored through the origin.
    pub fn mirror(&self, i: usize) -> usize {
        self.m - 1 - i
    }
}

/// N-component field sampled on a [`Grid`]; zero at both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Array2<f64>,
    grid: Grid,
}

impl Field {
    pub fn zeros(n_components: usize, grid: Grid) -> Field {
        Field {
            values: Array2::zeros((n_components, grid.len())),
            grid,
        }
    }

    /// Wraps an `N x m` array; endpoint values are overwritten with zero.
    pub fn from_array(mut values: Array2<f64>, grid: Grid) -> Result<Field> {
        if values.ncols() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: values.ncols(),
            });
        }
        if values.nrows() == 0 {
            return Err(Error::Dimension { expected: 1, found: 0 });
        }
        let last = grid.len() - 1;
        for mut row in values.rows_mut() {
            row[0] = 0.0;
            row[last] = 0.0;
        }
        Ok(Field { values, grid })
    }

    /// Samples `f(component, t)` at every node.
    pub fn from_fn(n_components: usize, grid: Grid, f: impl Fn(usize, f64) -> f64) -> Field {
        let nodes = grid.nodes();
        let values = Array2::from_shape_fn((n_components, grid.len()), |(j, i)| f(j, nodes[i]));
        Field::from_array(values, grid).expect("shape matches grid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_components(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn component(&self, j: usize) -> ndarray::ArrayView1<'_, f64> {
        self.values.row(j)
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    /// Mutates interior values; the Dirichlet endpoints are restored afterwards.
    pub fn map_interior(&mut self, mut f: impl FnMut(usize, usize, f64) -> f64) {
        let last = self.grid.len() - 1;
        for ((j, i), v) in self.values.indexed_iter_mut() {
            *v = if i == 0 || i == last { 0.0 } else { f(j, i, *v) };
        }
    }

    pub fn scaled(&self, factor: f64) -> Field {
        Field {
            values: &self.values * factor,
            grid: self.grid,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Euclidean norm across components at node `i`.
    pub fn norm_at(&self, i: usize) -> f64 {
        self.values.column(i).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Linear interpolation of component `j` at `t`; zero outside the grid.
    pub fn interpolate(&self, j: usize, t: f64) -> f64 {
        let r = self.grid.radius();
        if !(t > -r && t < r) {
            return 0.0;
        }
        let x = (t + r) / self.grid.spacing();
        let k = (x.floor() as usize).min(self.grid.len() - 2);
        let w = x - k as f64;
        let row = self.values.row(j);
        row[k] + w * (row[k + 1] - row[k])
    }
}

/// Gaussian initial guess `amplitudes[j] * exp(-t^2 / (2 width^2))`.
pub fn gaussian_init(spec: &ProblemSpec, grid: &Grid, amplitudes: &[f64], width: f64) -> Result<Field> {
    if amplitudes.len() != spec.n_components {
        return Err(Error::Dimension {
            expected: spec.n_components,
            found: amplitudes.len(),
        });
    }
    if !(width > 0.0) {
        return Err(Error::Domain(format!("width must be positive, got {width}")));
    }
    if let Some(a) = amplitudes.iter().find(|a| !(**a > 0.0)) {
        return Err(Error::Domain(format!("amplitudes must be positive, got {a}")));
    }
    Ok(Field::from_fn(spec.n_components, *grid, |j, t| {
        amplitudes[j] * (-(t * t) / (2.0 * width * width)).exp()
    }))
}
