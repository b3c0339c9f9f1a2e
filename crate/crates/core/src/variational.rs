//! Discrete energy functional, Nehari constraint and Euler-Lagrange residual.
//!
//! The discrete energy uses forward differences for `|u'|^2` and the composite
//! trapezoid rule for the potential and nonlinear terms:
//!
//! ```text
//! A(u) = sum_j [ sum_i (u^j_{i+1} - u^j_i)^2 / h + lambda_j * trap((u^j)^2) ]
//! B(u) = trap( Q(t_i) |u_i|^{p+1} )
//! E(u) = A / 2 - B / (p + 1)
//! ```
//!
//! Its gradient with respect to the trapezoid inner product is exactly the
//! three-point Euler-Lagrange residual, so energy and gradient stay
//! consistent at every resolution.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{Field, Grid, ProblemSpec, QProfile};

/// Quadratic part, nonlinear part and total energy of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// `∫ |u'|^2 + Σ_j λ_j (u^j)^2`
    pub quadratic: f64,
    /// `∫ Q |u|^{p+1}`
    pub nonlinear: f64,
    pub energy: f64,
}

/// Composite trapezoid rule on the grid.
pub fn integrate(samples: &[f64], grid: &Grid) -> Result<f64> {
    if samples.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            found: samples.len(),
        });
    }
    Ok(trapezoid(samples, grid.spacing()))
}

pub(crate) fn trapezoid(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    let interior: f64 = samples[1..n - 1].iter().sum();
    h * (0.5 * (samples[0] + samples[n - 1]) + interior)
}

/// Trapezoid inner product summed over components.
pub fn inner(u: &Field, v: &Field) -> Result<f64> {
    if u.grid() != v.grid() {
        return Err(Error::Domain("fields live on different grids".into()));
    }
    check_components(v.n_components(), u.n_components())?;
    Ok(inner_raw(u.values(), v.values(), u.grid().spacing()))
}

pub(crate) fn inner_raw(a: &Array2<f64>, b: &Array2<f64>, h: f64) -> f64 {
    let m = a.ncols();
    let mut acc = 0.0;
    for (ra, rb) in a.rows().into_iter().zip(b.rows()) {
        acc += 0.5 * (ra[0] * rb[0] + ra[m - 1] * rb[m - 1]);
        for i in 1..m - 1 {
            acc += ra[i] * rb[i];
        }
    }
    h * acc
}

fn check_components(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}

/// `|u|^{p-1}` with the convention that it vanishes at `u = 0`.
#[inline]
pub(crate) fn nonlinear_factor(norm_sq: f64, p: f64) -> f64 {
    if norm_sq == 0.0 {
        0.0
    } else {
        norm_sq.powf(0.5 * (p - 1.0))
    }
}

/// A problem bound to a grid, with `Q` sampled once at every node.
#[derive(Debug, Clone)]
pub struct Discretization {
    grid: Grid,
    p: f64,
    lambdas: Vec<f64>,
    q: Vec<f64>,
}

impl Discretization {
    pub fn new(spec: &ProblemSpec, grid: &Grid) -> Result<Self> {
        check_components(spec.n_components, spec.lambdas.len())?;
        Ok(Discretization {
            grid: *grid,
            p: spec.p,
            lambdas: spec.lambdas.clone(),
            q: grid.nodes().iter().map(|&t| spec.q_profile.eval(t)).collect(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn q_samples(&self) -> &[f64] {
        &self.q
    }

    pub fn n_components(&self) -> usize {
        self.lambdas.len()
    }

    pub(crate) fn check(&self, u: &Field) -> Result<()> {
        check_components(self.n_components(), u.n_components())?;
        if u.grid() != &self.grid {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                found: u.grid().len(),
            });
        }
        Ok(())
    }

    /// `(A, B)` for a raw `N x m` array on this grid.
    pub(crate) fn quadratic_nonlinear(&self, u: &Array2<f64>) -> (f64, f64) {
        let h = self.grid.spacing();
        let m = self.grid.len();
        let mut quadratic = 0.0;
        for (row, &lambda) in u.rows().into_iter().zip(&self.lambdas) {
            let mut kinetic = 0.0;
            for i in 0..m - 1 {
                let d = row[i + 1] - row[i];
                kinetic += d * d;
            }
            let mut mass = 0.5 * (row[0] * row[0] + row[m - 1] * row[m - 1]);
            for i in 1..m - 1 {
                mass += row[i] * row[i];
            }
            quadratic += kinetic / h + lambda * h * mass;
        }
        let exponent = 0.5 * (self.p + 1.0);
        let mut nonlinear = 0.0;
        for i in 0..m {
            let n2: f64 = u.column(i).iter().map(|v| v * v).sum();
            let term = if n2 == 0.0 { 0.0 } else { self.q[i] * n2.powf(exponent) };
            nonlinear += if i == 0 || i == m - 1 { 0.5 * term } else { term };
        }
        (quadratic, h * nonlinear)
    }

    pub(crate) fn breakdown_raw(&self, u: &Array2<f64>) -> EnergyBreakdown {
        let (quadratic, nonlinear) = self.quadratic_nonlinear(u);
        EnergyBreakdown {
            quadratic,
            nonlinear,
            energy: 0.5 * quadratic - nonlinear / (self.p + 1.0),
        }
    }

    pub fn breakdown(&self, u: &Field) -> Result<EnergyBreakdown> {
        self.check(u)?;
        Ok(self.breakdown_raw(u.values()))
    }

    /// Three-point residual with per-component linear coefficients.
    pub(crate) fn residual_raw(&self, u: &Array2<f64>, out: &mut Array2<f64>) {
        let h2 = self.grid.spacing() * self.grid.spacing();
        let m = self.grid.len();
        let n = u.nrows();
        for i in 1..m - 1 {
            let n2: f64 = u.column(i).iter().map(|v| v * v).sum();
            let factor = self.q[i] * nonlinear_factor(n2, self.p);
            for j in 0..n {
                let (l, c, r) = (u[[j, i - 1]], u[[j, i]], u[[j, i + 1]]);
                out[[j, i]] = -(l - 2.0 * c + r) / h2 + self.lambdas[j] * c - factor * c;
            }
        }
        for j in 0..n {
            out[[j, 0]] = 0.0;
            out[[j, m - 1]] = 0.0;
        }
    }

    pub fn residual(&self, u: &Field) -> Result<Field> {
        self.check(u)?;
        let mut out = Array2::zeros(u.values().raw_dim());
        self.residual_raw(u.values(), &mut out);
        Field::from_array(out, self.grid)
    }

    /// `(A / B)^{1/(p-1)}`, the ray scaling onto the Nehari manifold.
    pub(crate) fn scale_from(&self, quadratic: f64, nonlinear: f64) -> Result<f64> {
        if quadratic == 0.0 {
            return Err(Error::ZeroField);
        }
        if !(nonlinear > 0.0) {
            return Err(Error::NonlinearTermVanishes);
        }
        Ok((quadratic / nonlinear).powf(1.0 / (self.p - 1.0)))
    }

    pub(crate) fn level_factor(&self) -> f64 {
        0.5 - 1.0 / (self.p + 1.0)
    }
}

/// `A`, `B` and `E = A/2 - B/(p+1)` of `u`.
pub fn energy_breakdown(u: &Field, spec: &ProblemSpec) -> Result<EnergyBreakdown> {
    Discretization::new(spec, u.grid())?.breakdown(u)
}

/// `A - B`; zero on the Nehari manifold (and, degenerately, at `u = 0`).
pub fn nehari_residual(u: &Field, spec: &ProblemSpec) -> Result<f64> {
    let b = energy_breakdown(u, spec)?;
    Ok(b.quadratic - b.nonlinear)
}

/// Scaling `t*` such that `t* u` lies on the Nehari manifold.
pub fn nehari_scale(u: &Field, spec: &ProblemSpec) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let disc = Discretization::new(spec, u.grid())?;
    disc.check(u)?;
    let (a, b) = disc.quadratic_nonlinear(u.values());
    disc.scale_from(a, b)
}

/// `t* u`.
pub fn project_to_nehari(u: &Field, spec: &ProblemSpec) -> Result<Field> {
    Ok(u.scaled(nehari_scale(u, spec)?))
}

/// Tolerance on `|A - B|` accepted by [`restricted_energy`].
pub fn manifold_tolerance(quadratic: f64) -> f64 {
    1e-8 * quadratic.max(1.0)
}

/// `(1/2 - 1/(p+1)) A` for a field on the Nehari manifold.
pub fn restricted_energy(u: &Field, spec: &ProblemSpec) -> Result<f64> {
    let b = energy_breakdown(u, spec)?;
    let residual = b.quadratic - b.nonlinear;
    let tolerance = manifold_tolerance(b.quadratic);
    if !(residual.abs() <= tolerance) {
        return Err(Error::OffManifold { residual, tolerance });
    }
    Ok((0.5 - 1.0 / (spec.p + 1.0)) * b.quadratic)
}

/// Euler-Lagrange residual
/// `-(u^j)'' + λ_j u^j - Q |u|^{p-1} u^j` on interior nodes; zero at the endpoints.
pub fn el_residual(u: &Field, spec: &ProblemSpec) -> Result<Field> {
    Discretization::new(spec, u.grid())?.residual(u)
}

/// Gradient of the discrete energy in the trapezoid inner product.
pub fn energy_gradient(u: &Field, spec: &ProblemSpec) -> Result<Field> {
    el_residual(u, spec)
}

/// Result of the blow-up rescaling `v(t) = u(M^β t) / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    pub field: Field,
    /// `Q(M^β t)` tabulated on the rescaled grid.
    pub q_profile: QProfile,
    pub peak: f64,
    pub beta: f64,
    /// `M^β`; the rescaled grid has radius `R / M^β`.
    pub dilation: f64,
}

impl Rescaled {
    /// Problem solved by the rescaled field when `u` solves the original:
    /// `-v'' + λ_j M^{1-p} v = Q(M^β t) |v|^{p-1} v`.
    pub fn rescaled_spec(&self, spec: &ProblemSpec) -> ProblemSpec {
        let factor = self.peak.powf(1.0 - spec.p);
        ProblemSpec {
            n_components: spec.n_components,
            p: spec.p,
            lambdas: spec.lambdas.iter().map(|l| l * factor).collect(),
            q_profile: self.q_profile.clone(),
        }
    }
}

/// Blow-up rescaling by the peak value `peak`, with `β = (1 - p) / 2`.
pub fn blowup_rescale(u: &Field, peak: f64, spec: &ProblemSpec) -> Result<Rescaled> {
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::Domain(format!("peak must be positive, got {peak}")));
    }
    if !(spec.p > 1.0) {
        return Err(Error::Domain(format!("p must exceed 1, got {}", spec.p)));
    }
    check_components(spec.n_components, u.n_components())?;
    let beta = 0.5 * (1.0 - spec.p);
    let dilation = peak.powf(beta);
    let grid = u.grid();
    if dilation == 1.0 {
        let nodes = grid.nodes();
        let values = nodes.iter().map(|&t| spec.q_profile.eval(t)).collect();
        return Ok(Rescaled {
            field: u.clone(),
            q_profile: QProfile::tabulated(nodes, values)?,
            peak,
            beta,
            dilation,
        });
    }
    let new_grid = Grid::new(grid.radius() / dilation, grid.len())?;
    let nodes = new_grid.nodes();
    let n = u.n_components();
    let mut values = Array2::zeros((n, new_grid.len()));
    for (i, &s) in nodes.iter().enumerate() {
        let t = dilation * s;
        for j in 0..n {
            values[[j, i]] = u.interpolate(j, t) / peak;
        }
    }
    let q_values = nodes.iter().map(|&s| spec.q_profile.eval(dilation * s)).collect();
    Ok(Rescaled {
        field: Field::from_array(values, new_grid)?,
        q_profile: QProfile::tabulated(nodes, q_values)?,
        peak,
        beta,
        dilation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gaussian_init, make_grid};
    use proptest::prelude::*;

    fn sech(t: f64) -> f64 {
        1.0 / t.cosh()
    }

    fn soliton_setup(m: usize) -> (ProblemSpec, Field) {
        let spec = ProblemSpec::scalar(3.0, 1.0, QProfile::Constant(1.0));
        let grid = make_grid(20.0, m).unwrap();
        let u = Field::from_fn(1, grid, |_, t| 2f64.sqrt() * sech(t));
        (spec, u)
    }

    #[test]
    fn trapezoid_basics() {
        let grid = make_grid(1.0, 101).unwrap();
        assert!((integrate(&vec![1.0; 101], &grid).unwrap() - 2.0).abs() < 1e-14);
        assert!(integrate(&grid.nodes(), &grid).unwrap().abs() < 1e-15);
        assert!(matches!(
            integrate(&[1.0; 3], &grid),
            Err(Error::Dimension {
                expected: 101,
                found: 3
            })
        ));
    }

    #[test]
    fn trapezoid_sech_squared() {
        let grid = make_grid(20.0, 2001).unwrap();
        let s: Vec<f64> = grid.nodes().iter().map(|&t| sech(t).powi(2)).collect();
        // ∫_R sech^2 = 2
        assert!((integrate(&s, &grid).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn zero_field_energy() {
        let (spec, u) = soliton_setup(2001);
        let z = Field::zeros(1, *u.grid());
        let b = energy_breakdown(&z, &spec).unwrap();
        assert_eq!((b.quadratic, b.nonlinear, b.energy), (0.0, 0.0, 0.0));
        assert_eq!(nehari_residual(&z, &spec).unwrap(), 0.0);
        assert!(matches!(nehari_scale(&z, &spec), Err(Error::ZeroField)));
        assert!(el_residual(&z, &spec).unwrap().is_zero());
        assert!(energy_gradient(&z, &spec).unwrap().is_zero());
    }

    #[test]
    fn soliton_energy_matches_closed_form() {
        // ∫ (u'^2 + u^2) = ∫ u^4 = 4 ∫ sech^4 = 16/3 for u = √2 sech
        let (spec, u) = soliton_setup(2001);
        let b = energy_breakdown(&u, &spec).unwrap();
        assert!((b.quadratic - 16.0 / 3.0).abs() < 1e-3, "{}", b.quadratic);
        assert!((b.nonlinear - 16.0 / 3.0).abs() < 1e-3, "{}", b.nonlinear);
        assert!((b.energy - 4.0 / 3.0).abs() < 1e-3, "{}", b.energy);
        assert_eq!(b.energy, 0.5 * b.quadratic - 0.25 * b.nonlinear);
    }

    #[test]
    fn doubling_scales_with_homogeneity_degrees() {
        let (spec, u) = soliton_setup(401);
        let b1 = energy_breakdown(&u, &spec).unwrap();
        let b2 = energy_breakdown(&u.scaled(2.0), &spec).unwrap();
        assert!((b2.quadratic / b1.quadratic - 4.0).abs() < 1e-13);
        assert!((b2.nonlinear / b1.nonlinear - 16.0).abs() < 1e-13);
    }

    #[test]
    fn sampled_soliton_is_near_manifold_at_second_order() {
        // The sampled soliton is not a discrete critical point: A - B equals
        // <residual, u>, which is O(h^2). Check magnitude and order.
        let r1 = {
            let (spec, u) = soliton_setup(2001);
            nehari_residual(&u, &spec).unwrap()
        };
        let r2 = {
            let (spec, u) = soliton_setup(4001);
            nehari_residual(&u, &spec).unwrap()
        };
        assert!(r1.abs() < 1e-3 * 16.0 / 3.0, "{r1}");
        let ratio = r1 / r2;
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn small_multiples_sit_inside_the_manifold() {
        let (spec, u) = soliton_setup(401);
        assert!(nehari_residual(&u.scaled(1e-2), &spec).unwrap() > 0.0);
    }

    #[test]
    fn scale_of_projected_field_is_one() {
        let (spec, u) = soliton_setup(2001);
        let on = project_to_nehari(&u, &spec).unwrap();
        assert!((nehari_scale(&on, &spec).unwrap() - 1.0).abs() < 1e-12);
        let half = on.scaled(0.5);
        assert!((nehari_scale(&half, &spec).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_init_projects_onto_manifold() {
        let spec = ProblemSpec::scalar(3.0, 1.0, QProfile::Constant(1.0));
        let grid = make_grid(20.0, 2001).unwrap();
        let u = gaussian_init(&spec, &grid, &[1.0], 1.0).unwrap();
        let b = energy_breakdown(&u, &spec).unwrap();
        let expected = (b.quadratic / b.nonlinear).sqrt();
        let t = nehari_scale(&u, &spec).unwrap();
        assert!(t > 0.0);
        assert!((t - expected).abs() < 1e-14);
        let on = u.scaled(t);
        let a = energy_breakdown(&on, &spec).unwrap().quadratic;
        assert!(nehari_residual(&on, &spec).unwrap().abs() < 1e-10 * a);
    }

    #[test]
    fn vanishing_nonlinearity_is_rejected() {
        let spec = ProblemSpec::scalar(3.0, 1.0, QProfile::tabulated(vec![-1.0, 1.0], vec![0.0, 0.0]).unwrap());
        let grid = make_grid(5.0, 51).unwrap();
        let u = Field::from_fn(1, grid, |_, t| sech(t));
        assert!(matches!(nehari_scale(&u, &spec), Err(Error::NonlinearTermVanishes)));
    }

    #[test]
    fn restricted_energy_on_projected_soliton() {
        let (spec, u) = soliton_setup(2001);
        let on = project_to_nehari(&u, &spec).unwrap();
        let d = restricted_energy(&on, &spec).unwrap();
        assert!((d - 4.0 / 3.0).abs() < 1e-3, "{d}");
        let b = energy_breakdown(&on, &spec).unwrap();
        assert!((d - b.quadratic / 4.0).abs() < 1e-15);
        assert!((d - b.energy).abs() < 1e-8 * b.quadratic.max(1.0));
        assert!(matches!(
            restricted_energy(&on.scaled(0.5), &spec),
            Err(Error::OffManifold { .. })
        ));
    }

    #[test]
    fn soliton_residual_is_second_order() {
        let norm = |m| {
            let (spec, u) = soliton_setup(m);
            el_residual(&u, &spec).unwrap().sup_norm()
        };
        let (coarse, fine) = (norm(2001), norm(4001));
        assert!(coarse < 5e-3, "{coarse}");
        let ratio = coarse / fine;
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn coupled_sech_pair_is_second_order() {
        // (sech, sech) solves the N = 2 system since |u|^2 = 2 sech^2
        let spec = ProblemSpec::new(3.0, vec![1.0, 1.0], QProfile::Constant(1.0));
        let norm = |m| {
            let grid = make_grid(20.0, m).unwrap();
            let u = Field::from_fn(2, grid, |_, t| sech(t));
            el_residual(&u, &spec).unwrap().sup_norm()
        };
        let (coarse, fine) = (norm(2001), norm(4001));
        assert!(coarse < 5e-3);
        assert!((3.5..=4.5).contains(&(coarse / fine)));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let spec = ProblemSpec::new(
            2.5,
            vec![1.0, 3.0],
            QProfile::Gaussian {
                amplitude: 1.5,
                width: 2.0,
            },
        );
        let grid = make_grid(6.0, 241).unwrap();
        let u = Field::from_fn(2, grid, |j, t| {
            (1.0 + j as f64) * (-(t * t) / 3.0).exp() * (1.0 + 0.3 * t.sin())
        });
        let g = energy_gradient(&u, &spec).unwrap();
        assert_eq!(g.values()[[0, 0]], 0.0);
        for k in 0..5 {
            let v = Field::from_fn(2, grid, |j, t| {
                ((k + 1) as f64 * t + j as f64).cos() * (-(t * t) / 8.0).exp()
            });
            let eps = 1e-5;
            let plus = energy_breakdown(
                &Field::from_array(u.values() + &(v.values() * eps), grid).unwrap(),
                &spec,
            )
            .unwrap();
            let minus = energy_breakdown(
                &Field::from_array(u.values() - &(v.values() * eps), grid).unwrap(),
                &spec,
            )
            .unwrap();
            let fd = (plus.energy - minus.energy) / (2.0 * eps);
            let exact = inner(&g, &v).unwrap();
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{fd} vs {exact}");
        }
    }

    #[test]
    fn exact_soliton_gradient_is_small() {
        let (spec, u) = soliton_setup(2001);
        assert!(energy_gradient(&u, &spec).unwrap().sup_norm() < 5e-3);
    }

    #[test]
    fn rescale_by_one_is_identity() {
        let (spec, u) = soliton_setup(401);
        let r = blowup_rescale(&u, 1.0, &spec).unwrap();
        assert_eq!(r.field, u);
        assert_eq!(r.beta, -1.0);
        assert!(matches!(blowup_rescale(&u, 0.0, &spec), Err(Error::Domain(_))));
        assert!(matches!(blowup_rescale(&u, -1.0, &spec), Err(Error::Domain(_))));
    }

    #[test]
    fn rescaled_soliton_solves_rescaled_system() {
        let (spec, u) = soliton_setup(2001);
        let base = el_residual(&u, &spec).unwrap().sup_norm();
        for m in [1.0f64, 4.0, 16.0] {
            let r = blowup_rescale(&u, m, &spec).unwrap();
            assert!((r.field.grid().radius() - 20.0 * m).abs() < 1e-9);
            let rspec = r.rescaled_spec(&spec);
            let res = el_residual(&r.field, &rspec).unwrap().sup_norm();
            // exact identity: residual scales by M^{-p}
            let expected = base * m.powf(-3.0);
            assert!(
                (res - expected).abs() <= 1e-6 * base.max(res) + 1e-12,
                "M={m}: {res} vs {expected}"
            );
        }
    }

    #[test]
    fn rescaling_by_peak_normalises_it() {
        let (spec, u) = soliton_setup(2001);
        let m = u.sup_norm();
        let r = blowup_rescale(&u, m, &spec).unwrap();
        assert!((r.field.sup_norm() - 1.0).abs() < 1e-6);
        let c = r.field.grid().center();
        assert!((r.field.values()[[0, c]] - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn energy_is_homogeneous(c in prop::sample::select(vec![0.5, 2.0, 3.0]), p in 1.2f64..6.0, a in 0.2f64..3.0, w in 0.3f64..3.0) {
            let spec = ProblemSpec::scalar(p, 1.0, QProfile::Rational { amplitude: 1.0, scale: 2.0 });
            let grid = make_grid(8.0, 161).unwrap();
            let u = Field::from_fn(1, grid, |_, t| a * (-(t * t) / (2.0 * w * w)).exp() * (1.0 + 0.2 * t.cos()));
            let b1 = energy_breakdown(&u, &spec).unwrap();
            let b2 = energy_breakdown(&u.scaled(c), &spec).unwrap();
            prop_assert!((b2.quadratic - c * c * b1.quadratic).abs() <= 1e-12 * b2.quadratic);
            prop_assert!((b2.nonlinear - c.powf(p + 1.0) * b1.nonlinear).abs() <= 1e-12 * b2.nonlinear);
        }

        #[test]
        fn projection_is_idempotent(p in 1.2f64..6.0, a in 0.2f64..3.0, shift in -1.0f64..1.0) {
            let spec = ProblemSpec::new(p, vec![1.0, 2.0], QProfile::Constant(1.0));
            let grid = make_grid(8.0, 161).unwrap();
            let u = Field::from_fn(2, grid, |j, t| a * (-(t - shift * j as f64).powi(2)).exp());
            let on = project_to_nehari(&u, &spec).unwrap();
            prop_assert!((nehari_scale(&on, &spec).unwrap() - 1.0).abs() <= 1e-10);
        }
    }
}
