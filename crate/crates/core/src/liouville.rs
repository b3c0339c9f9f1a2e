//! Shooting certifier for the limit equation `-f'' = q0 f^p`.
//!
//! Trajectories start from `(f(0), f'(0)) = (f0, s0)` and are integrated with
//! classical RK4 in both time directions until `f` leaves the positive
//! half-line or `|t|` reaches `T_max`. A sampled scan is declared
//! *nonexistence-consistent* when every trajectory leaves positivity in at
//! least one direction. This is a finite sample, not a proof over all
//! initial data.
//!
//! The module also carries the closed-form homoclinic of
//! `-u'' + λu = q0 u^p`, used as the exactness oracle throughout the tests.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Field, ProblemSpec, QProfile};
use crate::variational::el_residual;

/// Time tolerance of the exit-time bisection.
pub const EXIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    ExitsPositivityBoth,
    ExitsPositivityOneSide,
    Undetermined,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::ExitsPositivityBoth => "exits-positivity-both",
            Classification::ExitsPositivityOneSide => "exits-positivity-one-side",
            Classification::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootResult {
    pub f0: f64,
    pub s0: f64,
    /// First `t > 0` with `f(t) = 0`.
    pub exit_forward: Option<f64>,
    /// Last `t < 0` with `f(t) = 0` (a negative number).
    pub exit_backward: Option<f64>,
    /// Largest `|f'|` seen on either side before exit.
    pub slope_max: f64,
    /// Largest relative drift of `f'^2/2 + q0 f^{p+1}/(p+1)` before exit.
    pub energy_drift: f64,
    pub classification: Classification,
}

fn check_shoot_args(q0: f64, p: f64, t_max: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::Domain(format!("T_max must be positive, got {t_max}")));
    }
    if !(q0 > 0.0) {
        return Err(Error::Domain(format!("q0 = Q(0) must be positive, got {q0}")));
    }
    if !(p > 1.0) {
        return Err(Error::Domain(format!("p must exceed 1, got {p}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct LimitOde {
    q0: f64,
    p: f64,
}

impl LimitOde {
    #[inline]
    fn accel(&self, f: f64) -> f64 {
        // positive branch only; the step that crosses zero is cut by bisection
        if f > 0.0 {
            -self.q0 * f.powf(self.p)
        } else {
            0.0
        }
    }

    fn rk4(&self, f: f64, g: f64, h: f64) -> (f64, f64) {
        let k1f = g;
        let k1g = self.accel(f);
        let k2f = g + 0.5 * h * k1g;
        let k2g = self.accel(f + 0.5 * h * k1f);
        let k3f = g + 0.5 * h * k2g;
        let k3g = self.accel(f + 0.5 * h * k2f);
        let k4f = g + h * k3g;
        let k4g = self.accel(f + h * k3f);
        (
            f + h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f),
            g + h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g),
        )
    }

    fn hamiltonian(&self, f: f64, g: f64) -> f64 {
        0.5 * g * g + self.q0 * f.max(0.0).powf(self.p + 1.0) / (self.p + 1.0)
    }
}

struct Leg {
    exit: Option<f64>,
    slope_max: f64,
    energy_drift: f64,
}

/// Integrates one time direction (`direction = ±1`).
fn integrate_leg(ode: LimitOde, f0: f64, s0: f64, direction: f64, t_max: f64, dt: f64) -> Leg {
    let h0 = ode.hamiltonian(f0, s0);
    let scale = h0.abs().max(f64::MIN_POSITIVE);
    let (mut f, mut g) = (f0, s0);
    let mut t = 0.0f64;
    let mut slope_max = s0.abs();
    let mut energy_drift = 0.0f64;
    let steps = (t_max / dt).ceil() as usize;
    for k in 0..steps {
        let remaining = t_max - k as f64 * dt;
        let h = direction * dt.min(remaining);
        let (nf, ng) = ode.rk4(f, g, h);
        if nf <= 0.0 {
            // bisection on the partial step length
            let (mut lo, mut hi) = (0.0f64, h.abs());
            while hi - lo > EXIT_TOL {
                let mid = 0.5 * (lo + hi);
                if ode.rk4(f, g, direction * mid).0 > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = 0.5 * (lo + hi);
            let (_, eg) = ode.rk4(f, g, direction * tau);
            slope_max = slope_max.max(eg.abs());
            return Leg {
                exit: Some(t + direction * tau),
                slope_max,
                energy_drift,
            };
        }
        f = nf;
        g = ng;
        t += h;
        slope_max = slope_max.max(g.abs());
        energy_drift = energy_drift.max((ode.hamiltonian(f, g) - h0).abs() / scale);
    }
    Leg {
        exit: None,
        slope_max,
        energy_drift,
    }
}

/// Shoots `-f'' = q0 f^p` from `(f0, s0)` forward and backward up to `t_max`.
pub fn shoot(q0: f64, p: f64, f0: f64, s0: f64, t_max: f64, dt: f64) -> Result<ShootResult> {
    check_shoot_args(q0, p, t_max, dt)?;
    if !(f0 > 0.0) {
        return Err(Error::Domain(format!("f0 must be positive, got {f0}")));
    }
    let ode = LimitOde { q0, p };
    let forward = integrate_leg(ode, f0, s0, 1.0, t_max, dt);
    let backward = integrate_leg(ode, f0, s0, -1.0, t_max, dt);
    let classification = match (forward.exit.is_some(), backward.exit.is_some()) {
        (true, true) => Classification::ExitsPositivityBoth,
        (false, false) => Classification::Undetermined,
        _ => Classification::ExitsPositivityOneSide,
    };
    Ok(ShootResult {
        f0,
        s0,
        exit_forward: forward.exit,
        exit_backward: backward.exit,
        slope_max: forward.slope_max.max(backward.slope_max),
        energy_drift: forward.energy_drift.max(backward.energy_drift),
        classification,
    })
}

/// Forward RK4 samples `(t, f, f')` every `dt` up to `t_end`, without exit
/// detection (the positive-branch right-hand side vanishes for `f <= 0`).
pub fn trajectory(q0: f64, p: f64, f0: f64, s0: f64, t_end: f64, dt: f64) -> Result<Vec<(f64, f64, f64)>> {
    check_shoot_args(q0, p, t_end, dt)?;
    let ode = LimitOde { q0, p };
    let steps = (t_end / dt).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut f, mut g) = (f0, s0);
    out.push((0.0, f, g));
    for k in 1..=steps {
        (f, g) = ode.rk4(f, g, dt);
        out.push((k as f64 * dt, f, g));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanVerdict {
    NonexistenceConsistent,
    CounterexampleFound,
}

impl ScanVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScanVerdict::NonexistenceConsistent => "nonexistence-consistent",
            ScanVerdict::CounterexampleFound => "counterexample-found",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub q0: f64,
    pub p: f64,
    pub rows: Vec<ShootResult>,
    pub verdict: ScanVerdict,
}

impl ScanReport {
    pub fn undetermined(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.classification == Classification::Undetermined)
            .count()
    }
}

/// `count` evenly spaced slopes on `[s_min, s_max]`.
pub fn slope_grid(s_min: f64, s_max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![s_min],
        _ => (0..count)
            .map(|k| s_min + (s_max - s_min) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Shoots from `(1, s0)` for every slope; rows keep the slope order.
pub fn classify_scan(q0: f64, p: f64, slopes: &[f64], t_max: f64, dt: f64) -> Result<ScanReport> {
    if slopes.is_empty() {
        return Err(Error::Precondition("slope grid is empty".into()));
    }
    check_shoot_args(q0, p, t_max, dt)?;
    let rows = slopes
        .par_iter()
        .map(|&s0| shoot(q0, p, 1.0, s0, t_max, dt))
        .collect::<Result<Vec<_>>>()?;
    // a trajectory positive on all of [-T_max, T_max] stays bounded by concavity
    let verdict = if rows.iter().any(|r| r.classification == Classification::Undetermined) {
        ScanVerdict::CounterexampleFound
    } else {
        ScanVerdict::NonexistenceConsistent
    };
    Ok(ScanReport { q0, p, rows, verdict })
}

/// Parameters of the homoclinic `amplitude · sech^{2/(p-1)}(rate · t)` of
/// `-u'' + λu = q0 u^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams {
    pub lambda: f64,
    pub q0: f64,
    pub p: f64,
}

impl SolitonParams {
    pub fn new(lambda: f64, q0: f64, p: f64) -> Result<Self> {
        if !(lambda > 0.0) || !(q0 > 0.0) || !(p > 1.0) {
            return Err(Error::Domain(format!(
                "soliton needs lambda > 0, q0 > 0, p > 1 (got {lambda}, {q0}, {p})"
            )));
        }
        Ok(SolitonParams { lambda, q0, p })
    }

    /// `(λ (p+1) / (2 q0))^{1/(p-1)}`
    pub fn amplitude(&self) -> f64 {
        (self.lambda * (self.p + 1.0) / (2.0 * self.q0)).powf(1.0 / (self.p - 1.0))
    }

    /// `(p-1) √λ / 2`
    pub fn rate(&self) -> f64 {
        0.5 * (self.p - 1.0) * self.lambda.sqrt()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let sech = 1.0 / (self.rate() * t).cosh();
        self.amplitude() * sech.powf(2.0 / (self.p - 1.0))
    }
}

/// Value of the closed-form soliton at `t`.
pub fn soliton_profile(params: &SolitonParams, t: f64) -> f64 {
    params.eval(t)
}

/// Sup-norm over interior nodes of `-v'' - q0 |v|^{p-1} v` (no linear term).
pub fn residual_of_limit_candidate(field: &Field, q0: f64, p: f64) -> Result<f64> {
    let spec = ProblemSpec {
        n_components: field.n_components(),
        p,
        lambdas: vec![0.0; field.n_components()],
        q_profile: QProfile::Constant(q0),
    };
    Ok(el_residual(field, &spec)?.sup_norm())
}
