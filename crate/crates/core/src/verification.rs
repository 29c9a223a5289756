//! Brute-force oracles used by the test harness and the `validate` command.
//!
//! Every oracle here deliberately uses a different discretization family
//! from the kernel it checks (fixed-step RK4 against the adaptive
//! integrator, banded finite differences against cosh closed forms, an
//! algebraically rewritten coefficient against the direct one) and shares
//! nothing with the primary code paths beyond scalar hyperbolic functions.

use serde::Serialize;

use crate::flat_dynamics::{rhs, ModelParams};
use crate::periodic_solver::PeriodicOrbit;
use crate::spectral::a_value;
use crate::{Error, Result};

/// Outcome of one primary-vs-oracle comparison.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub name: String,
    pub primary_value: f64,
    pub oracle_value: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub passed: bool,
    pub tolerance: f64,
}

impl OracleReport {
    /// rel_diff is abs_diff / |primary|, except below the 1e-12 cutoff where
    /// the absolute difference stands in for it, so that `passed` is
    /// uniformly rel_diff <= tolerance.
    pub fn compare(name: &str, primary: f64, oracle: f64, tolerance: f64) -> Self {
        let abs_diff = (primary - oracle).abs();
        let rel_diff = if primary.abs() < 1e-12 {
            abs_diff
        } else {
            abs_diff / primary.abs()
        };
        OracleReport {
            name: name.to_string(),
            primary_value: primary,
            oracle_value: oracle,
            abs_diff,
            rel_diff,
            passed: rel_diff <= tolerance,
            tolerance,
        }
    }
}

const RK4_STEPS_PER_PERIOD: usize = 1_000_000;

/// Endpoint of the thickness flow by classical fixed-step RK4 at one
/// million steps per period; the deterministic truth source for trajectory
/// endpoints.
pub fn refine_integrate(params: &ModelParams, rho0: f64, t_end: f64) -> Result<f64> {
    refine_integrate_steps(params, rho0, t_end, RK4_STEPS_PER_PERIOD)
}

pub(crate) fn refine_integrate_steps(
    params: &ModelParams,
    rho0: f64,
    t_end: f64,
    steps_per_period: usize,
) -> Result<f64> {
    if !rho0.is_finite() || rho0 <= 0.0 {
        return Err(Error::PositivityViolation(format!(
            "initial thickness must be positive and finite, got {rho0}"
        )));
    }
    let periods = t_end.abs() / params.period();
    let n = ((periods * steps_per_period as f64).ceil() as usize).max(1);
    let h = t_end / n as f64;
    let mut rho = rho0;
    for i in 0..n {
        let t = i as f64 * h;
        let k1 = rhs(params, t, rho)?;
        let k2 = rhs(params, t + 0.5 * h, rho + 0.5 * h * k1)?;
        let k3 = rhs(params, t + 0.5 * h, rho + 0.5 * h * k2)?;
        let k4 = rhs(params, t + h, rho + h * k3)?;
        rho += h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
    }
    Ok(rho)
}

/// Grid solution of the two linearized mode problems at one instant, unit
/// amplitude, plus the one-sided boundary derivative of q.
#[derive(Debug, Clone)]
pub struct FdModeSolution {
    pub ys: Vec<f64>,
    pub w: Vec<f64>,
    pub q: Vec<f64>,
    pub dq_dy_boundary: f64,
}

/// Thomas solve of -u'' + c u = f on a uniform grid with u'(0) = 0 (ghost
/// reflection, second order for these even solutions) and u(R) = data.
fn neumann_dirichlet_solve(c: f64, f: &[f64], data: f64, h: f64) -> Result<Vec<f64>> {
    let n = f.len();
    let inv_h2 = 1.0 / (h * h);
    let diag = 2.0 * inv_h2 + c;
    let singular = || Error::SingularSystem("zero pivot in the mode solve".to_string());

    // Forward sweep; strictly diagonally dominant for c > 0, so the pivot
    // check is defensive only.
    let mut sup = vec![0.0; n - 1];
    let mut rhs = vec![0.0; n];
    if diag.abs() < 1e-300 {
        return Err(singular());
    }
    sup[0] = -2.0 * inv_h2 / diag;
    rhs[0] = f[0] / diag;
    for i in 1..n - 1 {
        let pivot = diag + inv_h2 * sup[i - 1];
        if pivot.abs() < 1e-300 {
            return Err(singular());
        }
        sup[i] = -inv_h2 / pivot;
        rhs[i] = (f[i] + inv_h2 * rhs[i - 1]) / pivot;
    }

    let mut u = vec![0.0; n];
    u[n - 1] = data;
    for i in (0..n - 1).rev() {
        u[i] = rhs[i] - sup[i] * u[i + 1];
    }
    Ok(u)
}

/// Second-order central finite differences for the coupled problems
///
/// ```text
///     -w'' + (1+j) w = 0      w'(0) = 0   w(R) = -Phi tanh(R)
///     -q'' +    j  q = mu w   q'(0) = 0   q(R) = gamma j / 2 - dp/dy(R)
/// ```
///
/// with R = rho*(t), j = n^2 + m^2, gamma from the orbit parameters.
pub fn bvp_mode_profiles(
    orbit: &PeriodicOrbit,
    n: u32,
    m: u32,
    t: f64,
    nodes: usize,
) -> Result<FdModeSolution> {
    if n == 0 && m == 0 {
        return Err(Error::InvalidInput(
            "mode (0,0) is the flat solution itself".into(),
        ));
    }
    if nodes < 1000 {
        return Err(Error::InvalidInput(format!(
            "mode oracle needs at least 1000 grid points, got {nodes}"
        )));
    }
    let params = orbit.params();
    let rho = orbit.rho_at(t);
    let phi = params.nutrient.eval(t);
    let j = (n * n + m * m) as f64;
    let h = rho / (nodes - 1) as f64;
    let ys: Vec<f64> = (0..nodes).map(|i| i as f64 * h).collect();

    let w = neumann_dirichlet_solve(1.0 + j, &vec![0.0; nodes], -phi * rho.tanh(), h)?;

    let dp_dy = params.mu * params.sigma_tilde * rho - params.mu * phi * rho.tanh();
    let forcing: Vec<f64> = w.iter().map(|&wi| params.mu * wi).collect();
    let q = neumann_dirichlet_solve(j, &forcing, 0.5 * params.gamma * j - dp_dy, h)?;

    let k = nodes - 1;
    let dq_dy_boundary = (3.0 * q[k] - 4.0 * q[k - 1] + q[k - 2]) / (2.0 * h);
    Ok(FdModeSolution {
        ys,
        w,
        q,
        dq_dy_boundary,
    })
}

/// Boundary derivative of q alone.
pub fn bvp_mode_solve(orbit: &PeriodicOrbit, n: u32, m: u32, t: f64, nodes: usize) -> Result<f64> {
    Ok(bvp_mode_profiles(orbit, n, m, t, nodes)?.dq_dy_boundary)
}

/// Observed convergence order of the boundary derivative under two grid
/// doublings (Richardson ratio); close to 2 for this scheme.
pub fn bvp_convergence_order(
    orbit: &PeriodicOrbit,
    n: u32,
    m: u32,
    t: f64,
    nodes: usize,
) -> Result<f64> {
    let d1 = bvp_mode_solve(orbit, n, m, t, nodes)?;
    let d2 = bvp_mode_solve(orbit, n, m, t, 2 * (nodes - 1) + 1)?;
    let d3 = bvp_mode_solve(orbit, n, m, t, 4 * (nodes - 1) + 1)?;
    Ok(((d1 - d2).abs() / (d2 - d3).abs()).log2())
}

/// Both displays of the amplitude decay coefficient on the orbit grid: the
/// direct form, and the rewrite obtained by substituting the thickness
/// velocity from the flow equation.  Reports the worst pointwise
/// discrepancy; passes at relative 1e-8.
pub fn dual_formula_a(orbit: &PeriodicOrbit, j: f64, gamma: f64) -> OracleReport {
    dual_formula_a_with_drift(orbit, j, gamma, 0.0)
}

/// Same comparison with the thickness velocity scaled by (1 + drift); a
/// nonzero drift is a fault injection confirming the check has teeth.
pub(crate) fn dual_formula_a_with_drift(
    orbit: &PeriodicOrbit,
    j: f64,
    gamma: f64,
    drift: f64,
) -> OracleReport {
    assert!(j > 0.0, "mode index must be positive");
    let params = orbit.params();
    let a = (1.0 + j).sqrt();
    let b = j.sqrt();
    let mut worst: Option<OracleReport> = None;
    for &t in orbit.grid() {
        let rho = orbit.rho_at(t);
        let phi = params.nutrient.eval(t);
        let th = rho.tanh();
        let tb = (b * rho).tanh();
        let dr = orbit.drho_dt(t) * (1.0 + drift);
        let primary = a_value(orbit, j, gamma, t);
        let oracle = params.mu * phi * th / rho - dr / rho - params.mu * phi
            + params.mu * phi * th * a * (a * rho).tanh()
            - params.mu * phi * th * b * tb
            + dr * b * tb
            + 0.5 * gamma * j.powf(1.5) * tb;
        let report = OracleReport::compare("a_coefficient_dual_display", primary, oracle, 1e-8);
        if worst.as_ref().is_none_or(|w| report.rel_diff > w.rel_diff) {
            worst = Some(report);
        }
    }
    worst.expect("orbit grid is never empty")
}
