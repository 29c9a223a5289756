//! The T-periodic thickness orbit and its attraction properties.
//!
//! In the persistent regime (sigma_tilde < mean Phi) the period map
//! F(rho0) = rho(T; rho0) has exactly one positive fixed point, pinned inside
//! an a-priori bracket built from the damped-tanh profile:
//!
//! ```text
//!     x2    solves tanh(x)/x = sigma_tilde / max Phi
//!     x_bar = [solution of tanh(x)/x = sigma_tilde / mean Phi]
//!             / exp(mu (max Phi - sigma_tilde) T)
//! ```
//!
//! F maps [x_bar, x2] into itself, so bisection plus a secant polish nails the
//! fixed point; every positive solution is then attracted to the resulting
//! orbit at an exponential rate estimated both empirically (log-error fit over
//! whole periods) and from a closed-form lower bound.

use serde::Serialize;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::flat_dynamics::{classify, integrate, ModelParams, Trajectory};
use crate::hyperbolic::{dtanhc, inv_tanhc, tanhc};
use crate::numerics::{gl8, grid_max_refine, grid_min_refine, linear_fit};
use crate::{Error, Result};

/// Number of uniform grid cells the orbit is stored on.
pub const ORBIT_CELLS: usize = 512;

/// Invariant bracket for the fixed point of the period map.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Bracket {
    pub x_bar: f64,
    pub x2: f64,
}

/// A priori bracket [x_bar, x2] containing the unique periodic thickness.
///
/// Requires the persistent regime; configurations with sigma_tilde >= mean Phi
/// have no positive periodic solution and yield `RegimeError`.
pub fn bracket(params: &ModelParams) -> Result<Bracket> {
    if classify(params).is_extinction() {
        return Err(Error::RegimeError(format!(
            "no periodic orbit: sigma_tilde = {} >= mean nutrient {}",
            params.sigma_tilde,
            params.nutrient.mean()
        )));
    }
    let stats = params.nutrient.statistics()?;
    let x2 = inv_tanhc(params.sigma_tilde / stats.max)?;
    let x_at_mean = inv_tanhc(params.sigma_tilde / stats.mean)?;
    let x_bar =
        x_at_mean * (-(params.mu * (stats.max - params.sigma_tilde) * params.period())).exp();
    debug_assert!(x_bar < x2);
    Ok(Bracket { x_bar, x2 })
}

/// Period map F(rho0) = rho(T; rho0), by adaptive integration over one period.
pub fn poincare_map(params: &ModelParams, rho0: f64, tol: f64) -> Result<f64> {
    Ok(integrate(params, rho0, params.period(), tol)?.final_value())
}

/// The unique positive T-periodic solution, stored densely over one period.
#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    params: ModelParams,
    rho0_star: f64,
    residual: f64,
    grid: Vec<f64>,
    values: Vec<f64>,
    rho_min: f64,
    rho_max: f64,
    traj: Trajectory,
}

/// Flat summary of an orbit (JSON sidecar of the CSV export).
#[derive(Debug, Clone, Serialize)]
pub struct OrbitSummary {
    pub rho0_star: f64,
    pub residual: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub period: f64,
    pub cells: usize,
    pub orbit_ref: String,
}

impl PeriodicOrbit {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn period(&self) -> f64 {
        self.params.period()
    }

    /// Thickness at the start (= end) of the period.
    pub fn rho0_star(&self) -> f64 {
        self.rho0_star
    }

    /// Fixed-point defect |F(rho0_star) - rho0_star|.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Uniform grid of ORBIT_CELLS + 1 times spanning [0, T].
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Orbit values on [`Self::grid`]; first and last entries coincide.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    /// Dense orbit value at any time (reduced mod T).
    pub fn rho_at(&self, t: f64) -> f64 {
        let tau = t.rem_euclid(self.period());
        self.traj
            .value_at(tau)
            .expect("orbit trajectory covers [0, T]")
    }

    /// Time derivative of the orbit, evaluated through the ODE right-hand
    /// side (exact wherever rho_at is exact).
    pub fn drho_dt(&self, t: f64) -> f64 {
        crate::flat_dynamics::rhs(&self.params, t, self.rho_at(t))
            .expect("orbit values are positive")
    }

    /// Stable identifier tying exported records back to this orbit.
    pub fn orbit_ref(&self) -> String {
        // FNV-1a over the defining scalars; deterministic across runs.
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |v: f64| {
            for b in v.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.params.mu);
        eat(self.params.sigma_tilde);
        eat(self.params.gamma);
        eat(self.period());
        eat(self.rho0_star);
        format!("orbit-{h:016x}")
    }

    pub fn summary(&self) -> OrbitSummary {
        OrbitSummary {
            rho0_star: self.rho0_star,
            residual: self.residual,
            rho_min: self.rho_min,
            rho_max: self.rho_max,
            period: self.period(),
            cells: ORBIT_CELLS,
            orbit_ref: self.orbit_ref(),
        }
    }

    /// CSV export: header `t,rho_star`, one row per grid cell (the duplicate
    /// closing node at t = T is omitted), full double precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,rho_star\n");
        for i in 0..ORBIT_CELLS {
            out.push_str(&format!("{:.16e},{:.16e}\n", self.grid[i], self.values[i]));
        }
        out
    }

    /// Max deviation between the stored grid values and a fresh re-integration
    /// continued through a second period: how periodic the orbit really is.
    pub fn periodicity_defect(&self) -> Result<f64> {
        let t = self.period();
        let traj = integrate(&self.params, self.rho0_star, 2.0 * t, 1e-12)?;
        let mut worst = 0.0_f64;
        for (i, &ti) in self.grid.iter().enumerate() {
            let shifted = traj.value_at(ti + t)?;
            worst = worst.max((shifted - self.values[i]).abs());
        }
        Ok(worst)
    }

    /// Period mean of the logarithmic derivative
    /// (1/T) int [Phi(t) tanh(rho*)/rho* - sigma_tilde] dt, which must vanish
    /// for a periodic solution.
    pub fn log_derivative_mean(&self) -> f64 {
        let t = self.period();
        let h = t / ORBIT_CELLS as f64;
        let mut acc = 0.0;
        for i in 0..ORBIT_CELLS {
            acc += gl8(
                |s| self.params.nutrient.eval(s) * tanhc(self.rho_at(s)) - self.params.sigma_tilde,
                i as f64 * h,
                (i + 1) as f64 * h,
            );
        }
        acc / t
    }
}

/// Find the unique periodic orbit; `tol` is the target fixed-point residual
/// scale (values below 1e-12 are honored down to integrator accuracy).
pub fn find_periodic(params: &ModelParams, tol: f64) -> Result<PeriodicOrbit> {
    let br = bracket(params)?;
    find_periodic_in(params, br.x_bar, br.x2, tol)
}

/// Same as [`find_periodic`] but restricted to a caller-supplied sub-bracket
/// that must straddle the fixed point.
pub fn find_periodic_in(params: &ModelParams, lo: f64, hi: f64, tol: f64) -> Result<PeriodicOrbit> {
    if classify(params).is_extinction() {
        return Err(Error::RegimeError(
            "no periodic orbit in the extinction regime".into(),
        ));
    }
    if !(lo > 0.0 && hi > lo) || !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!(
            "bad bracket [{lo}, {hi}] or tolerance {tol}"
        )));
    }
    let ode_tol = 1e-12;
    let g = |x: f64| -> Result<f64> { Ok(poincare_map(params, x, ode_tol)? - x) };

    // Bisection down to a narrow interval.
    let mut a = lo;
    let mut b = hi;
    let mut ga = g(a)?;
    let gb = g(b)?;
    if ga == 0.0 {
        b = a;
    } else if gb == 0.0 {
        a = b;
    } else if ga.signum() == gb.signum() {
        // The fixed point can sit numerically on an endpoint (constant
        // nutrient puts it exactly at x2); accept the endpoint if its
        // displacement is already negligible.
        let near = 1e-8;
        if gb.abs() <= ga.abs() && gb.abs() < near * (1.0 + b.abs()) {
            a = b;
        } else if ga.abs() < near * (1.0 + a.abs()) {
            b = a;
        } else {
            return Err(Error::BracketError(format!(
                "period-map displacement does not change sign on [{lo}, {hi}]"
            )));
        }
        ga = g(a)?;
    }
    let widths = 1e-11 * hi.max(1.0);
    while b - a > widths {
        let mid = 0.5 * (a + b);
        let gm = g(mid)?;
        if gm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }

    // Secant polish from the bisection endpoints; keep the best iterate.
    let target = |x: f64| tol.min(1e-12) * (1.0 + x.abs());
    let mut x0 = a;
    let mut g0 = g(x0)?;
    let mut x1 = if b > a { b } else { a * (1.0 + 1e-9) + 1e-12 };
    let mut g1 = g(x1)?;
    let (mut best_x, mut best_g) = if g0.abs() < g1.abs() {
        (x0, g0)
    } else {
        (x1, g1)
    };
    let mut stale = 0;
    for _ in 0..60 {
        if best_g.abs() <= target(best_x) || stale >= 4 {
            break;
        }
        let denom = g1 - g0;
        if denom == 0.0 {
            break;
        }
        let mut x2 = x1 - g1 * (x1 - x0) / denom;
        if !x2.is_finite() {
            break;
        }
        x2 = x2.clamp(0.5 * lo, 2.0 * hi);
        let g2 = g(x2)?;
        if g2.abs() < best_g.abs() {
            best_x = x2;
            best_g = g2;
            stale = 0;
        } else {
            stale += 1;
        }
        x0 = x1;
        g0 = g1;
        x1 = x2;
        g1 = g2;
    }

    let rho0_star = best_x;
    // Final tight pass defines the stored orbit and the reported residual.
    let traj = integrate(params, rho0_star, params.period(), 1e-13)?;
    let residual = (traj.final_value() - rho0_star).abs();
    if residual >= 1e-10 * (1.0 + rho0_star) {
        return Err(Error::ConvergenceError(format!(
            "fixed-point residual {residual} exceeds 1e-10 * (1 + {rho0_star})"
        )));
    }

    let t = params.period();
    let h = t / ORBIT_CELLS as f64;
    let mut grid = Vec::with_capacity(ORBIT_CELLS + 1);
    let mut values = Vec::with_capacity(ORBIT_CELLS + 1);
    for i in 0..=ORBIT_CELLS {
        let ti = i as f64 * h;
        grid.push(ti);
        values.push(traj.value_at(ti)?);
    }
    values[0] = rho0_star;
    values[ORBIT_CELLS] = rho0_star;

    let (_, rho_min) = grid_min_refine(|s| traj.value_at(s).unwrap(), 0.0, t, 4096, 1e-12);
    let (_, rho_max) = grid_max_refine(|s| traj.value_at(s).unwrap(), 0.0, t, 4096, 1e-12);

    Ok(PeriodicOrbit {
        params: params.clone(),
        rho0_star,
        residual,
        grid,
        values,
        rho_min,
        rho_max,
        traj,
    })
}

/// Empirical vs. formula attraction rate of the periodic orbit.
#[derive(Debug, Clone, Serialize)]
pub struct AttractionEstimate {
    /// Negated slope of the log-error fit over whole periods.
    pub delta_empirical: f64,
    /// Closed-form lower bound for the attraction exponent.
    pub delta_formula: f64,
    /// Prefactor of the bound |rho(kT) - rho*(0)| <= C exp(-delta kT).
    pub c: f64,
    pub r_squared: f64,
    /// Number of period samples entering the fit.
    pub periods_used: usize,
}

/// Measure the attraction rate from the probe `rho0` over `horizon` (at least
/// ten periods).  The empirical rate comes from a least-squares fit of
/// log |rho(kT) - rho*(0)|; the formula rate is
///
/// ```text
///     delta = min( mu Phi_min M_min rho_min,
///                  mu Phi_min M_bar_min rho_min e^{y0} ),   y0 = ln(rho0 / rho*(0))
/// ```
///
/// where M_min and M_bar_min are minima of -d/d rho [tanh(rho)/rho] over
/// [rho_min, rho_max e^{max(y0,0)}] and [rho_min e^{min(y0,0)}, rho_max].
pub fn attraction_rate(
    orbit: &PeriodicOrbit,
    rho0: f64,
    horizon: f64,
) -> Result<AttractionEstimate> {
    let t = orbit.period();
    let rho_star0 = orbit.rho0_star();
    if !(rho0 > 0.0) || !rho0.is_finite() {
        return Err(Error::DomainError(format!(
            "rho0 must be positive, got {rho0}"
        )));
    }
    if (rho0 - rho_star0).abs() <= 1e-12 * (1.0 + rho_star0) {
        return Err(Error::DegenerateStart(format!(
            "probe {rho0} coincides with the periodic value {rho_star0}"
        )));
    }
    if horizon < 10.0 * t {
        return Err(Error::InvalidInput(format!(
            "horizon {horizon} shorter than ten periods ({})",
            10.0 * t
        )));
    }

    let params = orbit.params();
    let traj = integrate(params, rho0, horizon, 1e-12)?;
    let periods = (horizon / t + 1e-9).floor() as usize;
    let floor = 1e-13 * (1.0 + rho_star0);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 1..=periods {
        let e = (traj.value_at(k as f64 * t)? - rho_star0).abs();
        if e > floor {
            xs.push(k as f64 * t);
            ys.push(e.ln());
        }
    }
    if xs.len() < 5 {
        return Err(Error::ToleranceNotMet(
            "probe collapsed onto the orbit before enough periods accumulated".into(),
        ));
    }
    let (slope, _, r2) = linear_fit(&xs, &ys);

    let stats = params.nutrient.statistics()?;
    let y0 = (rho0 / rho_star0).ln();
    let (rho_min, rho_max) = (orbit.rho_min(), orbit.rho_max());
    let neg_slope = |r: f64| -dtanhc(r);
    // Intervals can degenerate to a point when the orbit is constant.
    let min_over = |lo: f64, hi: f64| {
        if hi - lo <= 1e-12 * hi.max(1.0) {
            neg_slope(0.5 * (lo + hi))
        } else {
            grid_min_refine(neg_slope, lo, hi, 2048, 1e-12).1
        }
    };
    let m_min = min_over(rho_min, rho_max * y0.max(0.0).exp());
    let m_bar_min = min_over(rho_min * y0.min(0.0).exp(), rho_max);
    let delta_formula = (params.mu * stats.min * m_min * rho_min)
        .min(params.mu * stats.min * m_bar_min * rho_min * y0.exp());

    Ok(AttractionEstimate {
        delta_empirical: -slope,
        delta_formula,
        c: rho_max * (1.0 - y0.exp()).abs(),
        r_squared: r2,
        periods_used: xs.len(),
    })
}

/// Re-solve the fixed point from `n` seeded random sub-brackets of
/// [x_bar, x2] that straddle it, returning each solution.  A spread larger
/// than solver accuracy would signal a second fixed point.
pub fn uniqueness_probe(params: &ModelParams, tol: f64, seed: u64, n: usize) -> Result<Vec<f64>> {
    let br = bracket(params)?;
    let reference = find_periodic(params, tol)?.rho0_star();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roots = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.gen_range(0.02..0.98);
        let v: f64 = rng.gen_range(0.02..0.98);
        let lo = br.x_bar + u * (reference - br.x_bar);
        let hi = reference + v * (br.x2 - reference);
        roots.push(find_periodic_in(params, lo, hi, tol)?.rho0_star());
    }
    Ok(roots)
}
