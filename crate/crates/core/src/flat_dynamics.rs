//! The reduced thickness dynamics of the flat layer.
//!
//! With the nutrient level Phi(t) prescribed, the layer thickness obeys
//!
//! ```text
//!     d rho / dt = mu * rho * ( Phi(t) * tanh(rho)/rho - sigma_tilde )
//! ```
//!
//! and the through-layer nutrient and pressure profiles are explicit:
//!
//! ```text
//!     sigma(y, t) = Phi(t) cosh(y) / cosh(rho(t))
//!     p(y, t)     = mu sigma_tilde y^2 / 2 + mu Phi(t)
//!                   - mu sigma_tilde rho^2 / 2 - mu Phi(t) cosh(y)/cosh(rho)
//! ```
//!
//! This module owns the parameter set, the right-hand side, an embedded
//! Dormand-Prince 5(4) integrator with dense output, the long-time regime
//! classification, and the two profiles.

use serde::{Deserialize, Serialize};

use crate::hyperbolic::{cosh_ratio, tanhc};
use crate::nutrient::PeriodicNutrient;
use crate::{Error, Result};

/// Full parameter set of the model.
///
/// `gamma` is the surface-tension coefficient of the linearized analysis; the
/// flat dynamics itself never reads it (a flat boundary has no curvature).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ParamsJson", into = "ParamsJson")]
pub struct ModelParams {
    pub mu: f64,
    pub sigma_tilde: f64,
    pub gamma: f64,
    pub nutrient: PeriodicNutrient,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsJson {
    mu: f64,
    sigma_tilde: f64,
    #[serde(default)]
    gamma: f64,
    nutrient: PeriodicNutrient,
}

impl TryFrom<ParamsJson> for ModelParams {
    type Error = Error;
    fn try_from(j: ParamsJson) -> Result<Self> {
        ModelParams::new(j.mu, j.sigma_tilde, j.gamma, j.nutrient)
    }
}

impl From<ModelParams> for ParamsJson {
    fn from(p: ModelParams) -> Self {
        ParamsJson {
            mu: p.mu,
            sigma_tilde: p.sigma_tilde,
            gamma: p.gamma,
            nutrient: p.nutrient,
        }
    }
}

impl ModelParams {
    pub fn new(mu: f64, sigma_tilde: f64, gamma: f64, nutrient: PeriodicNutrient) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidInput(format!(
                "mu must be positive, got {mu}"
            )));
        }
        if !(sigma_tilde > 0.0) || !sigma_tilde.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sigma_tilde must be positive, got {sigma_tilde}"
            )));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "gamma must be nonnegative, got {gamma}"
            )));
        }
        Ok(ModelParams {
            mu,
            sigma_tilde,
            gamma,
            nutrient,
        })
    }

    pub fn period(&self) -> f64 {
        self.nutrient.period()
    }

    /// Same parameters with a different surface-tension coefficient.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        ModelParams::new(self.mu, self.sigma_tilde, gamma, self.nutrient.clone())
    }
}

/// Long-time fate of the layer.  `boundary` is set when sigma_tilde sits
/// within relative 1e-12 of the nutrient mean, where the classification is
/// numerically ambiguous (equality itself still extinguishes, just without an
/// exponential rate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "regime")]
pub enum Regime {
    Extinction { boundary: bool },
    PersistentPeriodic { boundary: bool },
}

impl Regime {
    pub fn is_extinction(&self) -> bool {
        matches!(self, Regime::Extinction { .. })
    }
}

/// Extinction iff sigma_tilde >= mean of Phi.
pub fn classify(params: &ModelParams) -> Regime {
    let phi_bar = params.nutrient.mean();
    let boundary = (params.sigma_tilde - phi_bar).abs() <= 1e-12 * phi_bar;
    if params.sigma_tilde >= phi_bar {
        Regime::Extinction { boundary }
    } else {
        Regime::PersistentPeriodic { boundary }
    }
}

/// Right-hand side mu * rho * (Phi(t) tanh(rho)/rho - sigma_tilde).
pub fn rhs(params: &ModelParams, t: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::DomainError(format!(
            "thickness must be positive, got rho = {rho}"
        )));
    }
    Ok(params.mu * rho * (params.nutrient.eval(t) * tanhc(rho) - params.sigma_tilde))
}

// ------------------------------------------------------- Dormand-Prince 5(4)

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Fifth-order minus fourth-order weights (error estimator).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Dense-output coefficients of one accepted step over [t, t + h].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct DenseSeg {
    t: f64,
    h: f64,
    r: [f64; 5],
}

impl DenseSeg {
    fn eval(&self, time: f64) -> f64 {
        let theta = ((time - self.t) / self.h).clamp(0.0, 1.0);
        let [r1, r2, r3, r4, r5] = self.r;
        r1 + theta * (r2 + (1.0 - theta) * (r3 + theta * (r4 + (1.0 - theta) * r5)))
    }
}

/// A numerically integrated thickness history on [0, t_end], with dense output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    times: Vec<f64>,
    values: Vec<f64>,
    segs: Vec<DenseSeg>,
}

impl Trajectory {
    /// Accepted step endpoints (strictly increasing, starts at 0).
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Thickness at the accepted step endpoints (strictly positive).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Interpolated thickness at any t in [0, t_end] (tiny overshoot is
    /// clamped; anything further out is a domain error).
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let end = self.t_end();
        if t < -1e-9 * end.max(1.0) || t > end * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::DomainError(format!(
                "time {t} outside integrated range [0, {end}]"
            )));
        }
        let t = t.clamp(0.0, end);
        // First segment whose right endpoint reaches t.
        let idx = self
            .segs
            .partition_point(|s| s.t + s.h < t)
            .min(self.segs.len() - 1);
        Ok(self.segs[idx].eval(t))
    }
}

/// Adaptive integration of the thickness ODE from rho(0) = rho0 to t_end.
///
/// Local error per unit step is kept at or below `tol` (valid range
/// [1e-13, 1e-4]).  Every accepted value is additionally required to satisfy
/// the two-sided growth envelope
///
/// ```text
///     rho0 exp(-mu sigma_tilde t) <= rho(t) <= rho0 exp(mu (max Phi - sigma_tilde) t)
/// ```
///
/// up to relative slack 1e-8; a step that lands outside is rejected and
/// retried at half the step size (the exact solution satisfies the envelope,
/// so only numerical overshoot can violate it).
pub fn integrate(params: &ModelParams, rho0: f64, t_end: f64, tol: f64) -> Result<Trajectory> {
    if !(rho0 > 0.0) || !rho0.is_finite() {
        return Err(Error::DomainError(format!(
            "rho0 must be positive, got {rho0}"
        )));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidInput(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    if !(1e-13..=1e-4).contains(&tol) {
        return Err(Error::InvalidInput(format!(
            "tol must lie in [1e-13, 1e-4], got {tol}"
        )));
    }
    let stats = params.nutrient.statistics()?;
    let mu = params.mu;
    let sig = params.sigma_tilde;
    let grow = mu * (stats.max - sig); // upper envelope exponent
    let decay = -mu * sig; // lower envelope exponent
    let f = |t: f64, y: f64| mu * y * (params.nutrient.eval(t) * tanhc(y) - sig);

    let mut t = 0.0_f64;
    let mut y = rho0;
    let mut k1 = f(t, y);
    let mut h = (t_end / 10.0).min(params.period() / 20.0);

    let mut times = vec![0.0];
    let mut values = vec![rho0];
    let mut segs: Vec<DenseSeg> = Vec::new();

    const MAX_STEPS: usize = 20_000_000;
    let mut steps = 0usize;
    while t < t_end {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::ToleranceNotMet(format!(
                "step budget exhausted at t = {t} (tol = {tol})"
            )));
        }
        if h < 1e-14 * t.max(1.0) {
            return Err(Error::ToleranceNotMet(format!(
                "step size underflow at t = {t} (tol = {tol})"
            )));
        }
        h = h.min(t_end - t);

        let k2 = f(t + C2 * h, y + h * (A21 * k1));
        let k3 = f(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
        let k4 = f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(
            t + C5 * h,
            y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
        );
        let k6 = f(
            t + h,
            y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
        );
        let ynew = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
        let k7 = f(t + h, ynew);

        let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let scale = tol * (1.0 + y.abs().max(ynew.abs()));
        let e_norm = err.abs() / (h * scale);

        if e_norm <= 1.0 {
            // Envelope screen on the accepted endpoint.
            let tn = t + h;
            let lower = rho0 * (decay * tn).exp();
            let upper = rho0 * (grow * tn).exp();
            if !(ynew > 0.0) || ynew < lower * (1.0 - 1e-8) || ynew > upper * (1.0 + 1e-8) {
                h *= 0.5;
                continue;
            }
            let ydiff = ynew - y;
            let r3 = h * k1 - ydiff;
            let seg = DenseSeg {
                t,
                h,
                r: [
                    y,
                    ydiff,
                    r3,
                    ydiff - h * k7 - r3,
                    h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
                ],
            };
            segs.push(seg);
            t = tn;
            y = ynew;
            k1 = k7; // first-same-as-last
            times.push(t);
            values.push(y);
            let factor = if e_norm == 0.0 {
                5.0
            } else {
                (0.9 * e_norm.powf(-0.25)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            h *= (0.9 * e_norm.powf(-0.25)).clamp(0.1, 0.9);
        }
    }
    Ok(Trajectory {
        times,
        values,
        segs,
    })
}

// ------------------------------------------------------------ layer profiles

fn check_layer_point(rho: f64, y: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::DomainError(format!(
            "thickness must be positive, got {rho}"
        )));
    }
    if !(0.0..=rho).contains(&y) {
        return Err(Error::DomainError(format!(
            "profile point y = {y} outside the layer [0, {rho}]"
        )));
    }
    Ok(())
}

/// Nutrient concentration through the layer: Phi(t) cosh(y)/cosh(rho).
pub fn sigma_profile(params: &ModelParams, rho: f64, t: f64, y: f64) -> Result<f64> {
    check_layer_point(rho, y)?;
    Ok(params.nutrient.eval(t) * cosh_ratio(y, rho))
}

/// Pressure through the layer; vanishes at the free boundary y = rho.
pub fn pressure_profile(params: &ModelParams, rho: f64, t: f64, y: f64) -> Result<f64> {
    check_layer_point(rho, y)?;
    let phi = params.nutrient.eval(t);
    let mu = params.mu;
    let sig = params.sigma_tilde;
    Ok(0.5 * mu * sig * (y * y - rho * rho) + mu * phi * (1.0 - cosh_ratio(y, rho)))
}

/// Outward pressure gradient at the free boundary:
/// mu sigma_tilde rho - mu Phi(t) tanh(rho), which equals -rhs(t, rho).
pub fn dp_dy_boundary(params: &ModelParams, t: f64, rho: f64) -> f64 {
    params.mu * params.sigma_tilde * rho - params.mu * params.nutrient.eval(t) * rho.tanh()
}

/// Second normal derivative of the pressure at the free boundary:
/// mu (sigma_tilde - Phi(t)).
pub fn d2p_dy2_boundary(params: &ModelParams, t: f64) -> f64 {
    params.mu * (params.sigma_tilde - params.nutrient.eval(t))
}
