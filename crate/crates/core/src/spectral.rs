//! Bifurcation values along the periodic orbit.
//!
//! For mode index j the bifurcation value is gamma_j = mu k1(j) / k2(j) with
//!
//! ```text
//!     k1(j) = int_0^T Phi { 1 - tanh(r)/r
//!                           - tanh(r) [ sqrt(1+j) tanh(sqrt(1+j) r)
//!                                       - sqrt(j) tanh(sqrt(j) r) ] } dt
//!     k2(j) = int_0^T (1/2) j^{3/2} tanh(sqrt(j) r) dt,          r = rho*(t)
//! ```
//!
//! k1 is strictly increasing with a single root j0; gamma_j is positive
//! exactly for j > j0, eventually decreases, and tends to zero.  The
//! linearized mode amplitude S_{j,gamma}(t) = exp(-int_0^t A_{j,gamma}) is
//! T-periodic precisely when gamma = gamma_j, which is the computational
//! kernel criterion used throughout.

use serde::Serialize;

use crate::hyperbolic::{sqrt_tanh, sqrt_tanh_gap, tanhc};
use crate::numerics::{bisect, gl8_nodes, golden_min};
use crate::periodic_solver::{PeriodicOrbit, ORBIT_CELLS};
use crate::{Error, Result};

/// Gauss nodes per orbit cell.
const NODES_PER_CELL: usize = 8;

/// One j-slice of the bifurcation table.
#[derive(Debug, Clone, Serialize)]
pub struct BifurcationRecord {
    pub j: f64,
    pub k1: f64,
    pub k2: f64,
    pub gamma_j: f64,
    pub orbit_ref: String,
}

/// Linearized amplitude data for one (j, gamma) pair, sampled on the orbit
/// grid.
#[derive(Debug, Clone, Serialize)]
pub struct ModeCoefficient {
    pub j: f64,
    pub gamma: f64,
    pub a_samples: Vec<f64>,
    pub s_samples: Vec<f64>,
}

impl ModeCoefficient {
    /// S(T); equal to 1 within 1e-8 exactly at the bifurcation value.
    pub fn s_period_end(&self) -> f64 {
        *self.s_samples.last().expect("grid is non-empty")
    }
}

/// Result of scanning d gamma_j / dj over (j0, j_max].
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityScan {
    /// Turning point of gamma_j when the derivative changes sign in range.
    pub n0_estimate: Option<f64>,
    pub sign_changes: usize,
}

/// Truncated-series evaluation of tanh together with its tail majorant.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesCheck {
    pub exact: f64,
    pub series: f64,
    pub tail_bound: f64,
}

struct QuadNode {
    w: f64,
    rho: f64,
    phi: f64,
}

/// Gauss nodes of the 512 orbit cells, with orbit and nutrient samples baked
/// in so repeated j-sweeps touch no dense-output machinery.
fn orbit_nodes(orbit: &PeriodicOrbit) -> Vec<QuadNode> {
    let h = orbit.period() / ORBIT_CELLS as f64;
    let mut nodes = Vec::with_capacity(ORBIT_CELLS * NODES_PER_CELL);
    for i in 0..ORBIT_CELLS {
        for (t, w) in gl8_nodes(i as f64 * h, (i + 1) as f64 * h) {
            nodes.push(QuadNode {
                w,
                rho: orbit.rho_at(t),
                phi: orbit.params().nutrient.eval(t),
            });
        }
    }
    nodes
}

fn k1_on(nodes: &[QuadNode], j: f64) -> f64 {
    nodes
        .iter()
        .map(|n| n.w * n.phi * (1.0 - tanhc(n.rho) - n.rho.tanh() * sqrt_tanh_gap(j, n.rho)))
        .sum()
}

fn k2_on(nodes: &[QuadNode], j: f64) -> f64 {
    nodes
        .iter()
        .map(|n| n.w * 0.5 * j * sqrt_tanh(j, n.rho))
        .sum()
}

/// First bifurcation quadrature k1(j); strictly increasing in j, negative at
/// j = 0, positive for large j.
pub fn k1(orbit: &PeriodicOrbit, j: f64) -> f64 {
    assert!(j >= 0.0 && j.is_finite(), "mode index must be nonnegative");
    k1_on(&orbit_nodes(orbit), j)
}

/// Second bifurcation quadrature k2(j) > 0.
pub fn k2(orbit: &PeriodicOrbit, j: f64) -> f64 {
    assert!(j > 0.0 && j.is_finite(), "mode index must be positive");
    k2_on(&orbit_nodes(orbit), j)
}

/// Bifurcation record gamma_j = mu k1 / k2 at mode index j.
pub fn gamma(orbit: &PeriodicOrbit, j: f64) -> BifurcationRecord {
    assert!(j > 0.0 && j.is_finite(), "mode index must be positive");
    let nodes = orbit_nodes(orbit);
    let k1v = k1_on(&nodes, j);
    let k2v = k2_on(&nodes, j);
    BifurcationRecord {
        j,
        k1: k1v,
        k2: k2v,
        gamma_j: orbit.params().mu * k1v / k2v,
        orbit_ref: orbit.orbit_ref(),
    }
}

/// Unique root j0 of k1, located by doubling then bisection to 1e-10.
pub fn find_j0(orbit: &PeriodicOrbit) -> Result<f64> {
    let nodes = orbit_nodes(orbit);
    if k1_on(&nodes, 0.0) >= 0.0 {
        return Err(Error::BracketError(
            "k1(0) is not negative; orbit data is inconsistent".into(),
        ));
    }
    let mut hi = 16.0;
    while k1_on(&nodes, hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::BracketError(
                "k1 stayed negative out to j = 1e12".into(),
            ));
        }
    }
    bisect(|j| k1_on(&nodes, j), 0.0, hi, 1e-10, 200)
}

fn a_on(
    node_rho: f64,
    node_phi: f64,
    params: &crate::flat_dynamics::ModelParams,
    j: f64,
    g: f64,
) -> f64 {
    let mu = params.mu;
    let sig = params.sigma_tilde;
    let a = (1.0 + j).sqrt();
    mu * sig - mu * node_phi + mu * node_phi * node_rho.tanh() * a * (a * node_rho).tanh()
        - mu * sig * node_rho * sqrt_tanh(j, node_rho)
        + 0.5 * g * j * sqrt_tanh(j, node_rho)
}

/// Linearized amplitude coefficient A_{j,gamma}(t):
///
/// ```text
///     A = mu sigma_tilde - mu Phi
///         + mu Phi tanh(r) sqrt(1+j) tanh(sqrt(1+j) r)
///         - mu sigma_tilde r sqrt(j) tanh(sqrt(j) r)
///         + (gamma j^{3/2} / 2) tanh(sqrt(j) r),       r = rho*(t)
/// ```
pub fn a_value(orbit: &PeriodicOrbit, j: f64, gamma: f64, t: f64) -> f64 {
    let rho = orbit.rho_at(t);
    let phi = orbit.params().nutrient.eval(t);
    a_on(rho, phi, orbit.params(), j, gamma)
}

/// Per-cell integrals of A over the orbit grid.
fn a_cell_integrals(orbit: &PeriodicOrbit, j: f64, gamma: f64) -> Vec<f64> {
    let nodes = orbit_nodes(orbit);
    let params = orbit.params();
    (0..ORBIT_CELLS)
        .map(|i| {
            nodes[i * NODES_PER_CELL..(i + 1) * NODES_PER_CELL]
                .iter()
                .map(|n| n.w * a_on(n.rho, n.phi, params, j, gamma))
                .sum()
        })
        .collect()
}

/// Amplitude S_{j,gamma}(t) = exp(-int_0^t A); defined for all real t through
/// periodicity of A (S itself is periodic only at gamma = gamma_j).
pub fn s_value(orbit: &PeriodicOrbit, j: f64, gamma: f64, t: f64) -> f64 {
    let t_period = orbit.period();
    let cells = a_cell_integrals(orbit, j, gamma);
    let full: f64 = cells.iter().sum();
    let q = (t / t_period).floor();
    let r = t - q * t_period;
    let h = t_period / ORBIT_CELLS as f64;
    let whole = (r / h).floor().min((ORBIT_CELLS - 1) as f64) as usize;
    let mut integral = q * full + cells[..whole].iter().sum::<f64>();
    let lo = whole as f64 * h;
    if r > lo {
        integral += gl8_nodes(lo, r)
            .iter()
            .map(|&(t, w)| w * a_value(orbit, j, gamma, t))
            .sum::<f64>();
    }
    (-integral).exp()
}

/// Sample A and S on the orbit grid.
pub fn a_coefficient(orbit: &PeriodicOrbit, j: f64, gamma: f64) -> ModeCoefficient {
    assert!(j > 0.0 && j.is_finite(), "mode index must be positive");
    let cells = a_cell_integrals(orbit, j, gamma);
    let grid = orbit.grid();
    let a_samples: Vec<f64> = grid.iter().map(|&t| a_value(orbit, j, gamma, t)).collect();
    let mut s_samples = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    s_samples.push(1.0);
    for c in &cells {
        acc += c;
        s_samples.push((-acc).exp());
    }
    ModeCoefficient {
        j,
        gamma,
        a_samples,
        s_samples,
    }
}

/// Scan d gamma_j / dj on a geometric grid of 200 points in (j0, j_max];
/// central differences with step 1e-4 max(1, j).  At most one sign change is
/// expected; when one occurs the turning point of gamma_j is refined and
/// reported.
pub fn monotonicity_scan(orbit: &PeriodicOrbit, j_max: f64) -> Result<MonotonicityScan> {
    let j0 = find_j0(orbit)?;
    if !(j_max > j0) {
        return Err(Error::InvalidInput(format!(
            "scan range must exceed j0 = {j0}, got j_max = {j_max}"
        )));
    }
    let nodes = orbit_nodes(orbit);
    let mu = orbit.params().mu;
    let gamma_of = |j: f64| mu * k1_on(&nodes, j) / k2_on(&nodes, j);
    let dgamma = |j: f64| {
        let h = 1e-4 * j.max(1.0);
        (gamma_of(j + h) - gamma_of(j - h)) / (2.0 * h)
    };

    let n = 200usize;
    let j_lo = (j0 * 1.02).min(0.5 * (j0 + j_max));
    let ratio = (j_max / j_lo).powf(1.0 / (n - 1) as f64);
    let mut sign_changes = 0usize;
    let mut n0_estimate = None;
    let mut prev_j = j_lo;
    let mut prev_sign = dgamma(j_lo).signum();
    for i in 1..n {
        let jc = j_lo * ratio.powi(i as i32);
        let s = dgamma(jc).signum();
        if s != prev_sign && s != 0.0 && prev_sign != 0.0 {
            sign_changes += 1;
            if n0_estimate.is_none() {
                // gamma_j turns here; refine the extremum location.
                let (x, _) = golden_min(|j| -gamma_of(j), prev_j, jc, 1e-8);
                n0_estimate = Some(x);
            }
        }
        prev_sign = s;
        prev_j = jc;
    }
    Ok(MonotonicityScan {
        n0_estimate,
        sign_changes,
    })
}

/// Partial-fraction series for tanh truncated at odd k <= k_cap, with the
/// tail majorant 8z / (pi^2 k_cap):
///
/// ```text
///     tanh z = 2z sum_{k odd} 1 / ((k pi / 2)^2 + z^2)
/// ```
pub fn tanh_series_check(z: f64, k_cap: u32) -> SeriesCheck {
    assert!(z > 0.0, "series argument must be positive");
    assert!(k_cap >= 1 && k_cap % 2 == 1, "truncation index must be odd");
    let mut series = 0.0;
    let mut k = 1u32;
    while k <= k_cap {
        let half_kpi = 0.5 * k as f64 * std::f64::consts::PI;
        series += 1.0 / (half_kpi * half_kpi + z * z);
        k += 2;
    }
    series *= 2.0 * z;
    SeriesCheck {
        exact: z.tanh(),
        series,
        tail_bound: 8.0 * z / (std::f64::consts::PI.powi(2) * k_cap as f64),
    }
}

/// Series-quadrature derivatives (dk1/dj, dk2/dj), truncated at odd k <=
/// k_cap; cross-validates the finite differences used in the scan.
///
/// ```text
///     dk1/dj = int 2 Phi tanh(r)/r sum_k c^2 (2c^2 + 2j + 1)
///                                        / [(c^2+1+j)^2 (c^2+j)^2] dt
///     dk2/dj = int (1/r) sum_k [ 2j/(c^2+j) - j^2/(c^2+j)^2 ] dt
/// ```
///
/// with c = k pi / (2 r), r = rho*(t).
pub fn dk_dj(orbit: &PeriodicOrbit, j: f64, k_cap: u32) -> (f64, f64) {
    assert!(j > 0.0 && j.is_finite(), "mode index must be positive");
    assert!(
        k_cap >= 999 && k_cap % 2 == 1,
        "truncation must be odd and at least 999"
    );
    let nodes = orbit_nodes(orbit);
    let mut dk1 = 0.0;
    let mut dk2 = 0.0;
    for n in &nodes {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        let mut k = 1u32;
        while k <= k_cap {
            let c = 0.5 * k as f64 * std::f64::consts::PI / n.rho;
            let c2 = c * c;
            let d0 = c2 + j;
            let d1 = c2 + 1.0 + j;
            s1 += c2 * (2.0 * c2 + 2.0 * j + 1.0) / (d1 * d1 * d0 * d0);
            s2 += 2.0 * j / d0 - j * j / (d0 * d0);
            k += 2;
        }
        dk1 += n.w * 2.0 * n.phi * tanhc(n.rho) * s1;
        dk2 += n.w * s2 / n.rho;
    }
    (dk1, dk2)
}
