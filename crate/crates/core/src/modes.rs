//! Bifurcating branch enumeration and first-order branch geometry.
//!
//! Every integer j > j0 expressible as a sum of two squares yields non-flat
//! periodic branches with free boundary
//!
//! ```text
//!     y = rho*(t) + eps S_{j,gamma_j}(t) cos(n x1) cos(m x2) + O(eps^2)
//! ```
//!
//! one per canonical decomposition j = n^2 + m^2 (n >= m), plus an extra
//! `cos(n x1) + cos(n x2)` branch when j = n^2.  When two mode indices share
//! one bifurcation value, the branch bookkeeping follows the two collision
//! cases (partner a square multiple or not).  Surface sampling emits the
//! first-order geometry only; the quadratic correction is out of scope.

use serde::Serialize;

use crate::flat_dynamics::{d2p_dy2_boundary, dp_dy_boundary};
use crate::hyperbolic::cosh_ratio;
use crate::periodic_solver::{PeriodicOrbit, ORBIT_CELLS};
use crate::spectral::{a_coefficient, find_j0, gamma, s_value};
use crate::{Error, Result};

/// One canonical representation j = n^2 + m^2 with n >= m >= 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub n: u32,
    pub m: u32,
    pub j: u32,
    /// Always the n >= m representative of the unordered pair.
    pub canonical: bool,
}

fn exact_sqrt(r: u64) -> Option<u64> {
    let mut s = (r as f64).sqrt().round() as u64;
    while s * s > r {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= r {
        s += 1;
    }
    (s * s == r).then_some(s)
}

/// All canonical decompositions of j as a sum of two squares, in decreasing
/// n.  The list length is the branch multiplicity alpha_j.
pub fn decompose(j: u32) -> Vec<Decomposition> {
    assert!(j >= 1, "mode index must be at least 1");
    let mut out = Vec::new();
    let mut m = 0u64;
    while 2 * m * m <= j as u64 {
        if let Some(n) = exact_sqrt(j as u64 - m * m) {
            if n >= m {
                out.push(Decomposition {
                    n: n as u32,
                    m: m as u32,
                    j,
                    canonical: true,
                });
            }
        }
        m += 1;
    }
    out
}

/// Number of canonical decompositions of j.
pub fn alpha(j: u32) -> usize {
    decompose(j).len()
}

/// Spatial shape of one branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BranchKind {
    /// cos(n x1) cos(m x2)
    Product { n: u32, m: u32 },
    /// cos(n x1) + cos(n x2), the extra branch at perfect squares
    PlusForm { n: u32 },
}

/// A single bifurcating branch; `source_j` is the mode index whose amplitude
/// S drives it (differs from the atlas j for collision-partner branches).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Branch {
    #[serde(flatten)]
    pub kind: BranchKind,
    pub source_j: u32,
}

/// Integer mode indices sharing the bifurcation value of j, with a warning
/// when more than one turns up (theory allows at most one).
#[derive(Debug, Clone, Serialize)]
pub struct CollisionScan {
    pub partners: Vec<u32>,
    pub warning: Option<String>,
}

/// Branch bookkeeping at one bifurcation value.
#[derive(Debug, Clone, Serialize)]
pub struct BranchAtlas {
    pub j: u32,
    pub gamma_value: f64,
    pub collision_partner: Option<u32>,
    /// "A" when the partner is not a square multiple, "B" when it is.
    pub collision_case: Option<String>,
    pub branches: Vec<Branch>,
    /// Guaranteed branch count: alpha of the larger colliding index, or
    /// alpha_j alone.
    pub count_beta: usize,
    /// Case A also states the combined count alpha_{j1} + alpha_{j2}; both
    /// counts are reported rather than reconciled.
    pub count_case_a: Option<usize>,
}

/// Scan integers in (j0, j_max] for partners with the same bifurcation value
/// as j, within relative tolerance `tol_rel` (quadrature noise makes exact
/// ties unobservable).
pub fn collision_set(
    orbit: &PeriodicOrbit,
    j: u32,
    j_max: u32,
    tol_rel: f64,
) -> Result<CollisionScan> {
    let j0 = find_j0(orbit)?;
    if (j as f64) <= j0 {
        return Err(Error::InvalidInput(format!(
            "collision scan needs j > j0 = {j0}, got {j}"
        )));
    }
    let gamma_j = gamma(orbit, j as f64).gamma_j;
    let mut partners = Vec::new();
    for i in 1..=j_max {
        if i == j || (i as f64) <= j0 {
            continue;
        }
        let gamma_i = gamma(orbit, i as f64).gamma_j;
        if (gamma_i - gamma_j).abs() <= tol_rel * gamma_j.abs() {
            partners.push(i);
        }
    }
    let warning = (partners.len() > 1).then(|| {
        format!(
            "{} partners matched gamma_{j} within {tol_rel:e}; at most one \
             collision is consistent with a single turning point",
            partners.len()
        )
    });
    Ok(CollisionScan { partners, warning })
}

/// Branch atlas at gamma_j, with collision partners searched up to j_max.
pub fn branch_atlas(orbit: &PeriodicOrbit, j: u32, j_max: u32) -> Result<BranchAtlas> {
    let scan = collision_set(orbit, j, j_max, 1e-9)?;
    branch_atlas_with_partner(orbit, j, scan.partners.first().copied())
}

/// Atlas construction with an explicitly supplied collision partner; the
/// public entry point finds the partner by scanning.
pub(crate) fn branch_atlas_with_partner(
    orbit: &PeriodicOrbit,
    j: u32,
    partner: Option<u32>,
) -> Result<BranchAtlas> {
    let j0 = find_j0(orbit)?;
    if (j as f64) <= j0 {
        return Err(Error::NotABifurcationValue(format!(
            "j = {j} is at or below the threshold j0 = {j0}; gamma_j is not positive"
        )));
    }
    let gamma_value = gamma(orbit, j as f64).gamma_j;

    let products = |idx: u32| -> Vec<Branch> {
        decompose(idx)
            .into_iter()
            .map(|d| Branch {
                kind: BranchKind::Product { n: d.n, m: d.m },
                source_j: idx,
            })
            .collect()
    };
    let plus_form = |square: u32| -> Branch {
        let n = exact_sqrt(square as u64).expect("index must be a perfect square") as u32;
        Branch {
            kind: BranchKind::PlusForm { n },
            source_j: square,
        }
    };

    let mut branches: Vec<Branch>;
    let count_beta;
    let mut count_case_a = None;
    let mut collision_case = None;

    match partner {
        None => {
            branches = products(j);
            count_beta = branches.len();
            if exact_sqrt(j as u64).is_some() {
                branches.push(plus_form(j));
            }
        }
        Some(i) => {
            let j1 = i.min(j);
            let j2 = i.max(j);
            let square_multiple = j2 % j1 == 0 && exact_sqrt((j2 / j1) as u64).is_some();
            if square_multiple {
                // Partner indices differ by a square factor: the larger
                // index subsumes every branch of the smaller one.
                collision_case = Some("B".to_string());
                branches = products(j2);
                count_beta = branches.len();
                if exact_sqrt(j1 as u64).is_some() {
                    branches.push(plus_form(j2));
                }
            } else {
                collision_case = Some("A".to_string());
                branches = products(j1);
                branches.extend(products(j2));
                count_beta = alpha(j2);
                count_case_a = Some(branches.len());
                let sq1 = exact_sqrt(j1 as u64).is_some();
                let sq2 = exact_sqrt(j2 as u64).is_some();
                if sq2 {
                    branches.push(plus_form(j2));
                } else if sq1 {
                    branches.push(plus_form(j1));
                }
            }
        }
    }

    if branches.is_empty() {
        return Err(Error::NotABifurcationValue(format!(
            "neither {j} nor its partner is a sum of two squares"
        )));
    }
    Ok(BranchAtlas {
        j,
        gamma_value,
        collision_partner: partner,
        collision_case,
        branches,
        count_beta,
        count_case_a,
    })
}

/// Closed-form linearized mode profiles at one point of the layer, with the
/// amplitude factor S normalized to 1:
///
/// ```text
///     w(y,t) = -Phi tanh(r) cosh(a y)/cosh(a r)
///     q(y,t) = mu Phi tanh(r) cosh(a y)/cosh(a r)
///              + [gamma j/2 - mu Phi tanh(r) - dp/dy(r)] cosh(b y)/cosh(b r)
/// ```
///
/// with r = rho*(t), j = n^2 + m^2, a = sqrt(1+j), b = sqrt(j); the third
/// component is dq/dy at y = r.  gamma is taken from the orbit parameters.
pub fn mode_profiles(
    orbit: &PeriodicOrbit,
    n: u32,
    m: u32,
    t: f64,
    y: f64,
) -> Result<(f64, f64, f64)> {
    if n == 0 && m == 0 {
        return Err(Error::InvalidInput(
            "mode (0,0) is the flat solution itself".into(),
        ));
    }
    let rho = orbit.rho_at(t);
    if !(0.0..=rho).contains(&y) {
        return Err(Error::DomainError(format!(
            "y = {y} outside the layer [0, {rho}]"
        )));
    }
    let params = orbit.params();
    let j = (n * n + m * m) as f64;
    let a = (1.0 + j).sqrt();
    let b = j.sqrt();
    let phi = params.nutrient.eval(t);
    let dsig = phi * rho.tanh();
    let head = params.mu * dsig;
    let tail = 0.5 * params.gamma * j - head - dp_dy_boundary(params, t, rho);

    let w = -dsig * cosh_ratio(a * y, a * rho);
    let q = head * cosh_ratio(a * y, a * rho) + tail * cosh_ratio(b * y, b * rho);
    let dq_dy = head * a * (a * rho).tanh() + tail * b * (b * rho).tanh();
    Ok((w, q, dq_dy))
}

/// Defect of the assembled linearized operator applied to S_{j,gamma},
/// extended T-periodically:
///
/// ```text
///     max over the grid of | S' + [d2p/dy2(r) ] S + dq/dy(r) |
/// ```
///
/// The time derivative uses sixth-order periodic central differences, so a
/// non-periodic S (gamma off the bifurcation value) shows up as a seam jump.
/// Zero within 1e-8 exactly at gamma = gamma_j.
pub fn kernel_residual(orbit: &PeriodicOrbit, j: u32, gamma_coeff: f64) -> f64 {
    assert!(j >= 1, "mode index must be at least 1");
    let params = orbit.params();
    let coeff = a_coefficient(orbit, j as f64, gamma_coeff);
    // Drop the duplicate closing node: ORBIT_CELLS samples, period h each.
    let s = &coeff.s_samples[..ORBIT_CELLS];
    let n = ORBIT_CELLS;
    let h = orbit.period() / n as f64;
    let jf = j as f64;
    let a = (1.0 + jf).sqrt();
    let b = jf.sqrt();

    let mut worst = 0.0_f64;
    for i in 0..n {
        let t = orbit.grid()[i];
        let rho = orbit.rho_at(t);
        let phi = params.nutrient.eval(t);
        // dq/dy at the boundary per unit amplitude, then scaled by S.
        let head = params.mu * phi * rho.tanh();
        let tail = 0.5 * gamma_coeff * jf - head - dp_dy_boundary(params, t, rho);
        let dq_dy = head * a * (a * rho).tanh() + tail * b * (b * rho).tanh();

        let wrap = |k: isize| s[(i as isize + k).rem_euclid(n as isize) as usize];
        let ds = (45.0 * (wrap(1) - wrap(-1)) - 9.0 * (wrap(2) - wrap(-2)) + (wrap(3) - wrap(-3)))
            / (60.0 * h);

        let defect = ds + d2p_dy2_boundary(params, t) * s[i] + dq_dy * s[i];
        worst = worst.max(defect.abs());
    }
    worst
}

/// First-order free-boundary sample of one branch on a space-time grid.
#[derive(Debug, Clone, Serialize)]
pub struct SurfaceSample {
    pub branch: Branch,
    pub epsilon: f64,
    /// nt+1 times spanning [0, T] inclusive.
    pub times: Vec<f64>,
    /// nx abscissae on [0, 2 pi), shared by both spatial axes.
    pub xs: Vec<f64>,
    /// Row-major heights[t][x1][x2].
    pub heights: Vec<f64>,
}

impl SurfaceSample {
    pub fn height(&self, it: usize, ix1: usize, ix2: usize) -> f64 {
        let nx = self.xs.len();
        self.heights[(it * nx + ix1) * nx + ix2]
    }

    /// Long-format CSV `t,x1,x2,y`, full double precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x1,x2,y\n");
        for (it, &t) in self.times.iter().enumerate() {
            for (i1, &x1) in self.xs.iter().enumerate() {
                for (i2, &x2) in self.xs.iter().enumerate() {
                    out.push_str(&format!(
                        "{t:.16e},{x1:.16e},{x2:.16e},{:.16e}\n",
                        self.height(it, i1, i2)
                    ));
                }
            }
        }
        out
    }
}

/// Sample y = rho*(t) + eps S(t) shape(x1,x2) on an (nt+1) x nx x nx grid.
/// eps = 0 is allowed and returns the flat orbit itself; positive eps is
/// capped at 0.1 rho_min to keep the first-order surface meaningful.
pub fn sample_surface(
    orbit: &PeriodicOrbit,
    branch: &Branch,
    epsilon: f64,
    nx: usize,
    nt: usize,
) -> Result<SurfaceSample> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidInput(format!(
            "epsilon must be finite and nonnegative, got {epsilon}"
        )));
    }
    let cap = 0.1 * orbit.rho_min();
    if epsilon > cap {
        return Err(Error::AmplitudeTooLarge(format!(
            "epsilon = {epsilon} exceeds the first-order cap {cap}"
        )));
    }
    if nx < 8 || nt < 8 {
        return Err(Error::InvalidInput(format!(
            "grid must have at least 8 points per axis, got nx = {nx}, nt = {nt}"
        )));
    }

    let source_gamma = gamma(orbit, branch.source_j as f64).gamma_j;
    let t_period = orbit.period();
    let times: Vec<f64> = (0..=nt).map(|i| i as f64 * t_period / nt as f64).collect();
    let xs: Vec<f64> = (0..nx)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / nx as f64)
        .collect();

    let shape = |x1: f64, x2: f64| match branch.kind {
        BranchKind::Product { n, m } => (n as f64 * x1).cos() * (m as f64 * x2).cos(),
        BranchKind::PlusForm { n } => (n as f64 * x1).cos() + (n as f64 * x2).cos(),
    };

    let mut heights = Vec::with_capacity((nt + 1) * nx * nx);
    for &t in &times {
        let rho = orbit.rho_at(t);
        let amp = if epsilon > 0.0 {
            epsilon * s_value(orbit, branch.source_j as f64, source_gamma, t)
        } else {
            0.0
        };
        for &x1 in &xs {
            for &x2 in &xs {
                let y = rho + amp * shape(x1, x2);
                if y <= 0.0 {
                    return Err(Error::AmplitudeTooLarge(format!(
                        "first-order surface reaches {y} at t = {t}"
                    )));
                }
                heights.push(y);
            }
        }
    }
    Ok(SurfaceSample {
        branch: *branch,
        epsilon,
        times,
        xs,
        heights,
    })
}
