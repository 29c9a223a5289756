// Frozen oracle constants keep every digit of their derivation, and the
// negated comparisons in validation guards are deliberate NaN rejections.
#![allow(clippy::excessive_precision)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Periodic dynamics and symmetry-breaking bifurcation analysis for a flat
//! multi-layer free-boundary tumor model with time-periodic nutrient supply.
//!
//! The model tracks the thickness rho(t) of a flat tissue layer fed by a
//! T-periodic nutrient level Phi(t).  In the quasi-steady regime the nutrient
//! and pressure profiles through the layer are explicit in terms of rho, and
//! the thickness itself obeys the scalar ODE
//!
//! ```text
//!     d rho / dt = mu * rho * ( Phi(t) * tanh(rho)/rho - sigma_tilde )
//! ```
//!
//! Everything in this crate grows out of that equation:
//!
//! * [`nutrient`] — validated T-periodic nutrient inputs (truncated Fourier
//!   series or tabulated samples with periodic cubic interpolation);
//! * [`flat_dynamics`] — the reduced ODE, an adaptive embedded RK integrator
//!   with dense output, regime classification, and the closed-form nutrient /
//!   pressure profiles through the layer;
//! * [`periodic_solver`] — the period map, a bracketed fixed-point solver for
//!   the unique positive T-periodic thickness orbit, and empirical vs.
//!   formula-based attraction rates;
//! * [`spectral`] — bifurcation values gamma_j along the periodic orbit, the
//!   kernel coefficient A_{j,gamma} and its multiplier S(t), monotonicity
//!   scans in j, and series expansions used for derivative cross-checks;
//! * [`modes`] — integer mode combinatorics (sums of two squares), branch
//!   atlases at bifurcation points, closed-form linearized mode profiles, and
//!   sampled bifurcating surfaces;
//! * [`verification`] — independent oracles (fixed-step RK4 re-integration,
//!   finite-difference boundary-value solves, dual-formula comparisons) that
//!   double-check the fast paths and back the CLI `validate` subcommand.

pub mod error;
pub mod flat_dynamics;
pub mod hyperbolic;
pub mod modes;
pub mod numerics;
pub mod nutrient;
pub mod periodic_solver;
pub mod spectral;
pub mod verification;

#[cfg(test)]
pub(crate) mod testkit;

pub use error::{Error, Result};
