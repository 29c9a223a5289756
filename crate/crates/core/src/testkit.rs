//! Shared fixtures for unit tests: the two reference configurations most of
//! the suite runs against.

use crate::flat_dynamics::ModelParams;
use crate::nutrient::{Harmonic, PeriodicNutrient};

/// Phi(t) = 1 + 0.25 cos(2 pi t), T = 1, mu = 1, sigma_tilde = 1/2, gamma = 0.
pub fn canonical() -> ModelParams {
    let nut = PeriodicNutrient::fourier(
        1.0,
        1.0,
        vec![Harmonic {
            k: 1,
            cos_amp: 0.25,
            sin_amp: 0.0,
        }],
    )
    .unwrap();
    ModelParams::new(1.0, 0.5, 0.0, nut).unwrap()
}

/// Phi = 1, sigma_tilde = tanh(1), T = 1, mu = 1: the layer of thickness 1 is
/// a (constant) periodic solution.
pub fn constant_equilibrium() -> ModelParams {
    let nut = PeriodicNutrient::constant(1.0, 1.0).unwrap();
    ModelParams::new(1.0, 1.0_f64.tanh(), 0.0, nut).unwrap()
}
