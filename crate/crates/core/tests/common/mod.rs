//! Configurations shared across the integration suites.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tumor_flat::flat_dynamics::ModelParams;
use tumor_flat::nutrient::{Harmonic, PeriodicNutrient};

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

/// Phi = 1, sigma_tilde = tanh(1), T = 1, mu = 1: the layer of thickness 1
/// is a (constant) periodic solution.
pub fn constant_equilibrium() -> ModelParams {
    let nut = PeriodicNutrient::constant(1.0, 1.0).unwrap();
    ModelParams::new(1.0, 1.0_f64.tanh(), 0.0, nut).unwrap()
}

/// Random nutrient with two harmonics and relative ripple below one half,
/// hence strictly positive.
pub fn random_nutrient(rng: &mut ChaCha8Rng) -> PeriodicNutrient {
    let period = rng.gen_range(0.5..2.0);
    let mean = rng.gen_range(0.5..1.5);
    let harmonics = vec![
        Harmonic {
            k: 1,
            cos_amp: mean * rng.gen_range(-0.2..0.2),
            sin_amp: mean * rng.gen_range(-0.2..0.2),
        },
        Harmonic {
            k: 2,
            cos_amp: mean * rng.gen_range(-0.1..0.1),
            sin_amp: mean * rng.gen_range(-0.1..0.1),
        },
    ];
    PeriodicNutrient::fourier(period, mean, harmonics).unwrap()
}

/// Persistent-regime draw: threshold strictly inside (0, mean level).
pub fn random_persistent(rng: &mut ChaCha8Rng) -> ModelParams {
    let nutrient = random_nutrient(rng);
    let mu = rng.gen_range(0.5..2.0);
    let sigma = nutrient.mean() * rng.gen_range(0.15..0.85);
    ModelParams::new(mu, sigma, 0.0, nutrient).unwrap()
}

/// Extinction draw with a built-in decay margin: mu (sigma - mean) T is at
/// least 1/4, so forty periods shrink the layer by at least e^{-10}.
pub fn random_extinction(rng: &mut ChaCha8Rng) -> ModelParams {
    let nutrient = random_nutrient(rng);
    let mu = rng.gen_range(0.5..2.0);
    let margin = (0.25 + 0.75 * rng.gen::<f64>()) / (mu * nutrient.period());
    let sigma = nutrient.mean() + margin;
    ModelParams::new(mu, sigma, 0.0, nutrient).unwrap()
}
