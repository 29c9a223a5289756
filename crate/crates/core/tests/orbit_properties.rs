//! Randomized properties of the periodic solver and the bifurcation
//! quadratures, plus determinism and collision-structure checks that cut
//! across modules.

mod common;

use common::{canonical, random_extinction, random_persistent};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tumor_flat::flat_dynamics::{classify, integrate, ModelParams};
use tumor_flat::periodic_solver::{bracket, find_periodic, poincare_map};
use tumor_flat::spectral::{find_j0, gamma, k1, monotonicity_scan};
use tumor_flat::Error;

proptest! {
    #![proptest_config(ProptestConfig { cases: 10, .. ProptestConfig::default() })]

    #[test]
    fn persistent_orbit_sits_in_its_bracket(seed in 0u64..(1u64 << 48)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = random_persistent(&mut rng);
        let br = bracket(&params).unwrap();
        let orbit = find_periodic(&params, 1e-12).unwrap();
        let rho0 = orbit.rho0_star();
        prop_assert!(orbit.residual() < 1e-10 * (1.0 + rho0));
        prop_assert!(rho0 >= br.x_bar * (1.0 - 1e-9));
        prop_assert!(rho0 <= br.x2 * (1.0 + 1e-9));
        // Pointwise envelope: never above the largest instantaneous rest
        // point, never below the worst within-period decay from x_bar.
        prop_assert!(orbit.rho_max() <= br.x2 * (1.0 + 1e-9));
        let floor = br.x_bar * (-params.mu * params.sigma_tilde * params.period()).exp();
        prop_assert!(orbit.rho_min() >= floor * (1.0 - 1e-9));
    }

    #[test]
    fn period_map_contracts_toward_the_fixed_point(seed in 0u64..(1u64 << 48)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = random_persistent(&mut rng);
        let star = find_periodic(&params, 1e-12).unwrap().rho0_star();
        for factor in [0.6, 0.9, 1.2, 1.7] {
            let x = factor * star;
            let fx = poincare_map(&params, x, 1e-12).unwrap();
            // The flow map is monotone with a unique positive fixed point,
            // so one application strictly contracts toward it...
            prop_assert!((fx - star).abs() < (x - star).abs());
            // ...and the displacement points at the fixed point.
            if x < star {
                prop_assert!(fx > x);
            } else {
                prop_assert!(fx < x);
            }
        }
    }

    #[test]
    fn extinction_configs_refuse_an_orbit_and_decay(seed in 0u64..(1u64 << 48)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = random_extinction(&mut rng);
        prop_assert!(classify(&params).is_extinction());
        prop_assert!(matches!(
            find_periodic(&params, 1e-10),
            Err(Error::RegimeError(_))
        ));
        let traj = integrate(&params, 1.0, 10.0 * params.period(), 1e-10).unwrap();
        prop_assert!(traj.final_value() < 1.0);
    }

    #[test]
    fn quadrature_signs_pivot_at_the_threshold(
        seed in 0u64..(1u64 << 48),
        j in 0.2f64..200.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = random_persistent(&mut rng);
        let orbit = find_periodic(&params, 1e-12).unwrap();
        let record = gamma(&orbit, j);
        prop_assert!(record.k2 > 0.0);
        prop_assert_eq!(record.gamma_j > 0.0, record.k1 > 0.0);
        let j0 = find_j0(&orbit).unwrap();
        prop_assert!(k1(&orbit, 0.9 * j0) < 0.0);
        prop_assert!(k1(&orbit, 1.1 * j0) > 0.0);
        if (j - j0).abs() > 1e-6 {
            prop_assert_eq!(record.gamma_j > 0.0, j > j0);
        }
    }

    #[test]
    fn config_json_round_trips_bit_exactly(seed in 0u64..(1u64 << 48)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = random_persistent(&mut rng);
        let text = serde_json::to_string(&params).unwrap();
        let back: ModelParams = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text.clone());
        for i in 0..7 {
            let t = i as f64 * params.period() / 7.0;
            prop_assert_eq!(
                back.nutrient.eval(t).to_bits(),
                params.nutrient.eval(t).to_bits()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, .. ProptestConfig::default() })]

    #[test]
    fn gamma_turns_at_most_once(seed in 0u64..(1u64 << 48)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = random_persistent(&mut rng);
        let orbit = find_periodic(&params, 1e-12).unwrap();
        let scan = monotonicity_scan(&orbit, 300.0).unwrap();
        prop_assert!(scan.sign_changes <= 1);
    }
}

#[test]
fn rising_side_values_recur_on_the_falling_side() {
    // gamma climbs to its turning point and then decays, so a value taken
    // on the way up is taken again on the way down; this recurrence is what
    // makes index collisions possible.  Locate the partner of a rising-side
    // index by bisection and confirm the pairing brackets the turning point.
    let orbit = find_periodic(&canonical(), 1e-12).unwrap();
    let j0 = find_j0(&orbit).unwrap();
    let scan = monotonicity_scan(&orbit, 400.0).unwrap();
    let n0 = scan
        .n0_estimate
        .expect("canonical gamma has a turning point");
    let j_a = j0 + 0.25 * (n0 - j0);
    let g_a = gamma(&orbit, j_a).gamma_j;
    assert!(g_a > 0.0 && gamma(&orbit, n0).gamma_j > g_a);

    let mut hi = 2.0 * n0;
    for _ in 0..40 {
        if gamma(&orbit, hi).gamma_j < g_a {
            break;
        }
        hi *= 2.0;
    }
    let (mut lo, mut hi) = (n0, hi);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if gamma(&orbit, mid).gamma_j > g_a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let j_b = 0.5 * (lo + hi);
    assert!(j_a < n0 && n0 < j_b);
    let g_b = gamma(&orbit, j_b).gamma_j;
    assert!(
        (g_b - g_a).abs() <= 1e-10 * g_a,
        "partner value mismatch: {g_a} vs {g_b}"
    );
}

#[test]
fn orbit_csv_is_deterministic_across_solves() {
    let first = find_periodic(&canonical(), 1e-12).unwrap().to_csv();
    let second = find_periodic(&canonical(), 1e-12).unwrap().to_csv();
    assert_eq!(first, second);
}
