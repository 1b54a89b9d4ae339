//! Property tests for the structural invariants: unitarity, normalization,
//! symmetry, and classification behavior under order-preserving maps.

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use qcurve_lab::dispersion::{
    coherent_state, group_velocity, propagate_exact, CoherentStateParams, DispersionModel,
};
use qcurve_lab::entropy::{differential_entropy, phase_space_entropy};
use qcurve_lab::numerics::{make_grid, Density, WaveFunction};
use qcurve_lab::qcurve::{classify, CurveClass};
use qcurve_lab::transitions::{
    oscillation_period, transition_coefficients, transition_probability, TwoLevelSystem,
};
use qcurve_lab::twoparticle::{make_two_particle, Statistics};

const N: usize = 64;
const LENGTH: f64 = 20.0;

fn amplitudes() -> impl Strategy<Value = Vec<Complex64>> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), N)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
        .prop_filter("needs nonzero norm", |v: &Vec<Complex64>| {
            v.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-6
        })
}

fn two_level() -> impl Strategy<Value = TwoLevelSystem> {
    (
        -3.0..3.0f64,
        -3.0..3.0f64,
        -0.5..0.5f64,
        -0.5..0.5f64,
        -0.5..0.5f64,
    )
        .prop_map(|(omega1, omega2, w11, w12, w22)| TwoLevelSystem {
            omega1,
            omega2,
            w11,
            w12,
            w22,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wavefunction_parseval_and_round_trip(amp in amplitudes()) {
        let grid = Arc::new(make_grid(N, LENGTH).unwrap());
        let w = WaveFunction::from_position(grid.clone(), amp).unwrap();
        let norm_x: f64 = w.amp_x().iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx();
        let norm_k: f64 = w.amp_k().iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dk();
        prop_assert!((norm_x - 1.0).abs() < 1e-12);
        prop_assert!((norm_k - norm_x).abs() < 1e-12);

        let back = qcurve_lab::numerics::to_position(w.amp_k(), &grid).unwrap();
        let worst = w
            .amp_x()
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        prop_assert!(worst < 1e-12);
    }

    #[test]
    fn entropy_invariant_under_cyclic_shift(
        raw in proptest::collection::vec(0.0..1.0f64, N),
        shift in 0..N,
    ) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-3);
        let rho = Density::new(raw.clone(), LENGTH / N as f64).unwrap();
        let mut shifted = raw;
        shifted.rotate_left(shift);
        let rho_s = Density::new(shifted, LENGTH / N as f64).unwrap();
        let (a, b) = (
            differential_entropy(&rho).unwrap(),
            differential_entropy(&rho_s).unwrap(),
        );
        prop_assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn entropy_invariant_under_global_phase(amp in amplitudes(), phase in 0.0..std::f64::consts::TAU) {
        let grid = Arc::new(make_grid(N, LENGTH).unwrap());
        let w = WaveFunction::from_position(grid.clone(), amp.clone()).unwrap();
        let rot = Complex64::from_polar(1.0, phase);
        let w2 = WaveFunction::from_position(
            grid,
            amp.into_iter().map(|a| a * rot).collect(),
        )
        .unwrap();
        let s1 = phase_space_entropy(&w).unwrap();
        let s2 = phase_space_entropy(&w2).unwrap();
        prop_assert!((s1.total - s2.total).abs() < 1e-10);
    }

    #[test]
    fn free_evolution_is_unitary_and_conserves_s_k(
        k0 in -2.0..2.0f64,
        sigma2 in 0.5..3.0f64,
        t in 0.0..5.0f64,
        hbar_over_m in 0.3..1.5f64,
    ) {
        let grid = Arc::new(make_grid(512, 120.0).unwrap());
        let model = DispersionModel { c: 1.0, hbar_over_m };
        let params = CoherentStateParams::new(0.0, k0, sigma2).unwrap();
        params.check_aliasing(&grid).unwrap();
        let w = coherent_state(&params, &grid).unwrap();
        let wt = propagate_exact(&w, t, &model);
        let norm: f64 = wt.amp_x().iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        let s0 = phase_space_entropy(&w).unwrap();
        let st = phase_space_entropy(&wt).unwrap();
        prop_assert!((st.s_k - s0.s_k).abs() < 1e-12);
        prop_assert!(st.s_r >= s0.s_r - 1e-9);
    }

    #[test]
    fn two_level_probability_is_unitary_and_bounded(sys in two_level(), t in 0.0..30.0f64) {
        let p = transition_probability(&sys, t);
        prop_assert!((0.0..=1.0).contains(&p), "p = {p}");
        prop_assert!(transition_probability(&sys, 0.0).abs() < 1e-15);
        let (a1, a2) = transition_coefficients(&sys, t);
        prop_assert!((a1.norm_sqr() + a2.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_level_full_period_recurrence(sys in two_level(), t in 0.0..10.0f64) {
        if let Ok(period) = oscillation_period(&sys) {
            // the probability has period pi / eta; the state itself needs 2 pi / eta
            let p = transition_probability(&sys, t);
            let q = transition_probability(&sys, t + 2.0 * period);
            prop_assert!((p - q).abs() < 1e-9, "{p} vs {q}");
        }
    }

    #[test]
    fn classification_respects_order_transformations(
        series in proptest::collection::vec(0.0..10.0f64, 3..40),
        offset in -5.0..5.0f64,
    ) {
        let eps = 1e-6;
        let label = classify(&series, eps).unwrap();
        let shifted: Vec<f64> = series.iter().map(|v| v + offset).collect();
        prop_assert_eq!(classify(&shifted, eps).unwrap(), label);
        let reversed: Vec<f64> = series.iter().rev().cloned().collect();
        let rev_label = classify(&reversed, eps).unwrap();
        let expected = match label {
            CurveClass::Increasing => CurveClass::Decreasing,
            CurveClass::Decreasing => CurveClass::Increasing,
            other => other,
        };
        prop_assert_eq!(rev_label, expected);
    }

    #[test]
    fn exchange_normalization_is_bounded(
        r1 in -6.0..0.0f64,
        r2 in 0.0..6.0f64,
        k in -2.0..2.0f64,
    ) {
        let grid = Arc::new(make_grid(128, 60.0).unwrap());
        let p1 = coherent_state(&CoherentStateParams::new(r1, k, 1.0).unwrap(), &grid).unwrap();
        let p2 = coherent_state(&CoherentStateParams::new(r2, -k, 1.0).unwrap(), &grid).unwrap();
        let boson = make_two_particle(p1.clone(), p2.clone(), Statistics::Boson).unwrap();
        prop_assert!(boson.c_t() >= 2.0 && boson.c_t() <= 4.0 + 1e-12);
        // an error here means effectively identical packets, where
        // antisymmetrization vanishes; that is acceptable
        if let Ok(fermion) = make_two_particle(p1, p2, Statistics::Fermion) {
            prop_assert!(fermion.c_t() > 0.0 && fermion.c_t() <= 2.0);
        }
    }

    #[test]
    fn group_velocity_is_subluminal(
        k in -50.0..50.0f64,
        c in 0.3..3.0f64,
        hbar_over_m in 0.1..2.0f64,
    ) {
        let model = DispersionModel { c, hbar_over_m };
        prop_assert!(group_velocity(k, &model).abs() < c);
    }
}
