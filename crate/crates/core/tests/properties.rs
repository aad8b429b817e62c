use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::{Matrix4, Vector4};
use proptest::prelude::*;
use qsmatch_core::kak::{decompose_u_epsilon, synthesize_u_epsilon, verify_decomposition, CanonicalBranch};
use qsmatch_core::mitigation::{mitigate, ConfusionMatrix};
use qsmatch_core::simulator::{
    build_protocol_circuit, density_probabilities, post_select_exact, run_statevector, statevector_probabilities,
    NoiseSpec,
};
use qsmatch_core::state_space::ideal_state_after;
use qsmatch_core::{build_u_epsilon, BlochState, Epsilon};

fn eps(v: f64) -> Epsilon {
    Epsilon::new(v).unwrap()
}

fn success_formula(theta: f64, e: f64, n: u32) -> f64 {
    let (s, c) = (theta / 2.0).sin_cos();
    let m = 2f64.powi(n as i32);
    e.powf(2.0 * m - 2.0) * c.powf(2.0 * m) + s.powf(2.0 * m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_success_matches_closed_form(
        theta in 0.0..=PI, phi in 0.0..TAU, e in 0.05..=1.0f64, n in 1u32..=3,
    ) {
        let c = build_protocol_circuit(eps(e), n).unwrap();
        let s = BlochState::new(theta, phi).unwrap();
        let p = post_select_exact(&statevector_probabilities(&c, &s), &c).p_success;
        prop_assert!((p - success_formula(theta, e, n)).abs() <= 1e-12);
        let lib = ideal_state_after(&s, eps(e), n).unwrap().success_probability;
        prop_assert!((p - lib).abs() <= 1e-12);
    }

    #[test]
    fn success_does_not_depend_on_phase(
        theta in 0.0..=PI, phi_a in 0.0..TAU, phi_b in 0.0..TAU, e in 0.05..=1.0f64, n in 1u32..=2,
    ) {
        let c = build_protocol_circuit(eps(e), n).unwrap();
        let p = |phi| {
            let s = BlochState::new(theta, phi).unwrap();
            post_select_exact(&statevector_probabilities(&c, &s), &c).p_success
        };
        prop_assert!((p(phi_a) - p(phi_b)).abs() < 1e-12);
    }

    #[test]
    fn counts_sum_to_shots(theta in 0.0..=PI, e in 0.05..=1.0f64, shots in 1u64..5000, seed: u64) {
        let c = build_protocol_circuit(eps(e), 1).unwrap();
        let counts = run_statevector(&c, &BlochState::new(theta, 0.3).unwrap(), shots, seed).unwrap();
        prop_assert_eq!(counts.counts().values().sum::<u64>(), shots);
        prop_assert_eq!(counts.shots(), shots);
    }

    #[test]
    fn damping_never_lowers_success(theta in 0.0..=PI, e in 0.05..=1.0f64, gamma in 0.0..=1.0f64) {
        let c = build_protocol_circuit(eps(e), 1).unwrap();
        let s = BlochState::new(theta, 1.0).unwrap();
        let clean = post_select_exact(&statevector_probabilities(&c, &s), &c).p_success;
        let noisy = post_select_exact(&density_probabilities(&c, &s.into(), &NoiseSpec::damping(gamma)).unwrap(), &c).p_success;
        // damping on the discarded qubit moves weight γ·P(q2 = 1) into success
        prop_assert!((noisy - (clean + gamma * (1.0 - clean))).abs() < 1e-12);
    }

    #[test]
    fn synthesis_round_trip(e in 0.05..=1.0f64) {
        let seq = synthesize_u_epsilon(eps(e)).unwrap();
        prop_assert!(verify_decomposition(&seq, &build_u_epsilon(eps(e))) <= 1e-9);
        prop_assert_eq!(seq.cnot_count, 2);
        prop_assert!(seq.h[0] >= seq.h[1] && seq.h[1] >= 0.0);
    }

    #[test]
    fn mitigation_round_trip(
        raw_a in proptest::collection::vec(0.0..1.0f64, 16),
        raw_p in proptest::collection::vec(0.0..1.0f64, 4),
    ) {
        let mut a = Matrix4::from_fn(|i, j| raw_a[4 * i + j] + if i == j { 3.0 } else { 0.0 });
        for mut col in a.column_iter_mut() {
            let s = col.sum();
            col /= s;
        }
        let a = ConfusionMatrix::synthetic(a).unwrap();
        let s: f64 = raw_p.iter().sum::<f64>() + 1e-9;
        let p: [f64; 4] = std::array::from_fn(|i| (raw_p[i] + 2.5e-10) / s);
        let x = mitigate(&a.apply(&p), &a).unwrap();
        for i in 0..4 {
            prop_assert!((x[i] - p[i]).abs() <= 1e-9);
        }
    }

    #[test]
    fn mitigation_outputs_probabilities(raw in proptest::collection::vec(0.0..1.0f64, 4), q in 0.0..0.2f64) {
        let s: f64 = raw.iter().sum::<f64>() + 1e-12;
        let f: [f64; 4] = std::array::from_fn(|i| raw[i] / s);
        let f = { let t: f64 = f.iter().sum(); f.map(|v| v / t) };
        let a = ConfusionMatrix::from_noise(&NoiseSpec::readout_flip(q)).unwrap();
        let x = mitigate(&f, &a).unwrap();
        prop_assert!(x.iter().all(|&v| v >= 0.0));
        prop_assert!((x.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        // never worse than the raw input in model residual
        let res = |y: &[f64; 4]| (a.entries() * Vector4::from_column_slice(y) - Vector4::from_column_slice(&f)).norm();
        prop_assert!(res(&x) <= res(&f) + 1e-12);
    }
}

#[test]
fn both_branches_occur_for_u_epsilon() {
    let low = synthesize_u_epsilon(eps(0.5)).unwrap();
    let high = synthesize_u_epsilon(eps(0.95)).unwrap();
    assert_eq!(low.branch, CanonicalBranch::ZThenX);
    assert_eq!(high.branch, CanonicalBranch::Y);
    // the crossover sits where |k2| = |k3|, at the fallback point
    let below = decompose_u_epsilon(eps(FRAC_1_SQRT_2 - 0.01)).unwrap();
    let above = decompose_u_epsilon(eps(FRAC_1_SQRT_2 + 0.01)).unwrap();
    assert!(below.k[1].abs() > below.k[2].abs());
    assert!(above.k[2].abs() > above.k[1].abs());
}
