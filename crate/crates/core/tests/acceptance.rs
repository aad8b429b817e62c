//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process exits
//! non-zero if any criterion fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qsmatch_core::kak::{self, to_magic_basis, verify_decomposition, DecompositionPath};
use qsmatch_core::linalg::C64;
use qsmatch_core::mitigation::{mitigate, ConfusionMatrix};
use qsmatch_core::simulator::{
    build_protocol_circuit, build_protocol_circuit_with, conditional_kept_state, estimate_theta1,
    post_select, post_select_exact, sample_counts, statevector_probabilities, theta1_from_weights,
    Execution, NoiseSpec,
};
use qsmatch_core::state_space::{basin, ideal_state_after, iterate_map, Basin, ComplexPoint};
use qsmatch_core::stats::{
    derive_seed, phi_invariance_stat, records_to_csv_string, run_sweep, sigma_band, Backend,
    ExperimentConfig, StatRecord,
};
use qsmatch_core::{build_u_epsilon, BlochState, Epsilon};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn eps(v: f64) -> Epsilon {
    Epsilon::new(v).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed < budget, || format!("runtime {elapsed:.2?} exceeds {budget:?}"))
}

fn analytic_grid() -> Vec<f64> {
    (0..50)
        .map(|i| 0.05 + 0.95 * i as f64 / 49.0)
        .filter(|e| (e - FRAC_1_SQRT_2).abs() >= 1e-3)
        .collect()
}

fn decomposition_round_trip() -> Outcome {
    let start = Instant::now();
    let analytic = analytic_grid();
    ensure(analytic.len() == 50, || format!("grid has {} analytic values", analytic.len()))?;
    let window: Vec<f64> = [-9e-4, -4e-4, 0.0, 4e-4, 9e-4]
        .iter()
        .map(|d| FRAC_1_SQRT_2 + d)
        .collect();
    let mut worst = 0.0f64;
    for &e in analytic.iter().chain(&window) {
        let seq = kak::synthesize_u_epsilon(eps(e)).map_err(|err| format!("eps {e}: {err}"))?;
        let r = verify_decomposition(&seq, &build_u_epsilon(eps(e)));
        worst = worst.max(r);
        ensure(r <= 1e-9, || format!("eps {e}: residual {r:.3e}"))?;
        ensure(seq.cnot_count == 2, || format!("eps {e}: {} CNOTs", seq.cnot_count))?;
        let counted = seq.gates.iter().filter(|g| g.is_cnot()).count();
        ensure(counted == 2, || format!("eps {e}: {counted} CNOT gates emitted"))?;
    }
    for &e in &window {
        let path = kak::decompose_u_epsilon(eps(e)).unwrap().intermediates.path;
        ensure(path == DecompositionPath::Numerical, || format!("eps {e} not routed to fallback"))?;
    }
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(5))?;
    Ok(format!("55 values, max residual {worst:.2e}, {elapsed:.2?}"))
}

fn kak_facts() -> Outcome {
    let mut worst_k = 0.0f64;
    let mut worst_lambda = 0.0f64;
    for e in analytic_grid() {
        let r = kak::decompose_u_epsilon(eps(e)).map_err(|err| err.to_string())?;
        ensure(r.intermediates.path == DecompositionPath::Analytic, || format!("eps {e} not analytic"))?;
        worst_k = worst_k.max(r.k0.abs()).max(r.k[0].abs());
        ensure(r.k0.abs() <= 1e-10 && r.k[0].abs() <= 1e-10, || {
            format!("eps {e}: k0 = {:.3e}, k1 = {:.3e}", r.k0, r.k[0])
        })?;
        ensure(r.k[1] < 0.0 && r.k[2] < 0.0, || format!("eps {e}: k = {:?}", r.k))?;

        // closed form of the squared singular values of Re(M†UM)
        let s2 = 2.0 * e * (1.0 - e * e).sqrt();
        let root = (8.0 + s2 * s2).sqrt();
        let (lp, lm) = ((4.0 - s2 + root) / 8.0, (4.0 - s2 - root) / 8.0);
        let frame = to_magic_basis(build_u_epsilon(eps(e)).matrix()).map_err(|err| err.to_string())?;
        let mut sv: Vec<f64> = frame.u_r.singular_values().iter().map(|s| s * s).collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        for (got, want) in sv.iter().zip([lp, lp, lm, lm]) {
            worst_lambda = worst_lambda.max((got - want).abs());
        }
        ensure(worst_lambda <= 1e-10, || format!("eps {e}: lambda error {worst_lambda:.3e}"))?;
    }
    Ok(format!("max |k0|,|k1| {worst_k:.2e}; max lambda error {worst_lambda:.2e}"))
}

/// Amplitudes of `|Φₙ⟩` up to a global phase, compared entrywise after aligning phases.
fn state_distance(a: &BlochState, b: &BlochState) -> f64 {
    let (x, y) = (a.amplitudes(), b.amplitudes());
    let overlap = x[0].conj() * y[0] + x[1].conj() * y[1];
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    ((x[0] * phase - y[0]).norm()).max((x[1] * phase - y[1]).norm())
}

fn protocol_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_p, mut worst_state) = (0.0f64, 0.0f64);
    for n in 1..=3u32 {
        for _ in 0..20 {
            let e = rng.random_range(0.05..=1.0);
            let theta = rng.random_range(0.0..=PI);
            let phi = rng.random_range(0.0..TAU);
            let s0 = BlochState::new(theta, phi).unwrap();
            let circ = build_protocol_circuit(eps(e), n).unwrap();
            // closed forms evaluated directly, independent of the library
            let (s, c) = (theta / 2.0).sin_cos();
            let m = 2f64.powi(n as i32);
            let p_formula = e.powf(2.0 * m - 2.0) * c.powf(2.0 * m) + s.powf(2.0 * m);
            let p = post_select_exact(&statevector_probabilities(&circ, &s0), &circ).p_success;
            worst_p = worst_p.max((p - p_formula).abs());
            ensure((p - p_formula).abs() <= 1e-12, || format!("n={n} eps={e} theta={theta}: p {p} vs {p_formula}"))?;
            let cond = conditional_kept_state(&circ, &s0);
            let kept = cond.kept.ok_or("no kept state")?;
            let a0 = C64::new(e.powf(m - 1.0) * c.powf(m), 0.0);
            let a1 = C64::from_polar(s.powf(m), m * phi);
            let want = BlochState::from_amplitudes(a0, a1).ok_or("degenerate target")?;
            let d = state_distance(&kept, &want);
            worst_state = worst_state.max(d);
            ensure(d <= 1e-10, || format!("n={n} eps={e} theta={theta}: state distance {d:.3e}"))?;
            let lib = ideal_state_after(&s0, eps(e), n).unwrap();
            ensure((lib.success_probability - p_formula).abs() <= 1e-12, || "library p_s disagrees".into())?;
        }
    }
    let circ = build_protocol_circuit(eps(0.7), 1).unwrap();
    let s0 = BlochState::new(FRAC_PI_2, 0.0).unwrap();
    let p = post_select_exact(&statevector_probabilities(&circ, &s0), &circ).p_success;
    ensure((p - 0.3725).abs() <= 1e-12, || format!("cross-check gives {p}"))?;
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(10))?;
    Ok(format!("60 triples, max |dp| {worst_p:.2e}, max state error {worst_state:.2e}, {elapsed:.2?}"))
}

fn gate_sequence_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for i in 0..10 {
        let e = rng.random_range(0.05..=1.0);
        let n = 1 + i % 3;
        let s0 = BlochState::new(rng.random_range(0.0..=PI), rng.random_range(0.0..TAU)).unwrap();
        let dense = build_protocol_circuit(eps(e), n).unwrap();
        let gates = build_protocol_circuit_with(eps(e), n, Execution::GateSequence).map_err(|err| err.to_string())?;
        let (a, b) = (statevector_probabilities(&dense, &s0), statevector_probabilities(&gates, &s0));
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst = worst.max(d);
        ensure(d <= 1e-9, || format!("eps {e}, n {n}: max difference {d:.3e}"))?;
    }
    Ok(format!("10 configs, max difference {worst:.2e}"))
}

fn coverage_3sigma() -> Outcome {
    let start = Instant::now();
    let (e, shots, runs) = (0.7, 1u64 << 13, 500u64);
    let circ = build_protocol_circuit(eps(e), 1).unwrap();
    let s0 = BlochState::new(FRAC_PI_2, 0.0).unwrap();
    let probs = statevector_probabilities(&circ, &s0);
    let p_s = ideal_state_after(&s0, eps(e), 1).unwrap().success_probability;
    let band = sigma_band(p_s, shots, 3.0);
    let mut inside = 0;
    for i in 0..runs {
        let counts = sample_counts(&probs, 2, shots, derive_seed(1, 7, i)).unwrap();
        if band.contains(post_select(&counts, &circ).unwrap().p_success) {
            inside += 1;
        }
    }
    let rate = inside as f64 / runs as f64;
    ensure(rate >= 0.986, || format!("coverage {rate:.4}"))?;
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(60))?;
    Ok(format!("{inside}/{runs} inside p_s ± 3σ ({:.1}%), {elapsed:.2?}", rate * 100.0))
}

fn groups(records: &[StatRecord], per: usize) -> impl Iterator<Item = &[StatRecord]> {
    records.chunks(per)
}

fn phi_invariance() -> Outcome {
    let cfg = ExperimentConfig {
        exact: true,
        ..ExperimentConfig::default()
    };
    let sweep = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for g in groups(&sweep.records, cfg.phi0.count) {
        let spread = phi_invariance_stat(g).map_err(|e| e.to_string())?;
        worst = worst.max(spread.range);
        ensure(spread.range < 1e-12, || {
            format!("eps {} theta0 {}: spread {:.3e}", g[0].epsilon, g[0].theta0, spread.range)
        })?;
    }
    Ok(format!("{} (eps, theta0) groups, max spread {worst:.2e}", sweep.records.len() / cfg.phi0.count))
}

fn noise_monotonicity() -> Outcome {
    let cfg = ExperimentConfig {
        exact: true,
        backend: Backend::Density,
        noise: NoiseSpec::damping(0.05),
        ..ExperimentConfig::default()
    };
    let sweep = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let mut strict = 0;
    for r in &sweep.records {
        ensure(r.p_est >= r.p_ideal, || format!("eps {} theta0 {}: {} < {}", r.epsilon, r.theta0, r.p_est, r.p_ideal))?;
        // noiseless probability that the discarded qubit reads 1
        if 1.0 - r.p_ideal > 1e-9 {
            ensure(r.p_est > r.p_ideal, || format!("eps {} theta0 {}: not strict", r.epsilon, r.theta0))?;
            strict += 1;
        }
    }
    Ok(format!("{} grid points, {strict} strictly above", sweep.records.len()))
}

fn mitigation_recovery() -> Outcome {
    let start = Instant::now();
    let q = 0.03;
    let confusion = ConfusionMatrix::from_noise(&NoiseSpec::readout_flip(q)).map_err(|e| e.to_string())?;
    // exact round trip over the default grid
    let exact = run_sweep(&ExperimentConfig {
        exact: true,
        ..ExperimentConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for r in &exact.records {
        let p: [f64; 4] = r.outcomes.clone().try_into().map_err(|_| "missing outcomes")?;
        let x = mitigate(&confusion.apply(&p), &confusion).map_err(|e| e.to_string())?;
        for i in 0..4 {
            worst = worst.max((x[i] - p[i]).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("exact round-trip error {worst:.3e}"))?;

    let shots = 1u64 << 16;
    let sampled = run_sweep(&ExperimentConfig {
        shots,
        seed: 31,
        noise: NoiseSpec::readout_flip(q),
        ..ExperimentConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let (mut raw_out, mut recovered) = (0usize, 0usize);
    for r in &sampled.records {
        let band = sigma_band(r.p_ideal, shots, 3.0);
        if band.contains(r.p_est) {
            continue;
        }
        raw_out += 1;
        let f: [f64; 4] = r.outcomes.clone().try_into().map_err(|_| "missing outcomes")?;
        let x = mitigate(&f, &confusion).map_err(|e| e.to_string())?;
        if band.contains(x[0] + x[2]) {
            recovered += 1;
        }
    }
    ensure(raw_out > 0, || "no raw point fell outside the band".into())?;
    let rate = recovered as f64 / raw_out as f64;
    ensure(rate >= 0.95, || format!("recovered {recovered}/{raw_out}"))?;
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "round-trip error {worst:.2e}; recovered {recovered}/{raw_out} ({:.1}%), {elapsed:.2?}",
        rate * 100.0
    ))
}

fn theta1_estimator() -> Outcome {
    // exact distributions
    let exact = run_sweep(&ExperimentConfig {
        exact: true,
        ..ExperimentConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for r in &exact.records {
        let p = &r.outcomes;
        let est = theta1_from_weights(p[0], p[2]).map_err(|e| e.to_string())?;
        let (s, c) = (r.theta0 / 2.0).sin_cos();
        let closed = 2.0 * (s * s / (r.epsilon * c * c)).atan();
        worst = worst.max((est - closed).abs());
        ensure((est - closed).abs() <= 1e-10, || format!("theta0 {}: {est} vs {closed}", r.theta0))?;
    }

    // sampled: the estimator's standard error is 1/√N for N post-selected shots. Means over
    // phi0 are only reported: with fewer than one expected |1> count per record the
    // estimator is biased low, so a normal-theory bound on the mean does not apply.
    let cfg = ExperimentConfig {
        seed: 5,
        ..ExperimentConfig::default()
    };
    let sampled = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let (mut inside, mut total) = (0usize, 0usize);
    let (mut mean_inside, mut groups_total) = (0usize, 0usize);
    for g in groups(&sampled.records, cfg.phi0.count) {
        let mut sum = 0.0;
        let mut var = 0.0;
        let mut k = 0;
        for r in g {
            let Some(est) = r.theta1_est else { continue };
            let n = (r.p_est * r.shots as f64).round();
            let se = 1.0 / n.sqrt();
            total += 1;
            if (est - r.theta1_ideal).abs() <= 3.0 * se {
                inside += 1;
            }
            sum += est;
            var += 1.0 / n;
            k += 1;
        }
        if k > 0 {
            groups_total += 1;
            let mean = sum / k as f64;
            let se_mean = var.sqrt() / k as f64;
            if (mean - g[0].theta1_ideal).abs() <= 3.0 * se_mean {
                mean_inside += 1;
            }
        }
    }
    let rate = inside as f64 / total as f64;
    ensure(rate >= 0.986, || format!("per-record coverage {inside}/{total}"))?;

    // counts-level estimator on a hand-made table
    let circ = build_protocol_circuit(eps(0.7), 1).unwrap();
    let counts = sample_counts(&[0.25, 0.25, 0.25, 0.25], 2, 1000, 3).unwrap();
    let ps = post_select(&counts, &circ).unwrap();
    let est = estimate_theta1(&ps.kept).unwrap();
    let direct = 2.0 * ((counts.get("10") as f64 / counts.get("00") as f64).sqrt()).atan();
    ensure(est == direct, || "counts estimator mismatch".into())?;

    Ok(format!(
        "exact max error {worst:.2e}; sampled within 3 SE {inside}/{total}; \
         per-theta0 means within 3 SE {mean_inside}/{groups_total} (not graded)"
    ))
}

fn map_dynamics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let e = rng.random_range(0.05..=1.0);
        let n = rng.random_range(1..=5usize);
        // keep every iterate within floating-point range
        let r0 = e * rng.random_range(0.5..2.0f64).powf(1.0 / 2f64.powi(n as i32 - 1));
        let z0 = ComplexPoint::Finite(C64::from_polar(r0, rng.random_range(0.0..TAU)));
        let orbit = iterate_map(&z0, eps(e), n);
        let m = 2f64.powi(n as i32);
        let want = r0.powf(m) / e.powf(m - 1.0);
        let rel = (orbit[n].modulus() - want).abs() / want;
        worst = worst.max(rel);
        ensure(rel <= 1e-10, || format!("eps {e} n {n} r0 {r0}: relative error {rel:.3e}"))?;
    }

    let mut counts = [0usize; 3];
    for i in 0..1000 {
        let e = rng.random_range(0.05..=1.0);
        let phi = rng.random_range(0.0..TAU);
        let (r, expected) = match i % 3 {
            0 => (e * rng.random_range(0.0..0.999), Basin::Origin),
            1 => (e / rng.random_range(0.001..0.999), Basin::Infinity),
            _ => (e, Basin::Boundary),
        };
        let z = C64::from_polar(r, phi);
        let got = basin(&ComplexPoint::Finite(z), eps(e), 1e-12);
        ensure(got == expected, || format!("eps {e}, |z| {r}: {got:?} vs {expected:?}"))?;
        // independent oracle for off-circle points: iterate z ↦ z²/ε directly
        if expected != Basin::Boundary {
            let mut w = z;
            for _ in 0..64 {
                if w.norm() > 1e100 {
                    break;
                }
                w = w * w / e;
            }
            let escaped = w.norm() > 1.0;
            ensure(escaped == (expected == Basin::Infinity), || format!("orbit oracle disagrees at |z| {r}"))?;
        }
        counts[i % 3] += 1;
    }
    Ok(format!(
        "200 orbits, max relative error {worst:.2e}; 1000 basins ({} in, {} out, {} on)",
        counts[0], counts[1], counts[2]
    ))
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig {
        seed: 99,
        phi0: qsmatch_core::stats::PhiPolicy {
            policy: qsmatch_core::stats::PhiSpacing::Random,
            count: 25,
        },
        ..ExperimentConfig::default()
    };
    let a = records_to_csv_string(&run_sweep(&cfg).map_err(|e| e.to_string())?.records);
    let b = records_to_csv_string(&run_sweep(&cfg).map_err(|e| e.to_string())?.records);
    ensure(a == b, || "CSV outputs differ".into())?;
    let mut other = cfg.clone();
    other.seed = 100;
    let c = records_to_csv_string(&run_sweep(&other).map_err(|e| e.to_string())?.records);
    ensure(a != c, || "different seeds gave identical output".into())?;
    Ok(format!("{} bytes identical across runs", a.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("decomposition round-trip", decomposition_round_trip),
        ("KAK facts", kak_facts),
        ("protocol exactness", protocol_exactness),
        ("gate-sequence equivalence", gate_sequence_equivalence),
        ("3-sigma coverage", coverage_3sigma),
        ("phi0 invariance", phi_invariance),
        ("noise monotonicity", noise_monotonicity),
        ("mitigation recovery", mitigation_recovery),
        ("theta1 estimator", theta1_estimator),
        ("map dynamics", map_dynamics),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
