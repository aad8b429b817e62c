//! Readout-error mitigation for the two measured qubits of a one-step run.
//!
//! A 4×4 column-stochastic confusion matrix is calibrated from the four basis-state
//! preparations and inverted against measured distributions. Basis order is
//! `00, 01, 10, 11` with qubit 0 leftmost.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::simulator::{ops_probabilities, sample_counts, CountsTable, NoiseSpec, Op};

/// Largest accepted condition number of a confusion matrix.
pub const MAX_CONDITION: f64 = 1e12;
const STOCHASTIC_TOL: f64 = 1e-9;
/// Default calibration shots per prepared basis state.
pub const DEFAULT_CALIBRATION_SHOTS: u64 = 1 << 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConfusionSource {
    Calibration,
    Synthetic,
}

/// `entries[reported][prepared]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfusionRepr", into = "ConfusionRepr")]
pub struct ConfusionMatrix {
    entries: Matrix4<f64>,
    source: ConfusionSource,
    shots: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfusionRepr {
    entries: [[f64; 4]; 4],
    source: ConfusionSource,
    #[serde(default)]
    shots: Option<u64>,
}

impl TryFrom<ConfusionRepr> for ConfusionMatrix {
    type Error = Error;

    fn try_from(r: ConfusionRepr) -> Result<Self> {
        ConfusionMatrix::new(Matrix4::from_fn(|i, j| r.entries[i][j]), r.source, r.shots)
    }
}

impl From<ConfusionMatrix> for ConfusionRepr {
    fn from(m: ConfusionMatrix) -> Self {
        ConfusionRepr {
            entries: std::array::from_fn(|i| std::array::from_fn(|j| m.entries[(i, j)])),
            source: m.source,
            shots: m.shots,
        }
    }
}

impl ConfusionMatrix {
    pub fn new(entries: Matrix4<f64>, source: ConfusionSource, shots: Option<u64>) -> Result<Self> {
        if entries.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidConfusion("entries must be finite and non-negative".into()));
        }
        for (j, col) in entries.column_iter().enumerate() {
            let s = col.sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidConfusion(format!("column {j} sums to {s}")));
            }
        }
        Ok(ConfusionMatrix { entries, source, shots })
    }

    pub fn synthetic(entries: Matrix4<f64>) -> Result<Self> {
        Self::new(entries, ConfusionSource::Synthetic, None)
    }

    pub fn identity() -> Self {
        Self::synthetic(Matrix4::identity()).expect("identity is stochastic")
    }

    /// Tensor mode: independent per-qubit confusions, qubit 0 as the left factor.
    pub fn tensor(q0: &Matrix2<f64>, q1: &Matrix2<f64>) -> Result<Self> {
        Self::synthetic(q0.kronecker(q1))
    }

    /// Exact confusion implied by the readout and damping parts of `noise`.
    pub fn from_noise(noise: &NoiseSpec) -> Result<Self> {
        let mut m = Matrix4::zeros();
        for (j, c) in calibration_circuits().iter().enumerate() {
            let p = ops_probabilities(2, &c.ops, noise)?;
            m.set_column(j, &Vector4::from_column_slice(&p));
        }
        Self::synthetic(m)
    }

    pub fn entries(&self) -> &Matrix4<f64> {
        &self.entries
    }

    pub fn source(&self) -> ConfusionSource {
        self.source
    }

    pub fn shots(&self) -> Option<u64> {
        self.shots
    }

    /// Distribution reported when the true distribution is `p`.
    pub fn apply(&self, p: &[f64; 4]) -> [f64; 4] {
        let v = self.entries * Vector4::from_column_slice(p);
        std::array::from_fn(|i| v[i])
    }

    /// Ratio of extreme singular values (infinite when singular).
    pub fn condition_number(&self) -> f64 {
        let sv = self.entries.singular_values();
        let (max, min) = (sv.max(), sv.min());
        if min > 0.0 {
            max / min
        } else {
            f64::INFINITY
        }
    }
}

/// Preparation of one computational basis state, measured on both qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationCircuit {
    pub label: String,
    pub prepared: usize,
    pub ops: Vec<Op>,
}

pub fn calibration_circuits() -> [CalibrationCircuit; 4] {
    std::array::from_fn(|j| CalibrationCircuit {
        label: format!("{j:02b}"),
        prepared: j,
        ops: (0..2)
            .filter(|q| j >> (1 - q) & 1 == 1)
            .map(|qubit| Op::OneQubit {
                qubit,
                matrix: linalg::pauli(1),
            })
            .collect(),
    })
}

/// Runs the four calibration circuits under `noise`; run `j` uses seed `seed + j`.
pub fn run_calibration(noise: &NoiseSpec, shots: u64, seed: u64) -> Result<[CountsTable; 4]> {
    let circuits = calibration_circuits();
    let mut out = Vec::with_capacity(4);
    for (j, c) in circuits.iter().enumerate() {
        let p = ops_probabilities(2, &c.ops, noise)?;
        out.push(sample_counts(&p, 2, shots, seed.wrapping_add(j as u64))?);
    }
    Ok(out.try_into().expect("four runs"))
}

fn check_calibration(counts: &[CountsTable; 4]) -> Result<()> {
    if let Some(c) = counts.iter().find(|c| c.width() != 2) {
        return Err(Error::InvalidConfusion(format!(
            "calibration counts have width {}, expected 2",
            c.width()
        )));
    }
    Ok(())
}

/// Column `j` is the empirical outcome distribution of preparation `j`.
pub fn build_confusion(counts: &[CountsTable; 4]) -> Result<ConfusionMatrix> {
    check_calibration(counts)?;
    let mut m = Matrix4::zeros();
    for (j, c) in counts.iter().enumerate() {
        m.set_column(j, &Vector4::from_column_slice(&c.frequencies()));
    }
    let shots = counts.iter().map(CountsTable::shots).min();
    ConfusionMatrix::new(m, ConfusionSource::Calibration, shots)
}

/// Tensor-mode calibration: per-qubit confusions from the marginals of the four runs.
pub fn build_confusion_tensor(counts: &[CountsTable; 4]) -> Result<ConfusionMatrix> {
    check_calibration(counts)?;
    let mut per_qubit = [Matrix2::<f64>::zeros(); 2];
    for (j, c) in counts.iter().enumerate() {
        let f = c.frequencies();
        for (q, m) in per_qubit.iter_mut().enumerate() {
            let prepared = j >> (1 - q) & 1;
            for (i, fi) in f.iter().enumerate() {
                m[(i >> (1 - q) & 1, prepared)] += fi / 2.0;
            }
        }
    }
    let shots = counts.iter().map(CountsTable::shots).min();
    ConfusionMatrix::new(per_qubit[0].kronecker(&per_qubit[1]), ConfusionSource::Calibration, shots)
}

/// Least squares `‖A·x − b‖²` over the probability simplex, solved exactly by checking
/// the equality-constrained optimum on every support.
fn simplex_least_squares(a: &Matrix4<f64>, b: &Vector4<f64>) -> [f64; 4] {
    let mut best: Option<(f64, [f64; 4])> = None;
    for mask in 1u32..16 {
        let support: Vec<usize> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
        let k = support.len();
        let mut kkt = DMatrix::<f64>::zeros(k + 1, k + 1);
        let mut rhs = DVector::<f64>::zeros(k + 1);
        for (r, &i) in support.iter().enumerate() {
            for (c, &j) in support.iter().enumerate() {
                kkt[(r, c)] = 2.0 * a.column(i).dot(&a.column(j));
            }
            kkt[(r, k)] = 1.0;
            kkt[(k, r)] = 1.0;
            rhs[r] = 2.0 * a.column(i).dot(b);
        }
        rhs[k] = 1.0;
        let Some(sol) = kkt.lu().solve(&rhs) else {
            continue;
        };
        if sol.iter().take(k).any(|&y| y < -1e-12) {
            continue;
        }
        let mut x = [0.0; 4];
        for (r, &i) in support.iter().enumerate() {
            x[i] = sol[r].max(0.0);
        }
        let obj = (a * Vector4::from_column_slice(&x) - b).norm_squared();
        if best.is_none_or(|(o, _)| obj < o) {
            best = Some((obj, x));
        }
    }
    let (_, x) = best.expect("a single-vertex support is always feasible");
    x
}

fn normalized(mut x: [f64; 4]) -> [f64; 4] {
    for v in &mut x {
        *v = v.max(0.0);
    }
    let s: f64 = x.iter().sum();
    x.map(|v| v / s)
}

/// Solves `A·x = raw`; falls back to simplex-constrained least squares when the direct
/// solution has a negative component.
pub fn mitigate(raw: &[f64; 4], a: &ConfusionMatrix) -> Result<[f64; 4]> {
    let total: f64 = raw.iter().sum();
    if raw.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!(
            "raw frequencies {raw:?} are not a probability vector"
        )));
    }
    let cond = a.condition_number();
    if cond > MAX_CONDITION {
        return Err(Error::SingularConfusion(cond));
    }
    let b = Vector4::from_column_slice(raw);
    let x = a
        .entries
        .lu()
        .solve(&b)
        .ok_or(Error::SingularConfusion(f64::INFINITY))?;
    let x: [f64; 4] = std::array::from_fn(|i| x[i]);
    if x.iter().any(|&v| v < -1e-12) {
        Ok(normalized(simplex_least_squares(&a.entries, &b)))
    } else {
        Ok(normalized(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flip(q: f64) -> Matrix2<f64> {
        Matrix2::new(1.0 - q, q, q, 1.0 - q)
    }

    #[test]
    fn calibration_circuit_shapes() {
        let c = calibration_circuits();
        assert!(c[0].ops.is_empty());
        assert_eq!(c[3].ops.len(), 2);
        assert_eq!(c[1].label, "01");
        assert!(matches!(c[1].ops[0], Op::OneQubit { qubit: 1, .. }));
        let counts = run_calibration(&NoiseSpec::none(), 100, 0).unwrap();
        assert_eq!(counts[0].get("00"), 100);
        assert_eq!(counts[3].get("11"), 100);
        let m = build_confusion(&counts).unwrap();
        assert_eq!(*m.entries(), Matrix4::identity());
    }

    #[test]
    fn flip_column_for_eleven() {
        let m = ConfusionMatrix::from_noise(&NoiseSpec::readout_flip(0.03)).unwrap();
        let col = m.entries().column(3);
        for (a, b) in col.iter().zip([0.0009, 0.0291, 0.0291, 0.9409]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let t = ConfusionMatrix::tensor(&flip(0.03), &flip(0.03)).unwrap();
        assert!((t.entries() - m.entries()).abs().max() < 1e-15);
    }

    #[test]
    fn sampled_calibration_close_to_generator() {
        let noise = NoiseSpec::readout_flip(0.03);
        let counts = run_calibration(&noise, 1 << 16, 5).unwrap();
        let m = build_confusion(&counts).unwrap();
        let exact = ConfusionMatrix::from_noise(&noise).unwrap();
        // 5σ of a frequency at 2^16 shots
        let tol = 5.0 * (0.25f64 / 65536.0).sqrt();
        assert!((m.entries() - exact.entries()).abs().max() < tol);
        for col in m.entries().column_iter() {
            assert_abs_diff_eq!(col.sum(), 1.0, epsilon = 1e-15);
        }
        let t = build_confusion_tensor(&counts).unwrap();
        assert!((t.entries() - exact.entries()).abs().max() < tol);
    }

    #[test]
    fn identity_is_a_no_op() {
        let p = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(mitigate(&p, &ConfusionMatrix::identity()).unwrap(), p);
    }

    #[test]
    fn round_trip_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let mut a = Matrix4::from_fn(|i, j| if i == j { 4.0 } else { 0.0 } + rng.random::<f64>());
            for mut col in a.column_iter_mut() {
                let s = col.sum();
                col /= s;
            }
            let a = ConfusionMatrix::synthetic(a).unwrap();
            let mut p: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>());
            let s: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= s);
            let raw = a.apply(&p);
            let x = mitigate(&raw, &a).unwrap();
            for i in 0..4 {
                assert_abs_diff_eq!(x[i], p[i], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn negative_solution_projects_to_simplex() {
        let a = ConfusionMatrix::tensor(&flip(0.1), &flip(0.1)).unwrap();
        // below the smallest reachable weight on "11"
        let raw = [0.5, 0.25, 0.25, 0.0];
        let x = mitigate(&raw, &a).unwrap();
        assert!(x.iter().all(|&v| v >= 0.0));
        assert_abs_diff_eq!(x.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_eq!(x[3], 0.0);
        // optimality against a brute-force grid over the simplex
        let obj = |y: &[f64; 4]| (a.entries() * Vector4::from_column_slice(y) - Vector4::from_column_slice(&raw)).norm_squared();
        let best = obj(&x);
        let n = 40;
        for i in 0..=n {
            for j in 0..=n - i {
                for k in 0..=n - i - j {
                    let y = [i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64, (n - i - j - k) as f64 / n as f64];
                    assert!(obj(&y) >= best - 1e-12);
                }
            }
        }
    }

    #[test]
    fn singular_and_invalid_inputs() {
        let half = Matrix2::new(0.5, 0.5, 0.5, 0.5);
        let a = ConfusionMatrix::tensor(&half, &flip(0.0)).unwrap();
        assert!(matches!(mitigate(&[0.25; 4], &a), Err(Error::SingularConfusion(_))));
        assert!(mitigate(&[0.5, 0.5, 0.5, 0.0], &ConfusionMatrix::identity()).is_err());
        assert!(ConfusionMatrix::synthetic(Matrix4::identity() * 2.0).is_err());
    }

    #[test]
    fn json_shape() {
        let m = ConfusionMatrix::from_noise(&NoiseSpec::readout_flip(0.03)).unwrap();
        let j = serde_json::to_value(&m).unwrap();
        assert_eq!(j["source"], "synthetic");
        assert_eq!(j["entries"].as_array().unwrap().len(), 4);
        let back: ConfusionMatrix = serde_json::from_value(j).unwrap();
        assert_eq!(back, m);
        let bad = serde_json::json!({"entries": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,0.5]], "source": "synthetic"});
        assert!(serde_json::from_value::<ConfusionMatrix>(bad).is_err());
    }

    #[test]
    fn total_variation_does_not_increase() {
        let a = ConfusionMatrix::tensor(&flip(0.05), &flip(0.02)).unwrap();
        let p = [0.3725 * 0.3, 0.4, 0.3725 * 0.7, 0.6275 - 0.4];
        let raw = a.apply(&p);
        let x = mitigate(&raw, &a).unwrap();
        let tv = |u: &[f64; 4]| u.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        assert!(tv(&x) <= tv(&raw));
    }
}
