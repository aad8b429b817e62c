use nalgebra::Matrix4;

use super::circuit::{Circuit, Op, MAX_ITERATIONS_DENSITY};
use super::counts::{sample_counts, CountsTable};
use super::kernel::{apply_op, apply_two};
use super::noise::NoiseSpec;
use crate::error::{Error, Result};
use crate::linalg::{self, c, Mat2, C64};
use crate::state_space::BlochState;

const DENSITY_TOL: f64 = 1e-10;

/// Per-qubit input: a Bloch-sphere pure state or a 2×2 density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputState {
    Pure(BlochState),
    Mixed(Mat2),
}

impl From<BlochState> for InputState {
    fn from(s: BlochState) -> Self {
        InputState::Pure(s)
    }
}

impl InputState {
    pub fn density(&self) -> Result<Mat2> {
        match self {
            InputState::Pure(s) => {
                let a = s.amplitudes();
                Ok(Mat2::from_fn(|i, j| a[i] * a[j].conj()))
            }
            InputState::Mixed(rho) => {
                validate_density(rho)?;
                Ok(*rho)
            }
        }
    }
}

pub fn validate_density(rho: &Mat2) -> Result<()> {
    let herm = linalg::max_abs_diff(rho, &rho.adjoint());
    if herm > DENSITY_TOL {
        return Err(Error::InvalidDensity(format!("not Hermitian (deviation {herm:.3e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
        return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
    }
    // 2×2 Hermitian with unit trace: positive iff det ≥ 0
    let det = rho.determinant().re;
    if det < -DENSITY_TOL {
        return Err(Error::InvalidDensity(format!("negative eigenvalue (det {det:.3e})")));
    }
    Ok(())
}

/// Row-major vectorization of `⊗ρ₀`: entry `(r, k)` sits at index `r·2^w + k`.
fn product_density(width: usize, rho: &Mat2) -> Vec<C64> {
    let dim = 1usize << width;
    let mut v = vec![C64::new(1.0, 0.0); dim * dim];
    for (idx, x) in v.iter_mut().enumerate() {
        let (r, k) = (idx >> width, idx & (dim - 1));
        for q in 0..width {
            let s = width - 1 - q;
            *x *= rho[((r >> s) & 1, (k >> s) & 1)];
        }
    }
    v
}

/// Superoperator of amplitude damping on the (row bit, column bit) pair.
fn damping_superop(gamma: f64) -> Matrix4<C64> {
    let s = (1.0 - gamma).sqrt();
    let mut m = Matrix4::zeros();
    m[(0, 0)] = c(1.0, 0.0);
    m[(0, 3)] = c(gamma, 0.0);
    m[(1, 1)] = c(s, 0.0);
    m[(2, 2)] = c(s, 0.0);
    m[(3, 3)] = c(1.0 - gamma, 0.0);
    m
}

fn check_size(c: &Circuit) -> Result<()> {
    if c.iterations() > MAX_ITERATIONS_DENSITY {
        return Err(Error::UnsupportedIterations {
            requested: c.iterations(),
            max: MAX_ITERATIONS_DENSITY,
            backend: "density",
        });
    }
    Ok(())
}

/// Vectorized density matrix after the circuit and the pre-measurement damping.
fn evolve(c: &Circuit, input: &InputState, noise: &NoiseSpec) -> Result<Vec<C64>> {
    check_size(c)?;
    let w = c.qubit_count();
    evolve_ops(w, c.ops(), &product_density(w, &input.density()?), noise)
}

fn evolve_ops(w: usize, ops: &[Op], start: &[C64], noise: &NoiseSpec) -> Result<Vec<C64>> {
    noise.validate(w)?;
    let mut v = start.to_vec();
    for op in ops {
        apply_op(&mut v, 2 * w, op, 0, false);
        apply_op(&mut v, 2 * w, op, w, true);
    }
    for q in 0..w {
        let g = noise.damping_for(q);
        if g > 0.0 {
            apply_two(&mut v, 2 * w, q, q + w, &damping_superop(g));
        }
    }
    Ok(v)
}

/// Outcome distribution of an arbitrary gate list on `width` qubits started in `|0…0⟩`,
/// with damping and readout confusion from `noise`.
pub fn ops_probabilities(width: usize, ops: &[Op], noise: &NoiseSpec) -> Result<Vec<f64>> {
    if width == 0 || width > 1 << MAX_ITERATIONS_DENSITY {
        return Err(Error::InvalidDensity(format!("unsupported register width {width}")));
    }
    let mut start = vec![C64::new(0.0, 0.0); 1 << (2 * width)];
    start[0] = C64::new(1.0, 0.0);
    let mut p = diagonal(&evolve_ops(width, ops, &start, noise)?, width);
    noise.apply_readout(&mut p, width);
    Ok(p)
}

fn diagonal(v: &[C64], width: usize) -> Vec<f64> {
    let dim = 1usize << width;
    (0..dim).map(|i| v[i * dim + i].re.max(0.0)).collect()
}

/// Outcome distribution including damping and readout confusion.
pub fn density_probabilities(c: &Circuit, input: &InputState, noise: &NoiseSpec) -> Result<Vec<f64>> {
    let w = c.qubit_count();
    let mut p = diagonal(&evolve(c, input, noise)?, w);
    noise.apply_readout(&mut p, w);
    Ok(p)
}

pub fn run_density(
    c: &Circuit,
    input: &InputState,
    noise: &NoiseSpec,
    shots: u64,
    seed: u64,
) -> Result<CountsTable> {
    sample_counts(&density_probabilities(c, input, noise)?, c.qubit_count(), shots, seed)
}

/// Success probability and normalized kept-qubit density after post-selection
/// (damping included, readout confusion excluded).
pub fn conditional_kept_density(
    c: &Circuit,
    input: &InputState,
    noise: &NoiseSpec,
) -> Result<(f64, Option<Mat2>)> {
    let w = c.qubit_count();
    let v = evolve(c, input, noise)?;
    let dim = 1usize << w;
    let idx = [0, c.kept_mask()];
    let block = Mat2::from_fn(|i, j| v[idx[i] * dim + idx[j]]);
    let p = block.trace().re;
    Ok((p, (p > 0.0).then(|| block.unscale(p))))
}
