//! In-place gate application on a basis-indexed vector; qubit 0 is the most
//! significant index bit.

use nalgebra::{Matrix2, Matrix4};

use super::circuit::{bit_of, Op};
use crate::linalg::C64;

pub(crate) fn apply_one<T>(v: &mut [T], width: usize, q: usize, m: &Matrix2<T>)
where
    T: nalgebra::Scalar + Copy + std::ops::Mul<Output = T> + std::ops::Add<Output = T>,
{
    let bit = bit_of(q, width);
    for i in 0..v.len() {
        if i & bit == 0 {
            let j = i | bit;
            let (a, b) = (v[i], v[j]);
            v[i] = m[(0, 0)] * a + m[(0, 1)] * b;
            v[j] = m[(1, 0)] * a + m[(1, 1)] * b;
        }
    }
}

/// `m` acts with `hi` as its left tensor factor.
pub(crate) fn apply_two<T>(v: &mut [T], width: usize, hi: usize, lo: usize, m: &Matrix4<T>)
where
    T: nalgebra::Scalar + Copy + std::ops::Mul<Output = T> + std::ops::Add<Output = T>,
{
    let (bh, bl) = (bit_of(hi, width), bit_of(lo, width));
    for i in 0..v.len() {
        if i & (bh | bl) == 0 {
            let idx = [i, i | bl, i | bh, i | bh | bl];
            let x = idx.map(|k| v[k]);
            for r in 0..4 {
                v[idx[r]] = m[(r, 0)] * x[0] + m[(r, 1)] * x[1] + m[(r, 2)] * x[2] + m[(r, 3)] * x[3];
            }
        }
    }
}

pub(crate) fn apply_cnot<T: Copy>(v: &mut [T], width: usize, control: usize, target: usize) {
    let (bc, bt) = (bit_of(control, width), bit_of(target, width));
    for i in 0..v.len() {
        if i & bc != 0 && i & bt == 0 {
            v.swap(i, i | bt);
        }
    }
}

/// Applies `op` to a register of `width` qubits. With `offset`/`conjugate` the same
/// routine acts on the column half of a vectorized density matrix.
pub(crate) fn apply_op(v: &mut [C64], width: usize, op: &Op, offset: usize, conjugate: bool) {
    match op {
        Op::OneQubit { qubit, matrix } => {
            let m = if conjugate { matrix.conjugate() } else { *matrix };
            apply_one(v, width, qubit + offset, &m);
        }
        Op::Cnot { control, target } => apply_cnot(v, width, control + offset, target + offset),
        Op::TwoQubit { first, second, matrix } => {
            let m = if conjugate { matrix.conjugate() } else { *matrix };
            apply_two(v, width, first + offset, second + offset, &m);
        }
    }
}
