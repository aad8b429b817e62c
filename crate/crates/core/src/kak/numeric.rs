//! Numerical joint diagonalization following Eckart–Young: an SVD of `U_R`, then
//! an eigendecomposition of `U'_I = V_Aᵀ U_I X_A` restricted to each block of
//! equal singular values.
//!
//! `U'_I` is symmetric and block diagonal on blocks of nonzero singular values.
//! On the null block of `U_R` any orthonormal basis is a valid set of right
//! singular vectors, and the SVD routine's choice generally leaves that block of
//! `U'_I` a non-symmetric orthogonal matrix `K`; rotating the right vectors by
//! `Kᵀ` turns it into the identity.

use nalgebra::DMatrix;

use super::{assemble, DecompositionPath, KakIntermediates, MagicFrame, RMat4};
use crate::error::Result;

/// Singular values closer than this are treated as one degenerate block.
const DEGENERACY_TOL: f64 = 1e-7;

pub(super) fn joint_diagonalize(frame: &MagicFrame) -> Result<KakIntermediates> {
    let svd = frame.u_r.svd(true, true);
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let x = v_t.transpose();

    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut v_a = RMat4::zeros();
    let mut x_a = RMat4::zeros();
    let mut d = [0.0; 4];
    for (dst, &src) in order.iter().enumerate() {
        v_a.set_column(dst, &u.column(src));
        x_a.set_column(dst, &x.column(src));
        d[dst] = svd.singular_values[src];
    }

    let blocks = degenerate_blocks(&d);

    if let Some(null) = blocks.iter().find(|b| d[b[0]] < DEGENERACY_TOL) {
        let k = v_a.transpose() * frame.u_i * x_a;
        let kb = DMatrix::from_fn(null.len(), null.len(), |a, b| k[(null[a], null[b])]);
        let xb = DMatrix::from_fn(4, null.len(), |r, a| x_a[(r, null[a])]);
        let rotated = xb * kb.transpose();
        for (a, &col) in null.iter().enumerate() {
            for r in 0..4 {
                x_a[(r, col)] = rotated[(r, a)];
            }
        }
    }

    for j in 0..4 {
        if largest_entry(x_a.column(j).iter().copied()) < 0.0 {
            x_a.column_mut(j).neg_mut();
            v_a.column_mut(j).neg_mut();
        }
    }

    let k = v_a.transpose() * frame.u_i * x_a;
    let u_i_prime = (k + k.transpose()) / 2.0;

    let mut p = RMat4::zeros();
    let mut g = [0.0; 4];
    for block in &blocks {
        let n = block.len();
        let sub = DMatrix::from_fn(n, n, |a, b| u_i_prime[(block[a], block[b])]);
        let eig = sub.symmetric_eigen();
        let mut pairs: Vec<usize> = (0..n).collect();
        pairs.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        for (slot, &e) in pairs.iter().enumerate() {
            let mut vec: Vec<f64> = eig.eigenvectors.column(e).iter().copied().collect();
            if largest_entry(vec.iter().copied()) < 0.0 {
                vec.iter_mut().for_each(|x| *x = -*x);
            }
            for (a, &row) in block.iter().enumerate() {
                p[(row, block[slot])] = vec[a];
            }
            g[block[slot]] = eig.eigenvalues[e];
        }
    }

    Ok(assemble(
        frame,
        DecompositionPath::Numerical,
        v_a,
        x_a,
        d,
        u_i_prime,
        g,
        p,
    ))
}

/// Index groups of (sorted, descending) singular values that coincide.
fn degenerate_blocks(d: &[f64; 4]) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = vec![vec![0]];
    for j in 1..4 {
        let last = blocks.last_mut().expect("non-empty");
        if (d[last[0]] - d[j]).abs() < DEGENERACY_TOL {
            last.push(j);
        } else {
            blocks.push(vec![j]);
        }
    }
    blocks
}

/// The entry of largest magnitude (first one on ties).
fn largest_entry(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, |best, v| if v.abs() > best.abs() { v } else { best })
}
