//! Traceless Hermitian operator bases normalized to `tr(A_i A_j) = 2 δ_ij`.
//!
//! For `d = 2` this is `(P_x, P_y, P_z)`; for `d = 3` the Gell-Mann matrices
//! `λ_1..λ_8`. In general the order is: for each `k = 1..d`, the symmetric and
//! antisymmetric off-diagonal pairs `(j, k)` for `j < k`, then the diagonal
//! element `diag_k`.

use num_complex::Complex64;

use crate::linalg::CMatrix;

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub fn paulis() -> [CMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

#[inline]
fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The `d² - 1` basis elements of the traceless Hermitian `d x d` matrices.
pub fn traceless_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    for k in 1..d {
        for j in 0..k {
            let mut sym = CMatrix::zeros(d, d);
            sym[(j, k)] = c(1.0, 0.0);
            sym[(k, j)] = c(1.0, 0.0);
            out.push(sym);
            let mut asym = CMatrix::zeros(d, d);
            asym[(j, k)] = c(0.0, -1.0);
            asym[(k, j)] = c(0.0, 1.0);
            out.push(asym);
        }
        let l = k as f64;
        let norm = (2.0 / (l * (l + 1.0))).sqrt();
        let mut diag = CMatrix::zeros(d, d);
        for i in 0..k {
            diag[(i, i)] = c(norm, 0.0);
        }
        diag[(k, k)] = c(-l * norm, 0.0);
        out.push(diag);
    }
    out
}

/// Real coordinates of a Hermitian `m` in `basis`: `a_i = tr(m A_i) / 2`.
pub fn coordinates(m: &CMatrix, basis: &[CMatrix]) -> Vec<f64> {
    basis
        .iter()
        .map(|b| crate::linalg::trace_product(m, b) / 2.0)
        .collect()
}

/// `Σ a_i A_i`.
pub fn combine(coords: &[f64], basis: &[CMatrix]) -> CMatrix {
    let d = basis.first().map_or(0, |b| b.nrows());
    let mut m = CMatrix::zeros(d, d);
    for (a, b) in coords.iter().zip(basis) {
        m += b * c(*a, 0.0);
    }
    m
}
