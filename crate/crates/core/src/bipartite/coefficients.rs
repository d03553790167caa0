use num_complex::Complex64;

use super::basis::traceless_basis;
use super::CouplingHamiltonian;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix};

/// Decomposition `H = Σ C_ij A_i ⊗ B_j + E ⊗ 1 + 1 ⊗ F + τ 1`, with `A_i`,
/// `B_j` from [`traceless_basis`] and `E`, `F` traceless.
#[derive(Clone, Debug)]
pub struct CoefficientMatrix {
    pub c: RMatrix,
    pub e_loc: CMatrix,
    pub f_loc: CMatrix,
    pub trace: f64,
    d1: usize,
    d2: usize,
}

impl CoefficientMatrix {
    pub fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    /// `Σ C_ij A_i ⊗ B_j` as a coupling Hamiltonian.
    pub fn coupling_part(&self) -> CouplingHamiltonian {
        coupling_from_coefficients(&self.c, self.d1, self.d2)
            .expect("basis products are Hermitian")
    }

    /// Dense `E ⊗ 1 + 1 ⊗ F + τ 1`.
    pub fn local_part(&self) -> CMatrix {
        let i1 = CMatrix::identity(self.d1, self.d1);
        let i2 = CMatrix::identity(self.d2, self.d2);
        linalg::kron(&self.e_loc, &i2)
            + linalg::kron(&i1, &self.f_loc)
            + CMatrix::identity(self.d1 * self.d2, self.d1 * self.d2)
                * Complex64::new(self.trace, 0.0)
    }

    pub fn reassemble(&self) -> CMatrix {
        self.coupling_part().dense() + self.local_part()
    }
}

pub fn coefficient_matrix(h0: &CouplingHamiltonian) -> CoefficientMatrix {
    let (d1, d2) = h0.dims();
    let ba = traceless_basis(d1);
    let bb = traceless_basis(d2);
    let mut c = RMatrix::zeros(ba.len(), bb.len());
    let mut e_coords = vec![0.0; ba.len()];
    let mut f_coords = vec![0.0; bb.len()];
    let mut trace = 0.0;
    for (a, b) in h0.terms() {
        let ta: Vec<f64> = ba.iter().map(|x| linalg::trace_product(a, x)).collect();
        let tb: Vec<f64> = bb.iter().map(|x| linalg::trace_product(b, x)).collect();
        let tra = linalg::trace_real(a);
        let trb = linalg::trace_real(b);
        for (i, ai) in ta.iter().enumerate() {
            for (j, bj) in tb.iter().enumerate() {
                c[(i, j)] += ai * bj / 4.0;
            }
            e_coords[i] += ai * trb / (2.0 * d2 as f64);
        }
        for (j, bj) in tb.iter().enumerate() {
            f_coords[j] += tra * bj / (2.0 * d1 as f64);
        }
        trace += tra * trb / (d1 * d2) as f64;
    }
    CoefficientMatrix {
        c,
        e_loc: super::basis::combine(&e_coords, &ba),
        f_loc: super::basis::combine(&f_coords, &bb),
        trace,
        d1,
        d2,
    }
}

/// `Σ C_ij A_i ⊗ B_j`.
pub fn coupling_from_coefficients(c: &RMatrix, d1: usize, d2: usize) -> Result<CouplingHamiltonian> {
    if c.shape() != (d1 * d1 - 1, d2 * d2 - 1) {
        return Err(Error::DimensionMismatch(format!(
            "coefficient matrix {:?} for dims ({d1}, {d2})",
            c.shape()
        )));
    }
    let ba = traceless_basis(d1);
    let bb = traceless_basis(d2);
    let mut terms = Vec::new();
    for (i, a) in ba.iter().enumerate() {
        let row: Vec<f64> = (0..bb.len()).map(|j| c[(i, j)]).collect();
        if row.iter().all(|x| *x == 0.0) {
            continue;
        }
        terms.push((a.clone(), super::basis::combine(&row, &bb)));
    }
    CouplingHamiltonian::new(d1, d2, terms)
}

/// One term `ω A ⊗ B` of a diagonal-form coupling.
#[derive(Clone, Debug)]
pub struct ProductTerm {
    pub a: CMatrix,
    pub b: CMatrix,
    pub weight: f64,
}

/// One term `ω A ⊗ A` of a swap-symmetric diagonal-form coupling.
#[derive(Clone, Debug)]
pub struct SymmetricTerm {
    pub a: CMatrix,
    pub weight: f64,
}

/// Rank cutoff applied to singular values and eigenvalues of `C`.
const RANK_TOLERANCE: f64 = 1e-12;

/// `H_0 = Σ ω_i A_i ⊗ B_i + local parts` with orthonormal `A_i`, `B_i` and
/// `ω_i > 0` non-increasing, from the real SVD of `C`.
pub fn diagonalize_coupling(h0: &CouplingHamiltonian) -> Vec<ProductTerm> {
    let (d1, d2) = h0.dims();
    let cm = coefficient_matrix(h0);
    let ba = traceless_basis(d1);
    let bb = traceless_basis(d2);
    let svd = cm.c.clone().svd_unordered(true, true);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let scale = svd.singular_values.max().max(1.0);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    order
        .into_iter()
        .filter(|&k| svd.singular_values[k] > RANK_TOLERANCE * scale)
        .map(|k| {
            let xa: Vec<f64> = u.column(k).iter().copied().collect();
            let yb: Vec<f64> = vt.row(k).iter().copied().collect();
            ProductTerm {
                a: super::basis::combine(&xa, &ba),
                b: super::basis::combine(&yb, &bb),
                weight: svd.singular_values[k],
            }
        })
        .collect()
}

/// `H_0 = Σ ω_i A_i ⊗ A_i + local parts` for a swap-symmetric coupling, with
/// `ω_i` the nonzero eigenvalues of the symmetric `C` in non-increasing order.
pub fn symmetric_diagonalize(h0: &CouplingHamiltonian) -> Result<Vec<SymmetricTerm>> {
    let residual = h0.swap_residual()?;
    if residual > 1e-10 {
        return Err(Error::NotSymmetric {
            residual,
            tolerance: 1e-10,
        });
    }
    let (d, _) = h0.dims();
    let cm = coefficient_matrix(h0);
    let basis = traceless_basis(d);
    let (values, vectors) = linalg::symmetric_eigen(&cm.c);
    let scale = values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    Ok(values
        .iter()
        .enumerate()
        .filter(|(_, w)| w.abs() > RANK_TOLERANCE * scale)
        .map(|(k, w)| {
            let coords: Vec<f64> = vectors.column(k).iter().copied().collect();
            SymmetricTerm {
                a: super::basis::combine(&coords, &basis),
                weight: *w,
            }
        })
        .collect())
}
