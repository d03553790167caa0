use nalgebra::{Matrix3, Vector3};

use crate::bipartite::{CouplingHamiltonian, LocalUnitary};
use crate::error::{Error, Result};
use crate::linalg::RMatrix;

/// Induced vector field: a real antisymmetric `dmin x dmin` generator `H_U`.
/// The reduced dynamics read `σ̇ = -H_U σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct InducedField {
    generator: RMatrix,
}

impl InducedField {
    pub fn from_generator(h: RMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "generator of shape {:?}",
                h.shape()
            )));
        }
        let residual = (&h + h.transpose()).abs().max();
        if residual > 1e-12 {
            return Err(Error::Invalid(format!(
                "generator is not antisymmetric (residual {residual:.3e})"
            )));
        }
        Ok(Self { generator: h })
    }

    /// Field whose motion is `σ̇ = ω × σ`.
    pub fn from_rotation_vector(omega: &Vector3<f64>) -> Self {
        let h = -hat(omega);
        Self {
            generator: RMatrix::from_fn(3, 3, |i, j| h[(i, j)]),
        }
    }

    pub fn dmin(&self) -> usize {
        self.generator.nrows()
    }

    pub fn generator(&self) -> &RMatrix {
        &self.generator
    }

    /// `(H_U)_21` for `dmin = 2`.
    pub fn angular_velocity(&self) -> Option<f64> {
        (self.dmin() == 2).then(|| self.generator[(1, 0)])
    }

    /// `ω` with `-H_U σ = ω × σ` for `dmin = 3`.
    pub fn rotation_vector(&self) -> Option<Vector3<f64>> {
        (self.dmin() == 3).then(|| {
            let h = &self.generator;
            Vector3::new(h[(1, 2)], h[(2, 0)], h[(0, 1)])
        })
    }

    /// `-H_U σ`.
    pub fn velocity(&self, sigma: &[f64]) -> Vec<f64> {
        let n = self.dmin();
        (0..n)
            .map(|i| -(0..n).map(|j| self.generator[(i, j)] * sigma[j]).sum::<f64>())
            .collect()
    }
}

/// `hat(ω) σ = ω × σ`.
pub fn hat(omega: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -omega[2], omega[1], //
        omega[2], 0.0, -omega[0], //
        -omega[1], omega[0], 0.0,
    )
}

/// Inverse of [`hat`] on antisymmetric matrices.
pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// `H_U = Σ_k Im((V^* A_k V) ∘ (W^* B_k W))` restricted to the leading
/// `dmin x dmin` block.
pub fn induced_field(h0: &CouplingHamiltonian, u: &LocalUnitary) -> Result<InducedField> {
    if h0.dims() != u.dims() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian {:?} with local unitary {:?}",
            h0.dims(),
            u.dims()
        )));
    }
    let n = h0.dmin();
    let vd = u.v().adjoint();
    let wd = u.w().adjoint();
    let mut h = RMatrix::zeros(n, n);
    for (a, b) in h0.terms() {
        let at = &vd * a * u.v();
        let bt = &wd * b * u.w();
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] += (at[(i, j)] * bt[(i, j)]).im;
            }
        }
    }
    // scrub rounding so the antisymmetry invariant is exact
    let h = (&h - h.transpose()) * 0.5;
    Ok(InducedField { generator: h })
}
