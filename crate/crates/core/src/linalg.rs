//! Small dense complex linear-algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Largest entry of `|m - m^*|`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

/// Largest entry of `|m^* m - 1|`.
pub fn unitary_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let g = m.adjoint() * m;
    let n = m.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            r = r.max((g[(i, j)] - target).norm());
        }
    }
    r
}

pub fn ensure_hermitian(m: &CMatrix, tolerance: f64) -> Result<()> {
    let residual = hermitian_residual(m);
    if residual > tolerance {
        return Err(Error::NotHermitian { residual, tolerance });
    }
    Ok(())
}

pub fn ensure_unitary(m: &CMatrix, tolerance: f64) -> Result<()> {
    let residual = unitary_residual(m);
    if residual > tolerance {
        return Err(Error::NotUnitary { residual, tolerance });
    }
    Ok(())
}

/// Hermitian part `(m + m^*)/2`, used to scrub rounding noise.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn trace_real(m: &CMatrix) -> f64 {
    m.trace().re
}

/// `tr(a b)` for Hermitian `a`, `b` (real up to rounding).
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s.re
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in
/// non-increasing order. Columns of the returned matrix are the eigenvectors.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(h));
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vecs)
}

/// Real symmetric eigen-decomposition, eigenvalues non-increasing.
pub fn symmetric_eigen(m: &RMatrix) -> (Vec<f64>, RMatrix) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = RMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vecs)
}

/// Precomputed spectral data for repeated evaluation of `exp(-i H t)`.
#[derive(Clone, Debug)]
pub struct HermitianPropagator {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl HermitianPropagator {
    pub fn new(h: &CMatrix) -> Self {
        let (values, vectors) = hermitian_eigen(h);
        Self { values, vectors }
    }

    /// `exp(-i H t)`.
    pub fn unitary(&self, t: f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let phase = Complex64::from_polar(1.0, -self.values[j] * t);
            for i in 0..n {
                scaled[(i, j)] *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(-i H t) psi` without forming the full unitary.
    pub fn apply(&self, t: f64, psi: &CVector) -> CVector {
        let mut coeffs = self.vectors.adjoint() * psi;
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c *= Complex64::from_polar(1.0, -self.values[j] * t);
        }
        &self.vectors * coeffs
    }
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    HermitianPropagator::new(h).unitary(t)
}

/// Haar-distributed unitary via QR of a complex Ginibre matrix with the
/// phases of `diag(R)` divided out.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix with i.i.d. Gaussian entries (GUE up to scale).
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    hermitize(&g)
}

/// Extend the orthonormal columns of `cols` (d x k) to a d x d unitary by
/// Gram-Schmidt against the standard basis, in index order.
pub fn complete_unitary(cols: &CMatrix) -> CMatrix {
    let d = cols.nrows();
    let mut basis: Vec<CVector> = cols.column_iter().map(|c| c.into_owned()).collect();
    let mut e = 0;
    while basis.len() < d && e < d {
        let mut v = CVector::zeros(d);
        v[e] = Complex64::new(1.0, 0.0);
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        // second pass for numerical orthogonality
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v / Complex64::new(n, 0.0));
        }
        e += 1;
    }
    CMatrix::from_columns(&basis)
}

/// A unitary `V` with `V^* a V = target` for Hermitian `a` and `target`
/// sharing the same spectrum.
pub fn unitary_with_target(a: &CMatrix, target: &CMatrix, tolerance: f64) -> Result<CMatrix> {
    if a.shape() != target.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            a.shape(),
            target.shape()
        )));
    }
    let (la, qa) = hermitian_eigen(a);
    let (lt, qt) = hermitian_eigen(target);
    let gap = la
        .iter()
        .zip(&lt)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if gap > tolerance {
        return Err(Error::Invalid(format!(
            "spectra differ by {gap:.3e}; no unitary maps one onto the other"
        )));
    }
    Ok(qa * qt.adjoint())
}

/// Frobenius norm of a complex matrix.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn ensure_finite(values: impl IntoIterator<Item = f64>, what: &str) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}
