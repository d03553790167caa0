use std::sync::OnceLock;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Tolerances for structural (Hermiticity, unitarity, norm) and
/// reconstruction checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub structural: f64,
    pub reconstruction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-12,
            reconstruction: 1e-10,
        }
    }
}

/// Pure state on `C^{d1} ⊗ C^{d2}` stored as its `d1 x d2` amplitude grid,
/// entry `(i, j)` being `⟨ij|ψ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    amplitudes: CMatrix,
}

impl BipartiteState {
    pub fn new(amplitudes: CMatrix) -> Result<Self> {
        Self::with_tolerance(amplitudes, Tolerances::default().structural)
    }

    pub fn with_tolerance(amplitudes: CMatrix, tolerance: f64) -> Result<Self> {
        if amplitudes.nrows() == 0 || amplitudes.ncols() == 0 {
            return Err(Error::DimensionMismatch("empty amplitude grid".into()));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > tolerance {
            return Err(Error::NotNormalized { norm, tolerance });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: CMatrix) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized {
                norm,
                tolerance: 0.0,
            });
        }
        Ok(Self {
            amplitudes: amplitudes / Complex64::new(norm, 0.0),
        })
    }

    /// State from a flat vector with `|ij⟩` at index `i * d2 + j`.
    pub fn from_vector(d1: usize, d2: usize, v: &CVector) -> Result<Self> {
        if v.len() != d1 * d2 {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for dims ({d1}, {d2})",
                v.len()
            )));
        }
        Self::with_tolerance(
            CMatrix::from_fn(d1, d2, |i, j| v[i * d2 + j]),
            1e-9,
        )
    }

    /// Basis product state `|i⟩ ⊗ |j⟩` (0-based).
    pub fn product(d1: usize, d2: usize, i: usize, j: usize) -> Result<Self> {
        if i >= d1 || j >= d2 {
            return Err(Error::DimensionMismatch(format!(
                "level ({i}, {j}) outside dims ({d1}, {d2})"
            )));
        }
        let mut m = CMatrix::zeros(d1, d2);
        m[(i, j)] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: m })
    }

    /// `Σ σ_i |ii⟩`.
    pub fn diagonal(d1: usize, d2: usize, sigma: &[f64]) -> Result<Self> {
        if sigma.len() > d1.min(d2) {
            return Err(Error::DimensionMismatch(format!(
                "{} singular values for dims ({d1}, {d2})",
                sigma.len()
            )));
        }
        let mut m = CMatrix::zeros(d1, d2);
        for (i, s) in sigma.iter().enumerate() {
            m[(i, i)] = Complex64::new(*s, 0.0);
        }
        Self::new(m)
    }

    pub fn maximally_entangled(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        Self {
            amplitudes: CMatrix::identity(d, d) * Complex64::new(s, 0.0),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.amplitudes.shape()
    }

    pub fn dmin(&self) -> usize {
        let (a, b) = self.dims();
        a.min(b)
    }

    pub fn amplitudes(&self) -> &CMatrix {
        &self.amplitudes
    }

    pub fn to_vector(&self) -> CVector {
        let (d1, d2) = self.dims();
        CVector::from_fn(d1 * d2, |k, _| self.amplitudes[(k / d2, k % d2)])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `(V ⊗ W) ψ`, i.e. `V M Wᵀ` on the amplitude grid.
    pub fn apply_local(&self, u: &LocalUnitary) -> Result<Self> {
        if u.dims() != self.dims() {
            return Err(Error::DimensionMismatch(format!(
                "local unitary {:?} on state {:?}",
                u.dims(),
                self.dims()
            )));
        }
        Ok(Self {
            amplitudes: &u.v * &self.amplitudes * u.w.transpose(),
        })
    }

    /// `e^{iφ} ψ`.
    pub fn with_phase(&self, phi: f64) -> Self {
        Self {
            amplitudes: &self.amplitudes * Complex64::from_polar(1.0, phi),
        }
    }
}

/// Pair `(V, W)` acting as `V ⊗ W`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalUnitary {
    pub(crate) v: CMatrix,
    pub(crate) w: CMatrix,
}

impl LocalUnitary {
    pub fn new(v: CMatrix, w: CMatrix) -> Result<Self> {
        Self::with_tolerance(v, w, Tolerances::default().structural)
    }

    pub fn with_tolerance(v: CMatrix, w: CMatrix, tolerance: f64) -> Result<Self> {
        linalg::ensure_unitary(&v, tolerance)?;
        linalg::ensure_unitary(&w, tolerance)?;
        Ok(Self { v, w })
    }

    /// Symmetric pair `V ⊗ V`.
    pub fn symmetric(v: CMatrix) -> Result<Self> {
        Self::new(v.clone(), v)
    }

    pub fn identity(d1: usize, d2: usize) -> Self {
        Self {
            v: CMatrix::identity(d1, d1),
            w: CMatrix::identity(d2, d2),
        }
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    pub fn w(&self) -> &CMatrix {
        &self.w
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.v.nrows(), self.w.nrows())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            v: self.v.adjoint(),
            w: self.w.adjoint(),
        }
    }

    /// `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            v: &self.v * &other.v,
            w: &self.w * &other.w,
        }
    }

    pub fn dense(&self) -> CMatrix {
        linalg::kron(&self.v, &self.w)
    }
}

/// Vector of singular values on the unit sphere `S^{dmin-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtVector(DVector<f64>);

impl SchmidtVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(values, Tolerances::default().structural)
    }

    pub fn with_tolerance(values: Vec<f64>, tolerance: f64) -> Result<Self> {
        let v = DVector::from_vec(values);
        let norm = v.norm();
        if v.is_empty() || !norm.is_finite() || (norm - 1.0).abs() > tolerance {
            return Err(Error::NotNormalized { norm, tolerance });
        }
        Ok(Self(v))
    }

    /// Rescales `values` to unit norm.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        let v = DVector::from_vec(values);
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized {
                norm,
                tolerance: 0.0,
            });
        }
        Ok(Self(v / norm))
    }

    pub(crate) fn from_unchecked(v: DVector<f64>) -> Self {
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().copied().collect()
    }
}

impl std::ops::Index<usize> for SchmidtVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Coupling Hamiltonian `Σ_k A_k ⊗ B_k`. The term list is authoritative; the
/// dense matrix is built on first use and cached.
#[derive(Clone, Debug)]
pub struct CouplingHamiltonian {
    d1: usize,
    d2: usize,
    terms: Vec<(CMatrix, CMatrix)>,
    dense: OnceLock<CMatrix>,
}

impl CouplingHamiltonian {
    pub fn new(d1: usize, d2: usize, terms: Vec<(CMatrix, CMatrix)>) -> Result<Self> {
        Self::with_tolerance(d1, d2, terms, Tolerances::default().structural)
    }

    pub fn with_tolerance(
        d1: usize,
        d2: usize,
        terms: Vec<(CMatrix, CMatrix)>,
        tolerance: f64,
    ) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::DimensionMismatch("zero local dimension".into()));
        }
        for (a, b) in &terms {
            if a.shape() != (d1, d1) || b.shape() != (d2, d2) {
                return Err(Error::DimensionMismatch(format!(
                    "term of shape {:?} ⊗ {:?} for dims ({d1}, {d2})",
                    a.shape(),
                    b.shape()
                )));
            }
            linalg::ensure_finite(a.iter().chain(b.iter()).flat_map(|z| [z.re, z.im]), "term")?;
            linalg::ensure_hermitian(a, tolerance)?;
            linalg::ensure_hermitian(b, tolerance)?;
        }
        Ok(Self {
            d1,
            d2,
            terms,
            dense: OnceLock::new(),
        })
    }

    pub fn zero(d1: usize, d2: usize) -> Self {
        Self {
            d1,
            d2,
            terms: Vec::new(),
            dense: OnceLock::new(),
        }
    }

    /// Expands a dense Hermitian `d1 d2 x d1 d2` matrix into product terms
    /// over the full Hermitian bases (identity included).
    pub fn from_dense(d1: usize, d2: usize, h: &CMatrix) -> Result<Self> {
        if h.shape() != (d1 * d2, d1 * d2) {
            return Err(Error::DimensionMismatch(format!(
                "dense matrix {:?} for dims ({d1}, {d2})",
                h.shape()
            )));
        }
        linalg::ensure_hermitian(h, 1e-10)?;
        let ba = hermitian_basis(d1);
        let bb = hermitian_basis(d2);
        let mut terms = Vec::new();
        for a in &ba {
            let na = linalg::trace_product(a, a);
            for b in &bb {
                let nb = linalg::trace_product(b, b);
                let coef = linalg::trace_product(h, &linalg::kron(a, b)) / (na * nb);
                if coef.abs() > 1e-15 {
                    terms.push((a * Complex64::new(coef, 0.0), b.clone()));
                }
            }
        }
        let out = Self::new(d1, d2, terms)?;
        let _ = out.dense.set(linalg::hermitize(h));
        Ok(out)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    pub fn dmin(&self) -> usize {
        self.d1.min(self.d2)
    }

    pub fn terms(&self) -> &[(CMatrix, CMatrix)] {
        &self.terms
    }

    pub fn dense(&self) -> &CMatrix {
        self.dense.get_or_init(|| {
            let n = self.d1 * self.d2;
            let mut h = CMatrix::zeros(n, n);
            for (a, b) in &self.terms {
                h += linalg::kron(a, b);
            }
            h
        })
    }

    /// `U^* H U` for `U = V ⊗ W`, term by term.
    pub fn conjugated(&self, u: &LocalUnitary) -> Result<Self> {
        if u.dims() != self.dims() {
            return Err(Error::DimensionMismatch(format!(
                "local unitary {:?} on Hamiltonian {:?}",
                u.dims(),
                self.dims()
            )));
        }
        let vd = u.v.adjoint();
        let wd = u.w.adjoint();
        let terms = self
            .terms
            .iter()
            .map(|(a, b)| {
                (
                    linalg::hermitize(&(&vd * a * &u.v)),
                    linalg::hermitize(&(&wd * b * &u.w)),
                )
            })
            .collect();
        Ok(Self {
            d1: self.d1,
            d2: self.d2,
            terms,
            dense: OnceLock::new(),
        })
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            d1: self.d1,
            d2: self.d2,
            terms: self
                .terms
                .iter()
                .map(|(a, b)| (a * Complex64::new(lambda, 0.0), b.clone()))
                .collect(),
            dense: OnceLock::new(),
        }
    }

    /// Largest entry of `|S H S - H|` with `S` the swap (requires `d1 = d2`).
    pub fn swap_residual(&self) -> Result<f64> {
        if self.d1 != self.d2 {
            return Err(Error::DimensionMismatch(
                "swap symmetry needs equal local dimensions".into(),
            ));
        }
        let d = self.d1;
        let h = self.dense();
        let mut r: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let a = h[(i * d + j, k * d + l)];
                        let b = h[(j * d + i, l * d + k)];
                        r = r.max((a - b).norm());
                    }
                }
            }
        }
        Ok(r)
    }
}

/// Identity followed by the traceless basis.
fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut out = vec![CMatrix::identity(d, d)];
    out.extend(super::basis::traceless_basis(d));
    out
}
