use num_complex::Complex64;

use crate::bipartite::{basis::traceless_basis, singular_values, BipartiteState, CouplingHamiltonian};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, HermitianPropagator, RMatrix};

/// Local Hamiltonian `E ⊗ 1 + 1 ⊗ F`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalHamiltonian {
    pub(crate) e: CMatrix,
    pub(crate) f: CMatrix,
}

impl LocalHamiltonian {
    pub fn new(e: CMatrix, f: CMatrix) -> Result<Self> {
        if !e.is_square() || !f.is_square() {
            return Err(Error::DimensionMismatch("E and F must be square".into()));
        }
        linalg::ensure_finite(e.iter().chain(f.iter()).flat_map(|z| [z.re, z.im]), "local Hamiltonian")?;
        linalg::ensure_hermitian(&e, 1e-12)?;
        linalg::ensure_hermitian(&f, 1e-12)?;
        Ok(Self { e, f })
    }

    pub fn zero(d1: usize, d2: usize) -> Self {
        Self {
            e: CMatrix::zeros(d1, d1),
            f: CMatrix::zeros(d2, d2),
        }
    }

    pub fn e(&self) -> &CMatrix {
        &self.e
    }

    pub fn f(&self) -> &CMatrix {
        &self.f
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.e.nrows(), self.f.nrows())
    }

    pub fn dense(&self) -> CMatrix {
        let (d1, d2) = self.dims();
        linalg::kron(&self.e, &CMatrix::identity(d2, d2)) + linalg::kron(&CMatrix::identity(d1, d1), &self.f)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let s = Complex64::new(lambda, 0.0);
        Self {
            e: &self.e * s,
            f: &self.f * s,
        }
    }
}

/// Result of [`compensating_general`].
#[derive(Clone, Debug)]
pub struct GeneralCompensator {
    pub hamiltonian: LocalHamiltonian,
    /// Singular values of the state are distinct and nonzero.
    pub regular: bool,
    /// Rank of the local tangent map after the cutoff.
    pub rank: usize,
    /// Smallest retained singular value of the tangent map, relative to the largest.
    pub smallest_retained: f64,
}

/// Relative cutoff below which tangent directions are treated as absent.
pub const PINV_CUTOFF: f64 = 1e-10;
/// Retained directions weaker than this (relative) make the solve ill-conditioned.
pub const CONDITION_LIMIT: f64 = 1e-8;

/// Hermitian basis of `d x d` matrices orthonormal in Hilbert-Schmidt norm.
fn hs_basis(d: usize) -> Vec<CMatrix> {
    let mut out = vec![CMatrix::identity(d, d) / Complex64::new((d as f64).sqrt(), 0.0)];
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    out.extend(traceless_basis(d).into_iter().map(|b| b * s));
    out
}

/// Real matrix whose columns are `-i (G_p ⊗ 1) ψ` and `-i (1 ⊗ K_q) ψ`,
/// with real and imaginary parts stacked.
fn tangent_map(psi: &BipartiteState) -> (RMatrix, Vec<CMatrix>, Vec<CMatrix>) {
    let (d1, d2) = psi.dims();
    let ga = hs_basis(d1);
    let gb = hs_basis(d2);
    let m = psi.amplitudes();
    let n = d1 * d2;
    let mut out = RMatrix::zeros(2 * n, ga.len() + gb.len());
    let minus_i = Complex64::new(0.0, -1.0);
    let mut col = 0;
    let put = |grid: CMatrix, out: &mut RMatrix, col: usize| {
        for i in 0..d1 {
            for j in 0..d2 {
                let z = grid[(i, j)] * minus_i;
                out[(i * d2 + j, col)] = z.re;
                out[(n + i * d2 + j, col)] = z.im;
            }
        }
    };
    for g in &ga {
        put(g * m, &mut out, col);
        col += 1;
    }
    for k in &gb {
        put(m * k.transpose(), &mut out, col);
        col += 1;
    }
    (out, ga, gb)
}

fn stack(v: &CVector) -> nalgebra::DVector<f64> {
    let n = v.len();
    nalgebra::DVector::from_fn(2 * n, |k, _| if k < n { v[k].re } else { v[k - n].im })
}

fn is_regular(psi: &BipartiteState) -> bool {
    let s = singular_values(psi);
    s.iter().all(|x| *x > 1e-8) && s.windows(2).all(|w| w[0] - w[1] > 1e-8)
}

/// Minimal Hilbert-Schmidt-norm local Hamiltonian `E ⊗ 1 + 1 ⊗ F` cancelling
/// the component of `-i H_0 ψ` tangent to the local-unitary orbit of `ψ`.
///
/// Least squares `-i H_c ψ ≈ i H_0 ψ` over real coordinates, solved by a
/// pseudo-inverse with relative cutoff [`PINV_CUTOFF`]. Retained directions
/// below [`CONDITION_LIMIT`] raise [`Error::IllConditioned`].
pub fn compensating_general(psi: &BipartiteState, h0: &CouplingHamiltonian) -> Result<GeneralCompensator> {
    if psi.dims() != h0.dims() {
        return Err(Error::DimensionMismatch(format!(
            "state {:?} with Hamiltonian {:?}",
            psi.dims(),
            h0.dims()
        )));
    }
    let (map, ga, gb) = tangent_map(psi);
    let target = stack(&(h0.dense() * psi.to_vector() * Complex64::new(0.0, 1.0)));
    let ncols = map.ncols();
    let svd = map.svd(true, true);
    let u = svd.u.as_ref().expect("requested");
    let vt = svd.v_t.as_ref().expect("requested");
    let smax = svd.singular_values.max();
    let mut x = nalgebra::DVector::<f64>::zeros(ncols);
    let mut rank = 0;
    let mut smallest = f64::INFINITY;
    for k in 0..svd.singular_values.len() {
        let s = svd.singular_values[k];
        if smax == 0.0 || s <= PINV_CUTOFF * smax {
            continue;
        }
        rank += 1;
        smallest = smallest.min(s / smax);
        let coef = u.column(k).dot(&target) / s;
        x += vt.row(k).transpose() * coef;
    }
    if rank > 0 && smallest < CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            smallest,
            cutoff: CONDITION_LIMIT,
        });
    }
    let (d1, d2) = psi.dims();
    let mut e = CMatrix::zeros(d1, d1);
    let mut f = CMatrix::zeros(d2, d2);
    for (p, g) in ga.iter().enumerate() {
        e += g * Complex64::new(x[p], 0.0);
    }
    for (q, k) in gb.iter().enumerate() {
        f += k * Complex64::new(x[ga.len() + q], 0.0);
    }
    Ok(GeneralCompensator {
        hamiltonian: LocalHamiltonian {
            e: linalg::hermitize(&e),
            f: linalg::hermitize(&f),
        },
        regular: is_regular(psi),
        rank,
        smallest_retained: if rank == 0 { 0.0 } else { smallest },
    })
}

/// Effect of `H_0 + H_c` at `ψ`, modulo global phase.
#[derive(Clone, Debug)]
pub struct Effect {
    /// `-i(H_0 + H_c) ψ` with its component along `-i ψ` removed.
    pub velocity: CVector,
    /// Norm of the velocity component tangent to the local orbit, excluding
    /// global phase. Zero for an exact compensator.
    pub frame_drift: f64,
    /// `d/dt` of the non-increasing singular values (central differences).
    pub sv_rate: Vec<f64>,
}

pub fn compensator_effect(
    psi: &BipartiteState,
    h0: &CouplingHamiltonian,
    hc: &LocalHamiltonian,
) -> Result<Effect> {
    if psi.dims() != h0.dims() || psi.dims() != hc.dims() {
        return Err(Error::DimensionMismatch("state, coupling and control dims differ".into()));
    }
    let h = h0.dense() + hc.dense();
    let v0 = psi.to_vector();
    let minus_i = Complex64::new(0.0, -1.0);
    let vel = &h * &v0 * minus_i;
    let phase_dir = &v0 * minus_i;
    let along = phase_dir.dotc(&vel).re;
    let velocity = &vel - &phase_dir * Complex64::new(along, 0.0);

    let (map, _, _) = tangent_map(psi);
    let svd = map.svd(true, false);
    let u = svd.u.as_ref().expect("requested");
    let smax = svd.singular_values.max();
    let vs = stack(&vel);
    let mut proj = nalgebra::DVector::<f64>::zeros(vs.len());
    for k in 0..svd.singular_values.len() {
        if smax > 0.0 && svd.singular_values[k] > PINV_CUTOFF * smax {
            proj += u.column(k) * u.column(k).dot(&vs);
        }
    }
    proj -= stack(&phase_dir) * along;
    let frame_drift = proj.norm();

    let prop = HermitianPropagator::new(&h);
    let step = 1e-5;
    let (d1, d2) = psi.dims();
    let plus = BipartiteState::from_vector(d1, d2, &prop.apply(step, &v0))?;
    let minus = BipartiteState::from_vector(d1, d2, &prop.apply(-step, &v0))?;
    let sv_rate = singular_values(&plus)
        .iter()
        .zip(singular_values(&minus))
        .map(|(a, b)| (a - b) / (2.0 * step))
        .collect();
    Ok(Effect {
        velocity,
        frame_drift,
        sv_rate,
    })
}

/// Outcome of [`check_stabilized`].
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizationReport {
    pub max_drift: f64,
    pub horizon: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Integrates `ψ̇ = -i(H_0 + H_c) ψ` exactly on `[0, T]` and reports the
/// largest deviation of the projected singular values from their initial
/// values over a uniform grid of at least 200 samples.
pub fn check_stabilized(
    psi: &BipartiteState,
    h0: &CouplingHamiltonian,
    hc: &LocalHamiltonian,
    horizon: f64,
    tolerance: f64,
) -> Result<StabilizationReport> {
    if !(horizon.is_finite() && horizon >= 0.0 && tolerance.is_finite()) {
        return Err(Error::NonFinite("horizon or tolerance".into()));
    }
    if psi.dims() != h0.dims() || psi.dims() != hc.dims() {
        return Err(Error::DimensionMismatch("state, coupling and control dims differ".into()));
    }
    let h = h0.dense() + hc.dense();
    let prop = HermitianPropagator::new(&h);
    let (d1, d2) = psi.dims();
    let v0 = psi.to_vector();
    let s0 = singular_values(psi);
    let n = ((horizon / 0.05).ceil() as usize).max(200);
    let mut max_drift: f64 = 0.0;
    for k in 1..=n {
        let t = horizon * k as f64 / n as f64;
        let state = BipartiteState::from_vector(d1, d2, &prop.apply(t, &v0))?;
        let s = singular_values(&state);
        let d = s.iter().zip(&s0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if !d.is_finite() {
            return Err(Error::NonFinite(format!("singular values at t = {t}")));
        }
        max_drift = max_drift.max(d);
    }
    Ok(StabilizationReport {
        max_drift,
        horizon,
        tolerance,
        pass: max_drift <= tolerance,
    })
}
