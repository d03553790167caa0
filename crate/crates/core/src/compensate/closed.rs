use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use nalgebra::{Matrix3, Vector3};

use super::LocalHamiltonian;
use crate::bipartite::{basis, su2_from_rotation, LocalUnitary};
use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix};
use crate::speed::signed_svd;

/// Distance at which an angle counts as sitting on a pole.
pub const POLE_TOLERANCE: f64 = 1e-9;
/// Coefficients below this leave a pole removable.
const COEFFICIENT_TOLERANCE: f64 = 1e-12;

/// Distance from `x` to the lattice `offset + k·period`.
fn lattice_distance(x: f64, offset: f64, period: f64) -> f64 {
    let r = (x - offset).rem_euclid(period);
    r.min(period - r)
}

fn check_pole(chi: f64, offset: f64, period: f64, coefficient: f64, what: &'static str) -> Result<()> {
    if coefficient.abs() > COEFFICIENT_TOLERANCE && lattice_distance(chi, offset, period) < POLE_TOLERANCE {
        return Err(Error::SingularFormula {
            what,
            at: chi,
            tolerance: POLE_TOLERANCE,
        });
    }
    Ok(())
}

fn check_angle(chi: f64) -> Result<()> {
    if !chi.is_finite() {
        return Err(Error::NonFinite("state angle".into()));
    }
    Ok(())
}

fn frame_back(frame: &LocalUnitary, e: &CMatrix, f: &CMatrix) -> Result<LocalHamiltonian> {
    let v = frame.v();
    let w = frame.w();
    if v.nrows() != e.nrows() || w.nrows() != f.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "frame {:?} for local Hamiltonian of dims ({}, {})",
            frame.dims(),
            e.nrows(),
            f.nrows()
        )));
    }
    LocalHamiltonian::new(
        crate::linalg::hermitize(&(v * e * v.adjoint())),
        crate::linalg::hermitize(&(w * f * w.adjoint())),
    )
}

fn two_by_two(d0: f64, off: num_complex::Complex64, d1: f64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c64(d0, 0.0), off, off.conj(), c64(d1, 0.0)])
}

/// `(1 - sin x)/cos x`, finite at `sin x = 1`.
fn ratio_minus(x: f64) -> f64 {
    x.cos() / (1.0 + x.sin())
}

/// `(1 + sin x)/cos x`, finite at `sin x = -1`.
fn ratio_plus(x: f64) -> f64 {
    x.cos() / (1.0 - x.sin())
}

/// Diagonal two-qubit state `cos χ |00⟩ + sin χ |11⟩` moved by `frame`.
pub fn qubit_state(chi: f64, frame: &LocalUnitary) -> Result<crate::bipartite::BipartiteState> {
    crate::bipartite::BipartiteState::diagonal(2, 2, &[chi.cos(), chi.sin()])?.apply_local(frame)
}

/// Compensating Hamiltonian for two qubits at `V ⊗ W (cos χ|00⟩ + sin χ|11⟩)`,
/// with `C' = R_Vᵀ C R_W`. Errors within [`POLE_TOLERANCE`] of `kπ/4`.
pub fn comp_qubits_closed_form(cp: &Matrix3<f64>, chi: f64, frame: &LocalUnitary) -> Result<LocalHamiltonian> {
    check_angle(chi)?;
    if lattice_distance(chi, 0.0, FRAC_PI_4) < POLE_TOLERANCE {
        return Err(Error::SingularFormula {
            what: "two-qubit compensator",
            at: chi,
            tolerance: POLE_TOLERANCE,
        });
    }
    let c = |i: usize, j: usize| cp[(i, j)];
    let (s2, sec2) = ((2.0 * chi).sin(), 1.0 / (2.0 * chi).cos());
    let top = 0.5 * (c(2, 2) + (c(0, 0) - c(1, 1)) * chi.tan());
    let bottom = 0.5 * (c(2, 2) + (c(0, 0) - c(1, 1)) / chi.tan());
    let off = |xz: f64, yz: f64, zx: f64, zy: f64| (c64(xz, -yz) - c64(zx, zy) * s2) * sec2;
    let e = -two_by_two(top, off(c(0, 2), c(1, 2), c(2, 0), c(2, 1)), bottom);
    let f = -two_by_two(top, off(c(2, 0), c(2, 1), c(0, 2), c(1, 2)), bottom);
    frame_back(frame, &e, &f)
}

fn ensure_two_qubit_frame(frame: &LocalUnitary) -> Result<()> {
    if frame.dims() != (2, 2) {
        return Err(Error::DimensionMismatch("two-qubit frame expected".into()));
    }
    Ok(())
}

/// Stabilizer for diagonal `C'`. Finite at `χ = π/4`; diverges towards product
/// states unless `C'_xx = C'_yy`.
pub fn stabilizer_qubits_diagonal(cp: &Matrix3<f64>, chi: f64, frame: &LocalUnitary) -> Result<LocalHamiltonian> {
    check_angle(chi)?;
    ensure_two_qubit_frame(frame)?;
    let off = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| cp[(i, j)].abs())
        .fold(0.0, f64::max);
    if off > 1e-10 {
        return Err(Error::Domain(format!("C' must be diagonal (off-diagonal {off:.3e})")));
    }
    let delta = cp[(0, 0)] - cp[(1, 1)];
    check_pole(chi, 0.0, FRAC_PI_2, delta, "diagonal stabilizer")?;
    let (id_coef, z_coef) = if delta.abs() > COEFFICIENT_TOLERANCE {
        let x = 2.0 * chi;
        (-0.5 * (cp[(2, 2)] + delta / x.sin()), 0.5 * delta * x.cos() / x.sin())
    } else {
        (-0.5 * cp[(2, 2)], 0.0)
    };
    let e = CMatrix::identity(2, 2) * c64(id_coef, 0.0) + basis::pauli_z() * c64(z_coef, 0.0);
    frame_back(frame, &e, &e)
}

/// Stabilizer for `C'_xx = C'_yy`, bounded near product states.
pub fn stabilizer_qubits_product_safe(
    cp: &Matrix3<f64>,
    chi: f64,
    frame: &LocalUnitary,
) -> Result<LocalHamiltonian> {
    check_angle(chi)?;
    ensure_two_qubit_frame(frame)?;
    let gap = (cp[(0, 0)] - cp[(1, 1)]).abs();
    if gap > 1e-10 {
        return Err(Error::Domain(format!("C'_xx and C'_yy differ by {gap:.3e}")));
    }
    let (yz, zy) = (cp[(1, 2)], cp[(2, 1)]);
    check_pole(chi, FRAC_PI_4, FRAC_PI_2, yz.abs() + zy.abs(), "product-safe stabilizer")?;
    let x = 2.0 * chi;
    let coef = |a: f64, b: f64| {
        if a.abs() + b.abs() > COEFFICIENT_TOLERANCE {
            -(a + b * x.sin()) / x.cos()
        } else {
            0.0
        }
    };
    let id = CMatrix::identity(2, 2) * c64(-0.5 * cp[(2, 2)], 0.0);
    let e = &id + basis::pauli_y() * c64(coef(yz, zy), 0.0);
    let f = &id + basis::pauli_y() * c64(coef(zy, yz), 0.0);
    frame_back(frame, &e, &f)
}

/// Frame with diagonal `C' = diag(s_1, s_2, ±s_3)`.
pub fn diagonal_frame(c: &Matrix3<f64>) -> (LocalUnitary, Matrix3<f64>) {
    let (x, _, y) = signed_svd(c);
    let cp = x.transpose() * c * y;
    let frame = LocalUnitary {
        v: su2_from_rotation(&x),
        w: su2_from_rotation(&y),
    };
    (frame, cp)
}

/// Frame with `C'_xx = C'_yy`, `C'_xz = C'_zx = 0` and `C'_xy = C'_yx = 0`,
/// so the induced field vanishes and the product-safe stabilizer applies.
pub fn product_safe_frame(c: &Matrix3<f64>) -> (LocalUnitary, Matrix3<f64>) {
    let (x, s, y) = signed_svd(c);
    let p = Matrix3::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0);
    let (a, b) = (s[1], s[0]);
    let cos_phi = if b.abs() > 0.0 { (a / b).clamp(-1.0, 1.0) } else { 1.0 };
    let phi = cos_phi.acos();
    let rv = x * p;
    let rw = y * p * crate::bipartite::axis_angle(&Vector3::x(), phi);
    let cp = rv.transpose() * c * rw;
    let frame = LocalUnitary {
        v: su2_from_rotation(&rv),
        w: su2_from_rotation(&rw),
    };
    (frame, cp)
}

/// Symmetric compensator `E ⊗ 1 + 1 ⊗ E` for two bosonic qubits at
/// `V ⊗ V (cos χ|00⟩ + sin χ|11⟩)`.
pub fn comp_bosonic(cp: &Matrix3<f64>, chi: f64, frame: &CMatrix) -> Result<LocalHamiltonian> {
    check_angle(chi)?;
    let asym = (cp - cp.transpose()).abs().max();
    if asym > 1e-10 {
        return Err(Error::NotSymmetric {
            residual: asym,
            tolerance: 1e-10,
        });
    }
    let frame = LocalUnitary::symmetric(frame.clone())?;
    ensure_two_qubit_frame(&frame)?;
    let (xz, yz, zz) = (cp[(0, 2)], cp[(1, 2)], cp[(2, 2)]);
    let delta = cp[(0, 0)] - cp[(1, 1)];
    check_pole(chi, FRAC_PI_2, std::f64::consts::PI, delta, "bosonic compensator (tan)")?;
    check_pole(chi, 0.0, std::f64::consts::PI, delta, "bosonic compensator (cot)")?;
    check_pole(chi, FRAC_PI_4, std::f64::consts::PI, yz, "bosonic compensator (sec)")?;
    check_pole(chi, -FRAC_PI_4, std::f64::consts::PI, xz, "bosonic compensator (sec)")?;
    let x = 2.0 * chi;
    let term = |coef: f64, ratio: fn(f64) -> f64| if coef.abs() > COEFFICIENT_TOLERANCE { coef * ratio(x) } else { 0.0 };
    let off = c64(term(xz, ratio_minus), -term(yz, ratio_plus));
    let (top, bottom) = if delta.abs() > COEFFICIENT_TOLERANCE {
        (0.5 * (zz + delta * chi.tan()), 0.5 * (zz + delta / chi.tan()))
    } else {
        (0.5 * zz, 0.5 * zz)
    };
    let e = -two_by_two(top, off, bottom);
    frame_back(&frame, &e, &e)
}

fn sorted_levels(eigs: [f64; 4]) -> Result<[f64; 4]> {
    crate::linalg::ensure_finite(eigs, "eigenvalues")?;
    if eigs.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Invalid("eigenvalues must be non-increasing".into()));
    }
    Ok(eigs)
}

/// `s_ab = (|ab⟩ - |ba⟩)/√2` for two four-level systems.
fn antisymmetric_pair(a: usize, b: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(4, 4);
    m[(a, b)] = c64(s, 0.0);
    m[(b, a)] = c64(-s, 0.0);
    m
}

/// Fermionic state `V ⊗ V (cos χ |s_12⟩ + sin χ |s_34⟩)`.
pub fn fermionic_state(chi: f64, frame: &CMatrix) -> Result<crate::bipartite::BipartiteState> {
    let m = antisymmetric_pair(0, 1) * c64(chi.cos(), 0.0) + antisymmetric_pair(2, 3) * c64(chi.sin(), 0.0);
    crate::bipartite::BipartiteState::new(m)?.apply_local(&LocalUnitary::symmetric(frame.clone())?)
}

/// Compensator for `A ⊗ A` with spectrum `ℓ` in the level-mixed frame, i.e.
/// `V^* A V = ½[[ℓ_1+ℓ_3, 0, ℓ_1-ℓ_3, 0], ...]`, at [`fermionic_state`].
pub fn comp_fermionic(eigs: [f64; 4], chi: f64, frame: &CMatrix) -> Result<LocalHamiltonian> {
    check_angle(chi)?;
    let [l1, l2, l3, l4] = sorted_levels(eigs)?;
    let diag_coef = (l1 - l3) * (l2 - l4) / 8.0;
    check_pole(chi, 0.0, FRAC_PI_2, diag_coef, "fermionic compensator")?;
    let (t, ct) = if diag_coef.abs() > COEFFICIENT_TOLERANCE {
        (diag_coef * chi.tan(), diag_coef / chi.tan())
    } else {
        (0.0, 0.0)
    };
    let p = (l1 - l3) * (l2 + l4) / 4.0;
    let q = (l1 + l3) * (l2 - l4) / 4.0;
    let shift = (l1 + l3) * (l2 + l4) / 8.0;
    #[rustfmt::skip]
    let tilde = CMatrix::from_row_slice(4, 4, &[
        c64(t, 0.0), c64(0.0, 0.0), c64(p, 0.0), c64(0.0, 0.0),
        c64(0.0, 0.0), c64(t, 0.0), c64(0.0, 0.0), c64(q, 0.0),
        c64(p, 0.0), c64(0.0, 0.0), c64(ct, 0.0), c64(0.0, 0.0),
        c64(0.0, 0.0), c64(q, 0.0), c64(0.0, 0.0), c64(ct, 0.0),
    ]);
    let e = -tilde - CMatrix::identity(4, 4) * c64(shift, 0.0);
    frame_back(&LocalUnitary::symmetric(frame.clone())?, &e, &e)
}

/// `χ`-independent compensator in a frame diagonalizing `A`.
pub fn fermionic_diagonal_stabilizer(eigs: [f64; 4], frame: &CMatrix) -> Result<LocalHamiltonian> {
    let [l1, l2, l3, l4] = sorted_levels(eigs)?;
    let (a, b) = (l1 * l2 / 2.0, l3 * l4 / 2.0);
    let e = -CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(a, 0.0), c64(a, 0.0), c64(b, 0.0), c64(b, 0.0)]));
    frame_back(&LocalUnitary::symmetric(frame.clone())?, &e, &e)
}

/// `P'_y`: Pauli-y embedded on the first two qutrit levels.
pub fn qutrit_py() -> CMatrix {
    let mut m = CMatrix::zeros(3, 3);
    m[(0, 1)] = c64(0.0, -1.0);
    m[(1, 0)] = c64(0.0, 1.0);
    m
}

/// Coefficient `σ_z / (2√2 ε)` of the detour compensator.
pub fn qutrit_detour_coefficient(epsilon: f64, sigma_z: f64) -> Result<f64> {
    if !(epsilon.is_finite() && sigma_z.is_finite()) {
        return Err(Error::NonFinite("detour parameters".into()));
    }
    if epsilon <= 0.0 {
        return Err(Error::Domain(format!("detour offset must be positive, got {epsilon}")));
    }
    Ok(sigma_z / (2.0 * SQRT_2 * epsilon))
}

/// Time-dependent form `√(1-ε²) cos(t/√2) / (2√2 ε)` of the detour coefficient.
pub fn qutrit_detour_coefficient_at(epsilon: f64, t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) {
        return qutrit_detour_coefficient(epsilon, 1.0).and(Err(Error::Domain(format!(
            "detour offset must lie in (0, 1), got {epsilon}"
        ))));
    }
    qutrit_detour_coefficient(epsilon, (1.0 - epsilon * epsilon).sqrt() * (t / SQRT_2).cos())
}

/// Detour compensator `V^*EV = W^*FW = (σ_z/(2√2 ε)) P'_y`.
pub fn comp_qutrit_detour(epsilon: f64, sigma_z: f64, frame: &LocalUnitary) -> Result<LocalHamiltonian> {
    let k = qutrit_detour_coefficient(epsilon, sigma_z)?;
    let e = qutrit_py() * c64(k, 0.0);
    frame_back(frame, &e, &e)
}

/// Stabilizer `V^*EV = W^*FW = diag(½, 0, ½)` in the frame where
/// `A = B = diag(1, 0, -1)`.
pub fn qutrit_stabilizer(frame: &LocalUnitary) -> Result<LocalHamiltonian> {
    let e = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(0.5, 0.0), c64(0.0, 0.0), c64(0.5, 0.0)]));
    frame_back(frame, &e, &e)
}
