//! Covering map `SU(2) → SO(3)`, `(R_V)_ij = ½ tr(P_i V P_j V^*)`, and a lift
//! back to `SU(2)` through the unit quaternion of a rotation.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use super::basis::paulis;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Rotation `R` with `V (a·P) V^* = (R a)·P`. Global phase drops out.
pub fn rotation_from_su2(v: &CMatrix) -> Result<Matrix3<f64>> {
    if v.shape() != (2, 2) {
        return Err(Error::DimensionMismatch(format!(
            "expected 2x2 unitary, got {:?}",
            v.shape()
        )));
    }
    linalg::ensure_unitary(v, 1e-12)?;
    let p = paulis();
    let vd = v.adjoint();
    let conj: Vec<CMatrix> = p.iter().map(|pj| v * pj * &vd).collect();
    Ok(Matrix3::from_fn(|i, j| {
        linalg::trace_product(&p[i], &conj[j]) / 2.0
    }))
}

/// An `SU(2)` element `exp(-iθ n·P/2)` covering the rotation `r`.
pub fn su2_from_rotation(r: &Matrix3<f64>) -> CMatrix {
    let q = quaternion(r);
    let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(w, -z),
            Complex64::new(-y, -x),
            Complex64::new(y, -x),
            Complex64::new(w, z),
        ],
    )
}

/// Unit quaternion `(w, x, y, z)` of a rotation matrix (Shepperd's method).
fn quaternion(r: &Matrix3<f64>) -> [f64; 4] {
    let tr = r.trace();
    let cands = [tr, r[(0, 0)], r[(1, 1)], r[(2, 2)]];
    let mut k = 0;
    for i in 1..4 {
        if cands[i] > cands[k] {
            k = i;
        }
    }
    let q = match k {
        0 => {
            let s = (1.0 + tr).sqrt() * 2.0;
            [
                s / 4.0,
                (r[(2, 1)] - r[(1, 2)]) / s,
                (r[(0, 2)] - r[(2, 0)]) / s,
                (r[(1, 0)] - r[(0, 1)]) / s,
            ]
        }
        1 => {
            let s = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
            [
                (r[(2, 1)] - r[(1, 2)]) / s,
                s / 4.0,
                (r[(0, 1)] + r[(1, 0)]) / s,
                (r[(0, 2)] + r[(2, 0)]) / s,
            ]
        }
        2 => {
            let s = (1.0 - r[(0, 0)] + r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
            [
                (r[(0, 2)] - r[(2, 0)]) / s,
                (r[(0, 1)] + r[(1, 0)]) / s,
                s / 4.0,
                (r[(1, 2)] + r[(2, 1)]) / s,
            ]
        }
        _ => {
            let s = (1.0 - r[(0, 0)] - r[(1, 1)] + r[(2, 2)]).sqrt() * 2.0;
            [
                (r[(1, 0)] - r[(0, 1)]) / s,
                (r[(0, 2)] + r[(2, 0)]) / s,
                (r[(1, 2)] + r[(2, 1)]) / s,
                s / 4.0,
            ]
        }
    };
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    [q[0] / n, q[1] / n, q[2] / n, q[3] / n]
}

/// `a·P`.
pub fn pauli_vector(a: &Vector3<f64>) -> CMatrix {
    let p = paulis();
    &p[0] * Complex64::new(a[0], 0.0) + &p[1] * Complex64::new(a[1], 0.0) + &p[2] * Complex64::new(a[2], 0.0)
}

/// Rotation by `theta` about the unit axis `n` (Rodrigues).
pub fn axis_angle(n: &Vector3<f64>, theta: f64) -> Matrix3<f64> {
    let k = Matrix3::new(0.0, -n[2], n[1], n[2], 0.0, -n[0], -n[1], n[0], 0.0);
    Matrix3::identity() + k * theta.sin() + k * k * (1.0 - theta.cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_hermitian, haar_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_maps_to_identity() {
        let r = rotation_from_su2(&CMatrix::identity(2, 2)).unwrap();
        assert!((r - Matrix3::identity()).abs().max() < 1e-15);
    }

    #[test]
    fn z_rotation_by_quarter_turn() {
        let theta = std::f64::consts::FRAC_PI_2;
        let v = expm_hermitian(&paulis()[2], theta / 2.0);
        let r = rotation_from_su2(&v).unwrap();
        let expected = axis_angle(&Vector3::z(), theta);
        assert!((r - expected).abs().max() < 1e-12);
    }

    #[test]
    fn lift_covers_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let v = haar_unitary(2, &mut rng);
            let r = rotation_from_su2(&v).unwrap();
            let lifted = su2_from_rotation(&r);
            assert!(linalg::unitary_residual(&lifted) < 1e-12);
            let back = rotation_from_su2(&lifted).unwrap();
            assert!((back - r).abs().max() < 1e-12);
        }
    }

    #[test]
    fn lift_of_half_turn() {
        let r = axis_angle(&Vector3::new(1.0, 1.0, 0.0).normalize(), std::f64::consts::PI);
        let back = rotation_from_su2(&su2_from_rotation(&r)).unwrap();
        assert!((back - r).abs().max() < 1e-12);
    }

    #[test]
    fn rejects_non_unitary() {
        let m = CMatrix::identity(2, 2) * Complex64::new(2.0, 0.0);
        assert!(rotation_from_su2(&m).is_err());
    }
}
