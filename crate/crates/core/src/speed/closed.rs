use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bipartite::{su2_from_rotation, LocalUnitary};
use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedLimitCase {
    TwoQubit,
    Bosonic,
    FermionicLower,
    FermionicUpper,
    QutritOctahedron,
}

#[derive(Clone, Debug)]
pub struct SpeedLimitResult {
    pub case: SpeedLimitCase,
    pub omega_star: f64,
    pub achiever: Option<LocalUnitary>,
    /// `(R_V, R_W)` for the qubit cases.
    pub rotations: Option<(Matrix3<f64>, Matrix3<f64>)>,
    /// `C' = R_Vᵀ C R_W` in the achieving frame.
    pub frame_coefficients: Option<Matrix3<f64>>,
    /// Achievers of `ω⋆ b` for octahedron points `b` (qutrit case).
    pub vertex_achievers: Vec<(Vector3<f64>, LocalUnitary)>,
}

/// Signed SVD `C = X S Yᵀ` with `X, Y ∈ SO(3)`; `S` is non-negative except
/// possibly its last entry.
pub fn signed_svd(c: &Matrix3<f64>) -> (Matrix3<f64>, Vector3<f64>, Matrix3<f64>) {
    let svd = c.svd(true, true);
    let mut x = svd.u.expect("requested");
    let mut y = svd.v_t.expect("requested").transpose();
    let mut s = svd.singular_values;
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let perm = |m: &Matrix3<f64>| Matrix3::from_fn(|i, j| m[(i, idx[j])]);
    x = perm(&x);
    y = perm(&y);
    s = Vector3::new(s[idx[0]], s[idx[1]], s[idx[2]]);
    if x.determinant() < 0.0 {
        x.column_mut(2).neg_mut();
        s[2] = -s[2];
    }
    if y.determinant() < 0.0 {
        y.column_mut(2).neg_mut();
        s[2] = -s[2];
    }
    (x, s, y)
}

/// `ω⋆ = s_1 + s_2` for a two-qubit coefficient matrix. The achiever puts
/// `C'` in the form `C'_xy = s_1`, `C'_yx = s_2`, `C'_zz = -s_3` (signed).
pub fn speed_limit_two_qubits(c: &Matrix3<f64>) -> SpeedLimitResult {
    let (x, s, y) = signed_svd(c);
    let p2 = Matrix3::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0);
    let rv = x;
    let rw = y * p2;
    let cp = rv.transpose() * c * rw;
    let achiever = LocalUnitary {
        v: su2_from_rotation(&rv),
        w: su2_from_rotation(&rw),
    };
    SpeedLimitResult {
        case: SpeedLimitCase::TwoQubit,
        omega_star: s[0] + s[1],
        achiever: Some(achiever),
        rotations: Some((rv, rw)),
        frame_coefficients: Some(cp),
        vertex_achievers: Vec::new(),
    }
}

/// `ω⋆ = ℓ_1 - ℓ_3` for a symmetric coefficient matrix, realized by `V ⊗ V`
/// with `C'` having diagonal `((ℓ_1+ℓ_3)/2, (ℓ_1+ℓ_3)/2, ℓ_2)`.
pub fn speed_limit_bosonic(c: &Matrix3<f64>) -> Result<SpeedLimitResult> {
    let residual = (c - c.transpose()).abs().max();
    if residual > 1e-10 {
        return Err(Error::NotSymmetric {
            residual,
            tolerance: 1e-10,
        });
    }
    let eig = ((c + c.transpose()) * 0.5).symmetric_eigen();
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let l = [
        eig.eigenvalues[idx[0]],
        eig.eigenvalues[idx[1]],
        eig.eigenvalues[idx[2]],
    ];
    // columns ordered (ℓ1, ℓ3, ℓ2)
    let order = [idx[0], idx[2], idx[1]];
    let mut qp = Matrix3::from_fn(|i, j| eig.eigenvectors[(i, order[j])]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let g = Matrix3::new(h, h, 0.0, h, -h, 0.0, 0.0, 0.0, 1.0);
    if (qp * g.transpose()).determinant() < 0.0 {
        qp.column_mut(2).neg_mut();
    }
    let r = qp * g.transpose();
    let v = su2_from_rotation(&r);
    Ok(SpeedLimitResult {
        case: SpeedLimitCase::Bosonic,
        omega_star: l[0] - l[2],
        achiever: Some(LocalUnitary { v: v.clone(), w: v }),
        rotations: Some((r, r)),
        frame_coefficients: Some(r.transpose() * c * r),
        vertex_achievers: Vec::new(),
    })
}

#[derive(Clone, Debug)]
pub struct FermionicBounds {
    pub lower: f64,
    pub upper: f64,
    /// Single-particle unitary `U` with `U^* diag(ℓ) U` the level-mixed form
    /// carrying the phase needed to realize the lower bound.
    pub achiever: CMatrix,
}

fn ensure_sorted(eigs: &[f64]) -> Result<()> {
    if eigs.windows(2).any(|w| w[0] < w[1]) || eigs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid(format!(
            "eigenvalues must be finite and non-increasing: {eigs:?}"
        )));
    }
    Ok(())
}

/// Lower and upper speed bounds for `A ⊗ A` on two fermionic four-level
/// systems, with `eigs` the non-increasing spectrum of `A`.
pub fn fermionic_speed_bounds(eigs: [f64; 4]) -> Result<FermionicBounds> {
    ensure_sorted(&eigs)?;
    let [l1, l2, l3, l4] = eigs;
    Ok(FermionicBounds {
        lower: 0.25 * (l1 - l3) * (l2 - l4),
        upper: (l1 + l2 - l3 - l4).powi(2) / 16.0,
        achiever: fermionic_mixer() * fermionic_phase(),
    })
}

/// Hadamard mixing of levels (0, 2) and (1, 3).
pub fn fermionic_mixer() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(4, 4);
    for (a, b) in [(0, 2), (1, 3)] {
        m[(a, a)] = c64(h, 0.0);
        m[(a, b)] = c64(h, 0.0);
        m[(b, a)] = c64(h, 0.0);
        m[(b, b)] = c64(-h, 0.0);
    }
    m
}

/// `diag(1, 1, 1, i)`: turns the real mixed form into one with
/// `Im(a_13 a_24) = |a_13 a_24|`.
fn fermionic_phase() -> CMatrix {
    let mut p = CMatrix::identity(4, 4);
    p[(3, 3)] = c64(0.0, 1.0);
    p
}

/// `ω^a = Im(a_13 a_24 - a_14 a_23)` (1-based indices) of a 4x4 matrix.
pub fn fermionic_rate(a: &CMatrix) -> f64 {
    (a[(0, 2)] * a[(1, 3)] - a[(0, 3)] * a[(1, 2)]).im
}

/// Achiever of the lower bound for a concrete `A`: `Q U` with `Q`
/// diagonalizing `A` in non-increasing order.
pub fn fermionic_achiever(a: &CMatrix) -> Result<CMatrix> {
    if a.shape() != (4, 4) {
        return Err(Error::DimensionMismatch(format!("expected 4x4, got {:?}", a.shape())));
    }
    linalg::ensure_hermitian(a, 1e-12)?;
    let (_, q) = linalg::hermitian_eigen(a);
    Ok(q * fermionic_mixer() * fermionic_phase())
}

/// Regular octahedron `O_3 = conv{±e_i}` with its face barycenters.
#[derive(Clone, Debug)]
pub struct OctahedronCatalog {
    pub vertices: Vec<Vector3<f64>>,
    pub edges: Vec<Vector3<f64>>,
    pub facets: Vec<Vector3<f64>>,
}

pub fn octahedron_faces() -> OctahedronCatalog {
    let mut vertices = Vec::new();
    for i in 0..3 {
        for s in [1.0, -1.0] {
            let mut v = Vector3::zeros();
            v[i] = s;
            vertices.push(v);
        }
    }
    let mut edges = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            for si in [1.0, -1.0] {
                for sj in [1.0, -1.0] {
                    let mut v = Vector3::zeros();
                    v[i] = si * 0.5;
                    v[j] = sj * 0.5;
                    edges.push(v);
                }
            }
        }
    }
    let mut facets = Vec::new();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                facets.push(Vector3::new(sx, sy, sz) / 3.0);
            }
        }
    }
    OctahedronCatalog {
        vertices,
        edges,
        facets,
    }
}

fn equidistant_spectrum(m: &CMatrix, name: &str) -> Result<[f64; 3]> {
    if m.shape() != (3, 3) {
        return Err(Error::DimensionMismatch(format!(
            "{name} must be 3x3, got {:?}",
            m.shape()
        )));
    }
    linalg::ensure_hermitian(m, 1e-12)?;
    let (l, _) = linalg::hermitian_eigen(m);
    let gap = ((l[0] - l[1]) - (l[1] - l[2])).abs();
    if gap > 1e-10 {
        return Err(Error::Unsupported(format!(
            "{name} has non-equidistant spectrum {l:?}; the octahedral bound does not apply"
        )));
    }
    Ok([l[0], l[1], l[2]])
}

/// Pair `(i, j)` whose generator entry `H_U[i][j]` is the rotation component.
const AXIS_PAIRS: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];

fn pair_x(d: usize, (i, j): (usize, usize)) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = c64(1.0, 0.0);
    m[(j, i)] = c64(1.0, 0.0);
    m
}

fn pair_y(d: usize, (i, j): (usize, usize)) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = c64(0.0, -1.0);
    m[(j, i)] = c64(0.0, 1.0);
    m
}

/// Octahedral speed limit `ω⋆ = (ℓ_1-ℓ_3)(A)(ℓ_1-ℓ_3)(B)/4` for `A ⊗ B` on
/// two qutrits with equidistant spectra. The achiever realizes the edge
/// barycenter `ω⋆ (-½, ½, 0)`; `vertex_achievers` cover `±ω⋆ e_i`.
pub fn qutrit_speed_limit(a: &CMatrix, b: &CMatrix) -> Result<SpeedLimitResult> {
    let la = equidistant_spectrum(a, "A")?;
    let lb = equidistant_spectrum(b, "B")?;
    let ha = 0.5 * (la[0] - la[2]);
    let hb = 0.5 * (lb[0] - lb[2]);
    let omega_star = ha * hb;
    let id = CMatrix::identity(3, 3);
    let shift = |m: f64| &id * c64(m, 0.0);
    let frame = |at: &CMatrix, bt: &CMatrix| -> Result<LocalUnitary> {
        Ok(LocalUnitary {
            v: linalg::unitary_with_target(a, at, 1e-9)?,
            w: linalg::unitary_with_target(b, bt, 1e-9)?,
        })
    };

    let mut vertex_achievers = Vec::new();
    for (axis, pair) in AXIS_PAIRS.iter().enumerate() {
        for sign in [1.0, -1.0] {
            // ω_axis = -s·ha·hb for B̃ = ℓ2 + s·hb·Y_pair
            let at = shift(la[1]) + pair_x(3, *pair) * c64(ha, 0.0);
            let bt = shift(lb[1]) + pair_y(3, *pair) * c64(-sign * hb, 0.0);
            let mut target = Vector3::zeros();
            target[axis] = sign;
            vertex_achievers.push((target, frame(&at, &bt)?));
        }
    }

    let (k, l) = qutrit_edge_targets();
    let at = shift(la[1]) + k * c64(ha, 0.0);
    let bt = shift(lb[1]) + l * c64(hb, 0.0);
    let achiever = frame(&at, &bt)?;

    Ok(SpeedLimitResult {
        case: SpeedLimitCase::QutritOctahedron,
        omega_star,
        achiever: Some(achiever),
        rotations: None,
        frame_coefficients: None,
        vertex_achievers,
    })
}

/// Target forms `(Ã, B̃)` of the edge achiever for spectra `(1, 0, -1)`.
pub fn qutrit_edge_targets() -> (CMatrix, CMatrix) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = CMatrix::zeros(3, 3);
    let mut l = CMatrix::zeros(3, 3);
    for (i, j) in [(0, 2), (1, 2)] {
        k[(i, j)] = Complex64::new(s, 0.0);
        k[(j, i)] = Complex64::new(s, 0.0);
        l[(i, j)] = Complex64::new(0.0, -s);
        l[(j, i)] = Complex64::new(0.0, s);
    }
    (k, l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::{coupling_from_coefficients, CouplingHamiltonian};
    use crate::linalg::RMatrix;
    use crate::reduced::induced_field;

    fn to_r(c: &Matrix3<f64>) -> RMatrix {
        RMatrix::from_fn(3, 3, |i, j| c[(i, j)])
    }

    #[test]
    fn isotropic_exchange_and_zero() {
        assert!((speed_limit_two_qubits(&Matrix3::identity()).omega_star - 2.0).abs() < 1e-12);
        assert_eq!(speed_limit_two_qubits(&Matrix3::zeros()).omega_star, 0.0);
    }

    #[test]
    fn two_qubit_achiever_attains_bound() {
        let c = Matrix3::new(0.3, -1.2, 0.5, 0.7, 0.1, -0.4, 0.2, 0.9, -0.6);
        let r = speed_limit_two_qubits(&c);
        let h = coupling_from_coefficients(&to_r(&c), 2, 2).unwrap();
        let f = induced_field(&h, r.achiever.as_ref().unwrap()).unwrap();
        assert!((f.angular_velocity().unwrap() - r.omega_star).abs() < 1e-9);
        let cp = r.frame_coefficients.unwrap();
        let s = c.singular_values();
        assert!((cp[(0, 1)].abs() - s.max()).abs() < 1e-12);
        assert!((cp[(2, 2)].abs() - s.min()).abs() < 1e-12);
    }

    #[test]
    fn bosonic_examples() {
        let c = Matrix3::from_diagonal(&Vector3::new(1.0, 0.0, -1.0));
        let r = speed_limit_bosonic(&c).unwrap();
        assert!((r.omega_star - 2.0).abs() < 1e-12);
        let h = coupling_from_coefficients(&to_r(&c), 2, 2).unwrap();
        let f = induced_field(&h, r.achiever.as_ref().unwrap()).unwrap();
        assert!((f.angular_velocity().unwrap() - 2.0).abs() < 1e-9);
        assert!(speed_limit_bosonic(&Matrix3::identity()).unwrap().omega_star.abs() < 1e-12);
        assert!(speed_limit_bosonic(&Matrix3::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn fermionic_formulas() {
        let b = fermionic_speed_bounds([1.0, 1.0, -1.0, -1.0]).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-15 && (b.upper - 1.0).abs() < 1e-15);
        let b = fermionic_speed_bounds([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(b.lower.abs() < 1e-15 && (b.upper - 1.0 / 16.0).abs() < 1e-15);
        let b = fermionic_speed_bounds([3.0, 2.0, 1.0, 0.0]).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-15 && (b.upper - 1.0).abs() < 1e-15);
        assert!(fermionic_speed_bounds([0.0, 1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn fermionic_achiever_realizes_lower_bound() {
        let l = [2.0, 0.5, -0.3, -1.7];
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            l.iter().map(|x| c64(*x, 0.0)).collect(),
        ));
        let u = fermionic_speed_bounds(l).unwrap().achiever;
        let at = u.adjoint() * &a * &u;
        let expected = 0.25 * (l[0] - l[2]) * (l[1] - l[3]);
        assert!((fermionic_rate(&at) - expected).abs() < 1e-12);
        // the real mixed form alone has zero rate
        let m = fermionic_mixer();
        assert!(fermionic_rate(&(m.adjoint() * &a * &m)).abs() < 1e-12);
    }

    #[test]
    fn octahedron_counts_and_norms() {
        let o = octahedron_faces();
        assert_eq!((o.vertices.len(), o.edges.len(), o.facets.len()), (6, 12, 8));
        for b in o.vertices.iter().chain(&o.edges).chain(&o.facets) {
            assert!((b.abs().sum() - 1.0).abs() < 1e-15);
        }
        for f in &o.facets {
            let cube = f * 3.0;
            assert!(cube.iter().all(|x| (x.abs() - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn qutrit_examples() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c64(1.0, 0.0),
            c64(0.0, 0.0),
            c64(-1.0, 0.0),
        ]));
        let r = qutrit_speed_limit(&d, &d).unwrap();
        assert!((r.omega_star - 1.0).abs() < 1e-15);
        let h = CouplingHamiltonian::new(3, 3, vec![(d.clone(), d.clone())]).unwrap();
        let w = induced_field(&h, r.achiever.as_ref().unwrap())
            .unwrap()
            .rotation_vector()
            .unwrap();
        assert!((w - Vector3::new(-0.5, 0.5, 0.0)).norm() < 1e-9);
        for (target, u) in &r.vertex_achievers {
            let w = induced_field(&h, u).unwrap().rotation_vector().unwrap();
            assert!((w - target).norm() < 1e-9, "{w:?} vs {target:?}");
        }
        let d2 = &d * c64(2.0, 0.0);
        assert!((qutrit_speed_limit(&d2, &d).unwrap().omega_star - 2.0).abs() < 1e-15);
        let bad = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c64(1.0, 0.0),
            c64(0.5, 0.0),
            c64(-1.0, 0.0),
        ]));
        assert!(matches!(qutrit_speed_limit(&bad, &d), Err(Error::Unsupported(_))));
    }
}
