use nalgebra::DVector;
use num_complex::Complex64;

use super::{BipartiteState, LocalUnitary, SchmidtVector};
use crate::error::Result;
use crate::linalg::{self, CMatrix};

/// Schmidt decomposition `ψ = (V ⊗ W) Σ σ_i |ii⟩`.
///
/// Singular values come out non-negative and non-increasing; ties keep their
/// SVD order (stable sort). Column phases: each column `v_i` of `V` is rotated
/// so that its first entry of largest modulus is real and positive, and the
/// opposite phase is absorbed into `w_i`, which leaves `v_i w_iᵀ` unchanged.
pub fn schmidt_decompose(state: &BipartiteState) -> Result<(LocalUnitary, SchmidtVector)> {
    let (d1, d2) = state.dims();
    let k = d1.min(d2);
    let svd = state.amplitudes().clone().svd_unordered(true, true);
    let u = svd.u.expect("left vectors requested");
    let vt = svd.v_t.expect("right vectors requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let mut vcols = CMatrix::zeros(d1, k);
    let mut wcols = CMatrix::zeros(d2, k);
    let mut sigma = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        sigma.push(svd.singular_values[src]);
        let mut x = u.column(src).into_owned();
        // M = X S Y^* = V S W^T, so column i of W is row i of Y^*, transposed.
        let mut y = vt.row(src).transpose();
        let phase = leading_phase(x.as_slice());
        x *= phase.conj();
        y *= phase;
        vcols.set_column(dst, &x);
        wcols.set_column(dst, &y);
    }

    let v = linalg::complete_unitary(&vcols);
    let w = linalg::complete_unitary(&wcols);
    let sigma = SchmidtVector::from_unchecked(DVector::from_vec(sigma));
    Ok((LocalUnitary { v, w }, sigma))
}

/// Unit-modulus phase of the first entry of maximal modulus.
fn leading_phase(x: &[Complex64]) -> Complex64 {
    let mut best = 0;
    for (i, z) in x.iter().enumerate() {
        if z.norm() > x[best].norm() + 1e-14 {
            best = i;
        }
    }
    let z = x[best];
    if z.norm() > 0.0 {
        z / z.norm()
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// Recomposes `(V ⊗ W) Σ σ_i |ii⟩`.
pub fn schmidt_recompose(u: &LocalUnitary, sigma: &SchmidtVector) -> Result<BipartiteState> {
    let (d1, d2) = u.dims();
    let diag = BipartiteState::diagonal(d1, d2, sigma.as_slice())?;
    diag.apply_local(u)
}

/// Singular values only, sorted non-increasing.
pub fn singular_values(state: &BipartiteState) -> Vec<f64> {
    let mut s: Vec<f64> = state
        .amplitudes()
        .singular_values_unordered()
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, unitary_residual};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn product_state_has_unit_schmidt_vector() {
        let psi = BipartiteState::product(3, 3, 2, 2).unwrap();
        let (u, s) = schmidt_decompose(&psi).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-14 && s[1].abs() < 1e-14 && s[2].abs() < 1e-14);
        // first columns select level 2 in both factors
        assert!((u.v()[(2, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((u.w()[(2, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn phase_rule_makes_leading_entry_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = BipartiteState::normalized(haar_unitary(3, &mut rng)
            .columns(0, 2)
            .into_owned())
        .unwrap();
        let (u, _) = schmidt_decompose(&psi).unwrap();
        for j in 0..2 {
            let col = u.v().column(j);
            let top = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let z = col.iter().find(|z| (z.norm() - top).abs() < 1e-14).unwrap();
            assert!(z.im.abs() < 1e-14 && z.re > 0.0);
        }
        assert!(unitary_residual(u.v()) < 1e-12);
        assert!(unitary_residual(u.w()) < 1e-12);
    }

    #[test]
    fn rectangular_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for (d1, d2) in [(2, 3), (3, 2), (4, 2), (2, 4)] {
            let m = haar_unitary(d1 * d2, &mut rng).column(0).into_owned();
            let psi = BipartiteState::from_vector(d1, d2, &m).unwrap();
            let (u, s) = schmidt_decompose(&psi).unwrap();
            let back = schmidt_recompose(&u, &s).unwrap();
            assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-12);
        }
    }
}
