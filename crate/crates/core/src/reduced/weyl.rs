use serde::{Deserialize, Serialize};

use crate::bipartite::SchmidtVector;
use crate::error::{Error, Result};

/// Ordering convention for the Weyl chamber. For `dmin = 3` the components
/// are read as `(σ_x, σ_y, σ_z)`; other dimensions always use
/// [`ChamberOrder::NonIncreasing`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChamberOrder {
    /// `σ_1 ≥ σ_2 ≥ ... ≥ 0`.
    NonIncreasing,
    /// `σ_z ≥ σ_x ≥ σ_y ≥ 0`.
    #[default]
    Zxy,
    /// `σ_z ≥ σ_y ≥ σ_x ≥ 0`.
    Zyx,
}

/// Maps `σ` into the chamber by taking absolute values and reordering.
pub fn weyl_project_with(sigma: &[f64], order: ChamberOrder) -> Vec<f64> {
    let mut a: Vec<f64> = sigma.iter().map(|x| x.abs()).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    if a.len() != 3 {
        return a;
    }
    match order {
        ChamberOrder::NonIncreasing => a,
        ChamberOrder::Zxy => vec![a[1], a[2], a[0]],
        ChamberOrder::Zyx => vec![a[2], a[1], a[0]],
    }
}

/// [`weyl_project_with`] under the default ordering.
pub fn weyl_project(sigma: &SchmidtVector) -> SchmidtVector {
    SchmidtVector::from_unchecked(nalgebra::DVector::from_vec(weyl_project_with(
        sigma.as_slice(),
        ChamberOrder::default(),
    )))
}

pub fn in_chamber(sigma: &[f64], order: ChamberOrder, tolerance: f64) -> bool {
    let p = weyl_project_with(sigma, order);
    sigma.iter().zip(&p).all(|(a, b)| (a - b).abs() <= tolerance)
}

/// Schmidt angle `χ ∈ [0, π/4]` with `(cos χ, sin χ)` the projected `σ`.
pub fn schmidt_angle(sigma: &SchmidtVector) -> Result<f64> {
    if sigma.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "Schmidt angle needs dmin = 2, got {}",
            sigma.len()
        )));
    }
    let p = weyl_project_with(sigma.as_slice(), ChamberOrder::NonIncreasing);
    Ok(p[1].atan2(p[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn sign_flip_and_reorder() {
        let s = SchmidtVector::new(vec![0.0, 0.0, -1.0]).unwrap();
        assert_eq!(weyl_project(&s).to_vec(), vec![0.0, 0.0, 1.0]);
        let p = weyl_project_with(&[0.6, -0.8, 0.0], ChamberOrder::Zxy);
        assert_eq!(p, vec![0.6, 0.0, 0.8]);
        let p = weyl_project_with(&[0.6, -0.8, 0.0], ChamberOrder::Zyx);
        assert_eq!(p, vec![0.0, 0.6, 0.8]);
    }

    #[test]
    fn symmetric_point_is_fixed() {
        let r = 1.0 / 3f64.sqrt();
        let s = SchmidtVector::new(vec![r, r, r]).unwrap();
        assert_eq!(weyl_project(&s), s);
    }

    #[test]
    fn angles() {
        let a = schmidt_angle(&SchmidtVector::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(a, 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = schmidt_angle(&SchmidtVector::new(vec![h, h]).unwrap()).unwrap();
        assert!((a - FRAC_PI_4).abs() < 1e-15);
        let a = schmidt_angle(&SchmidtVector::new(vec![-0.6, 0.8]).unwrap()).unwrap();
        assert!((a - (0.6f64 / 0.8).atan()).abs() < 1e-15);
        assert!(schmidt_angle(&SchmidtVector::new(vec![1.0, 0.0, 0.0]).unwrap()).is_err());
    }
}
