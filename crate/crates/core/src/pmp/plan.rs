use std::f64::consts::SQRT_2;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::bipartite::SchmidtVector;
use crate::error::{Error, Result};
use crate::reduced::{in_chamber, ChamberOrder, ControlSchedule, ReducedControl};

/// Constant control `u` held for `duration`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanSegment {
    pub u: [f64; 3],
    pub duration: f64,
}

impl PlanSegment {
    pub fn control(&self) -> Vector3<f64> {
        Vector3::from(self.u)
    }
}

/// Piecewise-constant plan for `σ̇ = u × σ` from the north pole.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PMPPlan {
    pub target: Vec<f64>,
    pub segments: Vec<PlanSegment>,
    pub total_time: f64,
}

impl PMPPlan {
    /// Schedule of rotation payloads for the reduced integrator.
    pub fn schedule(&self) -> Result<ControlSchedule> {
        self.segments.iter().try_fold(ControlSchedule::new(), |s, seg| {
            s.then(seg.duration, ReducedControl::Rotation(seg.control()))
        })
    }

    /// Endpoint reached from `σ_0` by composing the exact rotations.
    pub fn endpoint(&self, sigma0: &Vector3<f64>) -> Vector3<f64> {
        self.segments.iter().fold(*sigma0, |s, seg| {
            let u = seg.control();
            let n = u.norm();
            if n == 0.0 {
                return s;
            }
            let axis = nalgebra::Unit::new_normalize(u);
            nalgebra::Rotation3::from_axis_angle(&axis, n * seg.duration) * s
        })
    }

    /// Durations for a coupling with speed limit `ω⋆`.
    pub fn rescaled(&self, omega_star: f64) -> Result<Self> {
        if !(omega_star.is_finite() && omega_star > 0.0) {
            return Err(Error::Domain(format!("speed limit must be positive, got {omega_star}")));
        }
        let segments: Vec<PlanSegment> = self
            .segments
            .iter()
            .map(|s| PlanSegment {
                u: s.u,
                duration: s.duration / omega_star,
            })
            .collect();
        Ok(Self {
            target: self.target.clone(),
            total_time: segments.iter().map(|s| s.duration).sum(),
            segments,
        })
    }
}

fn chamber_target(tau: &SchmidtVector) -> Result<[f64; 3]> {
    if tau.len() != 3 {
        return Err(Error::DimensionMismatch(format!("target of length {}", tau.len())));
    }
    if !in_chamber(tau.as_slice(), ChamberOrder::Zxy, 1e-9) {
        return Err(Error::Domain(format!(
            "target {:?} is outside the chamber σz ≥ σx ≥ σy ≥ 0",
            tau.as_slice()
        )));
    }
    Ok([tau[0], tau[1], tau[2]])
}

/// Durations `(T_1, T_2)` of the segments `u = (-½, ½, 0)` and `u = (0, 1, 0)`
/// steering the north pole to `τ`.
pub fn north_pole_times(tau: &SchmidtVector) -> Result<(f64, f64)> {
    let [x, y, z] = chamber_target(tau)?;
    // the first segment ends at (y, y, c); both angles via atan2 to stay
    // accurate where the arccos forms are flat
    let c = (1.0 - 2.0 * y * y).max(0.0).sqrt();
    let t1 = SQRT_2 * (SQRT_2 * y).atan2(c);
    let t2 = (c * x - y * z).atan2(y * x + c * z).max(0.0);
    Ok((t1, t2))
}

/// Two-segment plan from `(0, 0, 1)` to `τ`; zero-length segments are dropped.
pub fn synthesize_plan(tau: &SchmidtVector) -> Result<PMPPlan> {
    let (t1, t2) = north_pole_times(tau)?;
    let segments: Vec<PlanSegment> = [([-0.5, 0.5, 0.0], t1), ([0.0, 1.0, 0.0], t2)]
        .into_iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|(u, duration)| PlanSegment { u, duration })
        .collect();
    Ok(PMPPlan {
        target: tau.to_vec(),
        total_time: t1 + t2,
        segments,
    })
}
