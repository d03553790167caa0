use std::f64::consts::FRAC_PI_4;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::schrodinger::{schrodinger_integrate, HamiltonianSchedule, SimulationResult};
use crate::bipartite::{coefficient_matrix, BipartiteState, CouplingHamiltonian, LocalUnitary};
use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix};
use crate::speed::speed_limit_two_qubits;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftDirection {
    /// From `|00⟩` to a maximally entangled state.
    #[default]
    Entangle,
    /// From the maximally entangled state `U (|00⟩ + |11⟩)/√2` to a product state.
    Disentangle,
}

/// Time-optimal two-qubit protocol and its simulation.
#[derive(Clone, Debug)]
pub struct TwoQubitLift {
    pub frame: LocalUnitary,
    pub s3: f64,
    pub omega_star: f64,
    pub duration: f64,
    pub result: SimulationResult,
}

/// Applies the achieving local unitary `U` instantaneously, then
/// `H_0 - s_3 1 ⊗ 1` for `(π/4)/(s_1 + s_2)`. `s_3` is the signed `C'_zz` in
/// the achieving frame.
pub fn lift_two_qubit_protocol(h0: &CouplingHamiltonian, direction: LiftDirection, dt: f64) -> Result<TwoQubitLift> {
    if h0.dims() != (2, 2) {
        return Err(Error::Unsupported("the two-qubit protocol needs two qubits".into()));
    }
    let c = coefficient_matrix(h0).c;
    let c3 = Matrix3::from_fn(|i, j| c[(i, j)]);
    let limit = speed_limit_two_qubits(&c3);
    if limit.omega_star <= 1e-12 {
        return Err(Error::Domain("s_1 + s_2 = 0: the coupling cannot change entanglement".into()));
    }
    let frame = limit.achiever.expect("two-qubit achiever");
    let s3 = limit.frame_coefficients.expect("frame coefficients")[(2, 2)];
    let duration = FRAC_PI_4 / limit.omega_star;
    let start = match direction {
        LiftDirection::Entangle => BipartiteState::product(2, 2, 0, 0)?,
        LiftDirection::Disentangle => BipartiteState::maximally_entangled(2),
    };
    let psi0 = start.apply_local(&frame)?;
    let h = h0.dense() - CMatrix::identity(4, 4) * c64(s3, 0.0);
    let result = schrodinger_integrate(&psi0, &HamiltonianSchedule::constant(h, duration)?, duration, dt)?;
    Ok(TwoQubitLift {
        frame,
        s3,
        omega_star: limit.omega_star,
        duration,
        result,
    })
}
