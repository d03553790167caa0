//! Local Hamiltonians that cancel the orbit-tangent drift of a coupling, and
//! closed forms for the qubit, bosonic, fermionic and qutrit settings.

mod closed;
mod general;

pub use closed::{
    comp_bosonic, comp_fermionic, comp_qubits_closed_form, comp_qutrit_detour, diagonal_frame,
    fermionic_diagonal_stabilizer, fermionic_state, product_safe_frame, qubit_state, qutrit_detour_coefficient,
    qutrit_detour_coefficient_at, qutrit_py, qutrit_stabilizer, stabilizer_qubits_diagonal,
    stabilizer_qubits_product_safe, POLE_TOLERANCE,
};
pub use general::{
    check_stabilized, compensating_general, compensator_effect, Effect, GeneralCompensator, LocalHamiltonian,
    StabilizationReport, CONDITION_LIMIT, PINV_CUTOFF,
};
