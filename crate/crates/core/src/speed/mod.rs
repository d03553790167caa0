//! Closed-form speed limits of the reduced dynamics and a brute-force
//! tightness oracle over local unitaries.

mod brute;
mod closed;

pub use brute::{brute_force_speed, objective_value, BruteForceResult, Budget, Objective};
pub use closed::{
    fermionic_achiever, fermionic_mixer, fermionic_rate, fermionic_speed_bounds, octahedron_faces,
    qutrit_edge_targets, qutrit_speed_limit, signed_svd, speed_limit_bosonic,
    speed_limit_two_qubits, FermionicBounds, OctahedronCatalog, SpeedLimitCase, SpeedLimitResult,
};
