//! States, couplings, Schmidt decomposition and operator-basis machinery.

pub mod basis;
mod coefficients;
mod schmidt;
mod su2;
mod types;

pub use coefficients::{
    coefficient_matrix, coupling_from_coefficients, diagonalize_coupling, symmetric_diagonalize,
    CoefficientMatrix, ProductTerm, SymmetricTerm,
};
pub use schmidt::{schmidt_decompose, schmidt_recompose, singular_values};
pub use su2::{axis_angle, pauli_vector, rotation_from_su2, su2_from_rotation};
pub use types::{BipartiteState, CouplingHamiltonian, LocalUnitary, SchmidtVector, Tolerances};
