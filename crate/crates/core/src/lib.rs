//! Time-optimal control and stabilization of entanglement in closed bipartite
//! quantum systems under fast local unitary control.
//!
//! The crate is organised around the reduced control system on the sphere of
//! singular values:
//!
//! - [`bipartite`]: states, couplings, Schmidt decomposition, coefficient matrices.
//! - [`reduced`]: induced vector fields, Weyl chamber, reduced trajectories.
//! - [`speed`]: closed-form speed limits and a brute-force tightness oracle.
//! - [`compensate`]: compensating and stabilizing local Hamiltonians.
//! - [`pmp`]: maximum-principle planner for coupled qutrits.
//! - [`sim`]: full Schrödinger simulation and the ε-detour protocol.

pub mod bipartite;
pub mod compensate;
pub mod error;
pub mod io;
pub mod linalg;
pub mod pmp;
pub mod reduced;
pub mod sim;
pub mod speed;

pub use error::{Error, Result};
