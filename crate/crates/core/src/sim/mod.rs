//! Schrödinger integration of the full bipartite system and the lifted
//! protocols built on it.

mod detour;
mod lift;
mod schrodinger;

pub use detour::{
    cost_c, cost_c_with, detour_path, drift_only_singular_values, epsilon_minima, epsilon_minima_with,
    epsilon_protocol, fit_minima, locate_minimum, sweep_cost, t_star, transformed_cost, CostCurve, DetourMode,
    LocatedMinimum, MinimaFit, QutritSetup, MINIMA_DX, MINIMA_X0,
};
pub use lift::{lift_two_qubit_protocol, LiftDirection, TwoQubitLift};
pub use schrodinger::{
    schrodinger_integrate, weyl_projected, HamiltonianSchedule, HamiltonianSegment, Modulation, SegmentHamiltonian,
    SimulationResult,
};
