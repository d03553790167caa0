//! Time-optimal planning on the Schmidt sphere with the octahedral control
//! set `‖u‖_1 ≤ 1` (normalized so that `ω⋆ = 1`).

mod adjoint;
mod plan;

pub use adjoint::{
    classify_trajectory, first_integrals, integrate_adjoint, optimal_control_set, optimal_control_set_with_tolerance,
    switch_duration, AdjointPath, AdjointState, ControlArc, ControlFace, FaceKind, SelectionPolicy, TrajectoryClass,
    TIE_TOLERANCE,
};
pub use plan::{north_pole_times, synthesize_plan, PMPPlan, PlanSegment};
