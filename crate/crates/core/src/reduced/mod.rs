//! Reduced control system on the sphere of singular values.

mod induced;
mod integrate;
mod weyl;

pub use induced::{hat, induced_field, vee, InducedField};
pub use integrate::{
    integrate_reduced, rotation_exp, ControlSchedule, GeneratorFn, ReducedControl,
    ReducedTrajectory, Segment,
};
pub use weyl::{in_chamber, schmidt_angle, weyl_project, weyl_project_with, ChamberOrder};
