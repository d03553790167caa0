use std::f64::consts::SQRT_2;

use bipartite_control::bipartite::{coefficient_matrix, schmidt_decompose, CouplingHamiltonian, SchmidtVector};
use bipartite_control::compensate::{compensating_general, compensator_effect, diagonal_frame};
use bipartite_control::io::{self, HamiltonianJson, ScheduleSegmentJson};
use bipartite_control::linalg::c64;
use bipartite_control::pmp::{synthesize_plan, PMPPlan};
use bipartite_control::reduced::{integrate_reduced, weyl_project};
use bipartite_control::sim::{epsilon_protocol, lift_two_qubit_protocol, t_star, DetourMode, LiftDirection, QutritSetup};
use bipartite_control::speed::{qutrit_speed_limit, speed_limit_two_qubits};
use nalgebra::Matrix3;

const ISING: &str = r#"{"dims":[2,2],"terms":[{"A":[[1,0],[0,0],[0,0],[-1,0]],"B":[[1,0],[0,0],[0,0],[-1,0]]}]}"#;

fn coefficients(h: &CouplingHamiltonian) -> Matrix3<f64> {
    let c = coefficient_matrix(h).c;
    Matrix3::from_fn(|i, j| c[(i, j)])
}

#[test]
fn ising_json_to_bell_state_and_hold() {
    let h: HamiltonianJson = serde_json::from_str(ISING).unwrap();
    let h = h.to_coupling().unwrap();
    let c = coefficients(&h);
    assert!((speed_limit_two_qubits(&c).omega_star - 1.0).abs() < 1e-12);

    let lift = lift_two_qubit_protocol(&h, LiftDirection::Entangle, 1e-3).unwrap();
    let bell = lift.result.last().clone();
    let s = lift.result.last_singular_values();
    assert!(s.iter().all(|x| (x - 1.0 / SQRT_2).abs() < 1e-10));

    // degenerate singular values: the instantaneous compensator still cancels
    // the local drift but is flagged as irregular
    let (_, sigma) = schmidt_decompose(&bell).unwrap();
    assert!((sigma[0] - sigma[1]).abs() < 1e-10);
    let comp = compensating_general(&bell, &h).unwrap();
    assert!(!comp.regular);
    let effect = compensator_effect(&bell, &h, &comp.hamiltonian).unwrap();
    assert!(effect.frame_drift < 1e-10);

    let csv = io::simulation_csv(None, &lift.result);
    assert!(csv.starts_with("t,sigma1,sigma2\n"));
}

#[test]
fn entangle_then_disentangle() {
    let c = Matrix3::new(0.4, 0.1, 0.0, -0.2, 0.9, 0.3, 0.0, 0.1, -0.6);
    let h = bipartite_control::bipartite::coupling_from_coefficients(
        &bipartite_control::linalg::RMatrix::from_fn(3, 3, |i, j| c[(i, j)]),
        2,
        2,
    )
    .unwrap();
    let up = lift_two_qubit_protocol(&h, LiftDirection::Entangle, 1e-2).unwrap();
    let down = lift_two_qubit_protocol(&h, LiftDirection::Disentangle, 1e-2).unwrap();
    assert!((up.duration - down.duration).abs() < 1e-15);
    let s = down.result.last_singular_values();
    assert!((s[0] - 1.0).abs() < 1e-10);
    let (frame, _) = diagonal_frame(&c);
    assert_eq!(frame.dims(), (2, 2));
}

#[test]
fn qutrit_plan_scaled_by_the_coupling() {
    let d = bipartite_control::linalg::CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        c64(2.0, 0.0),
        c64(0.0, 0.0),
        c64(-2.0, 0.0),
    ]));
    let limit = qutrit_speed_limit(&d, &d).unwrap();
    assert!((limit.omega_star - 4.0).abs() < 1e-12);

    let s = 1.0 / 3f64.sqrt();
    let plan = synthesize_plan(&SchmidtVector::new(vec![s, s, s]).unwrap()).unwrap();
    let scaled = plan.rescaled(limit.omega_star).unwrap();
    assert!((scaled.total_time - t_star() / 4.0).abs() < 1e-12);

    let text = serde_json::to_string(&plan).unwrap();
    let back: PMPPlan = serde_json::from_str(&text).unwrap();
    assert_eq!(back, plan);

    let traj = integrate_reduced(&SchmidtVector::new(vec![0.0, 0.0, 1.0]).unwrap(), &plan.schedule().unwrap(), plan.total_time, 0.05)
        .unwrap();
    assert!(io::trajectory_csv(None, &traj).lines().count() > 2);
}

#[test]
fn projected_targets_plan_cleanly() {
    let raw = SchmidtVector::new(vec![0.8, -0.6, 0.0]).unwrap();
    let tau = weyl_project(&raw);
    let plan = synthesize_plan(&tau).unwrap();
    let end = plan.endpoint(&nalgebra::Vector3::z());
    assert!((0..3).all(|i| (end[i] - tau[i]).abs() < 1e-12));
}

#[test]
fn schedule_json_drives_the_reduced_system() {
    let text = r#"[{"duration":1.0,"rotation":[-0.5,0.5,0.0]},{"duration":0.0,"rotation":[0,1,0]}]"#;
    let segs: Vec<ScheduleSegmentJson> = serde_json::from_str(text).unwrap();
    let sched = io::schedule_from_json(&segs).unwrap();
    let traj = integrate_reduced(&SchmidtVector::new(vec![0.0, 0.0, 1.0]).unwrap(), &sched, 1.0, 0.1).unwrap();
    let end = traj.last();
    let y = (1.0f64 / SQRT_2).sin() / SQRT_2;
    assert!((end[0] - y).abs() < 1e-12 && (end[1] - y).abs() < 1e-12);
}

#[test]
fn detour_reaches_close_to_maximal_entanglement() {
    let setup = QutritSetup::standard();
    let r = epsilon_protocol(&setup, 0.02, DetourMode::TimeDependent, t_star(), 1e-3).unwrap();
    let s = r.last_singular_values();
    let m = 1.0 / 3f64.sqrt();
    let dist = s.iter().map(|x| (x - m).powi(2)).sum::<f64>().sqrt();
    assert!(dist < 0.03, "{s:?}");
    assert!(r.states.iter().all(|p| (p.norm() - 1.0).abs() < 1e-9));
}
