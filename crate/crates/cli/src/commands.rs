use std::f64::consts::{PI, SQRT_2};

use bipartite_control::bipartite::{
    coefficient_matrix, schmidt_decompose, BipartiteState, CouplingHamiltonian, LocalUnitary, SchmidtVector,
};
use bipartite_control::compensate::{
    check_stabilized, diagonal_frame, fermionic_diagonal_stabilizer, fermionic_state, product_safe_frame, qubit_state,
    qutrit_stabilizer, stabilizer_qubits_diagonal, stabilizer_qubits_product_safe, LocalHamiltonian,
    StabilizationReport,
};
use bipartite_control::io::{
    self, ComplexMatrixJson, SpeedLimitReportJson, StabilizerReportJson,
};
use bipartite_control::linalg::{self, c64, CMatrix};
use bipartite_control::pmp::{synthesize_plan, PMPPlan};
use bipartite_control::reduced::{
    in_chamber, integrate_reduced, weyl_project_with, ChamberOrder, ControlSchedule, ReducedControl,
};
use bipartite_control::sim::{
    cost_c, epsilon_protocol, lift_two_qubit_protocol, schrodinger_integrate, sweep_cost, t_star, transformed_cost,
    HamiltonianSchedule, LiftDirection, QutritSetup,
};
use bipartite_control::speed::{
    brute_force_speed, fermionic_speed_bounds, qutrit_speed_limit, speed_limit_bosonic, speed_limit_two_qubits,
    Budget, Objective,
};
use nalgebra::{Matrix3, Vector3};
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::support::*;

pub struct Context {
    pub seed: u64,
    pub jobs: usize,
}

fn coefficients3(h: &CouplingHamiltonian) -> Matrix3<f64> {
    let c = coefficient_matrix(h).c;
    Matrix3::from_fn(|i, j| c[(i, j)])
}

fn is_zero(h: &CouplingHamiltonian) -> bool {
    h.dense().iter().all(|z| z.norm() == 0.0)
}

fn single_term(h: &CouplingHamiltonian) -> CliResult<(CMatrix, CMatrix)> {
    match h.terms() {
        [(a, b)] => Ok((a.clone(), b.clone())),
        _ => Err(CliError::usage("this case needs a single product term A ⊗ B")),
    }
}

fn resolve_case(case: CaseArg, h: &CouplingHamiltonian) -> CliResult<CaseArg> {
    let dims = h.dims();
    let resolved = match case {
        CaseArg::Auto => match dims {
            (2, 2) => CaseArg::TwoQubit,
            (3, 3) => CaseArg::Qutrit,
            (4, 4) => CaseArg::Fermionic,
            _ => return Err(CliError::usage(format!("no speed limit is available for dimensions {dims:?}"))),
        },
        other => other,
    };
    let expected = match resolved {
        CaseArg::TwoQubit | CaseArg::Bosonic => (2, 2),
        CaseArg::Qutrit => (3, 3),
        _ => (4, 4),
    };
    if dims != expected {
        return Err(CliError::usage(format!("case {resolved:?} needs dimensions {expected:?}, got {dims:?}")));
    }
    Ok(resolved)
}

fn case_name(case: CaseArg) -> &'static str {
    match case {
        CaseArg::Auto => "auto",
        CaseArg::TwoQubit => "two-qubit",
        CaseArg::Bosonic => "bosonic",
        CaseArg::Fermionic => "fermionic",
        CaseArg::Qutrit => "qutrit",
    }
}

fn fermionic_levels(h: &CouplingHamiltonian) -> CliResult<[f64; 4]> {
    let (a, b) = single_term(h)?;
    if linalg::max_abs_diff(&a, &b) > 1e-12 {
        return Err(CliError::usage("the fermionic case needs a coupling A ⊗ A"));
    }
    let (l, _) = linalg::hermitian_eigen(&a);
    Ok([l[0], l[1], l[2], l[3]])
}

pub fn speed_limit(args: SpeedLimitArgs, ctx: &Context) -> CliResult<()> {
    let input = require(args.hamiltonian.clone(), "hamiltonian")?;
    check_output(args.out.as_ref())?;
    let h = load_hamiltonian(&input)?;
    let case = resolve_case(args.case.unwrap_or(CaseArg::Auto), &h)?;
    let defaults = Budget::default();
    let budget = Budget {
        restarts: args.restarts.unwrap_or(defaults.restarts),
        samples: args.samples.unwrap_or(defaults.samples),
        iterations: args.iterations.unwrap_or(defaults.iterations),
        seed: ctx.seed,
        jobs: ctx.jobs,
    };
    if budget.restarts == 0 || budget.samples == 0 {
        return Err(CliError::usage("--restarts and --samples must be positive"));
    }
    let header = HeaderBuilder::new("speed-limit", &args, ctx.seed)?.input(Some(&input))?.finish();

    let (omega_star, bounds, objective, symmetric) = if is_zero(&h) {
        (0.0, None, None, false)
    } else {
        match case {
            CaseArg::TwoQubit => (
                speed_limit_two_qubits(&coefficients3(&h)).omega_star,
                None,
                Some(Objective::AngularVelocity),
                false,
            ),
            CaseArg::Bosonic => {
                if h.swap_residual()? > 1e-10 {
                    return Err(CliError::usage("the bosonic case needs a swap-symmetric coupling"));
                }
                (
                    speed_limit_bosonic(&coefficients3(&h))?.omega_star,
                    None,
                    Some(Objective::AngularVelocity),
                    true,
                )
            }
            CaseArg::Qutrit => {
                let (a, b) = single_term(&h)?;
                (qutrit_speed_limit(&a, &b)?.omega_star, None, Some(Objective::OneNorm), false)
            }
            CaseArg::Fermionic => {
                let b = fermionic_speed_bounds(fermionic_levels(&h)?)?;
                (b.lower, Some([b.lower, b.upper]), Some(Objective::Fermionic), true)
            }
            CaseArg::Auto => unreachable!("resolved above"),
        }
    };
    let brute = match objective {
        Some(obj) if !args.no_brute_force => Some(brute_force_speed(&h, obj, symmetric, &budget)?.value),
        None if !args.no_brute_force => Some(0.0),
        _ => None,
    };
    let report = SpeedLimitReportJson {
        case: case_name(case).into(),
        omega_star,
        bounds,
        brute_force: brute,
        gap: brute.map(|b| omega_star - b),
        budget: brute.map(|_| budget),
        seed: ctx.seed,
    };
    emit(args.out.as_ref(), &json_report(&header, &report)?)
}

fn qutrit_omega_star(h: &CouplingHamiltonian) -> CliResult<f64> {
    if h.dims() != (3, 3) {
        return Err(CliError::usage("planning needs a qutrit coupling"));
    }
    let (a, b) = single_term(h)?;
    Ok(qutrit_speed_limit(&a, &b)?.omega_star)
}

pub fn plan(args: PlanArgs, ctx: &Context) -> CliResult<()> {
    let raw = require(args.target.clone(), "target")?;
    if raw.len() != 3 {
        return Err(CliError::usage(format!("--target needs three values, got {}", raw.len())));
    }
    for x in &raw {
        check_finite(*x, "target")?;
    }
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(CliError::usage(format!("--target must have unit norm, got {norm}")));
    }
    let dt = check_positive(args.dt.unwrap_or(0.01), "dt")?;
    check_output(args.out.as_ref())?;
    check_output(args.trajectory.as_ref())?;
    let omega_star = match (&args.omega_star, &args.hamiltonian) {
        (Some(w), _) => check_positive(*w, "omega-star")?,
        (None, Some(input)) => qutrit_omega_star(&load_hamiltonian(input)?)?,
        (None, None) => return Err(CliError::usage("plan needs --hamiltonian or --omega-star")),
    };
    if omega_star <= 0.0 {
        return Err(CliError::usage("the coupling has zero speed limit"));
    }
    let header = HeaderBuilder::new("plan", &args, ctx.seed)?.input(args.hamiltonian.as_ref())?.finish();

    let unit: Vec<f64> = raw.iter().map(|x| x / norm).collect();
    let target = if in_chamber(&unit, ChamberOrder::Zxy, 1e-9) {
        unit
    } else {
        let p = weyl_project_with(&unit, ChamberOrder::Zxy);
        eprintln!("warning: target {unit:?} projected into the Weyl chamber as {p:?}");
        p
    };
    let tau = SchmidtVector::normalized(target)?;
    let plan = synthesize_plan(&tau)?;
    let physical = plan.rescaled(omega_star)?;
    let end = plan.endpoint(&Vector3::z());
    let error = (0..3).map(|i| (end[i] - tau[i]).abs()).fold(0.0, f64::max);

    let traj = match &args.trajectory {
        Some(_) => {
            let sched = physical.segments.iter().try_fold(ControlSchedule::new(), |s, seg| {
                s.then(seg.duration, ReducedControl::Rotation(seg.control() * omega_star))
            })?;
            let north = SchmidtVector::new(vec![0.0, 0.0, 1.0])?;
            Some(io::trajectory_csv(Some(&header), &integrate_reduced(&north, &sched, physical.total_time, dt)?))
        }
        None => None,
    };
    let times: Vec<f64> = physical.segments.iter().map(|s| s.duration).collect();
    eprintln!(
        "segments {:?}, total time {}, endpoint error {:.3e}",
        times,
        physical.total_time + 0.0,
        error
    );
    #[derive(Serialize)]
    struct PlanReport<'a> {
        #[serde(flatten)]
        plan: &'a PMPPlan,
        omega_star: f64,
        endpoint_error: f64,
    }
    let text = json_report(
        &header,
        &PlanReport {
            plan: &physical,
            omega_star,
            endpoint_error: error,
        },
    )?;
    if let (Some(p), Some(csv)) = (&args.trajectory, &traj) {
        io::write_atomic(p, csv)?;
    }
    emit(args.out.as_ref(), &text)
}

pub fn lift(args: LiftArgs, ctx: &Context) -> CliResult<()> {
    let case = require(args.case, "case")?;
    let dt = check_positive(args.dt.unwrap_or(1e-3), "dt")?;
    check_output(args.out.as_ref())?;
    let header = HeaderBuilder::new("lift", &args, ctx.seed)?.input(args.coupling.as_ref())?.finish();
    let run = match case {
        LiftCase::TwoQubit => {
            let h = load_hamiltonian(&require(args.coupling.clone(), "coupling")?)?;
            let direction: LiftDirection = args.direction.unwrap_or(DirectionArg::Entangle).into();
            let lift = lift_two_qubit_protocol(&h, direction, dt)?;
            eprintln!("speed limit {}, duration {}", lift.omega_star, lift.duration);
            lift.result
        }
        LiftCase::Qutrit => {
            let eps = check_positive(require(args.epsilon, "epsilon")?, "epsilon")?;
            let horizon = check_finite(args.horizon.unwrap_or_else(t_star), "horizon")?;
            let setup = match &args.coupling {
                Some(input) => {
                    let (a, b) = single_term(&load_hamiltonian(input)?)?;
                    QutritSetup::new(a, b)?
                }
                None => QutritSetup::standard(),
            };
            epsilon_protocol(&setup, eps, args.mode.unwrap_or(ModeArg::TimeDependent).into(), horizon, dt)?
        }
    };
    eprintln!("final singular values {:?}", run.last_singular_values());
    emit(args.out.as_ref(), &io::simulation_csv(Some(&header), &run))
}

pub fn simulate(args: SimulateArgs, ctx: &Context) -> CliResult<()> {
    let h_in = require(args.hamiltonian.clone(), "hamiltonian")?;
    let s_in = require(args.state.clone(), "state")?;
    let horizon = check_finite(require(args.horizon, "horizon")?, "horizon")?;
    if horizon < 0.0 {
        return Err(CliError::usage("--horizon must be non-negative"));
    }
    let dt = check_positive(args.dt.unwrap_or(1e-2), "dt")?;
    check_output(args.out.as_ref())?;
    let h0 = load_hamiltonian(&h_in)?;
    let psi = load_state(&s_in)?;
    if psi.dims() != h0.dims() {
        return Err(CliError::usage(format!("state {:?} and Hamiltonian {:?} differ in dimensions", psi.dims(), h0.dims())));
    }
    let (d1, d2) = h0.dims();
    let control = match &args.control {
        Some(c) => LocalHamiltonian::new(c.e.to_matrix(d1)?, c.f.to_matrix(d2)?)?,
        None => LocalHamiltonian::zero(d1, d2),
    };
    let header = HeaderBuilder::new("simulate", &args, ctx.seed)?
        .input(Some(&h_in))?
        .input(Some(&s_in))?
        .finish();
    let h = h0.dense() + control.dense();
    let run = schrodinger_integrate(&psi, &HamiltonianSchedule::constant(h, horizon)?, horizon, dt)?;
    emit(args.out.as_ref(), &io::simulation_csv(Some(&header), &run))
}

pub fn sweep(args: SweepArgs, ctx: &Context) -> CliResult<()> {
    let min = check_positive(require(args.min, "min")?, "min")?;
    let max = check_positive(require(args.max, "max")?, "max")?;
    let n = require(args.n, "n")?;
    if !(min < max && max < 1.0) {
        return Err(CliError::usage(format!("need 0 < min < max < 1, got [{min}, {max}]")));
    }
    if n < 2 {
        return Err(CliError::usage("--n must be at least 2"));
    }
    check_output(args.out.as_ref())?;
    let header = HeaderBuilder::new("sweep-eps", &args, ctx.seed)?.finish();
    let curve = sweep_cost(min, max, n, ctx.jobs)?;
    emit(args.out.as_ref(), &io::cost_curve_csv(Some(&header), &curve))
}

pub fn cost(args: CostArgs, ctx: &Context) -> CliResult<()> {
    let eps = check_positive(require(args.epsilon, "epsilon")?, "epsilon")?;
    if eps >= 1.0 {
        return Err(CliError::usage(format!("--epsilon must lie in (0, 1), got {eps}")));
    }
    check_output(args.out.as_ref())?;
    let header = HeaderBuilder::new("cost", &args, ctx.seed)?.finish();
    let x = 1.0 / (2.0 * SQRT_2 * eps);
    let report = json!({
        "epsilon": eps,
        "cost": cost_c(eps)?,
        "x": x,
        "transformed_cost": transformed_cost(x)?,
    });
    emit(args.out.as_ref(), &json_report(&header, &report)?)
}

fn matrix_diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(values.iter().map(|&x| c64(x, 0.0)).collect()))
}

pub fn stabilize(args: StabilizeArgs, ctx: &Context) -> CliResult<()> {
    let case = require(args.case, "case")?;
    let (default_horizon, default_tol) = match case {
        StabilizeCase::Qutrit => (20.0, 1e-8),
        _ => (10.0, 1e-6),
    };
    let horizon = check_positive(args.horizon.unwrap_or(default_horizon), "horizon")?;
    let tolerance = check_positive(args.tolerance.unwrap_or(default_tol), "tolerance")?;
    let chi = check_finite(args.chi.unwrap_or(PI / 8.0), "chi")?;
    check_output(args.out.as_ref())?;
    let header = HeaderBuilder::new("stabilize", &args, ctx.seed)?.input(args.coupling.as_ref())?.finish();

    let two_qubit = |variant: StabilizeCase| -> CliResult<(BipartiteState, CouplingHamiltonian, LocalHamiltonian)> {
        let h = load_hamiltonian(&require(args.coupling.clone(), "coupling")?)?;
        if h.dims() != (2, 2) {
            return Err(CliError::usage("two-qubit stabilizers need a 2 x 2 coupling"));
        }
        let c = coefficients3(&h);
        let (frame, cp) = match variant {
            StabilizeCase::TwoQubitDiagonal => diagonal_frame(&c),
            _ => product_safe_frame(&c),
        };
        let hc = match variant {
            StabilizeCase::TwoQubitDiagonal => stabilizer_qubits_diagonal(&cp, chi, &frame)?,
            _ => stabilizer_qubits_product_safe(&cp, chi, &frame)?,
        };
        Ok((qubit_state(chi, &frame)?, h, hc))
    };

    let (psi, h, hc, label) = match case {
        StabilizeCase::Qutrit => {
            let d = matrix_diag(&[1.0, 0.0, -1.0]);
            let h = CouplingHamiltonian::new(3, 3, vec![(d.clone(), d)])?;
            let frame = LocalUnitary::identity(3, 3);
            let hc = qutrit_stabilizer(&frame)?;
            (BipartiteState::maximally_entangled(3), h, hc, json!("(|11> + |22> + |33>)/sqrt(3)"))
        }
        StabilizeCase::Fermionic => {
            let eigs = args.eigs.clone().unwrap_or_else(|| vec![1.3, 0.4, -0.2, -0.9]);
            let eigs: [f64; 4] = eigs
                .try_into()
                .map_err(|_| CliError::usage("--eigs needs four values"))?;
            let a = matrix_diag(&eigs);
            let h = CouplingHamiltonian::new(4, 4, vec![(a.clone(), a)])?;
            let frame = CMatrix::identity(4, 4);
            let hc = fermionic_diagonal_stabilizer(eigs, &frame)?;
            (fermionic_state(chi, &frame)?, h, hc, json!(chi))
        }
        variant => {
            let (psi, h, hc) = two_qubit(variant)?;
            (psi, h, hc, json!(chi))
        }
    };
    let StabilizationReport { max_drift, pass, .. } = check_stabilized(&psi, &h, &hc, horizon, tolerance)?;
    let name = match case {
        StabilizeCase::Qutrit => "qutrit",
        StabilizeCase::TwoQubitDiagonal => "two-qubit-diagonal",
        StabilizeCase::TwoQubitProductSafe => "two-qubit-product-safe",
        StabilizeCase::Fermionic => "fermionic",
    };
    let report = StabilizerReportJson {
        case: name.into(),
        chi_or_state: label,
        max_drift,
        horizon,
        tolerance,
        pass,
    };
    emit(args.out.as_ref(), &json_report(&header, &report)?)?;
    if pass {
        Ok(())
    } else {
        Err(CliError {
            code: EXIT_FAILURE,
            message: format!("drift {max_drift:.3e} exceeds tolerance {tolerance:.3e}"),
        })
    }
}

fn real_rows(m: &bipartite_control::linalg::RMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn decompose(args: DecomposeArgs, ctx: &Context) -> CliResult<()> {
    check_output(args.out.as_ref())?;
    let header = HeaderBuilder::new("decompose", &args, ctx.seed)?
        .input(args.state.as_ref())?
        .input(args.hamiltonian.as_ref())?
        .finish();
    let report = match (&args.state, &args.hamiltonian) {
        (Some(s), None) => {
            let psi = load_state(s)?;
            let (u, sigma) = schmidt_decompose(&psi)?;
            json!({
                "dims": [psi.dims().0, psi.dims().1],
                "sigma": sigma.to_vec(),
                "weyl": weyl_project_with(sigma.as_slice(), ChamberOrder::default()),
                "V": ComplexMatrixJson::from_matrix(u.v()),
                "W": ComplexMatrixJson::from_matrix(u.w()),
            })
        }
        (None, Some(h)) => {
            let h = load_hamiltonian(h)?;
            let c = coefficient_matrix(&h);
            json!({
                "dims": [h.dims().0, h.dims().1],
                "coefficients": real_rows(&c.c),
                "E_local": ComplexMatrixJson::from_matrix(&c.e_loc),
                "F_local": ComplexMatrixJson::from_matrix(&c.f_loc),
                "trace": c.trace,
            })
        }
        _ => return Err(CliError::usage("decompose needs exactly one of --state and --hamiltonian")),
    };
    emit(args.out.as_ref(), &json_report(&header, &report)?)
}

