use std::f64::consts::SQRT_2;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::schrodinger::{
    magnus_step, schrodinger_integrate, weyl_projected, HamiltonianSchedule, SegmentHamiltonian, SimulationResult,
};
use crate::bipartite::{BipartiteState, CouplingHamiltonian, LocalUnitary};
use crate::compensate::qutrit_py;
use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, HermitianPropagator};
use crate::speed::qutrit_edge_targets;

/// `x_0` of the minima catalog `ε_k = 1 / (2√2 (x_0 + k Δx))`.
pub const MINIMA_X0: f64 = 0.0048;
/// `Δx` of the minima catalog.
pub const MINIMA_DX: f64 = 2.3252;

/// Time `√2 arccos(1/√3)` to reach the maximally entangled state.
pub fn t_star() -> f64 {
    SQRT_2 * (1.0 / 3f64.sqrt()).acos()
}

/// Coupling `A ⊗ B` with spectra `(1, 0, -1)` and a frame `U = V ⊗ W` with
/// `V^* A V` and `W^* B W` equal to the edge targets.
#[derive(Clone, Debug)]
pub struct QutritSetup {
    pub a: CMatrix,
    pub b: CMatrix,
    pub frame: LocalUnitary,
}

impl QutritSetup {
    /// `A = B = diag(1, 0, -1)`.
    pub fn standard() -> Self {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)]));
        Self::new(d.clone(), d).expect("standard spectra")
    }

    pub fn new(a: CMatrix, b: CMatrix) -> Result<Self> {
        if a.shape() != (3, 3) || b.shape() != (3, 3) {
            return Err(Error::DimensionMismatch("qutrit factors must be 3 x 3".into()));
        }
        linalg::ensure_hermitian(&a, 1e-12)?;
        linalg::ensure_hermitian(&b, 1e-12)?;
        let (k, l) = qutrit_edge_targets();
        let v = linalg::unitary_with_target(&a, &k, 1e-9)
            .map_err(|_| Error::Unsupported("A must have spectrum (1, 0, -1)".into()))?;
        let w = linalg::unitary_with_target(&b, &l, 1e-9)
            .map_err(|_| Error::Unsupported("B must have spectrum (1, 0, -1)".into()))?;
        Ok(Self {
            a,
            b,
            frame: LocalUnitary::new(v, w)?,
        })
    }

    pub fn coupling(&self) -> CouplingHamiltonian {
        CouplingHamiltonian::new(3, 3, vec![(self.a.clone(), self.b.clone())]).expect("validated factors")
    }

    /// `E ⊗ 1 + 1 ⊗ F` with `V^*EV = W^*FW = P'_y`.
    pub fn detour_direction(&self) -> CMatrix {
        let py = qutrit_py();
        let e = self.frame.v() * &py * self.frame.v().adjoint();
        let f = self.frame.w() * &py * self.frame.w().adjoint();
        let id = CMatrix::identity(3, 3);
        linalg::hermitize(&(linalg::kron(&e, &id) + linalg::kron(&id, &f)))
    }

    /// `U (Σ σ_i |ii⟩)` for amplitudes given in the frame.
    pub fn framed_state(&self, diagonal: [f64; 3]) -> Result<BipartiteState> {
        BipartiteState::diagonal(3, 3, &diagonal)?.apply_local(&self.frame)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetourMode {
    /// Coefficient `σ_z / (2√2 ε)` evaluated on the current state.
    StateDependent,
    /// Coefficient `√(1-ε²) cos(t/√2) / (2√2 ε)`.
    TimeDependent,
    /// Coefficient `1 / (2√2 ε)`, starting at `U|33⟩`.
    Constant,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

/// Reduced path `((r sin(t/√2) + ε)/√2, (r sin(t/√2) - ε)/√2, r cos(t/√2))`
/// with `r = √(1-ε²)`, as signed coordinates.
pub fn detour_path(epsilon: f64, t: f64) -> [f64; 3] {
    let r = (1.0 - epsilon * epsilon).sqrt();
    let s = (t / SQRT_2).sin();
    [(r * s + epsilon) / SQRT_2, (r * s - epsilon) / SQRT_2, r * (t / SQRT_2).cos()]
}

/// Runs the detour protocol for `ε` on `[0, T]` with step `dt`.
pub fn epsilon_protocol(
    setup: &QutritSetup,
    epsilon: f64,
    mode: DetourMode,
    horizon: f64,
    dt: f64,
) -> Result<SimulationResult> {
    check_epsilon(epsilon)?;
    let base = setup.coupling().dense().clone();
    let direction = setup.detour_direction();
    let scale = 1.0 / (2.0 * SQRT_2 * epsilon);
    match mode {
        DetourMode::Constant => {
            let psi0 = setup.framed_state([0.0, 0.0, 1.0])?;
            let h = &base + &direction * c64(scale, 0.0);
            schrodinger_integrate(&psi0, &HamiltonianSchedule::constant(h, horizon)?, horizon, dt)
        }
        DetourMode::TimeDependent => {
            let psi0 = setup.framed_state(detour_path(epsilon, 0.0))?;
            let r = (1.0 - epsilon * epsilon).sqrt();
            let ham = SegmentHamiltonian::Modulated {
                base,
                direction,
                coefficient: Arc::new(move |t: f64| r * (t / SQRT_2).cos() * scale),
            };
            schrodinger_integrate(&psi0, &HamiltonianSchedule::new().then(horizon, ham)?, horizon, dt)
        }
        DetourMode::StateDependent => {
            let psi0 = setup.framed_state(detour_path(epsilon, 0.0))?;
            state_dependent_run(setup, &psi0, &base, &direction, scale, horizon, dt)
        }
    }
}

/// Feedback run: the coefficient is `σ_z(ψ)/(2√2 ε)` with `σ_z = |⟨33|U^*ψ⟩|`,
/// frozen over each step at its Magnus-node predictions.
fn state_dependent_run(
    setup: &QutritSetup,
    psi0: &BipartiteState,
    base: &CMatrix,
    direction: &CMatrix,
    scale: f64,
    horizon: f64,
    dt: f64,
) -> Result<SimulationResult> {
    if !(horizon.is_finite() && horizon >= 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(Error::NonFinite(format!("horizon {horizon}, step {dt}")));
    }
    let vz = setup.frame.v().column(2).into_owned();
    let wz = setup.frame.w().column(2).into_owned();
    let probe = linalg::kron(
        &CMatrix::from_columns(&[vz]),
        &CMatrix::from_columns(&[wz]),
    );
    let sigma_z = |psi: &linalg::CVector| (probe.adjoint() * psi)[(0, 0)].norm();
    let mut out = SimulationResult::start(psi0.clone());
    let mut psi = psi0.to_vector();
    let mut t = 0.0;
    while t < horizon {
        let h = dt.min(horizon - t);
        // predict the state over the step, then treat the coefficient as a
        // known function of time for one Magnus step
        let c0 = sigma_z(&psi) * scale;
        let predict = HermitianPropagator::new(&(base + direction * c64(c0, 0.0)));
        let half = predict.apply(0.5 * h, &psi);
        let c_half = sigma_z(&half) * scale;
        let end = HermitianPropagator::new(&(base + direction * c64(c_half, 0.0))).apply(h, &psi);
        let c_end = sigma_z(&end) * scale;
        // quadratic interpolation through (0, c0), (h/2, c_half), (h, c_end)
        let coeff = move |s: f64| {
            let x = (s - t) / h;
            c0 * (1.0 - x) * (1.0 - 2.0 * x) + 4.0 * c_half * x * (1.0 - x) + c_end * x * (2.0 * x - 1.0)
        };
        let ham = SegmentHamiltonian::Modulated {
            base: base.clone(),
            direction: direction.clone(),
            coefficient: Arc::new(coeff),
        };
        psi = magnus_step(&ham, t, h, &psi);
        t += h;
        out.push(t, BipartiteState::from_vector(3, 3, &psi)?);
    }
    Ok(out)
}

/// `C(ε)`: distance of the singular values at `T⋆` from `(1, 1, 1)/√3` under
/// the constant detour control from `U|33⟩`.
pub fn cost_c(epsilon: f64) -> Result<f64> {
    cost_c_with(&QutritSetup::standard(), epsilon)
}

pub fn cost_c_with(setup: &QutritSetup, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let h = setup.coupling().dense() + setup.detour_direction() * c64(1.0 / (2.0 * SQRT_2 * epsilon), 0.0);
    let psi0 = setup.framed_state([0.0, 0.0, 1.0])?;
    let psi = HermitianPropagator::new(&h).apply(t_star(), &psi0.to_vector());
    let state = BipartiteState::from_vector(3, 3, &psi)?;
    Ok(distance_to_maximally_entangled(&weyl_projected(&state)))
}

fn distance_to_maximally_entangled(sigma: &[f64]) -> f64 {
    let m = 1.0 / 3f64.sqrt();
    sigma.iter().map(|s| (s - m).powi(2)).sum::<f64>().sqrt()
}

/// `C̃(x) = √3 C(1/(2√2 x)) (2√2 x - 1)`.
pub fn transformed_cost(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 1.0 / (2.0 * SQRT_2)) {
        return Err(Error::Domain(format!("x must exceed 1/(2√2), got {x}")));
    }
    let y = 2.0 * SQRT_2 * x;
    Ok(3f64.sqrt() * cost_c(1.0 / y)? * (y - 1.0))
}

/// `ε_k = 1 / (2√2 (x_0 + k Δx))`; half-integer `k` gives approximate maxima.
pub fn epsilon_minima(k: f64) -> Result<f64> {
    epsilon_minima_with(k, MINIMA_X0, MINIMA_DX)
}

pub fn epsilon_minima_with(k: f64, x0: f64, dx: f64) -> Result<f64> {
    let x = x0 + k * dx;
    let eps = 1.0 / (2.0 * SQRT_2 * x);
    if !(k.is_finite() && x > 0.0 && eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("ε_k for k = {k} lies outside (0, 1)")));
    }
    Ok(eps)
}

/// Located local minimum of `C` near a catalog value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocatedMinimum {
    pub k: u32,
    pub catalog_epsilon: f64,
    pub epsilon: f64,
    pub x: f64,
    pub cost: f64,
}

/// Least-squares fit `x_k ≈ x_0 + k Δx` of the located minima.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaFit {
    pub x0: f64,
    pub dx: f64,
    pub minima: Vec<LocatedMinimum>,
}

/// Golden-section search for a minimum of `C` in `x = 1/(2√2 ε)` on
/// `[x_k - Δx/4, x_k + Δx/4]`.
pub fn locate_minimum(k: u32) -> Result<LocatedMinimum> {
    let catalog = epsilon_minima(k as f64)?;
    let xc = 1.0 / (2.0 * SQRT_2 * catalog);
    let f = |x: f64| cost_c(1.0 / (2.0 * SQRT_2 * x));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (xc - MINIMA_DX / 4.0, xc + MINIMA_DX / 4.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-9 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok(LocatedMinimum {
        k,
        catalog_epsilon: catalog,
        epsilon: 1.0 / (2.0 * SQRT_2 * x),
        x,
        cost: f(x)?,
    })
}

pub fn fit_minima(ks: &[u32]) -> Result<MinimaFit> {
    if ks.len() < 2 {
        return Err(Error::Invalid("fitting needs at least two minima".into()));
    }
    let minima = ks.iter().map(|&k| locate_minimum(k)).collect::<Result<Vec<_>>>()?;
    let n = minima.len() as f64;
    let mk = minima.iter().map(|m| m.k as f64).sum::<f64>() / n;
    let mx = minima.iter().map(|m| m.x).sum::<f64>() / n;
    let sxy: f64 = minima.iter().map(|m| (m.k as f64 - mk) * (m.x - mx)).sum();
    let sxx: f64 = minima.iter().map(|m| (m.k as f64 - mk).powi(2)).sum();
    let dx = sxy / sxx;
    Ok(MinimaFit {
        x0: mx - dx * mk,
        dx,
        minima,
    })
}

/// Cost samples on a log grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostCurve {
    pub epsilons: Vec<f64>,
    pub costs: Vec<f64>,
    pub xs: Vec<f64>,
    pub transformed: Vec<f64>,
}

/// `C(ε)` and `C̃(x)` on `n` log-spaced points of `[eps_min, eps_max]`,
/// evaluated on `jobs` threads. The output does not depend on `jobs`.
pub fn sweep_cost(eps_min: f64, eps_max: f64, n: usize, jobs: usize) -> Result<CostCurve> {
    if !(eps_min.is_finite() && eps_max.is_finite() && 0.0 < eps_min && eps_min < eps_max && eps_max < 1.0) {
        return Err(Error::Domain(format!("need 0 < min < max < 1, got [{eps_min}, {eps_max}]")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("need at least two points, got {n}")));
    }
    let (lo, hi) = (eps_min.ln(), eps_max.ln());
    let epsilons: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => eps_min,
            _ if i == n - 1 => eps_max,
            _ => (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let setup = QutritSetup::standard();
    let costs = pool.install(|| {
        epsilons
            .par_iter()
            .map(|&e| cost_c_with(&setup, e))
            .collect::<Result<Vec<f64>>>()
    })?;
    let xs: Vec<f64> = epsilons.iter().map(|e| 1.0 / (2.0 * SQRT_2 * e)).collect();
    let transformed = costs
        .iter()
        .zip(&epsilons)
        .map(|(c, e)| 3f64.sqrt() * c * (1.0 / e - 1.0))
        .collect();
    Ok(CostCurve {
        epsilons,
        costs,
        xs,
        transformed,
    })
}

/// Singular values `(|sin t|, 0, |cos t|)` of the uncompensated drift from
/// `U|33⟩`, as reported by the simulator at `t`.
pub fn drift_only_singular_values(setup: &QutritSetup, t: f64) -> Result<Vec<f64>> {
    let psi0 = setup.framed_state([0.0, 0.0, 1.0])?;
    let psi = HermitianPropagator::new(setup.coupling().dense()).apply(t, &psi0.to_vector());
    let state = BipartiteState::from_vector(3, 3, &psi)?;
    let mut s = crate::bipartite::singular_values(&state);
    s.sort_by(f64::total_cmp);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced::{weyl_project_with, ChamberOrder};

    #[test]
    fn figure_costs() {
        assert!((cost_c(0.12).unwrap() - 0.140).abs() < 0.005);
        assert!((cost_c(0.0506).unwrap() - 0.0215).abs() < 0.002);
        assert!((cost_c(0.0276).unwrap() - 0.0436).abs() < 0.003);
        assert!(cost_c(0.0).is_err() && cost_c(1.0).is_err());
    }

    #[test]
    fn time_dependent_track_follows_the_circle() {
        let setup = QutritSetup::standard();
        let eps = 0.05;
        let r = epsilon_protocol(&setup, eps, DetourMode::TimeDependent, t_star(), 1e-3).unwrap();
        for (t, s) in r.times.iter().zip(&r.singular_values) {
            let expected = weyl_project_with(&detour_path(eps, *t), ChamberOrder::default());
            let err = s.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-6, "t = {t}: {err:e}");
        }
    }

    #[test]
    fn state_dependent_matches_time_dependent() {
        let setup = QutritSetup::standard();
        let a = epsilon_protocol(&setup, 0.1, DetourMode::StateDependent, 1.0, 1e-3).unwrap();
        let b = epsilon_protocol(&setup, 0.1, DetourMode::TimeDependent, 1.0, 1e-3).unwrap();
        let err = a
            .last_singular_values()
            .iter()
            .zip(b.last_singular_values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err:e}");
    }

    #[test]
    fn constant_mode_reproduces_cost() {
        let setup = QutritSetup::standard();
        let r = epsilon_protocol(&setup, 0.12, DetourMode::Constant, t_star(), 1e-2).unwrap();
        let c = distance_to_maximally_entangled(r.last_singular_values());
        assert!((c - cost_c(0.12).unwrap()).abs() < 1e-10);
        assert!(r.states.iter().all(|s| (s.norm() - 1.0).abs() < 1e-9));
        let near_one = epsilon_protocol(&setup, 0.999, DetourMode::TimeDependent, 1.0, 1e-2).unwrap();
        assert!(near_one.states.iter().all(|s| (s.norm() - 1.0).abs() < 1e-9));
    }

    #[test]
    fn minima_catalog() {
        assert!((epsilon_minima(3.0).unwrap() - 0.0506).abs() < 1e-4);
        assert!(epsilon_minima(0.0).is_err());
        assert!(epsilon_minima(-1.0).is_err());
    }

    #[test]
    fn sweep_endpoints_and_determinism() {
        let a = sweep_cost(0.02, 0.2, 2, 1).unwrap();
        assert_eq!(a.epsilons, vec![0.02, 0.2]);
        assert_eq!(a.costs[1], cost_c(0.2).unwrap());
        let b = sweep_cost(0.01, 0.2, 17, 1).unwrap();
        let c = sweep_cost(0.01, 0.2, 17, 4).unwrap();
        assert_eq!(b, c);
        assert!(sweep_cost(0.2, 0.1, 5, 1).is_err());
        assert!(sweep_cost(0.1, 0.2, 1, 1).is_err());
    }

    #[test]
    fn drift_only_identity() {
        let setup = QutritSetup::standard();
        for t in [0.0, 0.3, 1.0, t_star()] {
            let s = drift_only_singular_values(&setup, t).unwrap();
            let mut expected = vec![t.sin().abs(), 0.0, t.cos().abs()];
            expected.sort_by(f64::total_cmp);
            assert!(s.iter().zip(&expected).all(|(a, b)| (a - b).abs() < 1e-8));
        }
    }
}
