use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::bipartite::{singular_values, BipartiteState};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, HermitianPropagator};
use crate::reduced::{weyl_project_with, ChamberOrder};

/// Scalar modulation `f(t)`.
pub type Modulation = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Hamiltonian on one schedule segment.
#[derive(Clone)]
pub enum SegmentHamiltonian {
    Constant(CMatrix),
    /// `H(t) = base + f(t) direction`.
    Modulated {
        base: CMatrix,
        direction: CMatrix,
        coefficient: Modulation,
    },
}

impl fmt::Debug for SegmentHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(h) => f.debug_tuple("Constant").field(h).finish(),
            Self::Modulated { base, direction, .. } => f
                .debug_struct("Modulated")
                .field("base", base)
                .field("direction", direction)
                .finish_non_exhaustive(),
        }
    }
}

impl SegmentHamiltonian {
    pub fn at(&self, t: f64) -> CMatrix {
        match self {
            Self::Constant(h) => h.clone(),
            Self::Modulated {
                base,
                direction,
                coefficient,
            } => base + direction * Complex64::new(coefficient(t), 0.0),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let mats: Vec<&CMatrix> = match self {
            Self::Constant(h) => vec![h],
            Self::Modulated { base, direction, .. } => vec![base, direction],
        };
        for m in mats {
            if m.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "Hamiltonian of shape {:?} on a state of dimension {n}",
                    m.shape()
                )));
            }
            linalg::ensure_finite(m.iter().flat_map(|z| [z.re, z.im]), "Hamiltonian")?;
            linalg::ensure_hermitian(m, 1e-10)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct HamiltonianSegment {
    pub start: f64,
    pub end: f64,
    pub hamiltonian: SegmentHamiltonian,
}

/// Piecewise Hamiltonian; no evolution outside the segments.
#[derive(Clone, Debug, Default)]
pub struct HamiltonianSchedule {
    segments: Vec<HamiltonianSegment>,
}

impl HamiltonianSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(h: CMatrix, duration: f64) -> Result<Self> {
        Self::new().then(duration, SegmentHamiltonian::Constant(h))
    }

    pub fn then(mut self, duration: f64, hamiltonian: SegmentHamiltonian) -> Result<Self> {
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(Error::NonFinite(format!("segment duration {duration}")));
        }
        let start = self.end_time();
        self.segments.push(HamiltonianSegment {
            start,
            end: start + duration,
            hamiltonian,
        });
        Ok(self)
    }

    pub fn segments(&self) -> &[HamiltonianSegment] {
        &self.segments
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end)
    }
}

#[derive(Clone, Debug)]
pub struct SimulationResult {
    pub times: Vec<f64>,
    pub states: Vec<BipartiteState>,
    /// Weyl-projected singular values of each state.
    pub singular_values: Vec<Vec<f64>>,
}

impl SimulationResult {
    pub fn last(&self) -> &BipartiteState {
        self.states.last().expect("at least one sample")
    }

    pub fn last_singular_values(&self) -> &[f64] {
        self.singular_values.last().expect("at least one sample")
    }

    pub(crate) fn push(&mut self, t: f64, state: BipartiteState) {
        self.singular_values.push(weyl_projected(&state));
        self.times.push(t);
        self.states.push(state);
    }

    pub(crate) fn start(state: BipartiteState) -> Self {
        let mut r = Self {
            times: Vec::new(),
            states: Vec::new(),
            singular_values: Vec::new(),
        };
        r.push(0.0, state);
        r
    }
}

/// Singular values projected to the default Weyl chamber.
pub fn weyl_projected(state: &BipartiteState) -> Vec<f64> {
    weyl_project_with(&singular_values(state), ChamberOrder::default())
}

/// One commutator-free fourth-order Magnus step of length `h` from `t`.
pub(crate) fn magnus_step(ham: &SegmentHamiltonian, t: f64, h: f64, psi: &CVector) -> CVector {
    let r3 = 3f64.sqrt();
    let (a1, a2) = (Complex64::new((3.0 - 2.0 * r3) / 12.0, 0.0), Complex64::new((3.0 + 2.0 * r3) / 12.0, 0.0));
    let h1 = ham.at(t + (0.5 - r3 / 6.0) * h);
    let h2 = ham.at(t + (0.5 + r3 / 6.0) * h);
    let first = &h1 * a2 + &h2 * a1;
    let second = &h1 * a1 + &h2 * a2;
    let psi = HermitianPropagator::new(&first).apply(h, psi);
    HermitianPropagator::new(&second).apply(h, &psi)
}

/// Integrates `ψ̇ = -i H(t) ψ` on `[0, T]`, sampling every `dt` and at segment
/// boundaries. Constant segments use exact exponentials; modulated ones use
/// commutator-free fourth-order Magnus steps of size `dt`.
pub fn schrodinger_integrate(
    psi0: &BipartiteState,
    schedule: &HamiltonianSchedule,
    horizon: f64,
    dt: f64,
) -> Result<SimulationResult> {
    if !(horizon.is_finite() && horizon >= 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(Error::NonFinite(format!("horizon {horizon}, step {dt}")));
    }
    let (d1, d2) = psi0.dims();
    for seg in &schedule.segments {
        seg.hamiltonian.validate(d1 * d2)?;
    }
    let mut out = SimulationResult::start(psi0.clone());
    let mut psi = psi0.to_vector();
    let mut t = 0.0;
    let mut cuts: Vec<f64> = schedule
        .segments
        .iter()
        .flat_map(|s| [s.start, s.end])
        .filter(|c| *c > 0.0 && *c < horizon)
        .collect();
    cuts.push(horizon);
    cuts.sort_by(f64::total_cmp);

    let mut cache: Option<(usize, HermitianPropagator)> = None;
    while t < horizon {
        let next_cut = cuts.iter().copied().find(|c| *c > t + 1e-15).unwrap_or(horizon);
        let step = dt.min(next_cut - t);
        let mid = t + 0.5 * step;
        let seg = schedule.segments.iter().position(|s| s.start <= mid && mid < s.end);
        if let Some(k) = seg {
            psi = match &schedule.segments[k].hamiltonian {
                SegmentHamiltonian::Constant(h) => {
                    if cache.as_ref().map(|c| c.0) != Some(k) {
                        cache = Some((k, HermitianPropagator::new(h)));
                    }
                    cache.as_ref().expect("set above").1.apply(step, &psi)
                }
                modulated => magnus_step(modulated, t, step, &psi),
            };
        }
        t = if (next_cut - (t + step)).abs() < 1e-15 { next_cut } else { t + step };
        let norm = psi.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite(format!("state at t = {t}")));
        }
        out.push(t, BipartiteState::from_vector(d1, d2, &psi)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_hamiltonian_is_identity() {
        let psi = BipartiteState::maximally_entangled(2);
        let s = HamiltonianSchedule::constant(CMatrix::zeros(4, 4), 1.0).unwrap();
        let r = schrodinger_integrate(&psi, &s, 1.0, 0.1).unwrap();
        assert!(linalg::max_abs_diff(r.last().amplitudes(), psi.amplitudes()) < 1e-15);
        assert_eq!(r.times.len(), 11);
    }

    #[test]
    fn magnus_is_fourth_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let base = random_hermitian(4, &mut rng);
        let dir = random_hermitian(4, &mut rng);
        let ham = SegmentHamiltonian::Modulated {
            base,
            direction: dir,
            coefficient: Arc::new(|t: f64| (2.0 * t).sin() + t * t),
        };
        let psi = BipartiteState::product(2, 2, 0, 0).unwrap();
        let sched = HamiltonianSchedule::new().then(1.0, ham).unwrap();
        let run = |dt: f64| schrodinger_integrate(&psi, &sched, 1.0, dt).unwrap().last().to_vector();
        let reference = run(1e-4);
        let e1 = (run(0.02) - &reference).norm();
        let e2 = (run(0.01) - &reference).norm();
        let order = (e1 / e2).log2();
        assert!(order > 3.7, "observed order {order}");
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut h = CMatrix::zeros(4, 4);
        h[(0, 1)] = c64(1.0, 0.0);
        let s = HamiltonianSchedule::constant(h, 1.0).unwrap();
        let psi = BipartiteState::product(2, 2, 0, 0).unwrap();
        assert!(schrodinger_integrate(&psi, &s, 1.0, 0.1).is_err());
        let ok = HamiltonianSchedule::constant(CMatrix::zeros(4, 4), 1.0).unwrap();
        assert!(schrodinger_integrate(&psi, &ok, 1.0, f64::NAN).is_err());
    }
}
