use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;

use super::induced::{hat, induced_field, InducedField};
use crate::bipartite::{CouplingHamiltonian, LocalUnitary, SchmidtVector};
use crate::error::{Error, Result};
use crate::linalg::RMatrix;

/// Time-dependent motion generator `X(t)` with `σ̇ = X(t) σ`.
pub type GeneratorFn = Arc<dyn Fn(f64) -> RMatrix + Send + Sync>;

/// Control payload for one schedule segment.
///
/// `Unitary` and `Field` follow `σ̇ = -H_U σ`. `Rotation` and
/// `AngularVelocity` are motion rates: `σ̇ = ω × σ` and `σ̇ = ω J σ` with
/// `J = [[0, -1], [1, 0]]`.
#[derive(Clone)]
pub enum ReducedControl {
    Unitary(LocalUnitary),
    Field(InducedField),
    Rotation(Vector3<f64>),
    AngularVelocity(f64),
    TimeVarying(GeneratorFn),
}

impl fmt::Debug for ReducedControl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unitary(u) => f.debug_tuple("Unitary").field(u).finish(),
            Self::Field(h) => f.debug_tuple("Field").field(h).finish(),
            Self::Rotation(w) => f.debug_tuple("Rotation").field(w).finish(),
            Self::AngularVelocity(w) => f.debug_tuple("AngularVelocity").field(w).finish(),
            Self::TimeVarying(_) => f.write_str("TimeVarying(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub control: ReducedControl,
}

/// Contiguous piecewise controls. Times outside every segment carry no
/// control, so `σ` is held.
#[derive(Clone, Debug, Default)]
pub struct ControlSchedule {
    coupling: Option<CouplingHamiltonian>,
    segments: Vec<Segment>,
}

impl ControlSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    /// Coupling used to evaluate `Unitary` payloads.
    pub fn with_coupling(mut self, h0: CouplingHamiltonian) -> Self {
        self.coupling = Some(h0);
        self
    }

    /// Appends a segment of length `duration` after the current end.
    pub fn then(mut self, duration: f64, control: ReducedControl) -> Result<Self> {
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(Error::NonFinite(format!("segment duration {duration}")));
        }
        let start = self.end_time();
        self.segments.push(Segment {
            start,
            end: start + duration,
            control,
        });
        Ok(self)
    }

    /// Adds a segment on `[start, end]`; segments must not overlap.
    pub fn push(&mut self, start: f64, end: f64, control: ReducedControl) -> Result<()> {
        if !(start.is_finite() && end.is_finite() && end >= start) {
            return Err(Error::NonFinite(format!("segment [{start}, {end}]")));
        }
        if self
            .segments
            .iter()
            .any(|s| start < s.end - 1e-15 && s.start < end - 1e-15)
        {
            return Err(Error::Invalid(format!("segment [{start}, {end}] overlaps")));
        }
        self.segments.push(Segment {
            start,
            end,
            control,
        });
        self.segments.sort_by(|a, b| a.start.total_cmp(&b.start));
        Ok(())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end)
    }

    /// Constant motion generator of a segment, or `None` for time-varying ones.
    fn constant_generator(&self, control: &ReducedControl, n: usize) -> Result<Option<RMatrix>> {
        let x = match control {
            ReducedControl::Unitary(u) => {
                let h0 = self.coupling.as_ref().ok_or_else(|| {
                    Error::Invalid("unitary payload needs a coupling Hamiltonian".into())
                })?;
                -induced_field(h0, u)?.generator()
            }
            ReducedControl::Field(f) => -f.generator(),
            ReducedControl::Rotation(w) => {
                let h = hat(w);
                RMatrix::from_fn(3, 3, |i, j| h[(i, j)])
            }
            ReducedControl::AngularVelocity(w) => RMatrix::from_row_slice(2, 2, &[0.0, -w, *w, 0.0]),
            ReducedControl::TimeVarying(_) => return Ok(None),
        };
        if x.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}-dimensional control on a {n}-dimensional Schmidt vector",
                x.nrows()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("control generator".into()));
        }
        Ok(Some(x))
    }
}

#[derive(Clone, Debug)]
pub struct ReducedTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<SchmidtVector>,
    pub segments: Vec<Segment>,
}

impl ReducedTrajectory {
    pub fn last(&self) -> &SchmidtVector {
        self.states.last().expect("trajectory has at least one sample")
    }
}

/// `exp(t X)` for antisymmetric `X`: closed forms for sizes 2 and 3,
/// Padé otherwise.
pub fn rotation_exp(x: &RMatrix, t: f64) -> RMatrix {
    match x.nrows() {
        2 => {
            let a = x[(1, 0)] * t;
            RMatrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()])
        }
        3 => {
            let w = Vector3::new(x[(2, 1)], x[(0, 2)], x[(1, 0)]);
            let theta = w.norm() * t;
            if theta == 0.0 {
                return RMatrix::identity(3, 3);
            }
            let k = hat(&(w / w.norm()));
            let r = nalgebra::Matrix3::identity() + k * theta.sin() + k * k * (1.0 - theta.cos());
            RMatrix::from_fn(3, 3, |i, j| r[(i, j)])
        }
        _ => (x * t).exp(),
    }
}

/// Integrates `σ̇ = X(t) σ` on `[0, T]` with samples every `dt` plus every
/// segment boundary. Constant segments use exact rotations; time-varying
/// ones use classical RK4 with step `dt`.
pub fn integrate_reduced(
    sigma0: &SchmidtVector,
    schedule: &ControlSchedule,
    horizon: f64,
    dt: f64,
) -> Result<ReducedTrajectory> {
    if !(horizon.is_finite() && horizon >= 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(Error::NonFinite(format!("horizon {horizon}, step {dt}")));
    }
    let n = sigma0.len();
    let mut sigma = sigma0.as_vector().clone();
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![sigma0.clone()];

    let mut cuts: Vec<f64> = schedule
        .segments
        .iter()
        .flat_map(|s| [s.start, s.end])
        .filter(|c| *c > 0.0 && *c < horizon)
        .collect();
    cuts.push(horizon);
    cuts.sort_by(f64::total_cmp);

    let mut cached: Option<(usize, Option<RMatrix>)> = None;
    while t < horizon {
        let next_cut = cuts.iter().copied().find(|c| *c > t + 1e-15).unwrap_or(horizon);
        let step = dt.min(next_cut - t);
        let mid = t + 0.5 * step;
        let seg_idx = schedule
            .segments
            .iter()
            .position(|s| s.start <= mid && mid < s.end);
        sigma = match seg_idx {
            None => sigma,
            Some(k) => {
                if cached.as_ref().map(|c| c.0) != Some(k) {
                    let g = schedule.constant_generator(&schedule.segments[k].control, n)?;
                    cached = Some((k, g));
                }
                match &cached.as_ref().expect("set above").1 {
                    Some(x) => rotation_exp(x, step) * &sigma,
                    None => {
                        let ReducedControl::TimeVarying(f) = &schedule.segments[k].control else {
                            unreachable!("only time-varying payloads lack a constant generator")
                        };
                        rk4_step(f, t, step, &sigma, n)?
                    }
                }
            }
        };
        t = if (next_cut - (t + step)).abs() < 1e-15 { next_cut } else { t + step };
        if sigma.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("state at t = {t}")));
        }
        times.push(t);
        states.push(SchmidtVector::from_unchecked(sigma.clone()));
    }
    Ok(ReducedTrajectory {
        times,
        states,
        segments: schedule.segments.clone(),
    })
}

fn rk4_step(
    f: &GeneratorFn,
    t: f64,
    h: f64,
    y: &nalgebra::DVector<f64>,
    n: usize,
) -> Result<nalgebra::DVector<f64>> {
    let eval = |s: f64, v: &nalgebra::DVector<f64>| -> Result<nalgebra::DVector<f64>> {
        let x = f(s);
        if x.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "generator {:?} for dimension {n}",
                x.shape()
            )));
        }
        Ok(x * v)
    };
    let k1 = eval(t, y)?;
    let k2 = eval(t + h / 2.0, &(y + &k1 * (h / 2.0)))?;
    let k3 = eval(t + h / 2.0, &(y + &k2 * (h / 2.0)))?;
    let k4 = eval(t + h, &(y + &k3 * h))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}
