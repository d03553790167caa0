use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Costate `l = σ × p` of the time-optimal problem on the sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdjointState {
    l: Vector3<f64>,
}

impl AdjointState {
    pub fn new(l: Vector3<f64>) -> Result<Self> {
        if l.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("adjoint state".into()));
        }
        if l.norm() == 0.0 {
            return Err(Error::Abnormal);
        }
        Ok(Self { l })
    }

    /// Rescaled to unit length.
    pub fn normalized(l: Vector3<f64>) -> Result<Self> {
        let s = Self::new(l)?;
        Ok(Self { l: s.l / s.l.norm() })
    }

    pub fn l(&self) -> &Vector3<f64> {
        &self.l
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaceKind {
    Vertex,
    Edge,
    Facet,
}

/// Face of the octahedron `‖u‖_1 ≤ 1` maximizing `u · l`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlFace {
    pub kind: FaceKind,
    pub vertices: Vec<Vector3<f64>>,
    pub barycenter: Vector3<f64>,
}

/// Relative tolerance for treating two components of `l` as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub fn optimal_control_set(l: &Vector3<f64>) -> Result<ControlFace> {
    optimal_control_set_with_tolerance(l, TIE_TOLERANCE)
}

pub fn optimal_control_set_with_tolerance(l: &Vector3<f64>, tolerance: f64) -> Result<ControlFace> {
    let l = AdjointState::new(*l)?.l;
    let h = l.amax();
    let vertices: Vec<Vector3<f64>> = (0..3)
        .filter(|&i| l[i].abs() >= h - tolerance * h)
        .map(|i| {
            let mut e = Vector3::zeros();
            e[i] = l[i].signum();
            e
        })
        .collect();
    let kind = match vertices.len() {
        1 => FaceKind::Vertex,
        2 => FaceKind::Edge,
        _ => FaceKind::Facet,
    };
    let barycenter = vertices.iter().sum::<Vector3<f64>>() / vertices.len() as f64;
    Ok(ControlFace {
        kind,
        vertices,
        barycenter,
    })
}

/// `(L², H)` with `H = max |l_i|`.
pub fn first_integrals(l: &Vector3<f64>) -> (f64, f64) {
    (l.norm_squared(), l.amax())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryClass {
    Constant,
    Switching,
    Separatrix,
}

/// Family of an extremal with `L = 1` and Pontryagin Hamiltonian `H`.
pub fn classify_trajectory(h: f64) -> Result<TrajectoryClass> {
    let lo = 1.0 / 3f64.sqrt();
    if !(h.is_finite() && h >= lo - 1e-12 && h <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!("H = {h} outside [1/√3, 1]")));
    }
    Ok(if (h - FRAC_1_SQRT_2).abs() <= 1e-12 {
        TrajectoryClass::Separatrix
    } else if h > FRAC_1_SQRT_2 {
        TrajectoryClass::Constant
    } else {
        TrajectoryClass::Switching
    })
}

/// Time between consecutive switches, `π/2 - 2 arccos(H / √(1 - H²))`.
pub fn switch_duration(h: f64) -> Result<f64> {
    let lo = 1.0 / 3f64.sqrt();
    if !(h.is_finite() && h >= lo - 1e-12 && h < FRAC_1_SQRT_2) {
        return Err(Error::Domain(format!("H = {h} outside [1/√3, 1/√2)")));
    }
    let arg = (h / (1.0 - h * h).sqrt()).clamp(0.0, 1.0);
    Ok((FRAC_PI_2 - 2.0 * arg.acos()).max(0.0))
}

/// Tie handling for [`integrate_adjoint`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionPolicy {
    /// Axis cycle used to break ties; the default `[0, 2, 1]` is `x → z → y → x`.
    pub cycle: [usize; 3],
    /// Time spent on an unstable edge equilibrium before leaving it.
    pub dwell: Option<f64>,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        Self {
            cycle: [0, 2, 1],
            dwell: None,
        }
    }
}

impl SelectionPolicy {
    fn successor_rank(&self, previous: Option<usize>, axis: usize) -> usize {
        let pos = |a: usize| self.cycle.iter().position(|&c| c == a).unwrap_or(a);
        match previous {
            Some(p) => (pos(axis) + 3 - pos(p) - 1) % 3,
            None => pos(axis),
        }
    }
}

/// Piece of an adjoint trajectory with constant control.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlArc {
    pub start: f64,
    pub end: f64,
    pub u: Vector3<f64>,
}

#[derive(Clone, Debug)]
pub struct AdjointPath {
    pub times: Vec<f64>,
    pub states: Vec<Vector3<f64>>,
    pub arcs: Vec<ControlArc>,
    /// Times at which the control changes.
    pub switch_times: Vec<f64>,
}

/// Tolerance on `|l_i|` for ties during integration.
const INTEGRATION_TIE: f64 = 1e-8;
const EVENT_TIME_TOLERANCE: f64 = 1e-10;
/// Look-ahead used to decide which vertex separates a momentary tie.
const TIE_PROBE: f64 = 1e-9;
/// Look-ahead for leaving an equilibrium, where separation is second order.
const EQUILIBRIUM_PROBE: f64 = 1e-3;

fn rotate(l: &Vector3<f64>, u: &Vector3<f64>, t: f64) -> Vector3<f64> {
    let n = u.norm();
    if n == 0.0 {
        return *l;
    }
    let k = u / n;
    let theta = n * t;
    l * theta.cos() + k.cross(l) * theta.sin() + k * k.dot(l) * (1.0 - theta.cos())
}

fn vertex(l: &Vector3<f64>, axis: usize) -> Vector3<f64> {
    let mut e = Vector3::zeros();
    e[axis] = if l[axis] < 0.0 { -1.0 } else { 1.0 };
    e
}

/// Axes tied for the maximum of `|l_i|`.
fn dominant(l: &Vector3<f64>) -> Vec<usize> {
    let h = l.amax();
    (0..3).filter(|&i| l[i].abs() >= h - INTEGRATION_TIE).collect()
}

/// Whether the vertex control on `axis` keeps `axis` strictly dominant right
/// after the current instant.
fn leaves_tie(l: &Vector3<f64>, axis: usize, tied: &[usize], probe: f64) -> bool {
    let m = rotate(l, &vertex(l, axis), probe);
    tied.iter()
        .filter(|&&j| j != axis)
        .all(|&j| m[j].abs() < m[axis].abs() - 1e-14)
}

/// First time in `(offset, limit]` where another component reaches
/// `|l_axis|`, located by stepping with `dt` and bisecting to 1e-10.
fn next_event(l: &Vector3<f64>, axis: usize, offset: f64, limit: f64, dt: f64) -> Option<f64> {
    let u = vertex(l, axis);
    let h = l[axis].abs();
    let gap = |t: f64| {
        let m = rotate(l, &u, t);
        (0..3).filter(|&j| j != axis).map(|j| m[j].abs()).fold(f64::MIN, f64::max) - h
    };
    let mut lo = offset;
    while lo < limit {
        let hi = (lo + dt).min(limit);
        if gap(hi) >= 0.0 {
            let (mut a, mut b) = (lo, hi);
            while b - a > EVENT_TIME_TOLERANCE {
                let m = 0.5 * (a + b);
                if gap(m) >= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            return Some(b);
        }
        lo = hi;
    }
    None
}

/// Integrates `l̇ = u × l` with `u` maximizing `u · l` over the octahedron.
///
/// Off ties the control is a vertex and arcs are exact rotations; switches
/// are located by bisection. At a tie the unique vertex that separates the
/// tie is taken, with the policy cycle breaking remaining ambiguities. Facet
/// equilibria hold the facet barycenter; edge equilibria hold the edge
/// barycenter for the policy dwell time or fail with a deadlock.
pub fn integrate_adjoint(l0: &Vector3<f64>, policy: &SelectionPolicy, horizon: f64, dt: f64) -> Result<AdjointPath> {
    let mut l = *AdjointState::new(*l0)?.l();
    if !(horizon.is_finite() && horizon >= 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(Error::NonFinite(format!("horizon {horizon}, step {dt}")));
    }
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![l];
    let mut arcs: Vec<ControlArc> = Vec::new();
    let mut previous: Option<usize> = None;
    let mut dwelled = false;

    let record = |from: f64, to: f64, l_start: &Vector3<f64>, u: &Vector3<f64>, times: &mut Vec<f64>, states: &mut Vec<Vector3<f64>>| {
        let mut s = from;
        while s < to {
            s = (s + dt).min(to);
            times.push(s);
            states.push(rotate(l_start, u, s - from));
        }
    };

    while t < horizon {
        let tied = dominant(&l);
        let (u, end, axis) = if tied.len() == 1 {
            let axis = tied[0];
            let end = next_event(&l, axis, 0.0, horizon - t, dt).map_or(horizon, |s| t + s);
            (vertex(&l, axis), end, Some(axis))
        } else {
            let face = optimal_control_set_with_tolerance(&l, INTEGRATION_TIE / l.amax())?;
            let at_rest = face.barycenter.cross(&l).norm() < 1e-9;
            if at_rest && face.kind == FaceKind::Facet {
                (face.barycenter, horizon, None)
            } else if at_rest && !dwelled {
                let Some(dwell) = policy.dwell else {
                    return Err(Error::PolicyDeadlock { time: t });
                };
                dwelled = true;
                (face.barycenter, (t + dwell).min(horizon), None)
            } else {
                let probe = if at_rest { EQUILIBRIUM_PROBE } else { TIE_PROBE };
                let mut candidates: Vec<usize> =
                    tied.iter().copied().filter(|&a| leaves_tie(&l, a, &tied, probe)).collect();
                if candidates.is_empty() {
                    return Err(Error::PolicyDeadlock { time: t });
                }
                candidates.sort_by_key(|&a| policy.successor_rank(previous, a));
                let axis = candidates[0];
                let limit = horizon - t;
                let end = if probe < limit {
                    next_event(&l, axis, probe, limit, dt).map_or(horizon, |s| t + s)
                } else {
                    horizon
                };
                (vertex(&l, axis), end, Some(axis))
            }
        };
        if axis.is_some() {
            dwelled = false;
            previous = axis;
        }
        let l_start = l;
        record(t, end, &l_start, &u, &mut times, &mut states);
        l = rotate(&l_start, &u, end - t);
        match arcs.last_mut() {
            Some(last) if last.u == u => last.end = end,
            _ => arcs.push(ControlArc { start: t, end, u }),
        }
        t = end;
    }
    let switch_times = arcs.iter().skip(1).map(|a| a.start).collect();
    Ok(AdjointPath {
        times,
        states,
        arcs,
        switch_times,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_faces() {
        let v = optimal_control_set(&Vector3::new(1.0, 0.2, 0.1)).unwrap();
        assert_eq!(v.kind, FaceKind::Vertex);
        assert_eq!(v.barycenter, Vector3::new(1.0, 0.0, 0.0));
        let e = optimal_control_set(&(Vector3::new(1.0, 1.0, 0.0) * FRAC_1_SQRT_2)).unwrap();
        assert_eq!(e.kind, FaceKind::Edge);
        assert_eq!(e.barycenter, Vector3::new(0.5, 0.5, 0.0));
        let f = optimal_control_set(&(Vector3::new(1.0, 1.0, 1.0) / 3f64.sqrt())).unwrap();
        assert_eq!(f.kind, FaceKind::Facet);
        assert!((f.barycenter - Vector3::repeat(1.0 / 3.0)).norm() < 1e-16);
        let neg = optimal_control_set(&Vector3::new(0.0, -2.0, 0.5)).unwrap();
        assert_eq!(neg.barycenter, Vector3::new(0.0, -1.0, 0.0));
        assert!(matches!(optimal_control_set(&Vector3::zeros()), Err(Error::Abnormal)));
    }

    #[test]
    fn integrals_and_classes() {
        assert_eq!(first_integrals(&Vector3::z()), (1.0, 1.0));
        let (l2, h) = first_integrals(&(Vector3::repeat(1.0) / 3f64.sqrt()));
        assert!((l2 - 1.0).abs() < 1e-15 && (h - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(classify_trajectory(0.9).unwrap(), TrajectoryClass::Constant);
        assert_eq!(classify_trajectory(0.65).unwrap(), TrajectoryClass::Switching);
        assert_eq!(classify_trajectory(FRAC_1_SQRT_2).unwrap(), TrajectoryClass::Separatrix);
        assert!(classify_trajectory(0.5).is_err());
        assert!(classify_trajectory(1.1).is_err());
    }

    #[test]
    fn switch_duration_limits() {
        assert!(switch_duration(1.0 / 3f64.sqrt()).unwrap().abs() < 1e-7);
        assert!((switch_duration(FRAC_1_SQRT_2 - 1e-12).unwrap() - FRAC_PI_2).abs() < 1e-4);
        assert!(switch_duration(FRAC_1_SQRT_2).is_err());
        assert!(switch_duration(0.5).is_err());
    }

    fn switching_start(h: f64) -> Vector3<f64> {
        let r = (1.0 - h * h).sqrt();
        Vector3::new(h, r * FRAC_1_SQRT_2, r * FRAC_1_SQRT_2)
    }

    #[test]
    fn switching_arcs_match_the_formula() {
        for h in [0.62, 0.65] {
            let path = integrate_adjoint(&switching_start(h), &SelectionPolicy::default(), 12.0, 0.01).unwrap();
            let expected = switch_duration(h).unwrap();
            let gaps: Vec<f64> = path.switch_times.windows(2).map(|w| w[1] - w[0]).collect();
            assert!(gaps.len() >= 3);
            for g in &gaps {
                assert!((g - expected).abs() < 1e-6, "{g} vs {expected}");
            }
            let axes: Vec<usize> = path.arcs.iter().map(|a| a.u.iamax()).collect();
            for w in axes.windows(2) {
                let next = match w[0] {
                    0 => 2,
                    2 => 1,
                    _ => 0,
                };
                assert_eq!(w[1], next);
            }
            for l in &path.states {
                let (l2, hh) = first_integrals(l);
                assert!((l2 - 1.0).abs() < 1e-8 && (hh - h).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn equilibria() {
        let path = integrate_adjoint(&Vector3::x(), &SelectionPolicy::default(), 3.0, 0.1).unwrap();
        assert!(path.states.iter().all(|l| (l - Vector3::x()).norm() < 1e-15));
        assert!(path.switch_times.is_empty());

        let sep = Vector3::new(1.0, 1.0, 0.0) * FRAC_1_SQRT_2;
        assert!(matches!(
            integrate_adjoint(&sep, &SelectionPolicy::default(), 3.0, 0.1),
            Err(Error::PolicyDeadlock { .. })
        ));
        let policy = SelectionPolicy {
            dwell: Some(0.7),
            ..Default::default()
        };
        let path = integrate_adjoint(&sep, &policy, 3.0, 0.1).unwrap();
        assert_eq!(path.arcs[0].u, Vector3::new(0.5, 0.5, 0.0));
        assert!((path.arcs[0].end - 0.7).abs() < 1e-15);
        assert_eq!(path.arcs[1].u, Vector3::x());

        let facet = Vector3::repeat(1.0) / 3f64.sqrt();
        let path = integrate_adjoint(&facet, &SelectionPolicy::default(), 2.0, 0.1).unwrap();
        assert_eq!(path.arcs.len(), 1);
    }
}
