//! File formats: JSON Hamiltonians, states, schedules, plans and reports, and
//! CSV trajectories. Floats in CSV are printed with 12 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::bipartite::{BipartiteState, CouplingHamiltonian};
use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, CVector, RMatrix};
use crate::reduced::{ControlSchedule, InducedField, ReducedControl, ReducedTrajectory};
use crate::sim::{CostCurve, SimulationResult};

/// Complex matrix as row-major `[re, im]` pairs, either flat or nested by row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexMatrixJson {
    Flat(Vec<[f64; 2]>),
    Rows(Vec<Vec<[f64; 2]>>),
}

impl ComplexMatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self::Flat(
            (0..m.nrows())
                .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
                .collect(),
        )
    }

    pub fn to_matrix(&self, n: usize) -> Result<CMatrix> {
        let flat: Vec<[f64; 2]> = match self {
            Self::Flat(v) => v.clone(),
            Self::Rows(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::DimensionMismatch(format!("expected a {n} x {n} matrix")));
                }
                rows.concat()
            }
        };
        if flat.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {n} x {n} matrix, got {}",
                n * n,
                flat.len()
            )));
        }
        check_finite(flat.iter().flatten().copied(), "matrix entry")?;
        Ok(CMatrix::from_row_iterator(n, n, flat.iter().map(|p| c64(p[0], p[1]))))
    }
}

fn check_finite(values: impl IntoIterator<Item = f64>, what: &str) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    #[serde(rename = "A")]
    pub a: ComplexMatrixJson,
    #[serde(rename = "B")]
    pub b: ComplexMatrixJson,
}

/// `{dims: [d1, d2], terms: [{A, B}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianJson {
    pub dims: [usize; 2],
    pub terms: Vec<TermJson>,
}

impl HamiltonianJson {
    pub fn from_coupling(h: &CouplingHamiltonian) -> Self {
        let (d1, d2) = h.dims();
        Self {
            dims: [d1, d2],
            terms: h
                .terms()
                .iter()
                .map(|(a, b)| TermJson {
                    a: ComplexMatrixJson::from_matrix(a),
                    b: ComplexMatrixJson::from_matrix(b),
                })
                .collect(),
        }
    }

    pub fn to_coupling(&self) -> Result<CouplingHamiltonian> {
        let [d1, d2] = self.dims;
        if d1 < 2 || d2 < 2 {
            return Err(Error::DimensionMismatch(format!("dims must be at least 2, got {:?}", self.dims)));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| Ok((t.a.to_matrix(d1)?, t.b.to_matrix(d2)?)))
            .collect::<Result<Vec<_>>>()?;
        if terms.is_empty() {
            return Ok(CouplingHamiltonian::zero(d1, d2));
        }
        CouplingHamiltonian::new(d1, d2, terms)
    }
}

/// `{dims: [d1, d2], amplitudes: [[re, im], ...]}` with `|ij⟩` at `i d2 + j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub dims: [usize; 2],
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateJson {
    pub fn from_state(psi: &BipartiteState) -> Self {
        let (d1, d2) = psi.dims();
        Self {
            dims: [d1, d2],
            amplitudes: psi.to_vector().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_state(&self) -> Result<BipartiteState> {
        let [d1, d2] = self.dims;
        if self.amplitudes.len() != d1 * d2 {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims {:?}",
                self.amplitudes.len(),
                self.dims
            )));
        }
        check_finite(self.amplitudes.iter().flatten().copied(), "amplitude")?;
        let v = CVector::from_iterator(d1 * d2, self.amplitudes.iter().map(|p| c64(p[0], p[1])));
        BipartiteState::from_vector(d1, d2, &v)
    }
}

/// Reduced control of one schedule segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducedControlJson {
    /// `σ̇ = ω × σ`.
    Rotation([f64; 3]),
    /// `σ̇ = ω J σ` for `dmin = 2`.
    AngularVelocity(f64),
    /// Antisymmetric generator `H` with `σ̇ = -H σ`, as rows.
    Generator(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSegmentJson {
    pub duration: f64,
    #[serde(flatten)]
    pub control: ReducedControlJson,
}

/// Builds a reduced schedule from a JSON list of segments.
pub fn schedule_from_json(segments: &[ScheduleSegmentJson]) -> Result<ControlSchedule> {
    segments.iter().try_fold(ControlSchedule::new(), |s, seg| {
        let control = match &seg.control {
            ReducedControlJson::Rotation(w) => {
                check_finite(w.iter().copied(), "rotation vector")?;
                ReducedControl::Rotation(Vector3::from(*w))
            }
            ReducedControlJson::AngularVelocity(w) => {
                check_finite([*w], "angular velocity")?;
                ReducedControl::AngularVelocity(*w)
            }
            ReducedControlJson::Generator(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(Error::DimensionMismatch("generator must be square".into()));
                }
                check_finite(rows.iter().flatten().copied(), "generator")?;
                let h = RMatrix::from_row_iterator(n, n, rows.iter().flatten().copied());
                ReducedControl::Field(InducedField::from_generator(h)?)
            }
        };
        s.then(seg.duration, control)
    })
}

/// Provenance block written at the top of every output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputHeader {
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
}

impl OutputHeader {
    fn csv_lines(&self) -> String {
        format!(
            "# version: {}\n# seed: {}\n# config_sha256: {}\n",
            self.version, self.seed, self.config_sha256
        )
    }
}

/// Fixed 12-significant-digit float formatting.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0"
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

/// Rounds to 12 significant digits for JSON output.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    fmt_f64(x).parse().expect("formatted float parses")
}

/// CSV with a `#` header block, a column row and fixed-format values.
pub fn csv_string(header: Option<&OutputHeader>, columns: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.map(OutputHeader::csv_lines).unwrap_or_default();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| fmt_f64(*x)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

fn sigma_columns(n: usize) -> Vec<String> {
    std::iter::once("t".to_string())
        .chain((1..=n).map(|i| format!("sigma{i}")))
        .collect()
}

/// Columns `t, sigma1..sigman`.
pub fn trajectory_csv(header: Option<&OutputHeader>, traj: &ReducedTrajectory) -> String {
    let n = traj.states.first().map_or(0, |s| s.len());
    let rows: Vec<Vec<f64>> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, s)| std::iter::once(*t).chain(s.as_slice().iter().copied()).collect())
        .collect();
    csv_string(header, &sigma_columns(n), &rows)
}

/// Columns `t, sigma1..sigman` with Weyl-projected singular values.
pub fn simulation_csv(header: Option<&OutputHeader>, run: &SimulationResult) -> String {
    let n = run.singular_values.first().map_or(0, Vec::len);
    let rows: Vec<Vec<f64>> = run
        .times
        .iter()
        .zip(&run.singular_values)
        .map(|(t, s)| std::iter::once(*t).chain(s.iter().copied()).collect())
        .collect();
    csv_string(header, &sigma_columns(n), &rows)
}

/// Columns `epsilon, cost, x, transformed_cost`.
pub fn cost_curve_csv(header: Option<&OutputHeader>, curve: &CostCurve) -> String {
    let columns = ["epsilon", "cost", "x", "transformed_cost"].map(String::from);
    let rows: Vec<Vec<f64>> = (0..curve.epsilons.len())
        .map(|i| vec![curve.epsilons[i], curve.costs[i], curve.xs[i], curve.transformed[i]])
        .collect();
    csv_string(header, &columns, &rows)
}

/// Writes `contents` via a temporary sibling file and a rename, so a failed
/// run never leaves a partial file at `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Invalid(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_coupling(path: &Path) -> Result<CouplingHamiltonian> {
    read_json::<HamiltonianJson>(path)?.to_coupling()
}

pub fn read_state(path: &Path) -> Result<BipartiteState> {
    read_json::<StateJson>(path)?.to_state()
}

/// `{case, chi_or_state, max_drift, horizon, tolerance, pass}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizerReportJson {
    pub case: String,
    pub chi_or_state: serde_json::Value,
    pub max_drift: f64,
    pub horizon: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `{case, omega_star, bounds, brute_force, gap, budget, seed}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedLimitReportJson {
    pub case: String,
    pub omega_star: f64,
    pub bounds: Option<[f64; 2]>,
    pub brute_force: Option<f64>,
    pub gap: Option<f64>,
    pub budget: Option<crate::speed::Budget>,
    pub seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::reduced::integrate_reduced;
    use crate::bipartite::SchmidtVector;

    fn pauli_z() -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(1.0, 0.0), c64(-1.0, 0.0)]))
    }

    #[test]
    fn hamiltonian_round_trip() {
        let h = CouplingHamiltonian::new(2, 2, vec![(pauli_z(), pauli_z())]).unwrap();
        let text = serde_json::to_string(&HamiltonianJson::from_coupling(&h)).unwrap();
        let back: HamiltonianJson = serde_json::from_str(&text).unwrap();
        let h2 = back.to_coupling().unwrap();
        assert!(max_abs_diff(h.dense(), h2.dense()) < 1e-15);
    }

    #[test]
    fn nested_rows_accepted() {
        let text = r#"{"dims":[2,2],"terms":[{"A":[[[1,0],[0,0]],[[0,0],[-1,0]]],"B":[[1,0],[0,0],[0,0],[-1,0]]}]}"#;
        let h: HamiltonianJson = serde_json::from_str(text).unwrap();
        let h = h.to_coupling().unwrap();
        assert!((h.dense()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((h.dense()[(1, 1)].re + 1.0).abs() < 1e-15);
    }

    #[test]
    fn malformed_inputs_rejected() {
        let wrong_len = r#"{"dims":[2,2],"terms":[{"A":[[1,0]],"B":[[1,0],[0,0],[0,0],[1,0]]}]}"#;
        let h: HamiltonianJson = serde_json::from_str(wrong_len).unwrap();
        assert!(h.to_coupling().is_err());
        let non_herm = r#"{"dims":[2,2],"terms":[{"A":[[0,0],[1,0],[0,0],[0,0]],"B":[[1,0],[0,0],[0,0],[1,0]]}]}"#;
        let h: HamiltonianJson = serde_json::from_str(non_herm).unwrap();
        assert!(h.to_coupling().is_err());
        let s = StateJson {
            dims: [2, 2],
            amplitudes: vec![[1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
        };
        assert!(s.to_state().is_err());
    }

    #[test]
    fn state_round_trip() {
        let psi = BipartiteState::maximally_entangled(3);
        let back = StateJson::from_state(&psi).to_state().unwrap();
        assert!(max_abs_diff(psi.amplitudes(), back.amplitudes()) < 1e-15);
    }

    #[test]
    fn schedule_json() {
        let text = r#"[{"duration":0.5,"rotation":[0,1,0]},{"duration":0.25,"generator":[[0,1,0],[-1,0,0],[0,0,0]]}]"#;
        let segs: Vec<ScheduleSegmentJson> = serde_json::from_str(text).unwrap();
        let s = schedule_from_json(&segs).unwrap();
        assert_eq!(s.segments().len(), 2);
        assert!((s.end_time() - 0.75).abs() < 1e-15);
        let bad = r#"[{"duration":0.5,"generator":[[0,1],[1,0]]}]"#;
        let segs: Vec<ScheduleSegmentJson> = serde_json::from_str(bad).unwrap();
        assert!(schedule_from_json(&segs).is_err());
    }

    #[test]
    fn csv_format_is_fixed() {
        let header = OutputHeader {
            version: "0.1.0".into(),
            seed: 7,
            config_sha256: "abc".into(),
        };
        let s = csv_string(Some(&header), &["t".into(), "x".into()], &[vec![0.0, -0.0], vec![1.0 / 3.0, 1e-20]]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# version: 0.1.0");
        assert_eq!(lines[3], "t,x");
        assert_eq!(lines[4], "0.00000000000e0,0.00000000000e0");
        assert_eq!(lines[5], "3.33333333333e-1,1.00000000000e-20");
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
    }

    #[test]
    fn trajectory_csv_columns() {
        let sched = ControlSchedule::new()
            .then(1.0, ReducedControl::Rotation(Vector3::new(0.0, 1.0, 0.0)))
            .unwrap();
        let traj = integrate_reduced(&SchmidtVector::new(vec![0.0, 0.0, 1.0]).unwrap(), &sched, 1.0, 0.5).unwrap();
        let csv = trajectory_csv(None, &traj);
        assert!(csv.starts_with("t,sigma1,sigma2,sigma3\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("bpc-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("out.csv");
        write_atomic(&p, "a").unwrap();
        write_atomic(&p, "b").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "b");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
