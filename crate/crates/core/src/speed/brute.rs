use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bipartite::{CouplingHamiltonian, LocalUnitary};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::reduced::induced_field;

/// Quantity maximized over local unitaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// `|(H_U)_21|` for `dmin = 2`.
    AngularVelocity,
    /// `‖ω‖_1` of the rotation vector for `dmin = 3`.
    OneNorm,
    /// `|Im⟨s_12| U^*HU |s_34⟩|` for two four-level systems.
    Fermionic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub restarts: usize,
    pub samples: usize,
    pub iterations: usize,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            restarts: 8,
            samples: 200,
            iterations: 4000,
            seed: 0,
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BruteForceResult {
    pub value: f64,
    pub unitary: LocalUnitary,
    pub evaluations: usize,
}

/// Objective value at `U`.
pub fn objective_value(h0: &CouplingHamiltonian, u: &LocalUnitary, objective: Objective) -> Result<f64> {
    match objective {
        Objective::AngularVelocity => {
            let f = induced_field(h0, u)?;
            f.angular_velocity().map(f64::abs).ok_or_else(|| {
                Error::Unsupported("angular velocity needs dmin = 2".into())
            })
        }
        Objective::OneNorm => {
            let f = induced_field(h0, u)?;
            f.rotation_vector()
                .map(|w| w.abs().sum())
                .ok_or_else(|| Error::Unsupported("1-norm objective needs dmin = 3".into()))
        }
        Objective::Fermionic => {
            if h0.dims() != (4, 4) {
                return Err(Error::Unsupported("fermionic objective needs d = 4".into()));
            }
            Ok(fermionic_pair_rate(h0, u).abs())
        }
    }
}

/// `Im⟨s_12|(U^*HU)|s_34⟩` with `s_ab` antisymmetrized levels; for `A ⊗ A`
/// this is `Im(a_13 a_24 - a_14 a_23)`.
fn fermionic_pair_rate(h0: &CouplingHamiltonian, u: &LocalUnitary) -> f64 {
    let vd = u.v().adjoint();
    let wd = u.w().adjoint();
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for (a, b) in h0.terms() {
        let at = &vd * a * u.v();
        let bt = &wd * b * u.w();
        acc += (at[(0, 2)] * bt[(1, 3)] - at[(0, 3)] * bt[(1, 2)] - at[(1, 2)] * bt[(0, 3)]
            + at[(1, 3)] * bt[(0, 2)])
            * 0.5;
    }
    acc.im
}

/// Best objective over Haar samples refined by random-tangent hill climbing
/// with geometric step decay. Restarts run in parallel on `budget.jobs`
/// threads; each restart has its own ChaCha stream so results do not depend
/// on the thread count.
pub fn brute_force_speed(
    h0: &CouplingHamiltonian,
    objective: Objective,
    symmetric: bool,
    budget: &Budget,
) -> Result<BruteForceResult> {
    if budget.restarts == 0 || budget.samples == 0 {
        return Err(Error::Invalid("brute-force budget must be positive".into()));
    }
    let (d1, d2) = h0.dims();
    if symmetric && d1 != d2 {
        return Err(Error::DimensionMismatch("symmetric search needs d1 = d2".into()));
    }
    objective_value(h0, &LocalUnitary::identity(d1, d2), objective)?;

    let run = |restart: usize| -> Result<BruteForceResult> {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        rng.set_stream(restart as u64);
        let sample = |rng: &mut ChaCha8Rng| {
            let v = linalg::haar_unitary(d1, rng);
            let w = if symmetric { v.clone() } else { linalg::haar_unitary(d2, rng) };
            LocalUnitary { v, w }
        };
        let mut best = sample(&mut rng);
        let mut best_val = objective_value(h0, &best, objective)?;
        let mut evals = 1;
        for _ in 1..budget.samples {
            let u = sample(&mut rng);
            let val = objective_value(h0, &u, objective)?;
            evals += 1;
            if val > best_val {
                best = u;
                best_val = val;
            }
        }
        let mut step = 0.3;
        let mut fails = 0;
        for _ in 0..budget.iterations {
            let kv = unit_hermitian(d1, &mut rng);
            let v = &best.v * linalg::expm_hermitian(&kv, -step);
            let w = if symmetric {
                v.clone()
            } else {
                let kw = unit_hermitian(d2, &mut rng);
                &best.w * linalg::expm_hermitian(&kw, -step)
            };
            let cand = LocalUnitary { v, w };
            let val = objective_value(h0, &cand, objective)?;
            evals += 1;
            if val > best_val {
                best = cand;
                best_val = val;
                fails = 0;
            } else {
                fails += 1;
                if fails >= 12 {
                    step *= 0.5;
                    fails = 0;
                    if step < 1e-9 {
                        break;
                    }
                }
            }
        }
        Ok(BruteForceResult {
            value: best_val,
            unitary: best,
            evaluations: evals,
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(budget.jobs.max(1))
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let results: Vec<Result<BruteForceResult>> =
        pool.install(|| (0..budget.restarts).into_par_iter().map(run).collect());

    let mut best: Option<BruteForceResult> = None;
    let mut total = 0;
    for r in results {
        let r = r?;
        total += r.evaluations;
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    let mut best = best.expect("at least one restart");
    best.evaluations = total;
    Ok(best)
}

fn unit_hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let k = linalg::random_hermitian(d, rng);
    let n = linalg::frobenius(&k);
    k / num_complex::Complex64::new(n, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::coupling_from_coefficients;
    use crate::linalg::RMatrix;

    fn small() -> Budget {
        Budget {
            restarts: 2,
            samples: 20,
            iterations: 1500,
            seed: 5,
            jobs: 1,
        }
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let h = CouplingHamiltonian::zero(2, 2);
        let r = brute_force_speed(&h, Objective::AngularVelocity, false, &small()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn ising_plus_xx_reaches_two() {
        let c = RMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 0.0]));
        let h = coupling_from_coefficients(&c, 2, 2).unwrap();
        let r = brute_force_speed(&h, Objective::AngularVelocity, false, &small()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-3 && r.value <= 2.0 + 1e-9);
    }

    #[test]
    fn deterministic_across_job_counts() {
        let c = RMatrix::from_row_slice(3, 3, &[0.3, 0.1, 0.0, -0.2, 0.8, 0.1, 0.0, 0.4, -0.5]);
        let h = coupling_from_coefficients(&c, 2, 2).unwrap();
        let a = brute_force_speed(&h, Objective::AngularVelocity, false, &small()).unwrap();
        let b = brute_force_speed(&h, Objective::AngularVelocity, false, &Budget { jobs: 3, ..small() }).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn zero_budget_rejected() {
        let h = CouplingHamiltonian::zero(2, 2);
        let b = Budget { restarts: 0, ..small() };
        assert!(brute_force_speed(&h, Objective::AngularVelocity, false, &b).is_err());
    }

    #[test]
    fn objective_dimension_checks() {
        let h = CouplingHamiltonian::zero(3, 3);
        assert!(brute_force_speed(&h, Objective::AngularVelocity, false, &small()).is_err());
    }
}
