//! Multi-start alternating maximization of `⟨Υ|Ω|Υ⟩` over pure states of
//! bounded Schmidt rank or bounded `E_r`.
//!
//! Every value returned is attained by the reported witness, so it is a
//! lower bound on the true maximum.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, top_eigenpair, CMatrix, CVector};
use crate::operators::HermitianOperator;
use crate::spectra::{e_r, schmidt_spectrum, PureState, SchmidtSpectrum};

/// Slack allowed when asserting that an ascent step did not decrease the
/// objective.
pub const MONOTONE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub restarts: usize,
    pub grid_points: usize,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            grid_points: 64,
            max_iterations: 1000,
            convergence_tol: 1e-12,
            seed: 0,
        }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(invalid("restarts must be at least 1"));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(invalid("convergence_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Every accepted step was an ascent step (within [`MONOTONE_TOL`]).
    pub monotone: bool,
    pub witness_spectrum: SchmidtSpectrum,
    pub witness: PureState,
}

struct Run {
    value: f64,
    converged: bool,
    iterations: usize,
    monotone: bool,
    coeffs: CMatrix,
}

fn check_dims(op: &HermitianOperator, dims: (usize, usize)) -> Result<()> {
    if dims.0 == 0 || dims.1 == 0 || dims.0 * dims.1 != op.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}×{} does not match operator dimension {}",
            dims.0,
            dims.1,
            op.dim()
        )));
    }
    Ok(())
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn orthonormal_columns(m: CMatrix) -> CMatrix {
    m.qr().q()
}

fn vec_of(x: &CMatrix) -> CVector {
    let (da, db) = x.shape();
    CVector::from_fn(da * db, |i, _| x[(i / db, i % db)])
}

fn mat_of(v: &CVector, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(da, db, |j, k| v[j * db + k])
}

/// Isometry `(a_1,…,a_r) ↦ Σ_i a_i ⊗ b_i` for orthonormal columns `b_i`,
/// with `a` indexed as `i·d_a + j`.
fn left_isometry(b: &CMatrix, da: usize) -> CMatrix {
    let (db, r) = b.shape();
    let mut l = CMatrix::zeros(da * db, da * r);
    for i in 0..r {
        for j in 0..da {
            for k in 0..db {
                l[(j * db + k, i * da + j)] = b[(k, i)];
            }
        }
    }
    l
}

/// Isometry `(c_1,…,c_r) ↦ Σ_i a_i ⊗ c_i` for orthonormal columns `a_i`,
/// with `c` indexed as `i·d_b + k`.
fn right_isometry(a: &CMatrix, db: usize) -> CMatrix {
    let (da, r) = a.shape();
    let mut l = CMatrix::zeros(da * db, db * r);
    for i in 0..r {
        for j in 0..da {
            for k in 0..db {
                l[(j * db + k, i * db + k)] = a[(j, i)];
            }
        }
    }
    l
}

/// Best state of the form `Σ_i a_i ⊗ b_i` over the free factor.
fn restricted_max(op: &CMatrix, iso: &CMatrix) -> (f64, CVector) {
    let reduced = iso.adjoint() * op * iso;
    let reduced = (&reduced + reduced.adjoint()) * c(0.5);
    let (val, x) = top_eigenpair(&reduced);
    (val, iso * x)
}

/// Truncated factorization `X ≈ U_r S_r V_r^†`: returns `(U_r, conj V_r)`
/// as orthonormal factors.
fn factors(x: &CMatrix, r: usize) -> (CMatrix, CMatrix) {
    let svd = x.clone().svd(true, true);
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let r = r.min(order.len());
    let a = CMatrix::from_fn(u.nrows(), r, |j, i| u[(j, order[i])]);
    // X[j,k] = Σ s_i u_i[j] v_t[i,k], so the Bob factors are rows of v_t
    let b = CMatrix::from_fn(v_t.ncols(), r, |k, i| v_t[(order[i], k)]);
    (a, b)
}

fn seesaw(op: &CMatrix, dims: (usize, usize), r: usize, start_b: CMatrix, cfg: &OracleConfig) -> Run {
    let (da, db) = dims;
    let mut b = start_b;
    let (mut value, mut v) = restricted_max(op, &left_isometry(&b, da));
    let mut monotone = true;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let x = mat_of(&v, da, db);
        let (a, _) = factors(&x, r);
        let (v1, w) = restricted_max(op, &right_isometry(&a, db));
        let (_, b1) = factors(&mat_of(&w, da, db), r);
        let (v2, w2) = restricted_max(op, &left_isometry(&b1, da));
        if v1 < value - MONOTONE_TOL || v2 < v1 - MONOTONE_TOL {
            monotone = false;
        }
        let gain = v2 - value;
        b = b1;
        if v2 >= value {
            value = v2;
            v = w2;
        }
        if gain.abs() < cfg.convergence_tol {
            converged = true;
            break;
        }
    }
    let _ = b;
    Run {
        value,
        converged,
        iterations,
        monotone,
        coeffs: mat_of(&v, da, db),
    }
}

fn best_run(runs: Vec<Run>) -> Result<OracleReport> {
    let mut best: Option<Run> = None;
    let mut monotone = true;
    let mut iterations = 0;
    for run in runs {
        monotone &= run.monotone;
        iterations = iterations.max(run.iterations);
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.ok_or_else(|| Error::Numerical("no oracle runs".into()))?;
    let witness = PureState::normalized(best.coeffs)?;
    Ok(OracleReport {
        value: best.value,
        converged: best.converged,
        iterations,
        monotone,
        witness_spectrum: schmidt_spectrum(&witness)?,
        witness,
    })
}

fn rank_runs(
    op: &HermitianOperator,
    dims: (usize, usize),
    r: usize,
    cfg: &OracleConfig,
    extra_starts: Vec<CMatrix>,
) -> Vec<Run> {
    let m = op.entries();
    let random: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
            let b = orthonormal_columns(gaussian_matrix(&mut rng, dims.1, r));
            seesaw(m, dims, r, b, cfg)
        })
        .collect();
    let seeded = extra_starts.into_iter().map(|b| seesaw(m, dims, r, b, cfg));
    random.into_iter().chain(seeded).collect()
}

/// Maximum of `⟨Υ|Ω|Υ⟩` over pure states of Schmidt rank at most `r`.
pub fn max_rank_r(
    op: &HermitianOperator,
    dims: (usize, usize),
    r: usize,
    cfg: &OracleConfig,
) -> Result<OracleReport> {
    check_dims(op, dims)?;
    cfg.validate()?;
    let max_r = dims.0.min(dims.1);
    if r == 0 || r > max_r {
        return Err(Error::RankOutOfRange { r, max: max_r });
    }
    if r == max_r {
        let (value, v) = top_eigenpair(op.entries());
        let witness = PureState::from_vector(&v, dims.0, dims.1)?;
        return Ok(OracleReport {
            value,
            converged: true,
            iterations: 0,
            monotone: true,
            witness_spectrum: schmidt_spectrum(&witness)?,
            witness,
        });
    }
    best_run(rank_runs(op, dims, r, cfg, Vec::new()))
}

/// Maximum over product states. For two qubits the alternating search is
/// additionally started from the best point of a real-angle grid.
pub fn max_product(
    op: &HermitianOperator,
    dims: (usize, usize),
    cfg: &OracleConfig,
) -> Result<OracleReport> {
    check_dims(op, dims)?;
    cfg.validate()?;
    let mut starts = Vec::new();
    if dims == (2, 2) && cfg.grid_points > 0 {
        let n = cfg.grid_points;
        let angle = |i: usize| std::f64::consts::PI * i as f64 / n as f64;
        let real = |a: f64| CVector::from_vec(vec![c(a.cos()), c(a.sin())]);
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..n {
            for j in 0..n {
                let v = real(angle(i)).kronecker(&real(angle(j)));
                let val = op.expectation(&v);
                if val > best.0 {
                    best = (val, angle(j));
                }
            }
        }
        let b = real(best.1);
        starts.push(CMatrix::from_column_slice(2, 1, b.as_slice()));
    }
    best_run(rank_runs(op, dims, 1, cfg, starts))
}

/// Rescales the Schmidt coefficients so that `E_r ≤ e`: the tail is scaled
/// down proportionally and the head absorbs the difference.
fn project_limited(x: &CMatrix, r: usize, e: f64) -> CMatrix {
    let svd = x.clone().svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let weights: Vec<f64> = order.iter().map(|&i| sv[i] * sv[i]).collect();
    let total: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let tail: f64 = weights[r..].iter().sum();
    let scaled: Vec<f64> = if tail <= e {
        weights
    } else {
        weights
            .iter()
            .enumerate()
            .map(|(j, w)| if j < r { w * (1.0 - e) / (1.0 - tail) } else { w * e / tail })
            .collect()
    };
    let mut out = CMatrix::zeros(x.nrows(), x.ncols());
    for (pos, &i) in order.iter().enumerate() {
        let s = c(scaled[pos].sqrt());
        out += u.column(i) * v_t.row(i) * s;
    }
    out
}

fn limited_ascent(
    op: &CMatrix,
    dims: (usize, usize),
    r: usize,
    e: f64,
    start: CMatrix,
    cfg: &OracleConfig,
) -> Run {
    let (da, db) = dims;
    let mut x = project_limited(&start, r, e);
    let mut v = vec_of(&x).normalize();
    let mut value = crate::linalg::expectation(op, &v);
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let grad = op * &v;
        let trial = &v + grad * c(step);
        let projected = project_limited(&mat_of(&trial, da, db), r, e);
        let w = vec_of(&projected).normalize();
        let val = crate::linalg::expectation(op, &w);
        if val > value {
            let gain = val - value;
            value = val;
            v = w;
            x = projected;
            step = (step * 2.0).min(1e6);
            if gain < cfg.convergence_tol {
                converged = true;
                break;
            }
        } else {
            step *= 0.5;
            if step < 1e-12 {
                converged = true;
                break;
            }
        }
    }
    let _ = x;
    Run {
        value,
        converged,
        iterations,
        monotone: true,
        coeffs: mat_of(&v, da, db),
    }
}

/// Maximum over pure states with `E_r ≤ e`, by projected ascent from the
/// top eigenvector and from random starts.
pub fn max_limited(
    op: &HermitianOperator,
    dims: (usize, usize),
    r: usize,
    e: f64,
    cfg: &OracleConfig,
) -> Result<OracleReport> {
    check_dims(op, dims)?;
    cfg.validate()?;
    let max_r = dims.0.min(dims.1);
    if r == 0 || r >= max_r {
        return Err(Error::RankOutOfRange { r, max: max_r - 1 });
    }
    if !(e >= 0.0) {
        return Err(invalid(format!("E must be nonnegative, got {e}")));
    }
    let m = op.entries();
    let (_, top) = top_eigenpair(m);
    let mut runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
            let start = gaussian_matrix(&mut rng, dims.0, dims.1);
            limited_ascent(m, dims, r, e, start, cfg)
        })
        .collect();
    runs.push(limited_ascent(m, dims, r, e, mat_of(&top, dims.0, dims.1), cfg));
    let report = best_run(runs)?;
    let tail = e_r(&report.witness_spectrum, r)?;
    if tail > e + 1e-9 {
        return Err(Error::Numerical(format!("witness violates E_r ≤ {e} ({tail})")));
    }
    Ok(report)
}

/// Real-valued matrix helper used by tests of the factorization routines.
#[doc(hidden)]
pub fn reconstruct(a: &CMatrix, b: &CMatrix, weights: &[f64]) -> CMatrix {
    let s = DMatrix::from_diagonal(&CVector::from_iterator(weights.len(), weights.iter().map(|&w| c(w))));
    a * s * b.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{omega_mub, omega_opt, omega_sep_h, target_state};
    use crate::spectra::fidelity_limited;
    use crate::twoqubit::omega_family;

    fn cfg() -> OracleConfig {
        OracleConfig { restarts: 8, ..Default::default() }
    }

    #[test]
    fn factors_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = gaussian_matrix(&mut rng, 3, 4);
        let (a, b) = factors(&x, 3);
        let sv = x.clone().svd(false, false).singular_values;
        let mut s: Vec<f64> = sv.iter().copied().collect();
        s.sort_by(|p, q| q.total_cmp(p));
        let back = reconstruct(&a, &b, &s);
        assert!(crate::linalg::max_abs_diff(&back, &x) < 1e-12);
    }

    #[test]
    fn product_examples() {
        let r = max_product(&omega_opt(2).unwrap(), (2, 2), &cfg()).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-8);
        assert!(r.monotone);
        let r = max_product(&omega_family(0.3, 0.0).unwrap(), (2, 2), &cfg()).unwrap();
        assert!((r.value - 0.3f64.cos().powi(2)).abs() < 1e-8);
        let s = SchmidtSpectrum::new(vec![0.7, 0.3]).unwrap();
        let proj = HermitianOperator::projector(&target_state(&s, 2).unwrap().vector());
        let r = max_product(&proj, (2, 2), &cfg()).unwrap();
        assert!((r.value - 0.7).abs() < 1e-8);
        assert_eq!(r.witness.schmidt_rank(1e-6).unwrap(), 1);
    }

    #[test]
    fn rank_examples() {
        let r = max_rank_r(&omega_opt(4).unwrap(), (4, 4), 2, &cfg()).unwrap();
        assert!((r.value - 0.6).abs() < 1e-6);
        assert!(r.witness.schmidt_rank(1e-6).unwrap() <= 2);
        let r = max_rank_r(&omega_opt(3).unwrap(), (3, 3), 3, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let mub = omega_mub(&SchmidtSpectrum::uniform(3).unwrap()).unwrap();
        let r = max_rank_r(mub.operator(), (3, 3), 1, &cfg()).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-6);
        assert!(max_rank_r(&omega_opt(3).unwrap(), (3, 3), 4, &cfg()).is_err());
        assert!(max_rank_r(&omega_opt(3).unwrap(), (2, 4), 1, &cfg()).is_err());
    }

    #[test]
    fn limited_examples() {
        let r = max_limited(&omega_opt(4).unwrap(), (4, 4), 1, 0.25, &cfg()).unwrap();
        assert!((r.value - 0.8).abs() < 1e-5, "{}", r.value);
        assert!(e_r(&r.witness_spectrum, 1).unwrap() <= 0.25 + 1e-9);

        let s = SchmidtSpectrum::new(vec![0.5, 0.3, 0.2]).unwrap();
        let op = omega_sep_h(&s);
        let g = (0.5f64 * 0.3).sqrt();
        let beta = g / (1.0 + g);
        for (rr, e) in [(1, 0.1), (2, 0.05), (1, 0.3)] {
            let r = max_limited(&op, (3, 3), rr, e, &cfg()).unwrap();
            let want = (1.0 - beta) * fidelity_limited(&s, rr, e).unwrap() + beta;
            assert!((r.value - want).abs() < 1e-6, "{rr} {e}: {} vs {want}", r.value);
        }
        // constraint inactive: top eigenvalue
        let r = max_limited(&op, (3, 3), 1, 0.6, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_given_seed() {
        let op = omega_mub(&SchmidtSpectrum::new(vec![0.6, 0.3, 0.1]).unwrap()).unwrap();
        let a = max_rank_r(op.operator(), (3, 3), 1, &cfg()).unwrap();
        let b = max_rank_r(op.operator(), (3, 3), 1, &cfg()).unwrap();
        assert_eq!(a, b);
    }
}
