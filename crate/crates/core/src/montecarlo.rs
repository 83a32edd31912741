//! Haar-random ensembles of bipartite pure states and stochastic
//! simulation of the test protocol.
//!
//! Sample `i` of a run with seed `s` always draws from ChaCha8 stream `i`
//! of key `s`, so results do not depend on the number of worker threads.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix};
use crate::operators::{HermitianOperator, Strategy};
use crate::separation::{bounds_rank, Bounds};
use crate::spectra::{e_r, PureState, SchmidtSpectrum};

pub const HISTOGRAM_BINS: usize = 60;
pub const DEFAULT_SAMPLES: usize = 10_000;

/// Independent generator for sample `index` of a seeded run.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random pure state on `d_a × d_b`: i.i.d. complex Gaussian
/// amplitudes, normalized.
pub fn haar_state(d_a: usize, d_b: usize, rng: &mut impl Rng) -> Result<PureState> {
    if d_a == 0 || d_b == 0 {
        return Err(invalid("local dimensions must be positive"));
    }
    PureState::normalized(gaussian(rng, d_a, d_b))
}

/// Schmidt spectrum of a Haar-random state, from the eigenvalues of the
/// reduced state instead of an SVD.
pub fn haar_spectrum(d_a: usize, d_b: usize, rng: &mut impl Rng) -> Result<SchmidtSpectrum> {
    if d_a == 0 || d_b == 0 {
        return Err(invalid("local dimensions must be positive"));
    }
    let x = gaussian(rng, d_a, d_b);
    let rho = if d_a <= d_b { &x * x.adjoint() } else { x.adjoint() * &x };
    let vals: Vec<f64> = hermitian_eigenvalues(&rho).into_iter().map(|v| v.max(0.0)).collect();
    let total: f64 = vals.iter().sum();
    SchmidtSpectrum::new(vals.into_iter().map(|v| v / total).collect())
}

/// Haar-random unitary (QR of a Gaussian matrix with phases fixed).
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let qr = gaussian(rng, d, d).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `U_r = 1 − E_r/(1 + s₀)`, an upper envelope of the LC bound.
pub fn u_r(spectrum: &SchmidtSpectrum, r: usize) -> Result<f64> {
    Ok(1.0 - e_r(spectrum, r)? / (1.0 + spectrum.s0()))
}

/// Counts in uniform bins over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(bins: usize) -> Self {
        Self { counts: vec![0; bins] }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn add(&mut self, x: f64) {
        let n = self.bins();
        let i = ((x.clamp(0.0, 1.0) * n as f64) as usize).min(n - 1);
        self.counts[i] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn edges(&self) -> Vec<f64> {
        let n = self.bins();
        (0..=n).map(|i| i as f64 / n as f64).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        let n = self.bins();
        (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
    }

    /// Probability densities, integrating to one.
    pub fn densities(&self) -> Vec<f64> {
        let total = self.total().max(1) as f64;
        let width = 1.0 / self.bins() as f64;
        self.counts.iter().map(|&c| c as f64 / (total * width)).collect()
    }
}

/// Fraction of samples outside `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutsideFractions {
    pub psep_lb: f64,
    pub psep_h: f64,
    pub plc_ub: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFraction {
    pub epsilon: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub d_a: usize,
    pub d_b: usize,
    pub r: usize,
    pub samples: usize,
    pub seed: u64,
    pub mean_psep_lb: f64,
    pub mean_psep_h: f64,
    pub mean_plc_ub: f64,
    pub mean_u_r: f64,
    pub mean_s0: f64,
    pub hist_psep_lb: Histogram,
    pub hist_psep_h: Histogram,
    pub hist_plc_ub: Histogram,
    /// Fractions of samples with `plc_ub ≥ 4(r+1)/(d+1) + ε`.
    pub tail_fractions: Vec<TailFraction>,
    /// Fractions outside `[(r+1)/(d+1), 4(r+1)/(d+1)]`.
    pub outside_bracket: OutsideFractions,
    /// Samples violating `plc_ub ≤ U_r` by more than `1e-12`.
    pub u_r_violations: usize,
}

impl EnsembleStats {
    /// `[(r+1)/(d+1), 4(r+1)/(d+1)]` with `d = min(d_a, d_b)`.
    pub fn bracket(&self) -> (f64, f64) {
        bracket(self.d_a.min(self.d_b), self.r)
    }

    pub fn means(&self) -> [f64; 3] {
        [self.mean_psep_lb, self.mean_psep_h, self.mean_plc_ub]
    }
}

pub fn bracket(d: usize, r: usize) -> (f64, f64) {
    let p = (r + 1) as f64 / (d + 1) as f64;
    (p, 4.0 * p)
}

pub const DEFAULT_EPSILONS: [f64; 5] = [0.0, 0.05, 0.1, 0.2, 0.3];

/// Spectra of `samples` Haar-random states on `d_a × d_b`, in sample order.
pub fn haar_spectra(d_a: usize, d_b: usize, samples: usize, seed: u64) -> Result<Vec<SchmidtSpectrum>> {
    (0..samples)
        .into_par_iter()
        .map(|i| haar_spectrum(d_a, d_b, &mut sample_rng(seed, i as u64)))
        .collect()
}

fn stats_from_spectra(
    spectra: &[SchmidtSpectrum],
    dims: (usize, usize),
    r: usize,
    seed: u64,
) -> Result<EnsembleStats> {
    if spectra.is_empty() {
        return Err(invalid("need at least one sample"));
    }
    let d = dims.0.min(dims.1);
    let (lo, hi) = bracket(d, r);
    let n = spectra.len() as f64;
    let mut sums = [0.0f64; 5];
    let mut hists = [
        Histogram::new(HISTOGRAM_BINS),
        Histogram::new(HISTOGRAM_BINS),
        Histogram::new(HISTOGRAM_BINS),
    ];
    let mut outside = [0usize; 3];
    let mut tails = vec![0usize; DEFAULT_EPSILONS.len()];
    let mut violations = 0;
    for s in spectra {
        let Bounds { psep_lb, psep_h, plc_ub } = bounds_rank(s, r)?;
        let u = u_r(s, r)?;
        let vals = [psep_lb, psep_h, plc_ub];
        for k in 0..3 {
            sums[k] += vals[k];
            hists[k].add(vals[k]);
            if vals[k] < lo - 1e-12 || vals[k] > hi + 1e-12 {
                outside[k] += 1;
            }
        }
        sums[3] += u;
        sums[4] += s.s0();
        for (t, eps) in tails.iter_mut().zip(DEFAULT_EPSILONS) {
            if plc_ub >= hi + eps {
                *t += 1;
            }
        }
        if plc_ub > u + 1e-12 {
            violations += 1;
        }
    }
    let [hist_psep_lb, hist_psep_h, hist_plc_ub] = hists;
    Ok(EnsembleStats {
        d_a: dims.0,
        d_b: dims.1,
        r,
        samples: spectra.len(),
        seed,
        mean_psep_lb: sums[0] / n,
        mean_psep_h: sums[1] / n,
        mean_plc_ub: sums[2] / n,
        mean_u_r: sums[3] / n,
        mean_s0: sums[4] / n,
        hist_psep_lb,
        hist_psep_h,
        hist_plc_ub,
        tail_fractions: DEFAULT_EPSILONS
            .iter()
            .zip(&tails)
            .map(|(&epsilon, &t)| TailFraction { epsilon, fraction: t as f64 / n })
            .collect(),
        outside_bracket: OutsideFractions {
            psep_lb: outside[0] as f64 / n,
            psep_h: outside[1] as f64 / n,
            plc_ub: outside[2] as f64 / n,
        },
        u_r_violations: violations,
    })
}

/// Ensemble statistics of the bounds for Haar-random states on `d × d`.
pub fn ensemble_stats(d: usize, r: usize, samples: usize, seed: u64) -> Result<EnsembleStats> {
    Ok(ensemble_stats_multi(d, &[r], samples, seed)?.remove(0))
}

/// Statistics for several `r` from one shared ensemble.
pub fn ensemble_stats_multi(
    d: usize,
    rs: &[usize],
    samples: usize,
    seed: u64,
) -> Result<Vec<EnsembleStats>> {
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    for &r in rs {
        if r == 0 || r >= d {
            return Err(Error::RankOutOfRange { r, max: d.saturating_sub(1) });
        }
    }
    let spectra = haar_spectra(d, d, samples, seed)?;
    rs.iter().map(|&r| stats_from_spectra(&spectra, (d, d), r, seed)).collect()
}

/// Empirical tail fraction next to the concentration bound
/// `2 exp(−D ε²/(50π))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub epsilon: f64,
    pub empirical: f64,
    pub bound: f64,
}

impl TailCheck {
    pub fn holds(&self) -> bool {
        self.empirical <= self.bound
    }
}

pub fn concentration_bound(total_dim: usize, epsilon: f64) -> f64 {
    2.0 * (-(total_dim as f64) * epsilon * epsilon / (50.0 * std::f64::consts::PI)).exp()
}

pub fn tail_check(
    d: usize,
    r: usize,
    epsilons: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<TailCheck>> {
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let spectra = haar_spectra(d, d, samples, seed)?;
    let (_, hi) = bracket(d, r);
    let ubs = spectra
        .iter()
        .map(|s| Ok(bounds_rank(s, r)?.plc_ub))
        .collect::<Result<Vec<f64>>>()?;
    Ok(epsilons
        .iter()
        .map(|&eps| {
            let hits = ubs.iter().filter(|&&u| u >= hi + eps).count();
            TailCheck {
                epsilon: eps,
                empirical: hits as f64 / samples as f64,
                bound: concentration_bound(d * d, eps),
            }
        })
        .collect())
}

/// Outcomes of `n` rounds of a strategy applied to copies of `σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTrace {
    /// 1 for pass, 0 for fail.
    pub outcomes: Vec<u8>,
    pub n_tests: usize,
    pub strategy_id: String,
    pub true_state: String,
    pub seed: u64,
}

impl ProtocolTrace {
    pub fn passes(&self) -> usize {
        self.outcomes.iter().filter(|&&o| o == 1).count()
    }

    pub fn pass_rate(&self) -> f64 {
        self.passes() as f64 / self.n_tests.max(1) as f64
    }

    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|&o| o == 1)
    }
}

/// Per-test passing probabilities `tr(T_l σ)`, clamped to `[0,1]`.
pub fn test_pass_probabilities(strategy: &Strategy, sigma: &HermitianOperator) -> Result<Vec<f64>> {
    strategy
        .tests()
        .iter()
        .map(|t| Ok(t.operator.trace_with(sigma)?.clamp(0.0, 1.0)))
        .collect()
}

fn run_rounds(
    weights: &WeightedIndex<f64>,
    pass: &[f64],
    n: usize,
    rng: &mut impl Rng,
) -> Vec<u8> {
    (0..n)
        .map(|_| {
            let l = weights.sample(rng);
            u8::from(rng.random::<f64>() < pass[l])
        })
        .collect()
}

fn prepare(strategy: &Strategy, sigma: &HermitianOperator) -> Result<(WeightedIndex<f64>, Vec<f64>)> {
    if sigma.dim() != strategy.operator().dim() {
        return Err(Error::DimensionMismatch("state and strategy sizes differ".into()));
    }
    let weights = WeightedIndex::new(strategy.tests().iter().map(|t| t.weight))
        .map_err(|e| invalid(format!("bad test weights: {e}")))?;
    Ok((weights, test_pass_probabilities(strategy, sigma)?))
}

/// Each round picks test `l` with probability `p_l` and passes with
/// probability `tr(T_l σ)`.
pub fn simulate_protocol(
    strategy: &Strategy,
    sigma: &HermitianOperator,
    n: usize,
    seed: u64,
    labels: (&str, &str),
) -> Result<ProtocolTrace> {
    let (weights, pass) = prepare(strategy, sigma)?;
    let outcomes = run_rounds(&weights, &pass, n, &mut sample_rng(seed, 0));
    Ok(ProtocolTrace {
        outcomes,
        n_tests: n,
        strategy_id: labels.0.to_string(),
        true_state: labels.1.to_string(),
        seed,
    })
}

/// Fraction of `traces` independent runs of length `n` in which every
/// round passed.
pub fn all_pass_frequency(
    strategy: &Strategy,
    sigma: &HermitianOperator,
    n: usize,
    traces: usize,
    seed: u64,
) -> Result<f64> {
    if traces == 0 {
        return Err(invalid("need at least one trace"));
    }
    let (weights, pass) = prepare(strategy, sigma)?;
    let hits = (0..traces)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = sample_rng(seed, i as u64);
            run_rounds(&weights, &pass, n, &mut rng).iter().all(|&o| o == 1)
        })
        .count();
    Ok(hits as f64 / traces as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{omega_mub, target_state};
    use crate::separation::adversarial_state;
    use crate::spectra::schmidt_spectrum;

    #[test]
    fn haar_state_basics() {
        let s = haar_state(1, 4, &mut sample_rng(1, 0)).unwrap();
        assert_eq!(schmidt_spectrum(&s).unwrap().values(), &[1.0]);
        let a = haar_state(3, 3, &mut sample_rng(7, 2)).unwrap();
        let b = haar_state(3, 3, &mut sample_rng(7, 2)).unwrap();
        assert_eq!(a, b);
        let c = haar_state(3, 3, &mut sample_rng(7, 3)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn spectrum_shortcut_matches_svd() {
        for i in 0..20 {
            let x = haar_spectrum(4, 6, &mut sample_rng(5, i)).unwrap();
            let y = schmidt_spectrum(&haar_state(4, 6, &mut sample_rng(5, i)).unwrap()).unwrap();
            for (a, b) in x.values().iter().zip(y.values()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let u = haar_unitary(5, &mut sample_rng(3, 0));
        let id = CMatrix::identity(5, 5);
        assert!(crate::linalg::max_abs_diff(&(u.adjoint() * &u), &id) < 1e-12);
    }

    #[test]
    fn histogram_binning() {
        let mut h = Histogram::new(4);
        for x in [0.0, 0.1, 0.3, 0.999, 1.0] {
            h.add(x);
        }
        assert_eq!(h.counts, vec![2, 1, 0, 2]);
        let integral: f64 = h.densities().iter().map(|d| d * 0.25).sum();
        assert!((integral - 1.0).abs() < 1e-12);
        assert_eq!(h.edges().len(), 5);
    }

    #[test]
    fn small_ensemble() {
        let st = ensemble_stats(6, 2, 500, 11).unwrap();
        assert_eq!(st.samples, 500);
        assert_eq!(st.u_r_violations, 0);
        assert!(st.mean_psep_lb <= st.mean_psep_h && st.mean_psep_h <= st.mean_plc_ub);
        assert!(st.mean_plc_ub <= st.mean_u_r + 1e-12);
        assert_eq!(st.hist_plc_ub.total(), 500);
        let again = ensemble_stats(6, 2, 500, 11).unwrap();
        assert_eq!(st, again);
        assert!(ensemble_stats(6, 6, 10, 1).is_err());
        let r5 = ensemble_stats(6, 5, 50, 1).unwrap();
        assert!(r5.means().iter().all(|&m| m <= 1.0));
    }

    #[test]
    fn tail_bounds() {
        let t = tail_check(10, 1, &[0.0, 0.3], 200, 4).unwrap();
        assert!((t[0].bound - 2.0).abs() < 1e-15);
        assert!((t[1].bound - 2.0 * (-9.0 / (50.0 * std::f64::consts::PI)).exp()).abs() < 1e-15);
        assert!(t.iter().all(TailCheck::holds));
    }

    #[test]
    fn protocol_runs() {
        let u = SchmidtSpectrum::uniform(4).unwrap();
        let st = omega_mub(&u).unwrap();
        let target = HermitianOperator::projector(&target_state(&u, 4).unwrap().vector());
        let tr = simulate_protocol(&st, &target, 1000, 3, ("mub", "target")).unwrap();
        assert!(tr.all_passed());
        assert_eq!(tr.outcomes.len(), 1000);
        let adv = adversarial_state(&u, 1, 0.0).unwrap();
        let sigma = HermitianOperator::projector(&adv.vector());
        let tr = simulate_protocol(&st, &sigma, 20_000, 3, ("mub", "adversary")).unwrap();
        let sd = (0.625f64 * 0.375 / 20_000.0).sqrt();
        assert!((tr.pass_rate() - 0.625).abs() < 4.0 * sd);
        let f = all_pass_frequency(&st, &sigma, 10, 2000, 9).unwrap();
        assert!(f < 0.02);
    }
}
