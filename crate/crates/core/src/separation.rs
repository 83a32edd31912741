//! Separation probabilities, the bounds sandwich for generic targets,
//! adversarial states and test-count planning.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, CMatrix};
use crate::operators::HermitianOperator;
use crate::spectra::{e_r, fidelity_limited, PureState, SchmidtSpectrum};

/// Passing probabilities at or above this are treated as one.
pub const CERTAINTY_TOL: f64 = 1e-12;
/// Relative slack in `P^N ≤ δ`, so that exact boundary cases such as
/// `P = 0.1, δ = 0.01` are not lost to rounding.
pub const BOUNDARY_RTOL: f64 = 1e-12;

/// Set of "bad" states the protocol must reject.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum AdversarySet {
    /// Schmidt number at most `r`.
    SchmidtRank { r: usize },
    /// `E_r ≤ e`.
    LimitedEr { r: usize, e: f64 },
}

impl AdversarySet {
    pub fn r(&self) -> usize {
        match *self {
            AdversarySet::SchmidtRank { r } | AdversarySet::LimitedEr { r, .. } => r,
        }
    }

    pub fn e(&self) -> f64 {
        match *self {
            AdversarySet::SchmidtRank { .. } => 0.0,
            AdversarySet::LimitedEr { e, .. } => e,
        }
    }

    /// Checks `1 ≤ r ≤ d−1` and `0 ≤ E < E_r(target)`.
    pub fn validate(&self, spectrum: &SchmidtSpectrum) -> Result<()> {
        let tail = e_r(spectrum, self.r())?;
        let e = self.e();
        if !(e >= 0.0) {
            return Err(invalid(format!("E must be nonnegative, got {e}")));
        }
        if tail <= 0.0 {
            return Err(Error::Infeasible(format!(
                "target has Schmidt rank at most r = {}",
                self.r()
            )));
        }
        if e >= tail {
            return Err(Error::Infeasible(format!(
                "E = {e} is not below E_r(target) = {tail}"
            )));
        }
        Ok(())
    }
}

/// Strategies with known separation probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyId {
    /// 2-design strategy for the maximally entangled state.
    Opt,
    /// Two-test Fourier strategy.
    Mub,
    /// Optimal separable homogeneous operator.
    SepH,
    /// Local homogeneous operator.
    LcH,
}

impl StrategyId {
    pub fn describe(&self) -> &'static str {
        match self {
            StrategyId::Opt => "homogeneous 2-design strategy, beta = 1/(d+1)",
            StrategyId::Mub => "two mutually unbiased basis tests, beta = 1/2",
            StrategyId::SepH => {
                "separable homogeneous operator, beta = sqrt(s0 s1)/(1+sqrt(s0 s1))"
            }
            StrategyId::LcH => "local homogeneous operator, beta = (s0+s1)/(2+s0+s1)",
        }
    }

    /// Spectral gap parameter β of the strategy for this target.
    pub fn beta(&self, spectrum: &SchmidtSpectrum) -> Result<f64> {
        match self {
            StrategyId::Opt => {
                if !spectrum.is_uniform(1e-9) {
                    return Err(invalid(
                        "the 2-design strategy verifies only maximally entangled targets",
                    ));
                }
                Ok(1.0 / (spectrum.dim() as f64 + 1.0))
            }
            StrategyId::Mub => Ok(0.5),
            StrategyId::SepH => {
                let g = (spectrum.s0() * spectrum.s1()).sqrt();
                Ok(g / (1.0 + g))
            }
            StrategyId::LcH => {
                let a = spectrum.s0() + spectrum.s1();
                Ok(a / (2.0 + a))
            }
        }
    }

    /// Separation probability `ν·f_r(Ψ,E) + β`; exact for these strategies
    /// since the worst case is attained by the adversarial state.
    pub fn separation_probability(
        &self,
        spectrum: &SchmidtSpectrum,
        adversary: &AdversarySet,
    ) -> Result<f64> {
        let beta = self.beta(spectrum)?;
        if *self == StrategyId::Opt {
            return sep_prob_mes_limited(spectrum.dim(), adversary.r(), adversary.e());
        }
        let f = fidelity_limited(spectrum, adversary.r(), adversary.e())?;
        Ok((1.0 - beta) * f + beta)
    }
}

impl std::str::FromStr for StrategyId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "opt" => Ok(StrategyId::Opt),
            "mub" => Ok(StrategyId::Mub),
            "seph" | "sep_h" => Ok(StrategyId::SepH),
            "lch" | "lc_h" => Ok(StrategyId::LcH),
            other => Err(invalid(format!("unknown strategy '{other}'"))),
        }
    }
}

/// Test budget for certifying one target against one adversary set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationPlan {
    pub spectrum: SchmidtSpectrum,
    pub adversary: AdversarySet,
    pub delta: f64,
    pub strategy_id: StrategyId,
    pub separation_probability: f64,
    pub tests_required: u64,
}

pub fn plan(
    spectrum: &SchmidtSpectrum,
    adversary: AdversarySet,
    delta: f64,
    strategy_id: StrategyId,
) -> Result<CertificationPlan> {
    adversary.validate(spectrum)?;
    let p = strategy_id.separation_probability(spectrum, &adversary)?;
    let n = tests_required(p, delta)?;
    Ok(CertificationPlan {
        spectrum: spectrum.clone(),
        adversary,
        delta,
        strategy_id,
        separation_probability: p,
        tests_required: n,
    })
}

fn check_mes_rank(d: usize, r: usize) -> Result<()> {
    if r == 0 || r >= d {
        return Err(Error::RankOutOfRange { r, max: d.saturating_sub(1) });
    }
    Ok(())
}

/// `(r+1)/(d+1)` for the maximally entangled state against Schmidt number `r`.
pub fn sep_prob_mes_rank(d: usize, r: usize) -> Result<f64> {
    check_mes_rank(d, r)?;
    Ok((r + 1) as f64 / (d + 1) as f64)
}

/// Exact rational evaluation of `ν·F + β` for the 2-design strategy, with
/// `F = r/d`, `β = 1/(d+1)`.
pub fn sep_prob_mes_rank_exact(d: usize, r: usize) -> Result<Ratio<u64>> {
    check_mes_rank(d, r)?;
    let (d, r) = (d as u64, r as u64);
    let beta = Ratio::new(1, d + 1);
    let nu = Ratio::from_integer(1) - beta;
    Ok(nu * Ratio::new(r, d) + beta)
}

/// Separation probability of the maximally entangled state against
/// `E_r ≤ e`.
pub fn sep_prob_mes_limited(d: usize, r: usize, e: f64) -> Result<f64> {
    check_mes_rank(d, r)?;
    let bound = (d - r) as f64 / d as f64;
    if !(e >= 0.0) || e >= bound {
        return Err(invalid(format!("E must lie in [0, {bound}), got {e}")));
    }
    let root = ((d - r) as f64 * e).sqrt() + (r as f64 * (1.0 - e)).sqrt();
    Ok((root * root + 1.0) / (d as f64 + 1.0))
}

/// Separation probability of the two-test Fourier strategy, `(f+1)/2`.
pub fn sep_prob_mub(spectrum: &SchmidtSpectrum, r: usize, e: f64) -> Result<f64> {
    Ok((fidelity_limited(spectrum, r, e)? + 1.0) / 2.0)
}

/// Two-test strategy for the maximally entangled state, `(r+d)/(2d)`.
pub fn sep_prob_mes_mub(d: usize, r: usize) -> Result<f64> {
    check_mes_rank(d, r)?;
    Ok((r + d) as f64 / (2 * d) as f64)
}

/// Sandwich `psep_lb ≤ P_sep ≤ psep_h` and `P_LC ≤ plc_ub`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub psep_lb: f64,
    pub psep_h: f64,
    pub plc_ub: f64,
}

fn bounds_from_fidelity(spectrum: &SchmidtSpectrum, f: f64) -> Bounds {
    let (s0, s1) = (spectrum.s0(), spectrum.s1());
    let g = (s0 * s1).sqrt();
    Bounds {
        psep_lb: f,
        psep_h: (f + g) / (1.0 + g),
        plc_ub: (2.0 * f + s0 + s1) / (2.0 + s0 + s1),
    }
}

pub fn bounds_rank(spectrum: &SchmidtSpectrum, r: usize) -> Result<Bounds> {
    let tail = e_r(spectrum, r)?;
    Ok(bounds_from_fidelity(spectrum, 1.0 - tail))
}

pub fn bounds_limited(spectrum: &SchmidtSpectrum, r: usize, e: f64) -> Result<Bounds> {
    AdversarySet::LimitedEr { r, e }.validate(spectrum)?;
    Ok(bounds_from_fidelity(spectrum, fidelity_limited(spectrum, r, e)?))
}

/// Smallest `N` with `P^N ≤ δ`.
pub fn tests_required(p: f64, delta: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must lie in (0,1), got {delta}")));
    }
    if !(p >= 0.0) || p > 1.0 + CERTAINTY_TOL {
        return Err(invalid(format!("P must lie in [0,1], got {p}")));
    }
    if p >= 1.0 - CERTAINTY_TOL {
        return Err(Error::Infeasible(format!(
            "separation probability {p} is one; no number of tests suffices"
        )));
    }
    if p <= delta {
        return Ok(1);
    }
    let reached = |n: u64| p.powi(n as i32) <= delta * (1.0 + BOUNDARY_RTOL);
    let mut n = (delta.ln() / p.ln()).ceil().max(1.0) as u64;
    // guard the ceiling against rounding in the logarithms
    while n > 1 && reached(n - 1) {
        n -= 1;
    }
    while !reached(n) {
        n += 1;
    }
    Ok(n)
}

/// Closest state to the target among those with `E_r = e`.
pub fn adversarial_state(spectrum: &SchmidtSpectrum, r: usize, e: f64) -> Result<PureState> {
    AdversarySet::LimitedEr { r, e }.validate(spectrum)?;
    let tail = e_r(spectrum, r)?;
    let d = spectrum.dim();
    let mut m = CMatrix::zeros(d, d);
    for (j, s) in spectrum.values().iter().enumerate() {
        let w = if j < r {
            (1.0 - e) * s / (1.0 - tail)
        } else {
            e * s / tail
        };
        m[(j, j)] = c(w.sqrt());
    }
    PureState::normalized(m)
}

/// `tr(Ω σ)` for a density operator `σ`.
pub fn pass_prob(op: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    let tr: f64 = (0..sigma.dim()).map(|i| sigma.entries()[(i, i)].re).sum();
    if (tr - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("density operator has trace {tr}")));
    }
    if *sigma.eigenvalues().last().unwrap() < -1e-9 {
        return Err(invalid("density operator is not positive"));
    }
    Ok(op.trace_with(sigma)?.clamp(0.0, 1.0))
}
