//! Self-test battery comparing closed forms against the oracles and the
//! numerical constructions.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::linalg::c;
use crate::montecarlo::ensemble_stats_multi;
use crate::operators::{
    omega_lc_h, omega_mub, omega_opt, omega_sep, omega_sep_h, spectral_gap, target_state,
    two_design_strategy, HermitianOperator,
};
use crate::oracle::{max_limited, max_product, max_rank_r, OracleConfig};
use crate::separation::{sep_prob_mes_limited, sep_prob_mes_rank};
use crate::spectra::SchmidtSpectrum;
use crate::twoqubit::{
    omega_family, p_closed, theta3_star, theta_star, theta_star_residual, trace_rho_a,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub level: Level,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Battery {
    checks: Vec<Check>,
}

impl Battery {
    fn record(&mut self, name: &str, value: f64, want: f64, tol: f64) {
        let dev = (value - want).abs();
        self.checks.push(Check {
            name: name.to_string(),
            passed: dev <= tol,
            detail: format!("value {value:?}, expected {want:?}, deviation {dev:.2e} (tol {tol:.0e})"),
        });
    }

    fn fail(&mut self, name: &str, err: impl std::fmt::Display) {
        self.checks.push(Check {
            name: name.to_string(),
            passed: false,
            detail: err.to_string(),
        });
    }
}

/// Runs the battery. With `inject_fault` the 2-design operator is
/// deliberately corrupted so the gap check must fail.
pub fn run(level: Level, seed: u64, inject_fault: bool) -> Report {
    let mut b = Battery { checks: Vec::new() };
    let cfg = OracleConfig { seed, ..OracleConfig::default() };

    for d in 2..=4usize {
        let mut op = match omega_opt(d) {
            Ok(op) => op,
            Err(e) => {
                b.fail("omega_opt", e);
                continue;
            }
        };
        if inject_fault && d == 3 {
            let mut m = op.entries().clone();
            m[(1, 1)] += c(0.25);
            op = HermitianOperator::new(m).expect("diagonal perturbation stays Hermitian");
        }
        let u = SchmidtSpectrum::uniform(d).expect("uniform spectrum");
        match target_state(&u, d).and_then(|t| spectral_gap(&op, &t)) {
            Ok(g) => b.record(&format!("gap omega_opt d={d}"), g.beta, 1.0 / (d as f64 + 1.0), 1e-9),
            Err(e) => b.fail(&format!("gap omega_opt d={d}"), e),
        }
        for r in 1..d {
            match max_rank_r(&op, (d, d), r, &cfg) {
                Ok(rep) => b.record(
                    &format!("oracle rank d={d} r={r}"),
                    rep.value,
                    sep_prob_mes_rank(d, r).unwrap(),
                    1e-6,
                ),
                Err(e) => b.fail(&format!("oracle rank d={d} r={r}"), e),
            }
        }
    }

    let s = SchmidtSpectrum::new(vec![0.5, 0.3, 0.2]).expect("valid spectrum");
    let g = (s.s0() * s.s1()).sqrt();
    let a = s.s0() + s.s1();
    let target = target_state(&s, 3).expect("target");
    let gaps: [(&str, crate::Result<HermitianOperator>, f64); 3] = [
        ("gap omega_sep", omega_sep(&s), g),
        ("gap omega_sep_h", Ok(omega_sep_h(&s)), g / (1.0 + g)),
        ("gap omega_lc_h", Ok(omega_lc_h(&s)), a / (2.0 + a)),
    ];
    for (name, op, want) in gaps {
        match op.and_then(|op| spectral_gap(&op, &target)) {
            Ok(gap) => b.record(name, gap.beta, want, 1e-9),
            Err(e) => b.fail(name, e),
        }
    }
    match omega_mub(&s).and_then(|st| st.spectral_gap()) {
        Ok(gap) => b.record("gap omega_mub", gap.beta, 0.5, 1e-9),
        Err(e) => b.fail("gap omega_mub", e),
    }
    for d in [2usize, 3, 5] {
        match (two_design_strategy(d), omega_opt(d)) {
            (Ok(st), Ok(op)) => b.record(
                &format!("2-design d={d}"),
                st.operator().max_abs_diff(&op),
                0.0,
                1e-9,
            ),
            (Err(e), _) | (_, Err(e)) => b.fail(&format!("2-design d={d}"), e),
        }
    }
    match max_limited(&omega_opt(4).unwrap(), (4, 4), 1, 0.25, &cfg) {
        Ok(rep) => b.record(
            "oracle limited d=4 r=1 E=0.25",
            rep.value,
            sep_prob_mes_limited(4, 1, 0.25).unwrap(),
            1e-5,
        ),
        Err(e) => b.fail("oracle limited", e),
    }

    let ts = theta_star();
    b.record("theta* residual", theta_star_residual(ts), 0.0, 1e-12);
    match theta3_star() {
        Ok(t3) => b.record("theta3*", t3, 0.59079, 2e-4),
        Err(e) => b.fail("theta3*", e),
    }
    for i in 1..=8 {
        let theta = FRAC_PI_4 * i as f64 / 8.0;
        for p in [0.0, 0.5, 1.0] {
            let n = 4000;
            let grid = (0..=n)
                .map(|k| trace_rho_a(theta, p, std::f64::consts::FRAC_PI_2 * k as f64 / n as f64))
                .fold(f64::NEG_INFINITY, f64::max);
            match p_closed(theta, p) {
                Ok(v) => b.record(&format!("two-qubit grid θ={theta:.4} p={p}"), v, grid, 1e-6),
                Err(e) => b.fail("two-qubit grid", e),
            }
        }
        if i % 4 == 0 {
            let cfg2 = OracleConfig { restarts: 8, ..cfg };
            match (omega_family(theta, 0.5), p_closed(theta, 0.5)) {
                (Ok(op), Ok(want)) => match max_product(&op, (2, 2), &cfg2) {
                    Ok(rep) => b.record(&format!("product oracle θ={theta:.4}"), rep.value, want, 1e-8),
                    Err(e) => b.fail("product oracle", e),
                },
                (Err(e), _) | (_, Err(e)) => b.fail("product oracle", e),
            }
        }
    }

    if level == Level::Full {
        for d in [10usize, 40, 100] {
            match ensemble_stats_multi(d, &[1, 2, 5], 10_000, seed) {
                Ok(stats) => {
                    for st in stats {
                        let (lo, hi) = st.bracket();
                        let inside = st.means().iter().all(|&m| m >= lo && m <= hi);
                        let gap = (st.mean_plc_ub - st.mean_psep_h).abs();
                        b.checks.push(Check {
                            name: format!("ensemble d={d} r={}", st.r),
                            passed: inside && gap <= 0.01 && st.u_r_violations == 0,
                            detail: format!("means {:?} in [{lo}, {hi}], |ub − h| = {gap:.2e}", st.means()),
                        });
                    }
                }
                Err(e) => b.fail(&format!("ensemble d={d}"), e),
            }
        }
    }

    Report { level, seed, checks: b.checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_battery_passes_and_detects_faults() {
        let rep = run(Level::Fast, 1, false);
        let failed: Vec<_> = rep.checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert!(!run(Level::Fast, 1, true).passed());
    }
}
