use hdecert::montecarlo::{haar_spectra, u_r};
use hdecert::operators::{omega_lc_h, omega_opt, omega_sep_h, spectral_gap, target_state, HermitianOperator};
use hdecert::separation::{
    bounds_limited, bounds_rank, sep_prob_mes_limited, sep_prob_mes_mub, sep_prob_mes_rank, tests_required,
    AdversarySet, StrategyId,
};
use hdecert::spectra::{e_r, fidelity_limited, lipschitz_const, SchmidtSpectrum};
use hdecert::twoqubit::{a_star, p_closed};
use proptest::prelude::*;

fn spectrum(max_d: usize) -> impl Strategy<Value = SchmidtSpectrum> {
    prop::collection::vec(0.01f64..1.0, 2..=max_d).prop_map(|w| {
        let s: f64 = w.iter().sum();
        SchmidtSpectrum::new(w.iter().map(|x| x / s).collect()).unwrap()
    })
}

fn spectrum_and_rank(max_d: usize) -> impl Strategy<Value = (SchmidtSpectrum, usize)> {
    spectrum(max_d).prop_flat_map(|s| {
        let d = s.dim();
        (Just(s), 1..d)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounds_are_ordered((s, r) in spectrum_and_rank(7)) {
        let b = bounds_rank(&s, r).unwrap();
        prop_assert!(b.psep_lb <= b.psep_h + 1e-12);
        prop_assert!(b.psep_h <= b.plc_ub + 1e-12);
        prop_assert!(b.plc_ub <= 1.0 + 1e-12);
        prop_assert!(b.plc_ub <= u_r(&s, r).unwrap() + 1e-12);
    }

    #[test]
    fn padding_preserves_bounds((s, r) in spectrum_and_rank(5), extra in 1usize..4) {
        let p = s.padded(s.dim() + extra).unwrap();
        let (a, b) = (bounds_rank(&s, r).unwrap(), bounds_rank(&p, r).unwrap());
        prop_assert!((a.psep_lb - b.psep_lb).abs() < 1e-14);
        prop_assert!((a.psep_h - b.psep_h).abs() < 1e-14);
        prop_assert!((a.plc_ub - b.plc_ub).abs() < 1e-14);
    }

    #[test]
    fn limited_fidelity_interpolates((s, r) in spectrum_and_rank(6), frac in 0.0f64..1.0) {
        let tail = e_r(&s, r).unwrap();
        let e = frac * tail;
        let f = fidelity_limited(&s, r, e).unwrap();
        prop_assert!(f >= 1.0 - tail - 1e-12);
        prop_assert!(f <= 1.0 + 1e-12);
        let b = bounds_limited(&s, r, e).unwrap();
        prop_assert!((b.psep_lb - f).abs() < 1e-14);
        prop_assert!((fidelity_limited(&s, r, 0.0).unwrap() - (1.0 - tail)).abs() < 1e-12);
    }

    #[test]
    fn hermitian_gaps_match_bounds((s, r) in spectrum_and_rank(4)) {
        let target = target_state(&s, s.dim()).unwrap();
        let b = bounds_rank(&s, r).unwrap();
        let beta_h = spectral_gap(&omega_sep_h(&s), &target).unwrap().beta;
        let beta_lc = spectral_gap(&omega_lc_h(&s), &target).unwrap().beta;
        let f = b.psep_lb;
        prop_assert!(((1.0 - beta_h) * f + beta_h - b.psep_h).abs() < 1e-9);
        prop_assert!(((1.0 - beta_lc) * f + beta_lc - b.plc_ub).abs() < 1e-9);
    }

    #[test]
    fn uniform_strategies_agree(d in 2usize..12, r_frac in 0.0f64..1.0) {
        let r = 1 + ((d - 1) as f64 * r_frac) as usize % (d - 1);
        let u = SchmidtSpectrum::uniform(d).unwrap();
        let b = bounds_rank(&u, r).unwrap();
        let opt = sep_prob_mes_rank(d, r).unwrap();
        prop_assert!((opt - b.psep_h).abs() < 1e-12);
        prop_assert!((sep_prob_mes_mub(d, r).unwrap() - (b.psep_lb + 1.0) / 2.0).abs() < 1e-12);
        prop_assert!(opt <= sep_prob_mes_mub(d, r).unwrap() + 1e-12);
    }

    #[test]
    fn mes_limited_monotone_in_e(d in 2usize..10, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let r = 1;
        let tail = (d - r) as f64 / d as f64;
        let (lo, hi) = if a < b { (a * tail, b * tail) } else { (b * tail, a * tail) };
        let (p_lo, p_hi) = (sep_prob_mes_limited(d, r, lo).unwrap(), sep_prob_mes_limited(d, r, hi).unwrap());
        prop_assert!(p_lo <= p_hi + 1e-12);
        let mid = sep_prob_mes_limited(d, r, 0.5 * (lo + hi)).unwrap();
        prop_assert!(mid + 1e-12 >= 0.5 * (p_lo + p_hi));
    }

    #[test]
    fn tests_required_is_minimal(p in 0.01f64..0.99, delta in 1e-6f64..0.5) {
        let n = tests_required(p, delta).unwrap();
        prop_assert!(p.powi(n as i32) <= delta * (1.0 + 1e-12));
        if n > 1 {
            prop_assert!(p.powi(n as i32 - 1) > delta);
        }
    }

    #[test]
    fn strategy_probabilities_dominated_by_lc((s, r) in spectrum_and_rank(5)) {
        let set = AdversarySet::SchmidtRank { r };
        let lc = StrategyId::LcH.separation_probability(&s, &set).unwrap();
        let h = StrategyId::SepH.separation_probability(&s, &set).unwrap();
        prop_assert!(h <= lc + 1e-12);
    }

    #[test]
    fn two_qubit_family_convex_in_p(theta in 0.05f64..0.78, p in 0.0f64..1.0, q in 0.0f64..1.0) {
        let m = 0.5 * (p + q);
        let (fp, fq, fm) = (p_closed(theta, p).unwrap(), p_closed(theta, q).unwrap(), p_closed(theta, m).unwrap());
        prop_assert!(fm <= 0.5 * (fp + fq) + 1e-10);
    }

    #[test]
    fn a_star_nonincreasing(theta in 0.05f64..0.78, p in 0.0f64..1.0, q in 0.0f64..1.0) {
        let (lo, hi) = if p < q { (p, q) } else { (q, p) };
        prop_assert!(a_star(theta, hi).unwrap() <= a_star(theta, lo).unwrap() + 1e-12);
    }

    #[test]
    fn e_r_lipschitz(seed in 0u64..1000, d in 2usize..6) {
        let pair = haar_spectra(d, d, 2, seed).unwrap();
        let (a, b) = (&pair[0], &pair[1]);
        // Schmidt vectors in a common basis realize the distance between spectra.
        let dist: f64 = a.values().iter().zip(b.values())
            .map(|(x, y)| (x.sqrt() - y.sqrt()).powi(2))
            .sum::<f64>()
            .sqrt();
        for r in 1..d {
            let ell = lipschitz_const(r, d).unwrap();
            let diff = (e_r(a, r).unwrap() - e_r(b, r).unwrap()).abs();
            prop_assert!(diff <= ell * dist + 1e-12);
        }
    }

    #[test]
    fn spectrum_json_roundtrip(s in spectrum(8)) {
        let text = serde_json::to_string(&s).unwrap();
        let back: SchmidtSpectrum = serde_json::from_str(&text).unwrap();
        // Deserializing renormalizes, which may move the last ulp.
        for (x, y) in s.values().iter().zip(back.values()) {
            prop_assert!((x - y).abs() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn operator_byte_roundtrip(s in spectrum(3)) {
        let op = omega_sep_h(&s);
        let back = HermitianOperator::from_le_bytes(&op.to_le_bytes()).unwrap();
        prop_assert_eq!(op.max_abs_diff(&back), 0.0);
        let json = serde_json::to_string(&op).unwrap();
        let back: HermitianOperator = serde_json::from_str(&json).unwrap();
        prop_assert!(op.max_abs_diff(&back) < 1e-15);
    }
}

#[test]
fn haar_sampling_is_deterministic() {
    let a = haar_spectra(4, 6, 20, 99).unwrap();
    let b = haar_spectra(4, 6, 20, 99).unwrap();
    assert_eq!(a, b);
    let c = haar_spectra(4, 6, 20, 100).unwrap();
    assert_ne!(a, c);
}

#[test]
fn optimal_gap_matches_formula() {
    for d in 2..=5 {
        let u = SchmidtSpectrum::uniform(d).unwrap();
        let target = target_state(&u, d).unwrap();
        let gap = spectral_gap(&omega_opt(d).unwrap(), &target).unwrap();
        assert!((gap.beta - 1.0 / (d as f64 + 1.0)).abs() < 1e-10, "d = {d}");
    }
}
