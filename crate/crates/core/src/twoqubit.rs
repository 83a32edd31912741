//! Two-qubit targets `cos θ|00⟩ + sin θ|11⟩`: the separable family
//! `Ω(θ,p) = pΩ₁ + (1−p)Ω₀`, its separation probability, the optimal
//! mixing parameter and the LOCC-realizable region.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, kron, outer, CMatrix, CVector};
use crate::operators::{HermitianOperator, Strategy};
use crate::roots::{bisect, brent, golden_section_min};
use crate::spectra::PureState;

/// Smallest accepted angle; below it the target is essentially a product
/// state.
pub const THETA_MIN: f64 = 1e-6;
/// Tolerance for gluing closed-form branches together.
pub const BRANCH_TOL: f64 = 1e-9;

const PI4_TOL: f64 = 1e-12;

fn check_theta(theta: f64) -> Result<f64> {
    if !(theta >= THETA_MIN) || theta > FRAC_PI_4 + PI4_TOL {
        return Err(invalid(format!("theta must lie in [{THETA_MIN}, pi/4], got {theta}")));
    }
    Ok(theta.min(FRAC_PI_4))
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("p must lie in [0,1], got {p}")));
    }
    Ok(())
}

fn is_quarter_pi(theta: f64) -> bool {
    (theta - FRAC_PI_4).abs() <= PI4_TOL
}

/// Validated target angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitTarget {
    theta: f64,
}

impl TwoQubitTarget {
    pub fn new(theta: f64) -> Result<Self> {
        Ok(Self { theta: check_theta(theta)? })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn concurrence(&self) -> f64 {
        (2.0 * self.theta).sin()
    }

    pub fn vector(&self) -> CVector {
        target_vector(self.theta)
    }

    pub fn state(&self) -> PureState {
        PureState::from_vector(&self.vector(), 2, 2).expect("unit vector")
    }
}

fn target_vector(theta: f64) -> CVector {
    CVector::from_vec(vec![c(theta.cos()), c(0.0), c(0.0), c(theta.sin())])
}

/// κ = cos θ sin θ.
pub fn kappa(theta: f64) -> f64 {
    theta.cos() * theta.sin()
}

/// Threshold `q(θ)` above which the maximizing product state is `|00⟩`.
pub fn q_theta(theta: f64) -> Result<f64> {
    let theta = check_theta(theta)?;
    let (cs, sn) = (theta.cos(), theta.sin());
    let k = cs * sn;
    let q = (1.0 + k) * (2.0 * k - cs * cs) / (k * (2.0 * k + sn * sn));
    Ok(q.clamp(0.0, 1.0))
}

/// Ratio `tan²a*` of the interior maximizer.
pub fn h(theta: f64, p: f64) -> Result<f64> {
    let theta = check_theta(theta)?;
    check_p(p)?;
    let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
    let k = kappa(theta);
    let num = (1.0 + k) * (2.0 * k - c2) - p * k * (2.0 * k + s2);
    let den = (1.0 + k) * (2.0 * k - s2) - p * k * (2.0 * k + c2);
    Ok(num / den)
}

/// Angle of the maximizing symmetric product state `ρ_a ⊗ ρ_a`.
pub fn a_star(theta: f64, p: f64) -> Result<f64> {
    let theta = check_theta(theta)?;
    check_p(p)?;
    if is_quarter_pi(theta) {
        return Ok(if p >= 1.0 { 0.0 } else { FRAC_PI_4 });
    }
    if p >= q_theta(theta)? {
        return Ok(0.0);
    }
    Ok(h(theta, p)?.max(0.0).sqrt().atan().min(FRAC_PI_4))
}

/// Mixing weight `pκ/(1+κ)` of `𝟙 − |Ψ⟩⟨Ψ|`.
fn weight(theta: f64, p: f64) -> f64 {
    let k = kappa(theta);
    p * k / (1.0 + k)
}

/// `tr[Ω(θ,p) ρ_a⊗ρ_b]` for real product states `cos a|0⟩ + sin a|1⟩`.
pub fn trace_product(theta: f64, p: f64, a: f64, b: f64) -> f64 {
    let (cs, sn) = (theta.cos(), theta.sin());
    let k = cs * sn;
    let w = weight(theta, p);
    let (ca, sa, cb, sb) = (a.cos(), a.sin(), b.cos(), b.sin());
    let along = cs * ca * cb + sn * sa * sb;
    let across = sn * ca * cb - cs * sa * sb;
    along * along + w * across * across + k * (1.0 - w) * (ca * ca * sb * sb + sa * sa * cb * cb)
}

/// `tr[Ω(θ,p) ρ_a⊗ρ_a]`.
pub fn trace_rho_a(theta: f64, p: f64, a: f64) -> f64 {
    trace_product(theta, p, a, a)
}

/// `Ω₀ = |Ψ⟩⟨Ψ| + κ(|01⟩⟨01| + |10⟩⟨10|)`.
pub fn omega0(theta: f64) -> Result<HermitianOperator> {
    omega_family(theta, 0.0)
}

/// `Ω₁ = |Ψ⟩⟨Ψ| + κ/(1+κ)(𝟙 − |Ψ⟩⟨Ψ|)`.
pub fn omega1(theta: f64) -> Result<HermitianOperator> {
    omega_family(theta, 1.0)
}

/// `pΩ₁ + (1−p)Ω₀`.
pub fn omega_family(theta: f64, p: f64) -> Result<HermitianOperator> {
    let theta = check_theta(theta)?;
    check_p(p)?;
    let k = kappa(theta);
    let psi = target_vector(theta);
    let proj = outer(&psi);
    let id = CMatrix::identity(4, 4);
    let mut o0 = proj.clone();
    o0[(1, 1)] += c(k);
    o0[(2, 2)] += c(k);
    let o1 = &proj + (id - &proj) * c(k / (1.0 + k));
    HermitianOperator::new(o1 * c(p) + o0 * c(1.0 - p))
}

/// `(λ₂, λ₃)` with `Ω = |Ψ⟩⟨Ψ| + λ₂|Ψ^⊥⟩⟨Ψ^⊥| + λ₃(|01⟩⟨01| + |10⟩⟨10|)`.
pub fn lambda23(theta: f64, p: f64) -> Result<(f64, f64)> {
    let theta = check_theta(theta)?;
    check_p(p)?;
    let w = weight(theta, p);
    Ok((w, (1.0 - p) * kappa(theta) + w))
}

/// Closed-form eigenvalues of the partial transpose of `Ω(θ,p)`.
pub fn ppt_eigenvalues(theta: f64, p: f64) -> Result<[f64; 4]> {
    let (l2, l3) = lambda23(theta, p)?;
    let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
    let k = kappa(theta);
    Ok([
        c2 + l2 * s2,
        s2 + l2 * c2,
        l3 + (1.0 - l2) * k,
        l3 - (1.0 - l2) * k,
    ])
}

/// Closed-form separation probability `max_a tr[Ω(θ,p) ρ_a⊗ρ_a]`.
pub fn p_closed(theta: f64, p: f64) -> Result<f64> {
    let theta = check_theta(theta)?;
    check_p(p)?;
    if is_quarter_pi(theta) {
        return Ok((9.0 - p) / 12.0);
    }
    if p >= q_theta(theta)? {
        Ok(p_closed_flat(theta, p))
    } else {
        Ok(trace_rho_a(theta, p, a_star(theta, p)?))
    }
}

/// Branch of `p_closed` attained at `|00⟩`.
fn p_closed_flat(theta: f64, p: f64) -> f64 {
    let (cs, sn) = (theta.cos(), theta.sin());
    cs * cs + p * cs * sn.powi(3) / (1.0 + cs * sn)
}

/// `∂P/∂p` at fixed maximizer (envelope theorem).
pub fn dp_dp(theta: f64, p: f64) -> Result<f64> {
    let theta = check_theta(theta)?;
    check_p(p)?;
    let a = a_star(theta, p)?;
    let (cs, sn) = (theta.cos(), theta.sin());
    let k = cs * sn;
    let (ca2, sa2) = (a.cos().powi(2), a.sin().powi(2));
    let across = sn * ca2 - cs * sa2;
    Ok(k / (1.0 + k) * (across * across - 2.0 * k * ca2 * sa2))
}

/// `17 − 9cos4θ − 25sin2θ + 3sin6θ`, whose root is θ*.
pub fn theta_star_residual(theta: f64) -> f64 {
    17.0 - 9.0 * (4.0 * theta).cos() - 25.0 * (2.0 * theta).sin() + 3.0 * (6.0 * theta).sin()
}

/// Angle above which mixing in `Ω₁` lowers the separation probability.
pub fn theta_star() -> f64 {
    bisect(theta_star_residual, 0.5f64.atan(), FRAC_PI_4, 0.0)
        .expect("residual changes sign on [arctan(1/2), pi/4]")
}

/// Optimal mixing parameter minimizing `p_closed(θ, ·)`.
pub fn p_star(theta: f64) -> Result<f64> {
    let theta = check_theta(theta)?;
    if is_quarter_pi(theta) {
        return Ok(1.0);
    }
    if theta <= theta_star() {
        return Ok(0.0);
    }
    let q = q_theta(theta)?;
    let deriv = |p: f64| dp_dp(theta, p).unwrap_or(f64::NAN);
    match brent(deriv, 0.0, q, 1e-14) {
        Ok(p) => Ok(p),
        Err(_) => Ok(golden_section_min(
            |p| p_closed(theta, p).unwrap_or(f64::INFINITY),
            0.0,
            q,
            1e-12,
        )),
    }
}

/// Optimal separation probability with separable strategies.
pub fn sep_prob_two_qubit(theta: f64) -> Result<f64> {
    let theta = check_theta(theta)?;
    if is_quarter_pi(theta) {
        return Ok(2.0 / 3.0);
    }
    let (cs, sn) = (theta.cos(), theta.sin());
    if theta <= 0.5f64.atan() {
        return Ok(cs * cs);
    }
    if theta <= theta_star() {
        let middle = 3.0 * cs * cs * sn * sn / (4.0 * cs * sn - 1.0);
        let general = p_closed(theta, 0.0)?;
        if (middle - general).abs() > BRANCH_TOL {
            return Err(Error::BranchMismatch {
                location: format!("theta = {theta}"),
                left: middle,
                right: general,
            });
        }
        return Ok(middle);
    }
    p_closed(theta, p_star(theta)?)
}

/// Smallest `p` for which `Ω(θ,p)` admits the LOCC construction.
pub fn tilde_p(theta: f64) -> Result<f64> {
    let theta = check_theta(theta)?;
    let (cs, sn) = (theta.cos(), theta.sin());
    Ok((1.0 - theta.tan() / (cs * cs + cs * sn)).max(0.0))
}

/// `max{p̃, q}`.
pub fn p2_star(theta: f64) -> Result<f64> {
    Ok(tilde_p(theta)?.max(q_theta(theta)?))
}

/// `max{p̃, p*}`.
pub fn p3_star(theta: f64) -> Result<f64> {
    Ok(tilde_p(theta)?.max(p_star(theta)?))
}

/// `arctan[(√5−1)/2]`, where `p̃` and `q` cross.
pub fn theta2_star() -> f64 {
    ((5f64.sqrt() - 1.0) / 2.0).atan()
}

/// Smallest angle with `p̃(θ) ≤ p*(θ)`, located by a grid scan followed
/// by bisection on `p̃ − p*`.
pub fn theta3_star() -> Result<f64> {
    let g = |t: f64| tilde_p(t).unwrap() - p_star(t).unwrap();
    let lo = theta_star();
    let steps = 200;
    let mut prev = lo;
    for i in 1..=steps {
        let t = lo + (FRAC_PI_4 - lo) * i as f64 / steps as f64;
        if g(t) <= 0.0 {
            return bisect(g, prev, t, 1e-14);
        }
        prev = t;
    }
    Err(Error::Numerical("p̃ never drops below p*".into()))
}

/// Mixing parameter choices compared along the θ axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveVariant {
    Pstar,
    P2star,
    P3star,
    Omega1,
    Omega0,
}

impl std::str::FromStr for CurveVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pstar" => Ok(Self::Pstar),
            "p2star" => Ok(Self::P2star),
            "p3star" => Ok(Self::P3star),
            "omega1" => Ok(Self::Omega1),
            "omega0" => Ok(Self::Omega0),
            other => Err(invalid(format!("unknown curve variant '{other}'"))),
        }
    }
}

pub fn variant_p(theta: f64, variant: CurveVariant) -> Result<f64> {
    match variant {
        CurveVariant::Pstar => p_star(theta),
        CurveVariant::P2star => p2_star(theta),
        CurveVariant::P3star => p3_star(theta),
        CurveVariant::Omega1 => Ok(1.0),
        CurveVariant::Omega0 => Ok(0.0),
    }
}

/// Separation probability of `Ω(θ, p)` for the chosen `p`.
pub fn p_strategy_curve(theta: f64, variant: CurveVariant) -> Result<f64> {
    p_closed(theta, variant_p(theta, variant)?)
}

/// `(η, p′)` that make the Wang–Hayashi operator equal `Ω(θ,p)`.
pub fn wh_parameters(theta: f64, p: f64) -> Result<(f64, f64)> {
    let theta = check_theta(theta)?;
    check_p(p)?;
    let (cs, sn) = (theta.cos(), theta.sin());
    let k = cs * sn;
    let eta = 1.0 - theta.tan();
    let p_prime = k * ((cs * cs + k) / (1.0 + k) * p + theta.tan() - 1.0);
    if p_prime < -1e-12 {
        return Err(Error::Infeasible(format!(
            "p = {p} is below the LOCC threshold {}",
            tilde_p(theta)?
        )));
    }
    Ok((eta, p_prime.max(0.0)))
}

fn projector2(v: [Complex64; 2]) -> CMatrix {
    outer(&CVector::from_vec(v.to_vec()))
}

/// Five-test one-way LOCC strategy: two adaptive tests in each direction
/// plus the computational-basis test, weighted `(1−p′)/4` and `p′`.
pub fn wang_hayashi(theta: f64, eta: f64, p_prime: f64) -> Result<Strategy> {
    let theta = check_theta(theta)?;
    if !(0.0..=1.0).contains(&eta) || !(0.0..=1.0).contains(&p_prime) {
        return Err(invalid("eta and p' must lie in [0,1]"));
    }
    let (cs, sn) = (theta.cos(), theta.sin());
    let norm = (1.0 - eta * cs * cs).sqrt();
    let x = c((1.0 - eta) * cs / norm);
    let y = sn / norm;
    let i = Complex64::i();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // conditional states prepared on the other side
    let psi_p = projector2([x, c(y)]);
    let psi_m = projector2([x, c(-y)]);
    let phi_p = projector2([x, i * y]);
    let phi_m = projector2([x, -i * y]);
    // measured bases
    let plus = projector2([c(h), c(h)]);
    let minus = projector2([c(h), c(-h)]);
    let right = projector2([c(h), i * h]);
    let left = projector2([c(h), -i * h]);
    let zero = projector2([c(1.0), c(0.0)]);
    let one = projector2([c(0.0), c(1.0)]);

    let zz = kron(&zero, &zero) * c(eta);
    let t1_ab = &zz + kron(&psi_p, &plus) + kron(&psi_m, &minus);
    let t2_ab = &zz + kron(&phi_p, &left) + kron(&phi_m, &right);
    let t1_ba = &zz + kron(&plus, &psi_p) + kron(&minus, &psi_m);
    let t2_ba = &zz + kron(&left, &phi_p) + kron(&right, &phi_m);
    let t3 = kron(&zero, &zero) + kron(&one, &one);

    let w = (1.0 - p_prime) / 4.0;
    let tests = [t1_ab, t2_ab, t1_ba, t2_ba]
        .into_iter()
        .map(|t| Ok((w, HermitianOperator::new(t)?)))
        .chain(std::iter::once(Ok((p_prime, HermitianOperator::new(t3)?))))
        .collect::<Result<Vec<_>>>()?;
    Strategy::new(tests, TwoQubitTarget::new(theta)?.state())
}

/// Summary of the angle-dependent quantities at one θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaFunctions {
    pub theta: f64,
    pub kappa: f64,
    pub q: f64,
    /// `h(θ, p*)` when the maximizer is interior.
    pub h: Option<f64>,
    pub a_star: f64,
    pub p_star: f64,
    pub tilde_p: f64,
    pub p2_star: f64,
    pub p3_star: f64,
}

impl ThetaFunctions {
    pub fn at(theta: f64) -> Result<Self> {
        let theta = check_theta(theta)?;
        let q = q_theta(theta)?;
        let ps = p_star(theta)?;
        let tp = tilde_p(theta)?;
        Ok(Self {
            theta,
            kappa: kappa(theta),
            q,
            h: if ps < q { Some(h(theta, ps)?) } else { None },
            a_star: a_star(theta, ps)?,
            p_star: ps,
            tilde_p: tp,
            p2_star: tp.max(q),
            p3_star: tp.max(ps),
        })
    }
}

/// One row of the θ sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub q: f64,
    pub p_star: f64,
    pub tilde_p: f64,
    pub p2_star: f64,
    pub p3_star: f64,
    pub p_sep: f64,
    pub p_p2: f64,
    pub p_p3: f64,
    pub p_omega1: f64,
    pub p_omega0: f64,
}

pub const SWEEP_HEADER: [&str; 11] = [
    "theta", "q", "p_star", "tilde_p", "p2_star", "p3_star", "P_sep", "P_p2", "P_p3", "P_omega1",
    "P_omega0",
];

impl SweepRow {
    pub fn at(theta: f64) -> Result<Self> {
        let f = ThetaFunctions::at(theta)?;
        let t = f.theta;
        Ok(Self {
            theta: t,
            q: f.q,
            p_star: f.p_star,
            tilde_p: f.tilde_p,
            p2_star: f.p2_star,
            p3_star: f.p3_star,
            p_sep: sep_prob_two_qubit(t)?,
            p_p2: p_closed(t, f.p2_star)?,
            p_p3: p_closed(t, f.p3_star)?,
            p_omega1: p_closed(t, 1.0)?,
            p_omega0: p_closed(t, 0.0)?,
        })
    }

    pub fn values(&self) -> [f64; 11] {
        [
            self.theta,
            self.q,
            self.p_star,
            self.tilde_p,
            self.p2_star,
            self.p3_star,
            self.p_sep,
            self.p_p2,
            self.p_p3,
            self.p_omega1,
            self.p_omega0,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{is_ppt, omega_opt, partial_transpose};

    fn grid_max(theta: f64, p: f64) -> f64 {
        let n = 20_000;
        (0..=n)
            .map(|i| trace_rho_a(theta, p, std::f64::consts::FRAC_PI_2 * i as f64 / n as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn theta_validation() {
        assert!(q_theta(0.0).is_err());
        assert!(q_theta(1e-7).is_err());
        assert!(q_theta(1.0).is_err());
        assert!(omega_family(0.3, 1.5).is_err());
        assert!(TwoQubitTarget::new(FRAC_PI_4).is_ok());
    }

    #[test]
    fn q_values() {
        assert_eq!(q_theta(0.4).unwrap(), 0.0);
        assert!((q_theta(FRAC_PI_4).unwrap() - 1.0).abs() < 1e-12);
        let q = q_theta(0.5).unwrap();
        assert!(q > 0.0 && q < 1.0);
    }

    #[test]
    fn family_endpoints_and_ppt() {
        let o = omega_family(FRAC_PI_4, 1.0).unwrap();
        assert!(o.max_abs_diff(&omega_opt(2).unwrap()) < 1e-12);
        for &theta in &[0.1, 0.3, 0.5, 0.7, FRAC_PI_4] {
            for &p in &[0.0, 0.25, 0.5, 1.0] {
                let o = omega_family(theta, p).unwrap();
                assert!(is_ppt(&o, (2, 2)).unwrap());
                assert!(is_ppt(&o.complement(), (2, 2)).unwrap());
                let mut closed = ppt_eigenvalues(theta, p).unwrap().to_vec();
                closed.sort_by(|a, b| b.total_cmp(a));
                let pt = partial_transpose(&o, (2, 2)).unwrap().eigenvalues();
                for (x, y) in closed.iter().zip(&pt) {
                    assert!((x - y).abs() < 1e-10, "{theta} {p}: {closed:?} vs {pt:?}");
                }
                let v = TwoQubitTarget::new(theta).unwrap().vector();
                assert!(o.fix_residual(&v) < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        assert!((p_closed(FRAC_PI_4, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let t = 0.5f64.atan();
        assert!((p_closed(t, 0.0).unwrap() - 0.8).abs() < 1e-12);
        let t: f64 = 0.6;
        let (cs, sn) = (t.cos(), t.sin());
        let p0 = p_closed(t, 0.0).unwrap();
        assert!((p0 - 3.0 * cs * cs * sn * sn / (4.0 * cs * sn - 1.0)).abs() < 1e-12);
        for &theta in &[0.2, 0.5, 0.6, 0.7, 0.78] {
            for &p in &[0.0, 0.2, 0.5, 0.8, 1.0] {
                assert!((p_closed(theta, p).unwrap() - grid_max(theta, p)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn branch_glue_at_q() {
        for &theta in &[0.5, 0.6, 0.7] {
            let q = q_theta(theta).unwrap();
            let interior = trace_rho_a(theta, q, h(theta, q).unwrap().max(0.0).sqrt().atan());
            assert!((interior - p_closed_flat(theta, q)).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_star_root() {
        let t = theta_star();
        assert!(theta_star_residual(t).abs() < 1e-12);
        assert!((t - 0.51095).abs() < 5e-6);
        assert!(t > 0.5f64.atan());
    }

    #[test]
    fn p_star_values() {
        assert_eq!(p_star(0.45).unwrap(), 0.0);
        assert_eq!(p_star(FRAC_PI_4).unwrap(), 1.0);
        let ps = p_star(0.6).unwrap();
        assert!(ps > 0.0 && ps < q_theta(0.6).unwrap());
        let oracle = golden_section_min(|p| p_closed(0.6, p).unwrap(), 0.0, 1.0, 1e-12);
        assert!((ps - oracle).abs() < 1e-6);
        assert!(dp_dp(0.6, ps - 1e-3).unwrap() < 0.0);
        assert!(dp_dp(0.6, ps + 1e-3).unwrap() > 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for &(theta, p) in &[(0.55, 0.1), (0.6, 0.3), (0.7, 0.5), (0.3, 0.4)] {
            let e = 1e-6;
            let fd = (p_closed(theta, p + e).unwrap() - p_closed(theta, p - e).unwrap()) / (2.0 * e);
            assert!((fd - dp_dp(theta, p).unwrap()).abs() < 1e-7);
        }
        // closed form of the derivative at p = 0 for angles between the
        // two thresholds
        for &theta in &[0.5f64, 0.55, 0.65, 0.75] {
            let s2 = (2.0 * theta).sin();
            let f = theta_star_residual(theta);
            let want = s2 * f / (8.0 * (2.0 * s2 - 1.0).powi(2) * (2.0 + s2));
            assert!((dp_dp(theta, 0.0).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn sep_prob_values() {
        assert!((sep_prob_two_qubit(0.3).unwrap() - 0.3f64.cos().powi(2)).abs() < 1e-15);
        assert_eq!(sep_prob_two_qubit(FRAC_PI_4).unwrap(), 2.0 / 3.0);
        let t = theta_star();
        let (cs, sn) = (t.cos(), t.sin());
        let middle = 3.0 * cs * cs * sn * sn / (4.0 * cs * sn - 1.0);
        assert!((middle - p_closed(t, 0.0).unwrap()).abs() < 1e-10);
        assert!((sep_prob_two_qubit(t).unwrap() - middle).abs() < 1e-10);
    }

    #[test]
    fn locc_thresholds() {
        assert!(tilde_p(FRAC_PI_4).unwrap().abs() < 1e-15);
        assert!((theta2_star() - 0.5535743588970453).abs() < 1e-12);
        let t2 = theta2_star();
        assert!((tilde_p(t2).unwrap() - q_theta(t2).unwrap()).abs() < 1e-12);
        let t3 = theta3_star().unwrap();
        assert!((t3 - 0.59079).abs() < 1e-4);
        assert!(((2.0 * t3).sin() - 0.92521).abs() < 1e-4);
    }

    #[test]
    fn curve_ordering() {
        for i in 1..40 {
            let t = FRAC_PI_4 * i as f64 / 40.0;
            let v = |x| p_strategy_curve(t, x).unwrap();
            let (a, b, c3, d) = (
                v(CurveVariant::Pstar),
                v(CurveVariant::P3star),
                v(CurveVariant::P2star),
                v(CurveVariant::Omega1),
            );
            assert!(a <= b + 1e-12 && b <= c3 + 1e-12 && c3 <= d + 1e-12, "{t}");
        }
        for v in [CurveVariant::Pstar, CurveVariant::P2star, CurveVariant::P3star, CurveVariant::Omega1] {
            assert!((p_strategy_curve(FRAC_PI_4, v).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        }
        let t: f64 = 0.4;
        let (cs, sn) = (t.cos(), t.sin());
        let want = (cs * cs + cs * sn) / (1.0 + cs * sn);
        assert!((p_strategy_curve(t, CurveVariant::Omega1).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn wang_hayashi_reproduces_family() {
        for &(theta, p) in &[(0.3, 0.9), (0.6, 0.5), (FRAC_PI_4, 1.0), (0.7, 0.3), (0.2, 1.0)] {
            let (eta, pp) = wh_parameters(theta, p).unwrap();
            let st = wang_hayashi(theta, eta, pp).unwrap();
            let o = omega_family(theta, p).unwrap();
            assert!(st.operator().max_abs_diff(&o) < 1e-10);
        }
        let (_, pp) = wh_parameters(FRAC_PI_4, 1.0).unwrap();
        assert!((pp - 1.0 / 3.0).abs() < 1e-12);
        assert!(matches!(wh_parameters(0.3, 0.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn theta_functions_invariants() {
        for i in 1..=30 {
            let t = FRAC_PI_4 * i as f64 / 30.0;
            let f = ThetaFunctions::at(t).unwrap();
            assert!((0.0..=1.0).contains(&f.q));
            assert!(f.a_star >= 0.0 && f.a_star <= FRAC_PI_4 + 1e-15);
            assert!(f.p_star >= 0.0 && f.p_star <= f.q + 1e-12);
            assert!((0.0..=1.0).contains(&f.tilde_p));
        }
    }
}
