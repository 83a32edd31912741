//! Verification operators, test decompositions, spectral gaps, partial
//! transposition and the mutually-unbiased-basis machinery.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    basis_vector, c, hermitian_eigenvalues, kron, kron_vec, max_abs_diff, outer, CMatrix, CVector,
    ONE,
};
use crate::spectra::{PureState, SchmidtSpectrum};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const EIGEN_TOL: f64 = 1e-9;
pub const FIX_TOL: f64 = 1e-9;
pub const PPT_TOL: f64 = 1e-9;

/// Dense Hermitian operator on a `D`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
}

impl HermitianOperator {
    /// Accepts a square matrix that is Hermitian within `1e-10` entrywise
    /// and stores its Hermitian part.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch("operator must be square".into()));
        }
        let dev = max_abs_diff(&entries, &entries.adjoint());
        if dev > HERMITIAN_TOL {
            return Err(invalid(format!("matrix is not Hermitian (deviation {dev:.3e})")));
        }
        Ok(Self::hermitian_part(entries))
    }

    pub(crate) fn hermitian_part(entries: CMatrix) -> Self {
        let adj = entries.adjoint();
        Self {
            entries: (entries + adj) * c(0.5),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMatrix::identity(dim, dim),
        }
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) vector.
    pub fn projector(v: &CVector) -> Self {
        Self { entries: outer(v) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Eigenvalues sorted nonincreasing.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    /// `0 ≤ Ω ≤ 𝟙` within the eigenvalue tolerance.
    pub fn is_test_operator(&self) -> bool {
        let ev = self.eigenvalues();
        ev[0] <= 1.0 + EIGEN_TOL && ev[ev.len() - 1] >= -EIGEN_TOL
    }

    /// Idempotent within `1e-9` entrywise.
    pub fn is_projector(&self) -> bool {
        max_abs_diff(&(&self.entries * &self.entries), &self.entries) <= EIGEN_TOL
    }

    /// ‖Ω|ψ⟩ − |ψ⟩‖
    pub fn fix_residual(&self, v: &CVector) -> f64 {
        (&self.entries * v - v).norm()
    }

    /// ⟨ψ|Ω|ψ⟩
    pub fn expectation(&self, v: &CVector) -> f64 {
        crate::linalg::expectation(&self.entries, v)
    }

    /// Re tr(Ω σ)
    pub fn trace_with(&self, other: &HermitianOperator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("trace of operators of different size".into()));
        }
        Ok(self
            .entries
            .iter()
            .zip(other.entries.transpose().iter())
            .map(|(a, b)| a * b)
            .sum::<Complex64>()
            .re)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            entries: &self.entries * c(factor),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("sum of operators of different size".into()));
        }
        Ok(Self {
            entries: &self.entries + &other.entries,
        })
    }

    /// 𝟙 − Ω
    pub fn complement(&self) -> Self {
        Self {
            entries: CMatrix::identity(self.dim(), self.dim()) - &self.entries,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        max_abs_diff(&self.entries, &other.entries)
    }

    /// Row-major little-endian `(re, im)` float64 pairs.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let d = self.dim();
        let mut out = Vec::with_capacity(16 * d * d);
        for i in 0..d {
            for j in 0..d {
                let z = self.entries[(i, j)];
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }

    pub fn from_le_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() % 16 != 0 {
            return Err(invalid("byte length is not a multiple of 16"));
        }
        let n = bytes.len() / 16;
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n || d == 0 {
            return Err(invalid("byte length does not describe a square matrix"));
        }
        let read = |k: usize| f64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap());
        let m = CMatrix::from_fn(d, d, |i, j| {
            let k = 2 * (i * d + j);
            Complex64::new(read(k), read(k + 1))
        });
        Self::new(m)
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for HermitianOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let e = &self.entries;
        OperatorRepr {
            dim: d,
            re: (0..d).map(|i| (0..d).map(|j| e[(i, j)].re).collect()).collect(),
            im: (0..d).map(|i| (0..d).map(|j| e[(i, j)].im).collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = OperatorRepr::deserialize(d)?;
        let ok = r.re.len() == r.dim
            && r.im.len() == r.dim
            && r.re.iter().chain(r.im.iter()).all(|row| row.len() == r.dim);
        if !ok {
            return Err(D::Error::custom("operator rows do not match dim"));
        }
        let m = CMatrix::from_fn(r.dim, r.dim, |i, j| Complex64::new(r.re[i][j], r.im[i][j]));
        HermitianOperator::new(m).map_err(D::Error::custom)
    }
}

/// One weighted test of a strategy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedTest {
    pub weight: f64,
    pub operator: HermitianOperator,
}

/// A verification strategy: tests chosen at random with the given weights.
///
/// Tests must satisfy `0 ≤ T ≤ 𝟙` and `T|Ψ⟩ = |Ψ⟩`. Most constructions in
/// this crate produce projective tests; [`Strategy::is_projective`] reports
/// whether that holds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Strategy {
    tests: Vec<WeightedTest>,
    operator: HermitianOperator,
    target: PureState,
}

impl Strategy {
    pub fn new(tests: Vec<(f64, HermitianOperator)>, target: PureState) -> Result<Self> {
        if tests.is_empty() {
            return Err(invalid("strategy needs at least one test"));
        }
        let total: f64 = tests.iter().map(|(w, _)| *w).sum();
        if tests.iter().any(|(w, _)| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("weights must be nonnegative and sum to 1 (sum {total})")));
        }
        let psi = target.vector();
        let dim = psi.len();
        let mut sum = CMatrix::zeros(dim, dim);
        for (i, (w, t)) in tests.iter().enumerate() {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch(format!("test {i} has wrong dimension")));
            }
            if !t.is_test_operator() {
                return Err(invalid(format!("test {i} is not between 0 and 𝟙")));
            }
            let res = t.fix_residual(&psi);
            if res > FIX_TOL {
                return Err(Error::TargetNotFixed(res));
            }
            sum += t.entries() * c(*w);
        }
        Ok(Self {
            operator: HermitianOperator::hermitian_part(sum),
            tests: tests
                .into_iter()
                .map(|(weight, operator)| WeightedTest { weight, operator })
                .collect(),
            target,
        })
    }

    pub fn tests(&self) -> &[WeightedTest] {
        &self.tests
    }

    /// Verification operator `Σ_l p_l T_l`.
    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn target(&self) -> &PureState {
        &self.target
    }

    pub fn is_projective(&self) -> bool {
        self.tests.iter().all(|t| t.operator.is_projector())
    }

    pub fn spectral_gap(&self) -> Result<SpectralGap> {
        spectral_gap(&self.operator, &self.target)
    }
}

/// Second largest eigenvalue β of a verification operator and ν = 1 − β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGap {
    pub beta: f64,
    pub nu: f64,
}

impl SpectralGap {
    pub fn from_beta(beta: f64) -> Self {
        Self { beta, nu: 1.0 - beta }
    }
}

fn square_dim(spectrum: &SchmidtSpectrum) -> usize {
    spectrum.dim()
}

/// `Σ_j √s_j |jj⟩` on `d × d_B`.
pub fn target_state(spectrum: &SchmidtSpectrum, d_b: usize) -> Result<PureState> {
    let d = spectrum.dim();
    if d_b < d {
        return Err(Error::DimensionMismatch(format!("d_B = {d_b} < d = {d}")));
    }
    let mut m = CMatrix::zeros(d, d_b);
    for (j, s) in spectrum.values().iter().enumerate() {
        m[(j, j)] = c(s.sqrt());
    }
    PureState::normalized(m)
}

fn target_vector(spectrum: &SchmidtSpectrum) -> CVector {
    let d = square_dim(spectrum);
    let mut v = CVector::zeros(d * d);
    for (j, s) in spectrum.values().iter().enumerate() {
        v[j * d + j] = c(s.sqrt());
    }
    v
}

/// `|Ψ⟩⟨Ψ| + β(𝟙 − |Ψ⟩⟨Ψ|)`
pub fn homogeneous(target: &CVector, beta: f64) -> HermitianOperator {
    let p = outer(target);
    let dim = target.len();
    let id = CMatrix::identity(dim, dim);
    HermitianOperator::hermitian_part(&p + (id - &p) * c(beta))
}

/// Separable operator `|Ψ⟩⟨Ψ| + Σ_{j≠k} √(s_j s_k) |jk⟩⟨jk|`.
pub fn omega_sep(spectrum: &SchmidtSpectrum) -> Result<HermitianOperator> {
    let d = square_dim(spectrum);
    let s = spectrum.values();
    let mut m = outer(&target_vector(spectrum));
    for j in 0..d {
        for k in 0..d {
            if j != k {
                m[(j * d + k, j * d + k)] += c((s[j] * s[k]).sqrt());
            }
        }
    }
    Ok(HermitianOperator::hermitian_part(m))
}

/// Optimal separable homogeneous operator, β = √(s₀s₁)/(1+√(s₀s₁)).
pub fn omega_sep_h(spectrum: &SchmidtSpectrum) -> HermitianOperator {
    let g = (spectrum.s0() * spectrum.s1()).sqrt();
    homogeneous(&target_vector(spectrum), g / (1.0 + g))
}

/// Local homogeneous operator, β = (s₀+s₁)/(2+s₀+s₁).
pub fn omega_lc_h(spectrum: &SchmidtSpectrum) -> HermitianOperator {
    let a = spectrum.s0() + spectrum.s1();
    homogeneous(&target_vector(spectrum), a / (2.0 + a))
}

/// Fourier basis vector `|u_j⟩ = Σ_k ω^{jk}|k⟩/√d`.
fn fourier_vector(d: usize, j: usize) -> CVector {
    let norm = 1.0 / (d as f64).sqrt();
    CVector::from_fn(d, |k, _| {
        Complex64::from_polar(norm, 2.0 * PI * ((j * k) % d) as f64 / d as f64)
    })
}

/// Two-test strategy: computational-basis test plus the Fourier test
/// `Σ_j |u_j v_j⟩⟨u_j v_j|` with `|v_j⟩ = M|u_j*⟩`, `M = √d·diag(√s)`.
pub fn omega_mub(spectrum: &SchmidtSpectrum) -> Result<Strategy> {
    let d = square_dim(spectrum);
    let dim = d * d;
    let mut p1 = CMatrix::zeros(dim, dim);
    for j in 0..d {
        p1[(j * d + j, j * d + j)] = ONE;
    }
    let m_diag: Vec<f64> = spectrum
        .values()
        .iter()
        .map(|s| (d as f64 * s).sqrt())
        .collect();
    let mut p2 = CMatrix::zeros(dim, dim);
    for j in 0..d {
        let u = fourier_vector(d, j);
        let v = CVector::from_fn(d, |k, _| u[k].conj() * m_diag[k]);
        p2 += outer(&kron_vec(&u, &v));
    }
    let target = target_state(spectrum, d)?;
    Strategy::new(
        vec![
            (0.5, HermitianOperator::hermitian_part(p1)),
            (0.5, HermitianOperator::hermitian_part(p2)),
        ],
        target,
    )
}

/// `|Φ⟩⟨Φ| + (𝟙 − |Φ⟩⟨Φ|)/(d+1)` for the `d × d` maximally entangled state.
pub fn omega_opt(d: usize) -> Result<HermitianOperator> {
    let spectrum = SchmidtSpectrum::uniform(d)?;
    Ok(homogeneous(&target_vector(&spectrum), 1.0 / (d as f64 + 1.0)))
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| n % k != 0)
}

/// Complete set of `d + 1` mutually unbiased bases for prime `d`, each
/// basis given as its list of vectors.
///
/// `d = 2` uses the computational, `{|±⟩}` and circular bases. Odd primes
/// use the computational basis and the quadratic-phase bases
/// `|ψ^a_b⟩ = Σ_k ω^{a k² + b k}|k⟩/√d`.
pub fn mutually_unbiased_bases(d: usize) -> Result<Vec<Vec<CVector>>> {
    if !is_prime(d) {
        return Err(invalid(format!("MUB construction needs a prime dimension, got {d}")));
    }
    let computational: Vec<CVector> = (0..d).map(|j| basis_vector(d, j)).collect();
    let mut bases = vec![computational];
    if d == 2 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let i = Complex64::new(0.0, h);
        let v = |a: Complex64, b: Complex64| CVector::from_vec(vec![a, b]);
        bases.push(vec![v(c(h), c(h)), v(c(h), c(-h))]);
        bases.push(vec![v(c(h), i), v(c(h), -i)]);
        return Ok(bases);
    }
    let norm = 1.0 / (d as f64).sqrt();
    for a in 0..d {
        let basis = (0..d)
            .map(|b| {
                CVector::from_fn(d, |k, _| {
                    let phase = (a * k * k + b * k) % d;
                    Complex64::from_polar(norm, 2.0 * PI * phase as f64 / d as f64)
                })
            })
            .collect();
        bases.push(basis);
    }
    Ok(bases)
}

/// Conjugate-basis test `Σ_{ψ∈B} |ψ⟩⟨ψ| ⊗ |ψ*⟩⟨ψ*|`.
pub fn conjugate_basis_test(basis: &[CVector]) -> HermitianOperator {
    let d = basis[0].len();
    let mut m = CMatrix::zeros(d * d, d * d);
    for psi in basis {
        m += outer(&kron_vec(psi, &psi.conjugate()));
    }
    HermitianOperator::hermitian_part(m)
}

/// `d + 1` conjugate-basis tests with uniform weights realizing
/// [`omega_opt`] for prime `d`.
pub fn two_design_strategy(d: usize) -> Result<Strategy> {
    let bases = mutually_unbiased_bases(d)?;
    let w = 1.0 / bases.len() as f64;
    let tests = bases.iter().map(|b| (w, conjugate_basis_test(b))).collect();
    Strategy::new(tests, target_state(&SchmidtSpectrum::uniform(d)?, d)?)
}

/// Second largest eigenvalue of a verification operator of `target`.
pub fn spectral_gap(op: &HermitianOperator, target: &PureState) -> Result<SpectralGap> {
    let psi = target.vector();
    if op.dim() != psi.len() {
        return Err(Error::DimensionMismatch("operator and target sizes differ".into()));
    }
    let res = op.fix_residual(&psi);
    if res > 1e-8 {
        return Err(Error::TargetNotFixed(res));
    }
    let ev = op.eigenvalues();
    let beta = ev.get(1).copied().unwrap_or(0.0).max(0.0);
    if beta >= 1.0 - 1e-12 {
        return Err(Error::Infeasible(
            "eigenvalue 1 is degenerate, the operator has no spectral gap".into(),
        ));
    }
    Ok(SpectralGap::from_beta(beta))
}

/// Partial transpose on the second factor: `(jk),(lm) ↦ (jm),(lk)`.
pub fn partial_transpose(
    op: &HermitianOperator,
    dims: (usize, usize),
) -> Result<HermitianOperator> {
    let (d_a, d_b) = dims;
    if d_a * d_b != op.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{d_a}×{d_b} does not match operator dimension {}",
            op.dim()
        )));
    }
    let e = op.entries();
    let m = CMatrix::from_fn(op.dim(), op.dim(), |row, col| {
        let (j, m) = (row / d_b, row % d_b);
        let (l, k) = (col / d_b, col % d_b);
        e[(j * d_b + k, l * d_b + m)]
    });
    Ok(HermitianOperator { entries: m })
}

/// Positive partial transpose within `−1e−9`.
pub fn is_ppt(op: &HermitianOperator, dims: (usize, usize)) -> Result<bool> {
    let pt = partial_transpose(op, dims)?;
    let ev = pt.eigenvalues();
    Ok(*ev.last().unwrap() >= -PPT_TOL)
}

/// Both `Ω` and `𝟙 − Ω` have positive partial transpose; equivalent to
/// separability of the strategy for `d_A·d_B ≤ 6`.
pub fn is_ppt_strategy(op: &HermitianOperator, dims: (usize, usize)) -> Result<bool> {
    Ok(is_ppt(op, dims)? && is_ppt(&op.complement(), dims)?)
}

/// `|ψ⟩ ⊗ |φ⟩` as a Kronecker product of operators, exposed for tests.
pub fn product_operator(a: &CMatrix, b: &CMatrix) -> HermitianOperator {
    HermitianOperator::hermitian_part(kron(a, b))
}
