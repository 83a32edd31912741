//! Schmidt-spectrum algebra for bipartite pure states.
//!
//! A pure state on `d_A × d_B` is summarised, up to local unitaries, by its
//! Schmidt spectrum: the nonincreasing vector of squared Schmidt
//! coefficients. Everything in this module works on that vector (or on the
//! coefficient matrix of a state) and is a pure function of its inputs.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{squared_singular_values, CMatrix, CVector};

/// Sums closer than this to one are silently renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-9;
/// Tolerance for a state's Frobenius norm.
pub const STATE_NORM_TOL: f64 = 1e-12;

/// Nonincreasing probability vector of squared Schmidt coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SchmidtSpectrum {
    values: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Sorts and renormalizes `values`. Negative entries above `-1e-12` are
    /// treated as rounding noise and clamped to zero.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("empty spectrum"));
        }
        let mut values = values;
        for v in values.iter_mut() {
            if !v.is_finite() {
                return Err(invalid("spectrum entries must be finite"));
            }
            if *v < 0.0 {
                if *v < -1e-12 {
                    return Err(invalid(format!("negative Schmidt coefficient {v}")));
                }
                *v = 0.0;
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOL {
            return Err(Error::NotNormalized(sum));
        }
        values.iter_mut().for_each(|v| *v /= sum);
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    /// Maximally entangled spectrum `(1/d, …, 1/d)`.
    pub fn uniform(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be positive"));
        }
        Ok(Self {
            values: vec![1.0 / d as f64; d],
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Local dimension `d` the spectrum is written in (zeros included).
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Largest Schmidt coefficient.
    pub fn s0(&self) -> f64 {
        self.values[0]
    }

    /// Second largest Schmidt coefficient (zero for `d = 1`).
    pub fn s1(&self) -> f64 {
        self.values.get(1).copied().unwrap_or(0.0)
    }

    /// Number of nonzero coefficients.
    pub fn rank(&self, tol: f64) -> usize {
        self.values.iter().filter(|&&v| v > tol).count()
    }

    /// Same spectrum written in dimension `d ≥ self.dim()`.
    pub fn padded(&self, d: usize) -> Result<Self> {
        if d < self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot pad spectrum of length {} to {d}",
                self.dim()
            )));
        }
        let mut values = self.values.clone();
        values.resize(d, 0.0);
        Ok(Self { values })
    }

    pub fn is_uniform(&self, tol: f64) -> bool {
        let u = 1.0 / self.dim() as f64;
        self.values.iter().all(|v| (v - u).abs() <= tol)
    }
}

impl TryFrom<Vec<f64>> for SchmidtSpectrum {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SchmidtSpectrum> for Vec<f64> {
    fn from(s: SchmidtSpectrum) -> Self {
        s.values
    }
}

/// Bipartite pure state stored as its coefficient matrix.
///
/// Internally the matrix is kept with `rows ≤ cols`; a state given with
/// `d_A > d_B` is transposed and remembers that it was, so amplitudes are
/// still reported in the caller's `A ⊗ B` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    coeffs: CMatrix,
    swapped: bool,
}

impl PureState {
    /// Wraps a coefficient matrix `Ψ_{jk}` (row = Alice, column = Bob).
    /// The Frobenius norm must be one within `1e-12`.
    pub fn new(coeffs: CMatrix) -> Result<Self> {
        let norm = coeffs.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(invalid(format!("state norm {norm} is not one")));
        }
        Ok(Self::from_unchecked(coeffs))
    }

    /// Normalizes `coeffs` before wrapping them.
    pub fn normalized(coeffs: CMatrix) -> Result<Self> {
        let norm = coeffs.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite state"));
        }
        Ok(Self::from_unchecked(coeffs / num_complex::Complex64::new(norm, 0.0)))
    }

    /// Builds a state from a vector in the `A ⊗ B` product basis
    /// (index `j·d_B + k`).
    pub fn from_vector(v: &CVector, d_a: usize, d_b: usize) -> Result<Self> {
        if v.len() != d_a * d_b {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} is not {d_a}×{d_b}",
                v.len()
            )));
        }
        Self::normalized(CMatrix::from_fn(d_a, d_b, |j, k| v[j * d_b + k]))
    }

    fn from_unchecked(coeffs: CMatrix) -> Self {
        if coeffs.nrows() > coeffs.ncols() {
            Self {
                coeffs: coeffs.transpose(),
                swapped: true,
            }
        } else {
            Self {
                coeffs,
                swapped: false,
            }
        }
    }

    /// `(d_A, d_B)` in the caller's orientation.
    pub fn dims(&self) -> (usize, usize) {
        let (r, c) = self.coeffs.shape();
        if self.swapped {
            (c, r)
        } else {
            (r, c)
        }
    }

    /// `d = min(d_A, d_B)`.
    pub fn local_dim(&self) -> usize {
        self.coeffs.nrows()
    }

    /// Coefficient matrix with `rows ≤ cols`.
    pub fn coeffs(&self) -> &CMatrix {
        &self.coeffs
    }

    /// Coefficient matrix in the caller's `A × B` orientation.
    pub fn matrix(&self) -> CMatrix {
        if self.swapped {
            self.coeffs.transpose()
        } else {
            self.coeffs.clone()
        }
    }

    /// Amplitudes in the `A ⊗ B` product basis.
    pub fn vector(&self) -> CVector {
        let m = self.matrix();
        let (d_a, d_b) = m.shape();
        CVector::from_fn(d_a * d_b, |i, _| m[(i / d_b, i % d_b)])
    }

    /// |⟨self|other⟩|
    pub fn overlap(&self, other: &PureState) -> Result<f64> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch("states live on different spaces".into()));
        }
        Ok(self.vector().dotc(&other.vector()).norm())
    }

    /// Schmidt rank at the given threshold on Schmidt coefficients.
    pub fn schmidt_rank(&self, tol: f64) -> Result<usize> {
        Ok(schmidt_spectrum(self)?.rank(tol))
    }
}

#[derive(Serialize, Deserialize)]
struct PureStateRepr {
    d_a: usize,
    d_b: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m = self.matrix();
        let (d_a, d_b) = m.shape();
        let rows = |f: fn(&num_complex::Complex64) -> f64| {
            (0..d_a)
                .map(|j| (0..d_b).map(|k| f(&m[(j, k)])).collect())
                .collect()
        };
        PureStateRepr {
            d_a,
            d_b,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = PureStateRepr::deserialize(d)?;
        let ok = r.re.len() == r.d_a
            && r.im.len() == r.d_a
            && r.re.iter().chain(r.im.iter()).all(|row| row.len() == r.d_b);
        if !ok {
            return Err(D::Error::custom("state matrix shape does not match d_a × d_b"));
        }
        let m = CMatrix::from_fn(r.d_a, r.d_b, |j, k| {
            num_complex::Complex64::new(r.re[j][k], r.im[j][k])
        });
        PureState::new(m).map_err(D::Error::custom)
    }
}

/// Schmidt spectrum of a pure state: squared singular values of its
/// coefficient matrix.
pub fn schmidt_spectrum(state: &PureState) -> Result<SchmidtSpectrum> {
    let vals = squared_singular_values(state.coeffs())?;
    let sum: f64 = vals.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::Numerical("vanishing singular values".into()));
    }
    Ok(SchmidtSpectrum {
        values: vals.into_iter().map(|v| v / sum).collect(),
    })
}

fn check_rank(r: usize, d: usize) -> Result<()> {
    if r == 0 || r + 1 > d {
        return Err(Error::RankOutOfRange {
            r,
            max: d.saturating_sub(1),
        });
    }
    Ok(())
}

/// Sum of the `d − r` smallest Schmidt coefficients.
pub fn e_r(spectrum: &SchmidtSpectrum, r: usize) -> Result<f64> {
    check_rank(r, spectrum.dim())?;
    Ok(spectrum.values[r..].iter().sum())
}

/// Returns true iff `x` majorizes `y` (every prefix sum of the sorted `x`
/// dominates the corresponding prefix sum of `y`).
pub fn majorizes(x: &[f64], y: &[f64]) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    if (sx - sy).abs() > 1e-10 {
        return Err(invalid(format!("totals differ: {sx} vs {sy}")));
    }
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    };
    let (x, y) = (sorted(x), sorted(y));
    let (mut px, mut py) = (0.0, 0.0);
    for (a, b) in x.iter().zip(&y) {
        px += a;
        py += b;
        if px < py - 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn aligned(a: &SchmidtSpectrum, b: &SchmidtSpectrum) -> (SchmidtSpectrum, SchmidtSpectrum) {
    let d = a.dim().max(b.dim());
    (a.padded(d).unwrap(), b.padded(d).unwrap())
}

/// Largest overlap `Σ_j √(a_j b_j)` between states with spectra `a`, `b`.
pub fn max_overlap(a: &SchmidtSpectrum, b: &SchmidtSpectrum) -> f64 {
    let (a, b) = aligned(a, b);
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x * y).sqrt())
        .sum::<f64>()
        .min(1.0)
}

/// Maximum fidelity with states of Schmidt number at most `r`.
pub fn fidelity_rank(spectrum: &SchmidtSpectrum, r: usize) -> Result<f64> {
    Ok(1.0 - e_r(spectrum, r)?)
}

/// Maximum fidelity with states whose `E_r` is at most `e`.
pub fn fidelity_limited(spectrum: &SchmidtSpectrum, r: usize, e: f64) -> Result<f64> {
    if !(e >= 0.0) {
        return Err(invalid(format!("E must be nonnegative, got {e}")));
    }
    let tail = e_r(spectrum, r)?;
    if e >= tail {
        return Ok(1.0);
    }
    let root = (tail * e).sqrt() + ((1.0 - tail) * (1.0 - e)).sqrt();
    Ok(root * root)
}

/// Lipschitz constant of `E_r` with respect to the state vector.
pub fn lipschitz_const(r: usize, d: usize) -> Result<f64> {
    check_rank(r, d)?;
    if 2 * r <= d {
        Ok(1.0)
    } else {
        Ok(2.0 * ((r * (d - r)) as f64).sqrt() / d as f64)
    }
}

/// Optimal probability of converting `source` into `target` by LOCC.
///
/// Terms with `E_r(target) = 0` are dropped when `E_r(source) > 0` (their
/// ratio is infinite) and skipped when both vanish; the result is capped
/// at one.
pub fn vidal_probability(source: &SchmidtSpectrum, target: &SchmidtSpectrum) -> f64 {
    let (source, target) = aligned(source, target);
    let d = source.dim();
    let mut best = 1.0_f64;
    for r in 1..d {
        let es: f64 = source.values[r..].iter().sum();
        let et: f64 = target.values[r..].iter().sum();
        if et <= 1e-15 {
            continue;
        }
        best = best.min(es / et);
    }
    best.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn spec(v: &[f64]) -> SchmidtSpectrum {
        SchmidtSpectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn constructor_sorts_and_renormalizes() {
        let s = spec(&[0.2, 0.5, 0.3 + 5e-10]);
        assert!((s.values()[0] - 0.5).abs() < 1e-9);
        assert!((s.values().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(matches!(
            SchmidtSpectrum::new(vec![0.5, 0.6]),
            Err(Error::NotNormalized(_))
        ));
        assert!(SchmidtSpectrum::new(vec![1.1, -0.1]).is_err());
    }

    #[test]
    fn product_and_bell_spectra() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(1.0);
        let s = schmidt_spectrum(&PureState::new(m).unwrap()).unwrap();
        assert!((s.values()[0] - 1.0).abs() < 1e-12 && s.values()[1].abs() < 1e-12);

        let phi = CMatrix::identity(2, 2) * c(std::f64::consts::FRAC_1_SQRT_2);
        let s = schmidt_spectrum(&PureState::new(phi).unwrap()).unwrap();
        assert!((s.values()[0] - 0.5).abs() < 1e-12 && (s.values()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tall_state_is_transposed_but_keeps_ordering() {
        let m = CMatrix::from_fn(3, 2, |j, k| c((j * 2 + k) as f64));
        let st = PureState::normalized(m.clone()).unwrap();
        assert_eq!(st.dims(), (3, 2));
        assert_eq!(st.local_dim(), 2);
        let v = st.vector();
        let n = m.norm();
        assert!((v[3].re - 3.0 / n).abs() < 1e-15);
    }

    #[test]
    fn e_r_examples() {
        assert!((e_r(&SchmidtSpectrum::uniform(4).unwrap(), 2).unwrap() - 0.5).abs() < 1e-12);
        assert!((e_r(&spec(&[0.4, 0.4, 0.2]), 2).unwrap() - 0.2).abs() < 1e-12);
        for r in 1..3 {
            assert_eq!(e_r(&spec(&[1.0, 0.0, 0.0]), r).unwrap(), 0.0);
        }
        assert!(matches!(e_r(&spec(&[0.5, 0.5]), 2), Err(Error::RankOutOfRange { .. })));
        assert!(e_r(&spec(&[0.5, 0.5]), 0).is_err());
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&[0.6, 0.2, 0.2], &[0.4, 0.4, 0.2]).unwrap());
        let x = [0.3, 0.3, 0.4];
        assert!(majorizes(&x, &x).unwrap());
        assert!(!majorizes(&[0.5, 0.5, 0.0], &[0.6, 0.2, 0.2]).unwrap());
        // incomparable pair: neither direction holds
        assert!(!majorizes(&[0.6, 0.2, 0.2], &[0.5, 0.5, 0.0]).unwrap());
        assert!(majorizes(&[1.0], &[0.5, 0.5]).is_err());
        assert!(majorizes(&[1.0, 0.0], &[0.5, 0.6]).is_err());
    }

    #[test]
    fn max_overlap_examples() {
        let u3 = SchmidtSpectrum::uniform(3).unwrap();
        assert!((max_overlap(&u3, &u3) - 1.0).abs() < 1e-12);
        let a = spec(&[1.0, 0.0]);
        let b = spec(&[0.5, 0.5]);
        assert!((max_overlap(&a, &b) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let v = max_overlap(&spec(&[0.6, 0.4]), &b);
        assert!((v - (0.3f64.sqrt() + 0.2f64.sqrt())).abs() < 1e-12);
        // different lengths pad with zeros
        assert!((max_overlap(&spec(&[1.0]), &b) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let s = spec(&[0.4, 0.4, 0.2]);
        assert!((fidelity_rank(&s, 2).unwrap() - 0.8).abs() < 1e-12);
        assert!((fidelity_rank(&SchmidtSpectrum::uniform(5).unwrap(), 2).unwrap() - 0.4).abs() < 1e-12);
        assert!((fidelity_rank(&spec(&[0.7, 0.3]), 1).unwrap() - 0.7).abs() < 1e-12);

        let s = spec(&[0.64, 0.36]);
        assert_eq!(fidelity_limited(&s, 1, 0.36).unwrap(), 1.0);
        assert!((fidelity_limited(&s, 1, 0.0).unwrap() - 0.64).abs() < 1e-12);
        assert!(fidelity_limited(&s, 1, -0.1).is_err());
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(lipschitz_const(2, 4).unwrap(), 1.0);
        assert!((lipschitz_const(3, 4).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-12);
        let d = 10_000;
        let l = lipschitz_const(d - 1, d).unwrap();
        assert!((l * (d as f64).sqrt() / 2.0 - 1.0).abs() < 1e-3);
        assert!(lipschitz_const(4, 4).is_err());
    }

    #[test]
    fn vidal_examples() {
        let s = spec(&[0.6, 0.4]);
        assert!((vidal_probability(&s, &s) - 1.0).abs() < 1e-12);
        let u = SchmidtSpectrum::uniform(2).unwrap();
        for t in [[0.9, 0.1], [0.5, 0.5], [1.0, 0.0]] {
            assert!((vidal_probability(&u, &spec(&t)) - 1.0).abs() < 1e-12);
        }
        assert!((vidal_probability(&s, &u) - 0.8).abs() < 1e-12);
        // product state cannot become entangled
        assert_eq!(vidal_probability(&spec(&[1.0, 0.0]), &u), 0.0);
        // anything converts to a product state
        assert_eq!(vidal_probability(&u, &spec(&[1.0])), 1.0);
    }

    #[test]
    fn spectrum_json_is_a_plain_array() {
        let s = spec(&[0.25, 0.75]);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[0.75,0.25]");
        let back: SchmidtSpectrum = serde_json::from_str("[0.5,0.5]").unwrap();
        assert_eq!(back.values(), &[0.5, 0.5]);
        assert!(serde_json::from_str::<SchmidtSpectrum>("[0.5,0.6]").is_err());
    }
}
