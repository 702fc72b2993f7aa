use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PassivityError;

/// Real polynomial stored in ascending-degree order (`coeffs[k]` multiplies `λ^k`).
///
/// Trailing zero coefficients are trimmed on construction, so the leading
/// coefficient is nonzero unless the polynomial is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl From<Vec<f64>> for Polynomial {
    fn from(coeffs: Vec<f64>) -> Self {
        Self::new(coeffs)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `λ`.
    pub fn lambda() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    /// Coefficient of `λ^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `Σ |c_k| |z|^k`, the natural magnitude against which `|p(z)|` is small.
    pub fn magnitude_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c.abs())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// `leading · Π (λ - r)`; imaginary parts of the expanded coefficients are dropped,
    /// so `roots` must be closed under conjugation.
    pub fn from_roots(leading: f64, roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(leading, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        Self::new(c.into_iter().map(|z| z.re).collect())
    }

    /// All complex roots, from the eigenvalues of the companion matrix followed by a
    /// few guarded Newton polishing steps.
    pub fn roots(&self) -> Vec<Complex64> {
        let Some(n) = self.degree() else {
            return Vec::new();
        };
        if n == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            companion[(k, k - 1)] = 1.0;
        }
        for k in 0..n {
            companion[(k, n - 1)] = -self.coeffs[k] / lead;
        }
        let dp = self.derivative();
        companion
            .complex_eigenvalues()
            .iter()
            .map(|&z| self.polish(&dp, z))
            .collect()
    }

    fn polish(&self, dp: &Self, mut z: Complex64) -> Complex64 {
        let mut fz = self.eval_complex(z).norm();
        for _ in 0..4 {
            let d = dp.eval_complex(z);
            if d.norm() == 0.0 {
                break;
            }
            let cand = z - self.eval_complex(z) / d;
            let fc = self.eval_complex(cand).norm();
            if !(fc < fz) {
                break;
            }
            z = cand;
            fz = fc;
        }
        z
    }
}

/// Routh–Hurwitz test: `true` iff every root has strictly negative real part.
///
/// Any non-positive entry in the first column (including a vanishing pivot or an
/// all-zero row) is reported as non-Hurwitz. Nonzero constants have no roots and
/// are reported as Hurwitz.
pub fn routh_hurwitz(p: &Polynomial) -> Result<bool, PassivityError> {
    let Some(n) = p.degree() else {
        return Err(PassivityError::ZeroPolynomial);
    };
    let sign = p.leading().signum();
    // descending coefficients, normalized to a positive leading term
    let desc: Vec<f64> = (0..=n).rev().map(|k| sign * p.coeff(k)).collect();
    if desc.iter().any(|&c| !(c > 0.0)) {
        return Ok(false);
    }
    if n == 0 {
        return Ok(true);
    }

    let width = n / 2 + 1;
    let mut prev: Vec<f64> = (0..width).map(|j| desc.get(2 * j).copied().unwrap_or(0.0)).collect();
    let mut cur: Vec<f64> =
        (0..width).map(|j| desc.get(2 * j + 1).copied().unwrap_or(0.0)).collect();

    for _ in 2..=n {
        let pivot = cur[0];
        if !(pivot > 0.0) {
            return Ok(false);
        }
        let next: Vec<f64> = (0..width)
            .map(|j| {
                let a = prev.get(j + 1).copied().unwrap_or(0.0);
                let b = cur.get(j + 1).copied().unwrap_or(0.0);
                (pivot * a - prev[0] * b) / pivot
            })
            .collect();
        prev = cur;
        cur = next;
    }
    Ok(cur[0] > 0.0)
}
