use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{PassivityError, Polynomial};

/// Relative threshold below which `|den(iω)|` counts as a pole on the sample point.
const POLE_ON_AXIS_RTOL: f64 = 1e-14;

/// SISO transfer function `W(λ) = num(λ) / den(λ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalTF {
    num: Polynomial,
    den: Polynomial,
}

#[derive(Deserialize)]
struct RawTf {
    num: Polynomial,
    den: Polynomial,
}

impl<'de> Deserialize<'de> for RationalTF {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawTf::deserialize(d)?;
        RationalTF::new(raw.num, raw.den).map_err(serde::de::Error::custom)
    }
}

impl RationalTF {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, PassivityError> {
        if den.is_zero() {
            return Err(PassivityError::ZeroDenominator);
        }
        if num.degree().unwrap_or(0) > den.degree().unwrap_or(0) {
            return Err(PassivityError::Improper {
                num_degree: num.degree().unwrap_or(0),
                den_degree: den.degree().unwrap_or(0),
            });
        }
        Ok(Self { num, den })
    }

    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self, PassivityError> {
        Self::new(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec()))
    }

    /// `η(λ) / (λ ρ(λ))`, the pole-at-zero agent family.
    pub fn pole_at_zero(eta: &[f64], rho: &[f64]) -> Result<Self, PassivityError> {
        let den = Polynomial::lambda().mul(&Polynomial::new(rho.to_vec()));
        Self::new(Polynomial::new(eta.to_vec()), den)
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn order(&self) -> usize {
        self.den.degree().unwrap_or(0)
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    /// `lim_{|λ|→∞} W(λ)`.
    pub fn feedthrough(&self) -> f64 {
        if self.is_strictly_proper() {
            0.0
        } else {
            self.num.leading() / self.den.leading()
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.num.eval_complex(z) / self.den.eval_complex(z)
    }

    /// `W(iω)`; fails when `iω` sits on a pole.
    pub fn eval_freq(&self, omega: f64) -> Result<Complex64, PassivityError> {
        let z = Complex64::new(0.0, omega);
        let d = self.den.eval_complex(z);
        let scale = self.den.magnitude_scale(z);
        if d.norm() <= POLE_ON_AXIS_RTOL * scale {
            return Err(PassivityError::PoleOnAxis { omega });
        }
        Ok(self.num.eval_complex(z) / d)
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.den.roots()
    }

    /// Cancels numerator/denominator root pairs closer than `tol · (1 + |r|)`.
    /// Returns the input unchanged when nothing cancels.
    pub fn cancel_common_roots(&self, tol: f64) -> Self {
        if self.num.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let mut zeros = self.num.roots();
        let mut poles = self.den.roots();
        let mut cancelled = false;
        let mut i = 0;
        while i < zeros.len() {
            let z = zeros[i];
            let hit = poles
                .iter()
                .position(|&p| (p - z).norm() <= tol * (1.0 + z.norm()));
            match hit {
                Some(j) => {
                    zeros.swap_remove(i);
                    poles.swap_remove(j);
                    cancelled = true;
                }
                None => i += 1,
            }
        }
        if !cancelled {
            return self.clone();
        }
        Self {
            num: Polynomial::from_roots(self.num.leading(), &zeros),
            den: Polynomial::from_roots(self.den.leading(), &poles),
        }
    }
}
