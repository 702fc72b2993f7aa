//! SISO rational transfer functions and input-feedforward passivity indices.
//!
//! The index of a stable-or-marginal transfer function is computed as
//! `α = max(0, −inf_ω Re W(iω))` from a logarithmic frequency sweep refined by
//! golden-section search. Structural conditions (no open right-half-plane
//! poles, simple imaginary poles with non-negative residues) are checked from
//! the denominator roots first.

mod ifp;
mod poly;
mod shift;
mod tf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ifp::{
    certification_grid, ifp_index, prl_conditions, residue_at, vehicle_ifp, IfpCertificate, IfpMethod,
    PrlReport, SWEEP_MAX, SWEEP_MIN, SWEEP_POINTS,
};
pub use poly::{routh_hurwitz, Polynomial};
pub use shift::{ifp_shift, ifp_shift_identity_check, IfpShift};
pub use tf::RationalTF;

/// Why a transfer function admits no finite passivity index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonCertifiable {
    UnstablePole { re: f64, im: f64 },
    RepeatedImaginaryPole { omega: f64 },
    BadResidue { omega: f64, residue_re: f64, residue_im: f64 },
}

impl std::fmt::Display for NonCertifiable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::UnstablePole { re, im } => write!(f, "unstable pole at {re}{im:+}i"),
            Self::RepeatedImaginaryPole { omega } => write!(f, "repeated imaginary pole at {omega}i"),
            Self::BadResidue { omega, residue_re, residue_im } => {
                write!(f, "residue {residue_re}{residue_im:+}i at pole {omega}i is not non-negative real")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PassivityError {
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("transfer function is improper (numerator degree {num_degree} > denominator degree {den_degree})")]
    Improper { num_degree: usize, den_degree: usize },
    #[error("frequency {omega} hits a pole on the imaginary axis")]
    PoleOnAxis { omega: f64 },
    #[error("not certifiable: {0}")]
    NotCertifiable(NonCertifiable),
    #[error("b = {b} outside (0, 1/(2 alpha)) for alpha = {alpha}")]
    BOutOfRange { alpha: f64, b: f64 },
    #[error("alpha must be finite and non-negative, got {0}")]
    InvalidAlpha(f64),
    #[error("vector lengths differ ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("mu * tau = {} must be below 1/2 (mu = {mu}, tau = {tau})", mu * tau)]
    MuTauViolation { mu: f64, tau: f64 },
}
