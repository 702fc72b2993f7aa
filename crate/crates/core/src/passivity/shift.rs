use serde::{Deserialize, Serialize};

use super::PassivityError;

/// Index transform under the input change `û = u + b·y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IfpShift {
    pub alpha: f64,
    pub b: f64,
    pub alpha_hat: f64,
    pub gamma: f64,
}

/// Requires `0 < b < 1/(2α)`; any `b > 0` is admissible when `α = 0`.
pub fn ifp_shift(alpha: f64, b: f64) -> Result<IfpShift, PassivityError> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(PassivityError::InvalidAlpha(alpha));
    }
    let denom = 1.0 - 2.0 * alpha * b;
    if !(b > 0.0) || !b.is_finite() || !(denom > 0.0) {
        return Err(PassivityError::BOutOfRange { alpha, b });
    }
    Ok(IfpShift {
        alpha,
        b,
        alpha_hat: alpha / denom,
        gamma: b * (1.0 - alpha * b) / denom,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|yᵀu + α|u|² − (1 − 2αb)(yᵀû + α̂|û|² − γ|y|²)|` with `û = u + b·y`.
pub fn ifp_shift_identity_check(alpha: f64, b: f64, y: &[f64], u: &[f64]) -> Result<f64, PassivityError> {
    if y.len() != u.len() {
        return Err(PassivityError::DimensionMismatch { left: y.len(), right: u.len() });
    }
    let s = ifp_shift(alpha, b)?;
    let u_hat: Vec<f64> = u.iter().zip(y).map(|(ui, yi)| ui + b * yi).collect();
    let lhs = dot(y, u) + alpha * dot(u, u);
    let rhs = (1.0 - 2.0 * alpha * b)
        * (dot(y, &u_hat) + s.alpha_hat * dot(&u_hat, &u_hat) - s.gamma * dot(y, y));
    Ok((lhs - rhs).abs())
}
