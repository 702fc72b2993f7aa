//! Weak-coupling synchronization certificates and their supporting identities.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphnet::{Digraph, GraphError};
use crate::passivity::{routh_hurwitz, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("expected {expected} entries for {what}, got {got}")]
    BadDimensions { what: &'static str, expected: usize, got: usize },
    #[error("{what}[{index}] = {value} must be {requirement}")]
    BadValue { what: &'static str, index: usize, value: f64, requirement: &'static str },
    #[error("output vectors have inconsistent dimensions")]
    RaggedOutputs,
    #[error("weak-coupling certificate does not hold: {0:?}")]
    CertificateFailed(Vec<FailureReason>),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum FailureReason {
    NotStronglyConnected,
    /// Nodes (0-based) whose slack is not strictly positive.
    CouplingTooStrong { nodes: Vec<usize> },
    NoPinnedAgent,
}

/// Outcome of a weak-coupling test with per-node diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakCouplingVerdict {
    pub passes: bool,
    /// `1/2 − α_j d_j⁺` (plain) or `1/2 − α_j (d_j⁺ + 2 b_j)` (reference tracking).
    pub slack: Vec<f64>,
    /// `p_i · slack_i`, present when the graph is strongly connected.
    pub kappa: Option<Vec<f64>>,
    pub failures: Vec<FailureReason>,
}

impl WeakCouplingVerdict {
    pub fn min_slack(&self) -> f64 {
        self.slack.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_len(what: &'static str, v: &[f64], n: usize) -> Result<(), CertifyError> {
    if v.len() != n {
        return Err(CertifyError::BadDimensions { what, expected: n, got: v.len() });
    }
    Ok(())
}

fn check_nonneg(what: &'static str, v: &[f64]) -> Result<(), CertifyError> {
    for (index, &value) in v.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(CertifyError::BadValue { what, index, value, requirement: "finite and >= 0" });
        }
    }
    Ok(())
}

fn check_pos(what: &'static str, v: &[f64]) -> Result<(), CertifyError> {
    for (index, &value) in v.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(CertifyError::BadValue { what, index, value, requirement: "finite and > 0" });
        }
    }
    Ok(())
}

fn verdict_from_slack(g: &Digraph, slack: Vec<f64>, mut failures: Vec<FailureReason>) -> WeakCouplingVerdict {
    let offending: Vec<usize> = slack
        .iter()
        .enumerate()
        .filter(|(_, &s)| !(s > 0.0))
        .map(|(j, _)| j)
        .collect();
    if !offending.is_empty() {
        failures.insert(0, FailureReason::CouplingTooStrong { nodes: offending });
    }
    let kappa = match g.perron_weights() {
        Ok(p) => Some(p.p.iter().zip(&slack).map(|(pi, s)| pi * s).collect()),
        Err(_) => {
            failures.insert(0, FailureReason::NotStronglyConnected);
            None
        }
    };
    WeakCouplingVerdict { passes: failures.is_empty(), slack, kappa, failures }
}

/// Plain diffusive coupling: `α_j d_j⁺ < 1/2` for all `j` on a strongly connected graph.
pub fn check_theorem1(g: &Digraph, alphas: &[f64]) -> Result<WeakCouplingVerdict, CertifyError> {
    check_len("alphas", alphas, g.n())?;
    check_nonneg("alphas", alphas)?;
    let slack = g.d_plus().iter().zip(alphas).map(|(d, a)| 0.5 - a * d).collect();
    Ok(verdict_from_slack(g, slack, Vec::new()))
}

/// Reference tracking: `α_j (d_j⁺ + 2 b_j) < 1/2`, `Σ b > 0`, strongly connected graph.
pub fn check_theorem2(g: &Digraph, alphas: &[f64], b: &[f64]) -> Result<WeakCouplingVerdict, CertifyError> {
    check_len("alphas", alphas, g.n())?;
    check_len("b", b, g.n())?;
    check_nonneg("alphas", alphas)?;
    check_nonneg("b", b)?;
    let slack = g
        .d_plus()
        .iter()
        .zip(alphas)
        .zip(b)
        .map(|((d, a), bj)| 0.5 - a * (d + 2.0 * bj))
        .collect();
    let failures = if b.iter().sum::<f64>() > 0.0 { Vec::new() } else { vec![FailureReason::NoPinnedAgent] };
    Ok(verdict_from_slack(g, slack, failures))
}

/// Gains of the bidirectional platoon controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaccGainSet {
    /// Velocity gains.
    pub mu: Vec<f64>,
    /// Predecessor spacing gains.
    pub eta: Vec<f64>,
    /// Follower spacing gains (one fewer than vehicles).
    pub nu: Vec<f64>,
    /// Powertrain time constants, seconds.
    pub tau: Vec<f64>,
}

impl CaccGainSet {
    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<(), CertifyError> {
        let n = self.n();
        if n < 2 {
            return Err(CertifyError::BadDimensions { what: "mu", expected: 2, got: n });
        }
        check_len("eta", &self.eta, n)?;
        check_len("tau", &self.tau, n)?;
        check_len("nu", &self.nu, n - 1)?;
        check_pos("mu", &self.mu)?;
        check_pos("eta", &self.eta)?;
        check_pos("nu", &self.nu)?;
        check_pos("tau", &self.tau)?;
        Ok(())
    }

    /// Spacing load on vehicle `i` (0-based) that `μ_i²/2` must exceed.
    pub fn spacing_load(&self, i: usize) -> f64 {
        let n = self.n();
        if i == 0 {
            2.0 * self.eta[0] + self.nu[0]
        } else if i == n - 1 {
            self.eta[i]
        } else {
            self.eta[i] + self.nu[i]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaccVerdict {
    pub passes: bool,
    pub per_vehicle: Vec<bool>,
}

/// `μ_i τ_i < 1/2` and `μ_i²/2` above the spacing load for every vehicle.
pub fn check_theorem4(gains: &CaccGainSet) -> Result<CaccVerdict, CertifyError> {
    gains.validate()?;
    let per_vehicle: Vec<bool> = (0..gains.n())
        .map(|i| {
            let mu = gains.mu[i];
            mu * gains.tau[i] < 0.5 && mu * mu / 2.0 > gains.spacing_load(i)
        })
        .collect();
    Ok(CaccVerdict { passes: per_vehicle.iter().all(|&ok| ok), per_vehicle })
}

/// Hurwitz test of `s³ + p s² + q s + κ(N−1)` for identical third-order agents
/// under all-to-all coupling of weight `κ`.
pub fn all_to_all_bound(p: f64, q: f64, n_agents: usize, kappa: f64) -> bool {
    cubic_hurwitz(p, q, kappa * (n_agents as f64 - 1.0))
}

/// Hurwitz test of the disagreement dynamics `s³ + p s² + q s + κN`.
///
/// With `a_ij = κ` for all `i ≠ j` every nonzero Laplacian eigenvalue equals `κN`,
/// so this is the exact synchronization condition for the all-to-all network.
pub fn all_to_all_laplacian_bound(p: f64, q: f64, n_agents: usize, kappa: f64) -> bool {
    cubic_hurwitz(p, q, kappa * n_agents as f64)
}

fn cubic_hurwitz(p: f64, q: f64, c: f64) -> bool {
    routh_hurwitz(&Polynomial::new(vec![c, q, p, 1.0])).unwrap_or(false)
}

fn output_dim(y: &[Vec<f64>], n: usize) -> Result<usize, CertifyError> {
    if y.len() != n {
        return Err(CertifyError::BadDimensions { what: "outputs", expected: n, got: y.len() });
    }
    let m = y.first().map_or(0, Vec::len);
    if y.iter().any(|v| v.len() != m) {
        return Err(CertifyError::RaggedOutputs);
    }
    Ok(m)
}

/// `u_i = Σ_j a_ij (y_j − y_i)`.
pub(crate) fn diffusive_inputs(g: &Digraph, y: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = g.n();
    (0..n)
        .map(|i| {
            let mut u = vec![0.0; y[i].len()];
            for j in 0..n {
                let a = g.weight(i, j);
                if a != 0.0 {
                    for (ud, (yj, yi)) in u.iter_mut().zip(y[j].iter().zip(&y[i])) {
                        *ud += a * (yj - yi);
                    }
                }
            }
            u
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `|Σ p_i y_iᵀu_i + ½ Σ p_i a_ij |y_j − y_i|²|` for diffusive inputs `u`.
pub fn tech_identity_check(g: &Digraph, y: &[Vec<f64>]) -> Result<f64, CertifyError> {
    output_dim(y, g.n())?;
    let p = g.perron_weights()?.p;
    let u = diffusive_inputs(g, y);
    let n = g.n();
    let lhs: f64 = (0..n).map(|i| p[i] * dot(&y[i], &u[i])).sum();
    let mut rhs = 0.0;
    for i in 0..n {
        for j in 0..n {
            rhs -= 0.5 * p[i] * g.weight(i, j) * dist2(&y[j], &y[i]);
        }
    }
    Ok((lhs - rhs).abs())
}

/// `RHS − LHS` of `Σ p_i (y_iᵀu_i + α_i|u_i|²) ≤ −Σ κ_i a_ij |y_j − y_i|²`.
pub fn tech_inequality_check(g: &Digraph, alphas: &[f64], y: &[Vec<f64>]) -> Result<f64, CertifyError> {
    output_dim(y, g.n())?;
    let verdict = check_theorem1(g, alphas)?;
    if !verdict.passes {
        return Err(CertifyError::CertificateFailed(verdict.failures));
    }
    let kappa = verdict.kappa.expect("strongly connected");
    let p = g.perron_weights()?.p;
    let u = diffusive_inputs(g, y);
    let n = g.n();
    let lhs: f64 = (0..n)
        .map(|i| p[i] * (dot(&y[i], &u[i]) + alphas[i] * dot(&u[i], &u[i])))
        .sum();
    let mut rhs = 0.0;
    for i in 0..n {
        for j in 0..n {
            rhs -= kappa[i] * g.weight(i, j) * dist2(&y[j], &y[i]);
        }
    }
    Ok(rhs - lhs)
}

/// Smallest eigenvalue of the quadratic form
/// `ε Σ_{i,j} |y_j − y_i|² + Σ_i p_i γ_i |y_i|²` for scalar outputs.
pub fn reference_form_min_eigenvalue(p: &[f64], gamma: &[f64], eps: f64) -> f64 {
    let n = p.len();
    let nf = n as f64;
    let m = DMatrix::from_fn(n, n, |i, j| {
        let pairwise = 2.0 * eps * (if i == j { nf - 1.0 } else { -1.0 });
        pairwise + if i == j { p[i] * gamma[i] } else { 0.0 }
    });
    m.symmetric_eigenvalues().min()
}
