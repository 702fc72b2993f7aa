use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::passivity::{ifp_index, vehicle_ifp, IfpCertificate, IfpMethod, PassivityError, RationalTF};

/// Right-hand side of an agent `ẋ = f(x, u)`, `y = h(x)`.
///
/// Agents with a positive [`input_delay`](AgentDynamics::input_delay) see their
/// input `u(t − delay)`, read from the network's input history.
pub trait AgentDynamics: Send + Sync + fmt::Debug {
    fn state_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn output(&self, x: &[f64], y: &mut [f64]);
    fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]);
    fn input_delay(&self) -> f64 {
        0.0
    }
}

/// Strictly proper SISO agent in controllable canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiAgent {
    tf: RationalTF,
    /// Monic denominator coefficients `a_0..a_{n-1}`.
    den: Vec<f64>,
    /// Normalized numerator coefficients `b_0..b_{n-1}`.
    num: Vec<f64>,
}

impl LtiAgent {
    pub fn new(tf: RationalTF) -> Result<Self, SimError> {
        if !tf.is_strictly_proper() {
            return Err(SimError::FeedthroughUnsupported);
        }
        let n = tf.order();
        if n == 0 {
            return Err(SimError::InvalidAgent("static gain agents have no state".into()));
        }
        let lead = tf.den().leading();
        let den = (0..n).map(|k| tf.den().coeff(k) / lead).collect();
        let num = (0..n).map(|k| tf.num().coeff(k) / lead).collect();
        Ok(Self { tf, den, num })
    }

    pub fn tf(&self) -> &RationalTF {
        &self.tf
    }

    /// State-space matrices `(P, Q, R, S)` of the realization.
    pub fn matrices(&self) -> (DMatrix<f64>, DVector<f64>, RowDVector<f64>, f64) {
        let n = self.den.len();
        let mut p = DMatrix::zeros(n, n);
        for k in 0..n - 1 {
            p[(k, k + 1)] = 1.0;
        }
        for k in 0..n {
            p[(n - 1, k)] = -self.den[k];
        }
        let mut q = DVector::zeros(n);
        q[n - 1] = 1.0;
        let r = RowDVector::from_row_slice(&self.num);
        (p, q, r, 0.0)
    }
}

impl AgentDynamics for LtiAgent {
    fn state_dim(&self) -> usize {
        self.den.len()
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn output(&self, x: &[f64], y: &mut [f64]) {
        y[0] = self.num.iter().zip(x).map(|(b, x)| b * x).sum();
    }

    fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let n = self.den.len();
        dx[..n - 1].copy_from_slice(&x[1..]);
        dx[n - 1] = u[0] - self.den.iter().zip(x).map(|(a, x)| a * x).sum::<f64>();
    }
}

/// Agent variants shipped with the simulator.
#[derive(Debug, Clone)]
pub enum AgentModel {
    LtiSiso(LtiAgent),
    /// `ẏ(t) = u(t − delay)`, `y ∈ ℝ^dim`.
    DelayedIntegrator { delay: f64, dim: usize },
    /// `τ y⃛ + ÿ + μ ẏ = u`, state `(y, ẏ, ÿ)`.
    Vehicle3rd { tau: f64, mu: f64 },
    Custom(Arc<dyn AgentDynamics>),
}

impl AgentModel {
    pub fn lti(tf: RationalTF) -> Result<Self, SimError> {
        LtiAgent::new(tf).map(AgentModel::LtiSiso)
    }

    pub fn delayed_integrator(delay: f64, dim: usize) -> Result<Self, SimError> {
        if !(delay >= 0.0) || !delay.is_finite() || dim == 0 {
            return Err(SimError::InvalidAgent(format!("delayed integrator delay={delay} dim={dim}")));
        }
        Ok(AgentModel::DelayedIntegrator { delay, dim })
    }

    pub fn vehicle(tau: f64, mu: f64) -> Result<Self, SimError> {
        if !(tau > 0.0 && mu > 0.0) {
            return Err(SimError::InvalidAgent(format!("vehicle tau={tau} mu={mu}")));
        }
        Ok(AgentModel::Vehicle3rd { tau, mu })
    }

    /// An equilibrium state whose output equals `y0`, when one exists.
    pub fn rest_state_with_output(&self, y0: &[f64]) -> Option<Vec<f64>> {
        match self {
            AgentModel::LtiSiso(a) => {
                let b0 = a.num[0];
                if a.den[0] != 0.0 || b0 == 0.0 || y0.len() != 1 {
                    return None;
                }
                let mut x = vec![0.0; a.den.len()];
                x[0] = y0[0] / b0;
                Some(x)
            }
            AgentModel::DelayedIntegrator { dim, .. } => (y0.len() == *dim).then(|| y0.to_vec()),
            AgentModel::Vehicle3rd { .. } => (y0.len() == 1).then(|| vec![y0[0], 0.0, 0.0]),
            AgentModel::Custom(_) => None,
        }
    }
}

impl AgentDynamics for AgentModel {
    fn state_dim(&self) -> usize {
        match self {
            AgentModel::LtiSiso(a) => a.state_dim(),
            AgentModel::DelayedIntegrator { dim, .. } => *dim,
            AgentModel::Vehicle3rd { .. } => 3,
            AgentModel::Custom(a) => a.state_dim(),
        }
    }

    fn output_dim(&self) -> usize {
        match self {
            AgentModel::LtiSiso(_) | AgentModel::Vehicle3rd { .. } => 1,
            AgentModel::DelayedIntegrator { dim, .. } => *dim,
            AgentModel::Custom(a) => a.output_dim(),
        }
    }

    fn output(&self, x: &[f64], y: &mut [f64]) {
        match self {
            AgentModel::LtiSiso(a) => a.output(x, y),
            AgentModel::DelayedIntegrator { .. } => y.copy_from_slice(x),
            AgentModel::Vehicle3rd { .. } => y[0] = x[0],
            AgentModel::Custom(a) => a.output(x, y),
        }
    }

    fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        match self {
            AgentModel::LtiSiso(a) => a.derivative(x, u, dx),
            AgentModel::DelayedIntegrator { .. } => dx.copy_from_slice(u),
            AgentModel::Vehicle3rd { tau, mu } => {
                dx[0] = x[1];
                dx[1] = x[2];
                dx[2] = (u[0] - x[2] - mu * x[1]) / tau;
            }
            AgentModel::Custom(a) => a.derivative(x, u, dx),
        }
    }

    fn input_delay(&self) -> f64 {
        match self {
            AgentModel::DelayedIntegrator { delay, .. } => *delay,
            AgentModel::Custom(a) => a.input_delay(),
            _ => 0.0,
        }
    }
}

/// JSON description of an agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AgentSpec {
    Lti { num: Vec<f64>, den: Vec<f64> },
    DelayedIntegrator {
        delay: f64,
        #[serde(default = "one")]
        dim: usize,
    },
    Vehicle { tau: f64, mu: f64 },
}

fn one() -> usize {
    1
}

impl AgentSpec {
    pub fn build(&self) -> Result<AgentModel, SimError> {
        match self {
            AgentSpec::Lti { num, den } => AgentModel::lti(RationalTF::from_coeffs(num, den)?),
            AgentSpec::DelayedIntegrator { delay, dim } => AgentModel::delayed_integrator(*delay, *dim),
            AgentSpec::Vehicle { tau, mu } => AgentModel::vehicle(*tau, *mu),
        }
    }

    /// Transfer function from input to output, when the agent is delay-free.
    pub fn transfer_function(&self) -> Option<RationalTF> {
        match self {
            AgentSpec::Lti { num, den } => RationalTF::from_coeffs(num, den).ok(),
            AgentSpec::DelayedIntegrator { delay, dim: 1 } if *delay == 0.0 => {
                RationalTF::from_coeffs(&[1.0], &[0.0, 1.0]).ok()
            }
            AgentSpec::Vehicle { tau, mu } => RationalTF::from_coeffs(&[1.0], &[0.0, *mu, 1.0, *tau]).ok(),
            _ => None,
        }
    }

    /// IFP index of the agent: the delay for a delayed integrator, the closed form
    /// `1/μ²` for a vehicle, and the frequency sweep otherwise.
    pub fn ifp_certificate(&self) -> Result<IfpCertificate, PassivityError> {
        match self {
            AgentSpec::Lti { num, den } => ifp_index(&RationalTF::from_coeffs(num, den)?),
            AgentSpec::DelayedIntegrator { delay, .. } => {
                if !(*delay >= 0.0) || !delay.is_finite() {
                    return Err(PassivityError::InvalidAlpha(*delay));
                }
                // Re e^{−iωα}/(iω) = −sin(ωα)/ω attains its infimum −α as ω → 0
                Ok(IfpCertificate { alpha: *delay, omega_star: 0.0, method: IfpMethod::ClosedForm, raw_infimum: -delay })
            }
            AgentSpec::Vehicle { tau, mu } => vehicle_ifp(*tau, *mu),
        }
    }
}
