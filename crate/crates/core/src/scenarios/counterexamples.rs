use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::certify::{all_to_all_bound, all_to_all_laplacian_bound};
use crate::graphnet::Digraph;
use crate::netsim::{simulate_agents, AgentModel, Protocol, SimConfig, SimError, SimResult, TAIL_FRACTION};
use crate::passivity::RationalTF;

/// Two harmonic oscillators with the single arc 2 → 1.
#[derive(Debug, Clone)]
pub struct HarmonicOutcome {
    /// `|W(iω₂)|`, `W(s) = ks/(s² + ks + ω₁²)`.
    pub amplitude_ratio: f64,
    /// Tail amplitude of `y₁` over that of `y₂` in the simulation.
    pub observed_ratio: f64,
    pub sim: SimResult,
}

fn oscillator(omega: f64) -> Result<AgentModel, ScenarioError> {
    // ξ̈ + ω²ξ = u, y = ξ̇; canonical state (ξ, ξ̇)
    Ok(AgentModel::lti(RationalTF::from_coeffs(&[0.0, 1.0], &[omega * omega, 0.0, 1.0])?)?)
}

fn tail_amplitude(sim: &SimResult, agent: usize) -> f64 {
    let t_end = *sim.times.last().unwrap_or(&0.0);
    let start = t_end - TAIL_FRACTION * (t_end - sim.times[0]);
    sim.times
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= start)
        .map(|(k, _)| sim.output(agent, k)[0].abs())
        .fold(0.0, f64::max)
}

/// Starts on the periodic solution `ξ₂ = Re[e^{iω₂t}]`, `ξ₁ = Re[W(iω₂) e^{iω₂t}]`,
/// on which `y₁` keeps amplitude `|W(iω₂)|` times that of `y₂`.
pub fn harmonic_counterexample(
    omega1: f64,
    omega2: f64,
    k: f64,
    config: &SimConfig,
) -> Result<HarmonicOutcome, ScenarioError> {
    if !(k > 0.0) || !(omega2 > 0.0) || !(omega1 >= 0.0) || omega1 == omega2 {
        return Err(ScenarioError::InvalidSpec(format!(
            "need k > 0, ω₂ > 0, ω₁ ≥ 0 and ω₁ ≠ ω₂ (got k = {k}, ω₁ = {omega1}, ω₂ = {omega2})"
        )));
    }
    let w = RationalTF::from_coeffs(&[0.0, k], &[omega1 * omega1, k, 1.0])?.eval_freq(omega2)?;
    let agents = vec![oscillator(omega1)?, oscillator(omega2)?];
    let graph = Digraph::new(&[vec![0.0, k], vec![0.0, 0.0]])?;
    let config = config
        .clone()
        .with_initial_states(vec![vec![w.re, -omega2 * w.im], vec![1.0, 0.0]]);
    let sim = simulate_agents(agents, Protocol::plain(graph), &config)?;
    let observed_ratio = tail_amplitude(&sim, 0) / tail_amplitude(&sim, 1);
    Ok(HarmonicOutcome { amplitude_ratio: w.norm(), observed_ratio, sim })
}

/// Identical agents `y⃛ + p ÿ + q ẏ = u` under all-to-all coupling of weight `κ`.
#[derive(Debug, Clone)]
pub struct Remark1Outcome {
    /// Hurwitz test of `s³ + ps² + qs + κ(N−1)`.
    pub predicted: bool,
    /// Hurwitz test of the disagreement dynamics `s³ + ps² + qs + κN`.
    pub exact: bool,
    /// Whether the simulation synchronized.
    pub observed: bool,
    pub diverged: bool,
    /// The run, or the partial run on divergence.
    pub sim: SimResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Remark1Params {
    pub p: f64,
    pub q: f64,
    pub n_agents: usize,
    pub kappa: f64,
}

/// Outputs start spread at `y_i(0) = i + 1` from rest.
pub fn remark1_counterexample(params: Remark1Params, config: &SimConfig) -> Result<Remark1Outcome, ScenarioError> {
    let Remark1Params { p, q, n_agents: n, kappa } = params;
    if !(p > 0.0 && q > 0.0 && kappa > 0.0) || n < 2 {
        return Err(ScenarioError::InvalidSpec(format!("need p, q, κ > 0 and N ≥ 2, got {params:?}")));
    }
    let tf = RationalTF::from_coeffs(&[1.0], &[0.0, q, p, 1.0])?;
    let agents = (0..n).map(|_| AgentModel::lti(tf.clone())).collect::<Result<Vec<_>, _>>()?;
    let config = config
        .clone()
        .with_initial_states((0..n).map(|i| vec![(i + 1) as f64, 0.0, 0.0]).collect());
    let (sim, diverged) = match simulate_agents(agents, Protocol::plain(Digraph::complete(n, kappa)?), &config) {
        Ok(sim) => (sim, false),
        Err(SimError::NumericalBlowup { partial, .. }) => (*partial, true),
        Err(e) => return Err(e.into()),
    };
    Ok(Remark1Outcome {
        predicted: all_to_all_bound(p, q, n, kappa),
        exact: all_to_all_laplacian_bound(p, q, n, kappa),
        observed: !diverged && sim.metrics.synchronized,
        diverged,
        sim,
    })
}
