//! Fixed-step simulation of coupled agent networks.
//!
//! All agents advance in lockstep under classical RK4. Agents with an input
//! delay read `u(t − delay)` from a per-agent history of the coupling output,
//! cubic-interpolated at the stage times so the delayed path keeps fourth order;
//! the prescribed initial history (zero by default) covers `t ≤ 0`.

mod agent;
mod history;
mod metrics;
mod protocol;
mod signal;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use agent::{AgentDynamics, AgentModel, AgentSpec, LtiAgent};
pub use history::InputHistory;
pub use metrics::{sync_metrics, SyncMetrics, TAIL_FRACTION};
pub use protocol::{constant_reference, couple_plain, couple_reference, Protocol};
pub use signal::{Signal, VectorSignal};

use crate::graphnet::GraphError;
use crate::ode::{rk4_step, Rk4Work};
use crate::passivity::PassivityError;

/// States beyond this magnitude abort the run as divergent.
pub const BLOWUP_THRESHOLD: f64 = 1e12;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_SYNC_TOL: f64 = 1e-3;
pub const DEFAULT_T_FINAL: f64 = 100.0;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("expected {expected} for {what}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },
    #[error("input history does not cover t = {time}")]
    HistoryUnderflow { time: f64 },
    #[error("numerical blow-up at t = {time}")]
    NumericalBlowup { time: f64, partial: Box<SimResult> },
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid agent: {0}")]
    InvalidAgent(String),
    #[error("agents with direct feedthrough are not supported by the simulator")]
    FeedthroughUnsupported,
    #[error(transparent)]
    Passivity(#[from] PassivityError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_t_final() -> f64 {
    DEFAULT_T_FINAL
}

fn default_stride() -> usize {
    1
}

fn default_tol() -> f64 {
    DEFAULT_SYNC_TOL
}

/// Integration horizon, initial conditions and recording options.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    /// Per-agent initial states; missing or empty entries start at zero.
    #[serde(default)]
    pub initial_states: Vec<Vec<f64>>,
    /// Per-agent input history on `[−delay, 0]`; missing entries are zero.
    #[serde(default)]
    pub initial_histories: Vec<Option<VectorSignal>>,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default = "default_tol")]
    pub sync_tol: f64,
}

impl SimConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            initial_states: Vec::new(),
            initial_histories: Vec::new(),
            record_stride: 1,
            sync_tol: DEFAULT_SYNC_TOL,
        }
    }

    pub fn with_initial_states(mut self, states: Vec<Vec<f64>>) -> Self {
        self.initial_states = states;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.sync_tol = tol;
        self
    }

    /// Number of integration steps covering `[0, t_final]`.
    pub fn steps(&self) -> u64 {
        (self.t_final / self.dt + 1e-9).floor() as u64
    }

    /// Number of recorded samples.
    pub fn samples(&self) -> usize {
        (self.steps() / self.record_stride as u64) as usize + 1
    }
}

/// Agents, coupling and the stacked-state layout.
#[derive(Debug, Clone)]
pub struct Network {
    agents: Vec<AgentModel>,
    protocol: Protocol,
    offsets: Vec<usize>,
    dim: usize,
}

impl Network {
    pub fn new(agents: Vec<AgentModel>, protocol: Protocol) -> Result<Self, SimError> {
        let n = agents.len();
        if n == 0 {
            return Err(SimError::InvalidConfig("network has no agents".into()));
        }
        let dim = agents[0].output_dim();
        if let Some(bad) = agents.iter().find(|a| a.output_dim() != dim) {
            return Err(SimError::DimensionMismatch { what: "agent output dimension", expected: dim, got: bad.output_dim() });
        }
        protocol.validate(n, dim)?;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for a in &agents {
            offsets.push(acc);
            acc += a.state_dim();
        }
        offsets.push(acc);
        Ok(Self { agents, protocol, offsets, dim })
    }

    pub fn agents(&self) -> &[AgentModel] {
        &self.agents
    }

    pub fn protocol(&self) -> &Protocol {
        &self.protocol
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn output_dim(&self) -> usize {
        self.dim
    }

    pub fn state_len(&self) -> usize {
        self.offsets[self.n()]
    }

    fn state_of<'a>(&self, x: &'a [f64], i: usize) -> &'a [f64] {
        &x[self.offsets[i]..self.offsets[i + 1]]
    }

    fn outputs(&self, x: &[f64], y: &mut [f64]) {
        let m = self.dim;
        for (i, a) in self.agents.iter().enumerate() {
            a.output(self.state_of(x, i), &mut y[i * m..(i + 1) * m]);
        }
    }
}

/// Mutable simulation state: stacked agent states plus delayed-input histories.
#[derive(Debug, Clone)]
pub struct SimState {
    pub step: u64,
    pub x: Vec<f64>,
    histories: Vec<Option<InputHistory>>,
}

impl SimState {
    pub fn new(net: &Network, config: &SimConfig) -> Result<Self, SimError> {
        let mut x = vec![0.0; net.state_len()];
        if config.initial_states.len() > net.n() {
            return Err(SimError::DimensionMismatch {
                what: "initial_states",
                expected: net.n(),
                got: config.initial_states.len(),
            });
        }
        for (i, s) in config.initial_states.iter().enumerate() {
            if s.is_empty() {
                continue;
            }
            let sd = net.agents[i].state_dim();
            if s.len() != sd {
                return Err(SimError::DimensionMismatch { what: "initial state", expected: sd, got: s.len() });
            }
            x[net.offsets[i]..net.offsets[i + 1]].copy_from_slice(s);
        }
        let histories = net
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let delay = a.input_delay();
                (delay > 0.0).then(|| {
                    let init = config.initial_histories.get(i).cloned().flatten();
                    InputHistory::new(net.dim, config.dt, delay, init)
                })
            })
            .collect();
        Ok(Self { step: 0, x, histories })
    }

    pub fn time(&self, dt: f64) -> f64 {
        self.step as f64 * dt
    }
}

struct Scratch {
    y: Vec<f64>,
    u: Vec<f64>,
    rk: Rk4Work,
}

impl Scratch {
    fn new(net: &Network) -> Self {
        let nm = net.n() * net.dim;
        Self { y: vec![0.0; nm], u: vec![0.0; nm], rk: Rk4Work::new(net.state_len()) }
    }
}

fn advance(net: &Network, state: &mut SimState, dt: f64, scratch: &mut Scratch) -> Result<(), SimError> {
    let m = net.dim;
    let n = net.n();
    let step = state.step;
    let t = step as f64 * dt;

    // inputs at the start of the step feed the delay buffers
    net.outputs(&state.x, &mut scratch.y);
    net.protocol.apply_flat(&scratch.y, m, t, &mut scratch.u);
    for (i, h) in state.histories.iter_mut().enumerate() {
        if let Some(h) = h {
            h.push(step, &scratch.u[i * m..(i + 1) * m]);
        }
    }

    let histories = &state.histories;
    let Scratch { y, u, rk } = scratch;
    let mut delayed = vec![0.0; m];
    rk4_step(&mut state.x, dt, rk, |c, x, dx| {
        net.outputs(x, y);
        net.protocol.apply_flat(y, m, t + c * dt, u);
        for i in 0..n {
            let agent = &net.agents[i];
            let xi = &x[net.offsets[i]..net.offsets[i + 1]];
            let dxi = &mut dx[net.offsets[i]..net.offsets[i + 1]];
            match &histories[i] {
                Some(h) => {
                    let pos = step as f64 + c - agent.input_delay() / dt;
                    h.read(pos, c == 1.0, &mut delayed)?;
                    agent.derivative(xi, &delayed, dxi);
                }
                None => agent.derivative(xi, &u[i * m..(i + 1) * m], dxi),
            }
        }
        Ok::<(), SimError>(())
    })?;
    state.step += 1;
    Ok(())
}

/// One RK4 step of the closed-loop network.
pub fn step_network(net: &Network, state: &mut SimState, dt: f64) -> Result<(), SimError> {
    advance(net, state, dt, &mut Scratch::new(net))
}

/// Sampled run of a network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimResult {
    pub times: Vec<f64>,
    /// Output dimension `m`.
    pub dim: usize,
    /// Per-agent outputs, samples × `m` row-major.
    pub y: Vec<Vec<f64>>,
    /// Per-agent inputs produced by the protocol, same layout as `y`.
    pub u: Vec<Vec<f64>>,
    pub metrics: SyncMetrics,
    /// Per-agent state at the last integrated step.
    pub final_state: Vec<Vec<f64>>,
}

impl SimResult {
    pub fn n_agents(&self) -> usize {
        self.y.len()
    }

    pub fn output(&self, agent: usize, sample: usize) -> &[f64] {
        &self.y[agent][sample * self.dim..(sample + 1) * self.dim]
    }

    pub fn input(&self, agent: usize, sample: usize) -> &[f64] {
        &self.u[agent][sample * self.dim..(sample + 1) * self.dim]
    }

    pub fn last_output(&self, agent: usize) -> &[f64] {
        self.output(agent, self.times.len() - 1)
    }

    fn column_names(&self, prefix: &str) -> Vec<String> {
        (1..=self.n_agents())
            .flat_map(|i| {
                if self.dim == 1 {
                    vec![format!("{prefix}_{i}")]
                } else {
                    (1..=self.dim).map(|d| format!("{prefix}_{i}_{d}")).collect()
                }
            })
            .collect()
    }

    /// `t,y_1,...,y_N,u_1,...,u_N`, one row per sample, shortest round-trip floats.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut header = vec!["t".to_string()];
        header.extend(self.column_names("y"));
        header.extend(self.column_names("u"));
        writeln!(w, "{}", header.join(","))?;
        let mut line = String::new();
        for k in 0..self.times.len() {
            line.clear();
            line.push_str(&self.times[k].to_string());
            for traj in self.y.iter().chain(&self.u) {
                for v in &traj[k * self.dim..(k + 1) * self.dim] {
                    line.push(',');
                    line.push_str(&v.to_string());
                }
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

struct Recorder {
    times: Vec<f64>,
    y: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
}

impl Recorder {
    fn new(n: usize, capacity: usize, m: usize) -> Self {
        Self {
            times: Vec::with_capacity(capacity),
            y: vec![Vec::with_capacity(capacity * m); n],
            u: vec![Vec::with_capacity(capacity * m); n],
        }
    }

    fn record(&mut self, t: f64, y: &[f64], u: &[f64], m: usize) {
        self.times.push(t);
        for i in 0..self.y.len() {
            self.y[i].extend_from_slice(&y[i * m..(i + 1) * m]);
            self.u[i].extend_from_slice(&u[i * m..(i + 1) * m]);
        }
    }

    fn finish(self, net: &Network, state: &SimState, tol: f64) -> Result<SimResult, SimError> {
        let metrics = sync_metrics(
            &self.times,
            &self.y,
            net.dim,
            net.protocol.reference_signal().map(Vec::as_slice),
            tol,
        )?;
        let final_state = (0..net.n()).map(|i| net.state_of(&state.x, i).to_vec()).collect();
        Ok(SimResult { times: self.times, dim: net.dim, y: self.y, u: self.u, metrics, final_state })
    }
}

fn validate_config(net: &Network, config: &SimConfig) -> Result<(), SimError> {
    if !(config.dt > 0.0) || !config.dt.is_finite() {
        return Err(SimError::InvalidConfig(format!("dt must be positive, got {}", config.dt)));
    }
    if !(config.t_final > config.dt) || !config.t_final.is_finite() {
        return Err(SimError::InvalidConfig(format!(
            "t_final ({}) must exceed dt ({})",
            config.t_final, config.dt
        )));
    }
    if config.record_stride == 0 {
        return Err(SimError::InvalidConfig("record_stride must be positive".into()));
    }
    let min_delay = net
        .agents
        .iter()
        .map(AgentDynamics::input_delay)
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if config.dt > min_delay * (1.0 + 1e-9) {
        return Err(SimError::InvalidConfig(format!(
            "dt ({}) exceeds the smallest positive delay ({min_delay})",
            config.dt
        )));
    }
    Ok(())
}

/// Runs the network over `[0, t_final]` and computes synchronization metrics.
///
/// Divergence (any state beyond [`BLOWUP_THRESHOLD`] or non-finite) is reported as
/// [`SimError::NumericalBlowup`] carrying the trajectory recorded so far.
pub fn simulate(net: &Network, config: &SimConfig) -> Result<SimResult, SimError> {
    validate_config(net, config)?;
    let mut state = SimState::new(net, config)?;
    let mut scratch = Scratch::new(net);
    let m = net.dim;
    let steps = config.steps();
    let stride = config.record_stride as u64;
    let mut rec = Recorder::new(net.n(), config.samples(), m);
    let mut y = vec![0.0; net.n() * m];
    let mut u = vec![0.0; net.n() * m];

    loop {
        let k = state.step;
        if k % stride == 0 {
            let t = k as f64 * config.dt;
            net.outputs(&state.x, &mut y);
            net.protocol.apply_flat(&y, m, t, &mut u);
            rec.record(t, &y, &u, m);
        }
        if k == steps {
            break;
        }
        advance(net, &mut state, config.dt, &mut scratch)?;
        if state.x.iter().any(|v| !(v.abs() <= BLOWUP_THRESHOLD)) {
            let time = state.time(config.dt);
            let partial = rec.finish(net, &state, config.sync_tol)?;
            return Err(SimError::NumericalBlowup { time, partial: Box::new(partial) });
        }
    }
    rec.finish(net, &state, config.sync_tol)
}

/// Builds the network and runs it.
pub fn simulate_agents(agents: Vec<AgentModel>, protocol: Protocol, config: &SimConfig) -> Result<SimResult, SimError> {
    simulate(&Network::new(agents, protocol)?, config)
}
