use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::certify::{check_theorem2, check_theorem4, CaccGainSet, CaccVerdict, WeakCouplingVerdict};
use crate::graphnet::Digraph;
use crate::netsim::{
    simulate_agents, sync_metrics, AgentModel, Protocol, Signal, SimConfig, SimError, SimResult, BLOWUP_THRESHOLD,
};
use crate::ode::{rk4_step, Rk4Work};
use crate::passivity::vehicle_ifp;

/// Leader plus `n` followers under the bidirectional CACC controller.
///
/// Missing initial conditions default to the goal state: `q_i = q₀ − (s_1+…+s_i)`,
/// `v_i = v₀`, `a_i = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatoonSpec {
    pub gains: CaccGainSet,
    /// Desired gap of vehicle `i` to its predecessor, m.
    pub s: Vec<f64>,
    /// Leader speed, m/s.
    pub v0: f64,
    #[serde(default)]
    pub q0_init: f64,
    #[serde(default)]
    pub q_init: Option<Vec<f64>>,
    #[serde(default)]
    pub v_init: Option<Vec<f64>>,
    #[serde(default)]
    pub a_init: Option<Vec<f64>>,
}

impl PlatoonSpec {
    /// Three followers with `μ = 2`, `τ = 0.1`, `η = (0.4, 0.5, 1)`, `ν = (0.5, 0.5)`,
    /// 10 m gaps and a 20 m/s leader, starting at the goal state.
    pub fn three_vehicle_example() -> Self {
        Self {
            gains: CaccGainSet {
                mu: vec![2.0; 3],
                eta: vec![0.4, 0.5, 1.0],
                nu: vec![0.5, 0.5],
                tau: vec![0.1; 3],
            },
            s: vec![10.0; 3],
            v0: 20.0,
            q0_init: 0.0,
            q_init: None,
            v_init: None,
            a_init: None,
        }
    }

    pub fn n(&self) -> usize {
        self.gains.n()
    }

    /// `s_1 + … + s_i` for each vehicle.
    pub fn offsets(&self) -> Vec<f64> {
        self.s
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect()
    }

    /// Goal positions at `t = 0`.
    pub fn goal_positions(&self) -> Vec<f64> {
        self.offsets().iter().map(|o| self.q0_init - o).collect()
    }

    /// Moves the followers from vehicle `i` (0-based) backwards by `dq`, widening gap `i`.
    pub fn with_gap_perturbation(mut self, i: usize, dq: f64) -> Self {
        let mut q = self.q_init.take().unwrap_or_else(|| self.goal_positions());
        for qj in &mut q[i..] {
            *qj -= dq;
        }
        self.q_init = Some(q);
        self
    }

    /// Physical initial state `(q_i, v_i, a_i)` per vehicle.
    pub fn initial_physical(&self) -> Vec<[f64; 3]> {
        let n = self.n();
        let q = self.q_init.clone().unwrap_or_else(|| self.goal_positions());
        let v = self.v_init.clone().unwrap_or_else(|| vec![self.v0; n]);
        let a = self.a_init.clone().unwrap_or_else(|| vec![0.0; n]);
        (0..n).map(|i| [q[i], v[i], a[i]]).collect()
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        self.gains.validate()?;
        let n = self.n();
        let check = |what: &str, len: Option<usize>| match len {
            Some(l) if l != n => Err(ScenarioError::InvalidSpec(format!("{what} has {l} entries, expected {n}"))),
            _ => Ok(()),
        };
        check("s", Some(self.s.len()))?;
        check("q_init", self.q_init.as_ref().map(Vec::len))?;
        check("v_init", self.v_init.as_ref().map(Vec::len))?;
        check("a_init", self.a_init.as_ref().map(Vec::len))?;
        if self.s.iter().any(|&s| !(s > 0.0)) {
            return Err(ScenarioError::InvalidSpec("desired gaps must be positive".into()));
        }
        Ok(())
    }
}

/// Transformed network `τ_i y⃛ + ÿ + μ_i ẏ = u_i` with reference tracking, and its certificates.
#[derive(Debug, Clone)]
pub struct PlatoonBuild {
    pub agents: Vec<AgentModel>,
    pub protocol: Protocol,
    /// IFP indices `1/μ_i²`.
    pub alphas: Vec<f64>,
    pub theorem2: WeakCouplingVerdict,
    pub theorem4: CaccVerdict,
    /// `(y_i, ẏ_i, ÿ_i)` matching the physical initial state.
    pub initial_states: Vec<Vec<f64>>,
}

impl PlatoonBuild {
    pub fn certified(&self) -> bool {
        self.theorem2.passes && self.theorem4.passes
    }
}

pub fn build_platoon(spec: &PlatoonSpec) -> Result<PlatoonBuild, ScenarioError> {
    spec.validate()?;
    let g = &spec.gains;
    let n = spec.n();
    let alphas = (0..n)
        .map(|i| vehicle_ifp(g.tau[i], g.mu[i]).map(|c| c.alpha))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        if i > 0 {
            rows[i][i - 1] = g.eta[i];
        }
        if i + 1 < n {
            rows[i][i + 1] = g.nu[i];
        }
    }
    let graph = Digraph::new(&rows)?;
    let mut b = vec![0.0; n];
    b[0] = g.eta[0];
    let theorem2 = check_theorem2(&graph, &alphas, &b)?;
    let theorem4 = check_theorem4(g)?;
    let agents = (0..n)
        .map(|i| AgentModel::vehicle(g.tau[i], g.mu[i]))
        .collect::<Result<Vec<_>, _>>()?;
    let protocol = Protocol::Reference {
        graph,
        b,
        u_bar: g.mu.iter().map(|&mu| vec![Signal::from(mu * spec.v0)]).collect(),
        y_bar: vec![Signal::Ramp { offset: spec.q0_init, slope: spec.v0 }],
    };
    let offsets = spec.offsets();
    let initial_states = spec
        .initial_physical()
        .iter()
        .zip(&offsets)
        .map(|([q, v, a], o)| vec![q + o, *v, *a])
        .collect();
    Ok(PlatoonBuild { agents, protocol, alphas, theorem2, theorem4, initial_states })
}

/// Physical-coordinate run of the platoon.
#[derive(Debug, Clone)]
pub struct PlatoonRun {
    /// `y_i = q_i + s_1+…+s_i`, `u_i = a_des,i + μ_i v_i`, metrics against `ȳ = q₀(t)`.
    pub sim: SimResult,
    /// `q_i` per sample.
    pub positions: Vec<Vec<f64>>,
    /// `q_{i−1} − q_i − s_i` per sample.
    pub spacing_errors: Vec<Vec<f64>>,
    /// `v_i − v₀` per sample.
    pub velocity_errors: Vec<Vec<f64>>,
}

impl PlatoonRun {
    pub fn terminal_spacing_errors(&self) -> Vec<f64> {
        self.spacing_errors.iter().map(|e| *e.last().unwrap_or(&f64::NAN)).collect()
    }

    pub fn terminal_velocity_errors(&self) -> Vec<f64> {
        self.velocity_errors.iter().map(|e| *e.last().unwrap_or(&f64::NAN)).collect()
    }

    pub fn max_terminal_error(&self) -> f64 {
        self.terminal_spacing_errors()
            .iter()
            .chain(&self.terminal_velocity_errors())
            .fold(0.0, |m, e| m.max(e.abs()))
    }
}

struct Physical<'a> {
    spec: &'a PlatoonSpec,
}

impl Physical<'_> {
    fn leader(&self, t: f64) -> f64 {
        self.spec.q0_init + self.spec.v0 * t
    }

    /// Desired accelerations for stacked state `(q_i, v_i, a_i)`.
    fn a_des(&self, x: &[f64], t: f64, out: &mut [f64]) {
        let g = &self.spec.gains;
        let s = &self.spec.s;
        let n = out.len();
        for i in 0..n {
            let (q, v) = (x[3 * i], x[3 * i + 1]);
            let pred = if i == 0 { self.leader(t) } else { x[3 * (i - 1)] };
            let mut a = g.mu[i] * (self.spec.v0 - v) + g.eta[i] * (pred - q - s[i]);
            if i + 1 < n {
                a += g.nu[i] * (x[3 * (i + 1)] - q + s[i + 1]);
            }
            out[i] = a;
        }
    }
}

/// Integrates the vehicles in their own coordinates with RK4 on `config`'s grid.
///
/// Initial conditions come from the spec; those in `config` are ignored.
pub fn run_platoon(spec: &PlatoonSpec, config: &SimConfig) -> Result<PlatoonRun, ScenarioError> {
    spec.validate()?;
    if !(config.dt > 0.0) || !(config.t_final > config.dt) || config.record_stride == 0 {
        return Err(SimError::InvalidConfig(format!("dt = {}, t_final = {}", config.dt, config.t_final)).into());
    }
    let n = spec.n();
    let g = &spec.gains;
    let phys = Physical { spec };
    let offsets = spec.offsets();
    let mut x: Vec<f64> = spec.initial_physical().concat();
    let mut work = Rk4Work::new(x.len());
    let mut ades = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let steps = config.steps();
    let stride = config.record_stride as u64;
    let cap = config.samples();

    let mut times = Vec::with_capacity(cap);
    let mut y = vec![Vec::with_capacity(cap); n];
    let mut u = vec![Vec::with_capacity(cap); n];
    let mut positions = vec![Vec::with_capacity(cap); n];
    let mut spacing = vec![Vec::with_capacity(cap); n];
    let mut velocity = vec![Vec::with_capacity(cap); n];
    let mut diverged_at = None;

    let mut k = 0u64;
    loop {
        let t = k as f64 * config.dt;
        if k % stride == 0 || diverged_at.is_some() {
            phys.a_des(&x, t, &mut ades);
            times.push(t);
            for i in 0..n {
                let (q, v) = (x[3 * i], x[3 * i + 1]);
                let pred = if i == 0 { phys.leader(t) } else { x[3 * (i - 1)] };
                y[i].push(q + offsets[i]);
                u[i].push(ades[i] + g.mu[i] * v);
                positions[i].push(q);
                spacing[i].push(pred - q - spec.s[i]);
                velocity[i].push(v - spec.v0);
            }
        }
        if k == steps || diverged_at.is_some() {
            break;
        }
        rk4_step(&mut x, config.dt, &mut work, |c, xs, dx| {
            phys.a_des(xs, t + c * config.dt, &mut stage);
            for i in 0..n {
                dx[3 * i] = xs[3 * i + 1];
                dx[3 * i + 1] = xs[3 * i + 2];
                dx[3 * i + 2] = (stage[i] - xs[3 * i + 2]) / g.tau[i];
            }
            Ok::<(), SimError>(())
        })?;
        k += 1;
        if x.iter().any(|v| !(v.abs() <= BLOWUP_THRESHOLD)) {
            diverged_at = Some(k as f64 * config.dt);
        }
    }

    let y_bar = [Signal::Ramp { offset: spec.q0_init, slope: spec.v0 }];
    let metrics = sync_metrics(&times, &y, 1, Some(&y_bar), config.sync_tol)?;
    let final_state = x.chunks(3).map(<[f64]>::to_vec).collect();
    let sim = SimResult { times, dim: 1, y, u, metrics, final_state };
    let run = PlatoonRun { sim, positions, spacing_errors: spacing, velocity_errors: velocity };
    match diverged_at {
        Some(time) => Err(SimError::NumericalBlowup { time, partial: Box::new(run.sim) }.into()),
        None => Ok(run),
    }
}

/// Simulates the transformed IFP network of [`build_platoon`] through `netsim`.
pub fn run_platoon_transformed(spec: &PlatoonSpec, config: &SimConfig) -> Result<SimResult, ScenarioError> {
    let build = build_platoon(spec)?;
    let config = config.clone().with_initial_states(build.initial_states);
    Ok(simulate_agents(build.agents, build.protocol, &config)?)
}

/// Largest pointwise gap between the physical and transformed outputs `y_i`.
pub fn platoon_transform_gap(spec: &PlatoonSpec, config: &SimConfig) -> Result<f64, ScenarioError> {
    let phys = run_platoon(spec, config)?;
    let trans = run_platoon_transformed(spec, config)?;
    let mut gap: f64 = 0.0;
    for (a, b) in phys.sim.y.iter().zip(&trans.y) {
        for (p, q) in a.iter().zip(b) {
            gap = gap.max((p - q).abs());
        }
    }
    Ok(gap)
}
