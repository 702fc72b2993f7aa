use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::certify::{check_theorem1, WeakCouplingVerdict};
use crate::graphnet::Digraph;
use crate::netsim::{couple_plain, simulate_agents, AgentModel, Protocol, Signal, SimConfig, SimResult};

/// Interaction pattern between drivers; weights are sensitivities in 1/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum Topology {
    /// Straight road: vehicle 1 follows a leader at constant `v0`, vehicle `i` follows `i − 1`.
    ClassicChain { k: f64 },
    /// Circular road, each driver watches the predecessor.
    UnidirectionalRing { a: f64 },
    /// Circular road, each driver watches predecessor and follower.
    BidirectionalRing { a: f64 },
    /// `adjacency[i][j]`: sensitivity of driver `i` to vehicle `j`.
    Custom { adjacency: Vec<Vec<f64>> },
}

/// Car-following model with delayed driver reactions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficSpec {
    pub n: usize,
    pub topology: Topology,
    /// Reaction delays, seconds.
    pub delays: Vec<f64>,
    /// Initial velocities, m/s.
    pub v_init: Vec<f64>,
    /// Leader velocity for the chain, m/s.
    #[serde(default)]
    pub v0: f64,
}

/// The straight-road stability test `2 α_i K < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalVerdict {
    pub passes: bool,
    /// `2 α_i K` per vehicle.
    pub products: Vec<f64>,
}

/// Network and certificates of a traffic scenario.
#[derive(Debug, Clone)]
pub struct TrafficBuild {
    pub agents: Vec<AgentModel>,
    pub protocol: Protocol,
    /// Weak-coupling verdict on the simulated graph; for the chain the virtual
    /// leader breaks strong connectivity and this always fails.
    pub certificate: WeakCouplingVerdict,
    /// Straight-road test, chain topology only.
    pub classical: Option<ClassicalVerdict>,
    /// Index of the virtual leader node, chain topology only.
    pub leader: Option<usize>,
    pub initial_states: Vec<Vec<f64>>,
    pub initial_histories: Vec<Option<Vec<Signal>>>,
}

impl TrafficBuild {
    /// The certificate that applies to the topology.
    pub fn certified(&self) -> bool {
        match &self.classical {
            Some(c) => c.passes,
            None => self.certificate.passes,
        }
    }
}

fn check_len(what: &str, v: &[f64], n: usize) -> Result<(), ScenarioError> {
    if v.len() != n {
        return Err(ScenarioError::InvalidSpec(format!("{what} has {} entries, expected {n}", v.len())));
    }
    Ok(())
}

pub fn build_traffic(spec: &TrafficSpec) -> Result<TrafficBuild, ScenarioError> {
    let n = spec.n;
    if n == 0 {
        return Err(ScenarioError::InvalidSpec("traffic needs at least one vehicle".into()));
    }
    check_len("delays", &spec.delays, n)?;
    check_len("v_init", &spec.v_init, n)?;

    let (graph, alphas, v, leader, classical) = match &spec.topology {
        Topology::ClassicChain { k } => {
            // node 0 is the leader, vehicle i is node i
            let mut rows = vec![vec![0.0; n + 1]; n + 1];
            for i in 1..=n {
                rows[i][i - 1] = *k;
            }
            let mut alphas = vec![0.0];
            alphas.extend_from_slice(&spec.delays);
            let mut v = vec![spec.v0];
            v.extend_from_slice(&spec.v_init);
            let products: Vec<f64> = spec.delays.iter().map(|a| 2.0 * a * k).collect();
            let classical = ClassicalVerdict { passes: products.iter().all(|&p| p < 1.0), products };
            (Digraph::new(&rows)?, alphas, v, Some(0), Some(classical))
        }
        Topology::UnidirectionalRing { a } => {
            (Digraph::directed_ring(n, *a)?, spec.delays.clone(), spec.v_init.clone(), None, None)
        }
        Topology::BidirectionalRing { a } => {
            (Digraph::bidirectional_ring(n, *a)?, spec.delays.clone(), spec.v_init.clone(), None, None)
        }
        Topology::Custom { adjacency } => {
            if adjacency.len() != n {
                return Err(ScenarioError::InvalidSpec(format!(
                    "adjacency has {} rows, expected {n}",
                    adjacency.len()
                )));
            }
            (Digraph::new(adjacency)?, spec.delays.clone(), spec.v_init.clone(), None, None)
        }
    };

    let certificate = check_theorem1(&graph, &alphas)?;
    let agents = alphas
        .iter()
        .map(|&d| AgentModel::delayed_integrator(d, 1))
        .collect::<Result<Vec<_>, _>>()?;
    // drivers have been cruising at the initial velocities before t = 0
    let y0: Vec<Vec<f64>> = v.iter().map(|&vi| vec![vi]).collect();
    let u0 = couple_plain(&graph, &y0)?;
    let initial_histories = u0.iter().map(|u| Some(vec![Signal::from(u[0])])).collect();
    Ok(TrafficBuild {
        agents,
        protocol: Protocol::plain(graph),
        certificate,
        classical,
        leader,
        initial_states: y0,
        initial_histories,
    })
}

/// Simulates velocities; `config`'s initial conditions are replaced by the spec's.
pub fn run_traffic(spec: &TrafficSpec, config: &SimConfig) -> Result<(TrafficBuild, SimResult), ScenarioError> {
    let build = build_traffic(spec)?;
    let mut config = config.clone();
    config.initial_states = build.initial_states.clone();
    config.initial_histories = build.initial_histories.clone();
    let sim = simulate_agents(build.agents.clone(), build.protocol.clone(), &config)?;
    Ok((build, sim))
}
