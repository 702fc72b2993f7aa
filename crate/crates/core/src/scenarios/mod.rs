//! Ready-made experiments: delayed car following, bidirectional platooning and
//! the two counterexamples showing which hypotheses cannot be dropped.

mod counterexamples;
mod platoon;
mod traffic;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use counterexamples::{harmonic_counterexample, remark1_counterexample, HarmonicOutcome, Remark1Outcome, Remark1Params};
pub use platoon::{
    build_platoon, platoon_transform_gap, run_platoon, run_platoon_transformed, PlatoonBuild, PlatoonRun, PlatoonSpec,
};
pub use traffic::{build_traffic, run_traffic, ClassicalVerdict, Topology, TrafficBuild, TrafficSpec};

use crate::certify::{CaccVerdict, CertifyError, WeakCouplingVerdict};
use crate::graphnet::GraphError;
use crate::netsim::{SimConfig, SimError, SimResult};
use crate::passivity::PassivityError;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Passivity(#[from] PassivityError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Optional overrides of a scenario's integration settings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub tol: Option<f64>,
    pub record_stride: Option<usize>,
}

impl RunOptions {
    /// Fields set in `other` take precedence.
    pub fn merged(self, other: RunOptions) -> Self {
        Self {
            dt: other.dt.or(self.dt),
            t_final: other.t_final.or(self.t_final),
            tol: other.tol.or(self.tol),
            record_stride: other.record_stride.or(self.record_stride),
        }
    }

    fn config(self, dt: f64, t_final: f64, tol: f64) -> SimConfig {
        let mut c = SimConfig::new(self.dt.unwrap_or(dt), self.t_final.unwrap_or(t_final))
            .with_tol(self.tol.unwrap_or(tol));
        if let Some(s) = self.record_stride {
            c = c.with_stride(s);
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficScenario {
    #[serde(flatten)]
    pub spec: TrafficSpec,
    #[serde(default)]
    pub sim: RunOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatoonScenario {
    #[serde(flatten)]
    pub spec: PlatoonSpec,
    #[serde(default)]
    pub sim: RunOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Remark1Scenario {
    #[serde(flatten)]
    pub params: Remark1Params,
    #[serde(default)]
    pub sim: RunOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicScenario {
    pub omega1: f64,
    pub omega2: f64,
    pub k: f64,
    #[serde(default)]
    pub sim: RunOptions,
}

/// Scenario file contents, discriminated by `scenario_type`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario_type", rename_all = "snake_case")]
pub enum ScenarioSpec {
    Traffic(TrafficScenario),
    Platoon(PlatoonScenario),
    Remark1(Remark1Scenario),
    Harmonic(HarmonicScenario),
}

/// Certificates and headline numbers of a finished scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario_type", rename_all = "snake_case")]
pub enum ScenarioReport {
    Traffic {
        certified: bool,
        certificate: WeakCouplingVerdict,
        classical: Option<ClassicalVerdict>,
        synchronized: bool,
        diverged: bool,
        pairwise_sup_tail: f64,
        terminal_velocities: Vec<f64>,
    },
    Platoon {
        certified: bool,
        theorem2: WeakCouplingVerdict,
        theorem4: CaccVerdict,
        diverged: bool,
        terminal_spacing_errors: Vec<f64>,
        terminal_velocity_errors: Vec<f64>,
        max_terminal_error: f64,
    },
    Remark1 {
        predicted: bool,
        exact: bool,
        observed: bool,
        diverged: bool,
        agreement: bool,
    },
    Harmonic {
        amplitude_ratio: f64,
        observed_ratio: f64,
        synchronized: bool,
    },
}

impl ScenarioReport {
    /// Whether the simulation diverged in a scenario where divergence is a failure.
    pub fn failed_by_divergence(&self) -> bool {
        matches!(self, ScenarioReport::Traffic { diverged: true, .. } | ScenarioReport::Platoon { diverged: true, .. })
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub report: ScenarioReport,
    /// Full run, or the partial run when it diverged.
    pub sim: SimResult,
}

fn split_blowup<T>(r: Result<T, ScenarioError>) -> Result<Result<T, SimResult>, ScenarioError> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(ScenarioError::Sim(SimError::NumericalBlowup { partial, .. })) => Ok(Err(*partial)),
        Err(e) => Err(e),
    }
}

fn last_outputs(sim: &SimResult) -> Vec<f64> {
    (0..sim.n_agents()).map(|i| sim.last_output(i)[0]).collect()
}

impl ScenarioSpec {
    /// Builds, certifies and simulates; `overrides` take precedence over the file's settings.
    pub fn run(&self, overrides: RunOptions) -> Result<ScenarioOutcome, ScenarioError> {
        match self {
            ScenarioSpec::Traffic(s) => {
                let config = s.sim.merged(overrides).config(1e-2, 100.0, 1e-3);
                let build = build_traffic(&s.spec)?;
                let (sim, diverged) = match split_blowup(run_traffic(&s.spec, &config))? {
                    Ok((_, sim)) => (sim, false),
                    Err(partial) => (partial, true),
                };
                let report = ScenarioReport::Traffic {
                    certified: build.certified(),
                    certificate: build.certificate,
                    classical: build.classical,
                    synchronized: !diverged && sim.metrics.synchronized,
                    diverged,
                    pairwise_sup_tail: sim.metrics.pairwise_sup_tail,
                    terminal_velocities: last_outputs(&sim),
                };
                Ok(ScenarioOutcome { report, sim })
            }
            ScenarioSpec::Platoon(s) => {
                let config = s.sim.merged(overrides).config(1e-2, 200.0, 1e-3);
                let build = build_platoon(&s.spec)?;
                let certified = build.certified();
                let (theorem2, theorem4) = (build.theorem2, build.theorem4);
                let report = |run: Option<&PlatoonRun>| {
                    let (spacing, velocity, max) = match run {
                        Some(r) => (r.terminal_spacing_errors(), r.terminal_velocity_errors(), r.max_terminal_error()),
                        None => (Vec::new(), Vec::new(), f64::INFINITY),
                    };
                    ScenarioReport::Platoon {
                        certified,
                        theorem2: theorem2.clone(),
                        theorem4: theorem4.clone(),
                        diverged: run.is_none(),
                        terminal_spacing_errors: spacing,
                        terminal_velocity_errors: velocity,
                        max_terminal_error: max,
                    }
                };
                match split_blowup(run_platoon(&s.spec, &config))? {
                    Ok(run) => Ok(ScenarioOutcome { report: report(Some(&run)), sim: run.sim }),
                    Err(partial) => Ok(ScenarioOutcome { report: report(None), sim: partial }),
                }
            }
            ScenarioSpec::Remark1(s) => {
                let config = s.sim.merged(overrides).config(1e-2, 200.0, 1e-3);
                let out = remark1_counterexample(s.params, &config)?;
                let report = ScenarioReport::Remark1 {
                    predicted: out.predicted,
                    exact: out.exact,
                    observed: out.observed,
                    diverged: out.diverged,
                    agreement: out.predicted == out.observed,
                };
                Ok(ScenarioOutcome { report, sim: out.sim })
            }
            ScenarioSpec::Harmonic(s) => {
                let config = s.sim.merged(overrides).config(1e-2, 100.0, 0.1);
                let out = harmonic_counterexample(s.omega1, s.omega2, s.k, &config)?;
                let report = ScenarioReport::Harmonic {
                    amplitude_ratio: out.amplitude_ratio,
                    observed_ratio: out.observed_ratio,
                    synchronized: out.sim.metrics.synchronized,
                };
                Ok(ScenarioOutcome { report, sim: out.sim })
            }
        }
    }
}
