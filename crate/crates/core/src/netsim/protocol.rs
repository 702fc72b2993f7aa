use serde::{Deserialize, Serialize};

use super::signal::{eval_vector, Signal, VectorSignal};
use super::SimError;
use crate::graphnet::Digraph;

/// Coupling law producing agent inputs from agent outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Protocol {
    /// `u_j = Σ_k a_jk (y_k − y_j)`.
    Plain {
        #[serde(rename = "adjacency")]
        graph: Digraph,
    },
    /// `u_i = ū_i(t) + b_i (ȳ(t) − y_i) + Σ_j a_ij (y_j − y_i)`.
    Reference {
        #[serde(rename = "adjacency")]
        graph: Digraph,
        b: Vec<f64>,
        u_bar: Vec<VectorSignal>,
        y_bar: VectorSignal,
    },
}

impl Protocol {
    pub fn plain(graph: Digraph) -> Self {
        Protocol::Plain { graph }
    }

    pub fn graph(&self) -> &Digraph {
        match self {
            Protocol::Plain { graph } | Protocol::Reference { graph, .. } => graph,
        }
    }

    pub fn reference_signal(&self) -> Option<&VectorSignal> {
        match self {
            Protocol::Plain { .. } => None,
            Protocol::Reference { y_bar, .. } => Some(y_bar),
        }
    }

    pub(crate) fn validate(&self, n: usize, m: usize) -> Result<(), SimError> {
        let g = self.graph();
        if g.n() != n {
            return Err(SimError::DimensionMismatch { what: "graph nodes", expected: n, got: g.n() });
        }
        if let Protocol::Reference { b, u_bar, y_bar, .. } = self {
            if b.len() != n {
                return Err(SimError::DimensionMismatch { what: "b", expected: n, got: b.len() });
            }
            if b.iter().any(|&bi| !(bi >= 0.0)) {
                return Err(SimError::InvalidConfig("pinning gains b must be >= 0".into()));
            }
            if u_bar.len() != n {
                return Err(SimError::DimensionMismatch { what: "u_bar", expected: n, got: u_bar.len() });
            }
            if let Some(bad) = u_bar.iter().find(|s| s.len() != m) {
                return Err(SimError::DimensionMismatch { what: "u_bar entry", expected: m, got: bad.len() });
            }
            if y_bar.len() != m {
                return Err(SimError::DimensionMismatch { what: "y_bar", expected: m, got: y_bar.len() });
            }
        }
        Ok(())
    }

    /// Inputs for stacked outputs `y` (agent-major, dimension `m`) at time `t`.
    pub(crate) fn apply_flat(&self, y: &[f64], m: usize, t: f64, u: &mut [f64]) {
        let g = self.graph();
        let n = g.n();
        u.fill(0.0);
        for i in 0..n {
            let yi = &y[i * m..(i + 1) * m];
            for j in 0..n {
                let a = g.weight(i, j);
                if a != 0.0 {
                    for d in 0..m {
                        u[i * m + d] += a * (y[j * m + d] - yi[d]);
                    }
                }
            }
        }
        if let Protocol::Reference { b, u_bar, y_bar, .. } = self {
            let mut ybar = vec![0.0; m];
            eval_vector(y_bar, t, &mut ybar);
            for i in 0..n {
                for d in 0..m {
                    u[i * m + d] += u_bar[i][d].eval(t) + b[i] * (ybar[d] - y[i * m + d]);
                }
            }
        }
    }
}

fn stack(y: &[Vec<f64>], n: usize) -> Result<(Vec<f64>, usize), SimError> {
    if y.len() != n {
        return Err(SimError::DimensionMismatch { what: "outputs", expected: n, got: y.len() });
    }
    let m = y.first().map_or(0, Vec::len);
    if let Some(bad) = y.iter().find(|v| v.len() != m) {
        return Err(SimError::DimensionMismatch { what: "output dimension", expected: m, got: bad.len() });
    }
    Ok((y.concat(), m))
}

fn unstack(u: Vec<f64>, m: usize) -> Vec<Vec<f64>> {
    if m == 0 {
        return Vec::new();
    }
    u.chunks(m).map(<[f64]>::to_vec).collect()
}

/// Weighted diffusive coupling over `g`.
pub fn couple_plain(g: &Digraph, y: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, SimError> {
    let (flat, m) = stack(y, g.n())?;
    let mut u = vec![0.0; flat.len()];
    Protocol::Plain { graph: g.clone() }.apply_flat(&flat, m, 0.0, &mut u);
    Ok(unstack(u, m))
}

/// Reference-tracking coupling evaluated at time `t`.
pub fn couple_reference(proto: &Protocol, y: &[Vec<f64>], t: f64) -> Result<Vec<Vec<f64>>, SimError> {
    let (flat, m) = stack(y, proto.graph().n())?;
    proto.validate(proto.graph().n(), m)?;
    let mut u = vec![0.0; flat.len()];
    proto.apply_flat(&flat, m, t, &mut u);
    Ok(unstack(u, m))
}

/// Reference protocol with constant reference and zero feedforward, convenient in tests.
pub fn constant_reference(graph: Digraph, b: Vec<f64>, y_bar: f64) -> Protocol {
    let n = graph.n();
    Protocol::Reference {
        graph,
        b,
        u_bar: vec![vec![Signal::zero()]; n],
        y_bar: vec![Signal::from(y_bar)],
    }
}
