use serde::{Deserialize, Serialize};

use super::signal::{eval_vector, Signal};
use super::SimError;

/// Fraction of the horizon treated as the tail.
pub const TAIL_FRACTION: f64 = 0.1;

/// Synchronization diagnostics of a sampled run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncMetrics {
    /// `max_{t in tail} max_{i<j} |y_i − y_j|`.
    pub pairwise_sup_tail: f64,
    /// `∫ |y_i − y_j|² dt` (trapezoidal), symmetric with zero diagonal.
    pub l2_pairwise: Vec<Vec<f64>>,
    /// `∫ |y_i − ȳ|² dt` when a reference exists.
    pub l2_reference: Option<Vec<f64>>,
    /// `max_{t in tail} max_i |y_i − ȳ|` when a reference exists.
    pub reference_sup_tail: Option<f64>,
    pub synchronized: bool,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Metrics of trajectories `outputs[i]` (samples × `dim`, row-major) over `times`.
pub fn sync_metrics(
    times: &[f64],
    outputs: &[Vec<f64>],
    dim: usize,
    y_bar: Option<&[Signal]>,
    tol: f64,
) -> Result<SyncMetrics, SimError> {
    let len = times.len();
    if len == 0 || outputs.is_empty() || dim == 0 {
        return Err(SimError::EmptyTrajectory);
    }
    for o in outputs {
        if o.len() != len * dim {
            return Err(SimError::DimensionMismatch { what: "trajectory length", expected: len * dim, got: o.len() });
        }
    }
    let n = outputs.len();
    let at = |i: usize, k: usize| &outputs[i][k * dim..(k + 1) * dim];
    let t0 = times[0];
    let t_end = times[len - 1];
    let tail_start = t_end - TAIL_FRACTION * (t_end - t0);

    let mut l2 = vec![vec![0.0; n]; n];
    let mut sup_tail: f64 = 0.0;
    let mut prev = vec![vec![0.0; n]; n];
    for k in 0..len {
        let in_tail = times[k] >= tail_start;
        for i in 0..n {
            for j in i + 1..n {
                let d2 = dist2(at(i, k), at(j, k));
                if k > 0 {
                    let h = times[k] - times[k - 1];
                    l2[i][j] += 0.5 * h * (prev[i][j] + d2);
                }
                prev[i][j] = d2;
                if in_tail {
                    sup_tail = sup_tail.max(d2.sqrt());
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            l2[j][i] = l2[i][j];
        }
    }

    let (l2_reference, reference_sup_tail) = match y_bar {
        None => (None, None),
        Some(sig) => {
            let mut ybar = vec![0.0; dim];
            let mut l2r = vec![0.0; n];
            let mut prevr = vec![0.0; n];
            let mut sup: f64 = 0.0;
            for k in 0..len {
                eval_vector(sig, times[k], &mut ybar);
                for i in 0..n {
                    let d2 = dist2(at(i, k), &ybar);
                    if k > 0 {
                        l2r[i] += 0.5 * (times[k] - times[k - 1]) * (prevr[i] + d2);
                    }
                    prevr[i] = d2;
                    if times[k] >= tail_start {
                        sup = sup.max(d2.sqrt());
                    }
                }
            }
            (Some(l2r), Some(sup))
        }
    };

    Ok(SyncMetrics {
        pairwise_sup_tail: sup_tail,
        l2_pairwise: l2,
        l2_reference,
        reference_sup_tail,
        synchronized: sup_tail < tol,
    })
}
