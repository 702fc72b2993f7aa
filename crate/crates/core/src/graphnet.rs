//! Weighted directed graphs, connectivity classification and Laplacians.
//!
//! Adjacency entries follow the row-in convention: `a[j][k] > 0` means node
//! `j` listens to node `k`, i.e. there is an arc `k -> j`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Weights at or below this magnitude are treated as missing arcs.
pub const ARC_THRESHOLD: f64 = 1e-15;

/// Relative threshold on the smallest singular value of `Lᵀ`.
const NULL_SPACE_RTOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("adjacency matrix is not square ({rows} rows, row {row} has {len} entries)")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("adjacency matrix is empty")]
    Empty,
    #[error("negative or non-finite weight a[{row}][{col}] = {value}")]
    NegativeWeight { row: usize, col: usize, value: f64 },
    #[error("self-loop at node {node} (a[{node}][{node}] = {value})")]
    SelfLoop { node: usize, value: f64 },
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("Laplacian null space is not one-dimensional (sigma_min / sigma_max = {ratio:e})")]
    DegenerateNullSpace { ratio: f64 },
}

/// Weighted digraph without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    adjacency: DMatrix<f64>,
}

impl Digraph {
    /// Validates a row-major adjacency matrix.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self, GraphError> {
        let n = rows.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(GraphError::NotSquare { rows: n, row, len: r.len() });
            }
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |j, k| rows[j][k]))
    }

    pub fn from_matrix(adjacency: DMatrix<f64>) -> Result<Self, GraphError> {
        let n = adjacency.nrows();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if adjacency.ncols() != n {
            return Err(GraphError::NotSquare { rows: n, row: 0, len: adjacency.ncols() });
        }
        for j in 0..n {
            for k in 0..n {
                let value = adjacency[(j, k)];
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(GraphError::NegativeWeight { row: j, col: k, value });
                }
                if j == k && value != 0.0 {
                    return Err(GraphError::SelfLoop { node: j, value });
                }
            }
        }
        Ok(Self { adjacency })
    }

    /// Graph with no arcs.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        Self::from_matrix(DMatrix::zeros(n, n))
    }

    /// Every ordered pair `(j, k)`, `j != k`, weighted by `weight`.
    pub fn complete(n: usize, weight: f64) -> Result<Self, GraphError> {
        Self::from_matrix(DMatrix::from_fn(n, n, |j, k| if j == k { 0.0 } else { weight }))
    }

    /// Ring where node `i` listens to node `i - 1` (node 0 listens to `n - 1`).
    pub fn directed_ring(n: usize, weight: f64) -> Result<Self, GraphError> {
        let mut a = DMatrix::zeros(n, n);
        if n > 1 {
            for i in 0..n {
                a[(i, (i + n - 1) % n)] = weight;
            }
        }
        Self::from_matrix(a)
    }

    /// Ring where each node listens to both neighbours.
    pub fn bidirectional_ring(n: usize, weight: f64) -> Result<Self, GraphError> {
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            if n > 1 {
                a[(i, (i + n - 1) % n)] = weight;
                a[(i, (i + 1) % n)] = weight;
            }
        }
        Self::from_matrix(a)
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn weight(&self, j: usize, k: usize) -> f64 {
        self.adjacency[(j, k)]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.adjacency.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Arc `k -> j` present.
    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.adjacency[(to, from)] > ARC_THRESHOLD
    }

    /// Returns `(d_plus, d_minus)`: row sums (in-degree) and column sums (out-degree).
    pub fn degrees(&self) -> (Vec<f64>, Vec<f64>) {
        let d_plus = self.adjacency.row_iter().map(|r| r.sum()).collect();
        let d_minus = self.adjacency.column_iter().map(|c| c.sum()).collect();
        (d_plus, d_minus)
    }

    pub fn d_plus(&self) -> Vec<f64> {
        self.degrees().0
    }

    /// `L = diag(d_plus) - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut l = -self.adjacency.clone();
        for j in 0..n {
            l[(j, j)] = self.adjacency.row(j).sum();
        }
        l
    }

    /// Nodes reachable from `root` by following arcs forward (root included).
    pub fn reachable_from(&self, root: usize) -> Vec<bool> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                if !seen[w] && self.has_arc(v, w) {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Number of strongly connected components (Tarjan, iterative).
    pub fn scc_count(&self) -> usize {
        let n = self.n();
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|v| (0..n).filter(|&w| self.has_arc(v, w)).collect())
            .collect();

        const UNVISITED: usize = usize::MAX;
        let mut index = vec![UNVISITED; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::with_capacity(n);
        let mut next_index = 0;
        let mut count = 0;

        for start in 0..n {
            if index[start] != UNVISITED {
                continue;
            }
            // (node, position in its successor list)
            let mut call = vec![(start, 0usize)];
            index[start] = next_index;
            low[start] = next_index;
            next_index += 1;
            stack.push(start);
            on_stack[start] = true;

            while let Some(&mut (v, ref mut pos)) = call.last_mut() {
                if *pos < succ[v].len() {
                    let w = succ[v][*pos];
                    *pos += 1;
                    if index[w] == UNVISITED {
                        index[w] = next_index;
                        low[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        count += 1;
                        while let Some(w) = stack.pop() {
                            on_stack[w] = false;
                            if w == v {
                                break;
                            }
                        }
                    }
                }
            }
        }
        count
    }

    pub fn connectivity(&self) -> ConnectivityReport {
        let scc_count = self.scc_count();
        let strongly_connected = scc_count == 1;
        let quasi_strongly_connected = strongly_connected
            || (0..self.n()).any(|r| self.reachable_from(r).into_iter().all(|s| s));
        ConnectivityReport { strongly_connected, quasi_strongly_connected, scc_count }
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.scc_count() == 1
    }

    /// Positive left null vector of the Laplacian, normalized to unit sum.
    pub fn perron_weights(&self) -> Result<PerronWeights, GraphError> {
        if !self.is_strongly_connected() {
            return Err(GraphError::NotStronglyConnected);
        }
        let n = self.n();
        if n == 1 {
            return Ok(PerronWeights { p: vec![1.0] });
        }
        let lt = self.laplacian().transpose();
        let svd = lt.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let (imin, smin) = svd
            .singular_values
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("n > 1");
        let smax = svd.singular_values.max();
        if smax > 0.0 && smin > NULL_SPACE_RTOL * smax {
            return Err(GraphError::DegenerateNullSpace { ratio: smin / smax });
        }
        let v: DVector<f64> = v_t.row(imin).transpose();
        let sum = v.sum();
        let p: Vec<f64> = v.iter().map(|x| x / sum).collect();
        if p.iter().any(|&x| !(x > 0.0)) {
            return Err(GraphError::DegenerateNullSpace { ratio: smin / smax.max(f64::MIN_POSITIVE) });
        }
        Ok(PerronWeights { p })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub strongly_connected: bool,
    pub quasi_strongly_connected: bool,
    pub scc_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerronWeights {
    pub p: Vec<f64>,
}

impl PerronWeights {
    /// `‖pᵀ L‖∞`.
    pub fn residual(&self, g: &Digraph) -> f64 {
        let l = g.laplacian();
        let p = DVector::from_column_slice(&self.p);
        (l.transpose() * p).amax()
    }
}

impl Serialize for Digraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Digraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Digraph::new(&rows).map_err(serde::de::Error::custom)
    }
}
