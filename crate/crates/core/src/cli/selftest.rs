//! Seeded randomized checks of the dissipation identities behind the certificates.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certify::{tech_identity_check, tech_inequality_check};
use crate::graphnet::Digraph;
use crate::passivity::ifp_shift_identity_check;

pub const IDENTITY_TOL: f64 = 1e-10;
pub const MARGIN_TOL: f64 = -1e-10;
pub const SHIFT_TOL: f64 = 1e-12;

/// Strongly connected digraph on `n` nodes: a random Hamiltonian cycle plus extra
/// arcs with probability `density`, weights uniform in `[0.1, 2]`.
pub fn random_strongly_connected<R: Rng>(rng: &mut R, n: usize, density: f64) -> Digraph {
    let mut rows = vec![vec![0.0; n]; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    if n > 1 {
        for k in 0..n {
            let (from, to) = (order[k], order[(k + 1) % n]);
            rows[to][from] = rng.gen_range(0.1..2.0);
        }
    }
    for (j, row) in rows.iter_mut().enumerate() {
        for (k, w) in row.iter_mut().enumerate() {
            if j != k && *w == 0.0 && rng.gen_bool(density) {
                *w = rng.gen_range(0.1..2.0);
            }
        }
    }
    Digraph::new(&rows).expect("valid by construction")
}

/// Indices strictly below the weak-coupling limit `1/(2 d_j⁺)`.
pub fn random_weak_alphas<R: Rng>(rng: &mut R, g: &Digraph) -> Vec<f64> {
    g.d_plus().iter().map(|d| rng.gen_range(0.0..0.999) / (2.0 * d)).collect()
}

pub fn random_outputs<R: Rng>(rng: &mut R, n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub graph_cases: usize,
    pub shift_cases: usize,
    pub max_identity_residual: f64,
    pub min_inequality_margin: f64,
    pub max_shift_residual: f64,
    pub passed: bool,
}

/// `graph_cases` random instances with `n ≤ 6`, `m ≤ 3` for the network identities and
/// `shift_cases` instances of the IFP shift identity.
pub fn run_selftest(seed: u64, graph_cases: usize, shift_cases: usize) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_identity: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    for _ in 0..graph_cases {
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(1..=3);
        let density = rng.gen_range(0.0..0.6);
        let g = random_strongly_connected(&mut rng, n, density);
        let alphas = random_weak_alphas(&mut rng, &g);
        let y = random_outputs(&mut rng, n, m);
        max_identity = max_identity.max(tech_identity_check(&g, &y).unwrap_or(f64::INFINITY));
        min_margin = min_margin.min(tech_inequality_check(&g, &alphas, &y).unwrap_or(f64::NEG_INFINITY));
    }
    let mut max_shift: f64 = 0.0;
    for _ in 0..shift_cases {
        let alpha = rng.gen_range(0.01..2.0);
        let b = rng.gen_range(0.001..0.999) / (2.0 * alpha);
        let m = rng.gen_range(1..=3);
        let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        max_shift = max_shift.max(ifp_shift_identity_check(alpha, b, &y, &u).unwrap_or(f64::INFINITY));
    }
    if graph_cases == 0 {
        min_margin = 0.0;
    }
    SelftestReport {
        seed,
        graph_cases,
        shift_cases,
        max_identity_residual: max_identity,
        min_inequality_margin: min_margin,
        max_shift_residual: max_shift,
        passed: max_identity < IDENTITY_TOL && min_margin >= MARGIN_TOL && max_shift < SHIFT_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_graphs_are_strongly_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..8 {
            assert!(random_strongly_connected(&mut rng, n, 0.2).is_strongly_connected());
        }
    }

    #[test]
    fn deterministic_and_passing() {
        let a = run_selftest(7, 20, 20);
        assert_eq!(a, run_selftest(7, 20, 20));
        assert!(a.passed, "{a:?}");
    }
}
