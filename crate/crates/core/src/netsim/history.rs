use std::collections::VecDeque;

use super::signal::{eval_vector, VectorSignal};
use super::SimError;

/// Recorded input samples of one delayed agent on the step grid `k·dt`, `k ≥ 0`,
/// with the prescribed initial history used for non-positive times.
#[derive(Debug, Clone)]
pub struct InputHistory {
    dim: usize,
    dt: f64,
    initial: Option<VectorSignal>,
    /// Step index of `samples[0]`.
    first: u64,
    samples: VecDeque<f64>,
    /// Number of samples retained.
    keep: usize,
}

impl InputHistory {
    pub fn new(dim: usize, dt: f64, delay: f64, initial: Option<VectorSignal>) -> Self {
        let keep = (delay / dt).ceil() as usize + 3;
        Self { dim, dt, initial, first: 0, samples: VecDeque::with_capacity(keep * dim), keep }
    }

    fn len(&self) -> u64 {
        (self.samples.len() / self.dim) as u64
    }

    /// Appends the input at step `step`; steps must arrive consecutively from 0.
    pub fn push(&mut self, step: u64, u: &[f64]) {
        debug_assert_eq!(step, self.first + self.len());
        self.samples.extend(u.iter().copied());
        while self.len() as usize > self.keep {
            self.samples.drain(..self.dim);
            self.first += 1;
        }
    }

    fn sample_at(&self, k: u64, d: usize) -> f64 {
        self.samples[((k - self.first) as usize) * self.dim + d]
    }

    /// Input at step position `pos` (time `pos·dt`), interpolated between samples.
    ///
    /// At `pos = 0` the input may jump from the initial history to the coupling
    /// output; `left` selects the initial-history side of that jump.
    pub fn read(&self, pos: f64, left: bool, out: &mut [f64]) -> Result<(), SimError> {
        let pos = if pos.abs() < 1e-9 { 0.0 } else { pos };
        if pos < 0.0 || (pos == 0.0 && left) {
            match &self.initial {
                Some(sig) => eval_vector(sig, pos * self.dt, out),
                None => out.fill(0.0),
            }
            return Ok(());
        }
        let last = match self.len() {
            0 => return Err(SimError::HistoryUnderflow { time: pos * self.dt }),
            l => self.first + l - 1,
        };
        let k = pos.floor();
        let mut frac = pos - k;
        let mut k = k as u64;
        // snap positions within rounding of a grid point
        if frac > 1.0 - 1e-9 {
            k += 1;
            frac = 0.0;
        } else if frac < 1e-9 {
            frac = 0.0;
        }
        if k < self.first || k > last || (frac > 0.0 && k + 1 > last) {
            return Err(SimError::HistoryUnderflow { time: pos * self.dt });
        }
        if frac == 0.0 {
            for (d, o) in out.iter_mut().enumerate() {
                *o = self.sample_at(k, d);
            }
            return Ok(());
        }
        // cubic Lagrange on k−1..k+2, shifted or shortened at the buffer ends
        let lo = k.saturating_sub(1).max(self.first);
        let hi = (lo + 3).min(last);
        let lo = hi.saturating_sub(3).max(self.first);
        let x = (k - lo) as f64 + frac;
        let nodes = (hi - lo + 1) as usize;
        let mut weights = [0.0; 4];
        for (a, w) in weights.iter_mut().enumerate().take(nodes) {
            *w = (0..nodes)
                .filter(|&b| b != a)
                .map(|b| (x - b as f64) / (a as f64 - b as f64))
                .product();
        }
        for (d, o) in out.iter_mut().enumerate() {
            *o = (0..nodes).map(|a| weights[a] * self.sample_at(lo + a as u64, d)).sum();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::Signal;

    #[test]
    fn interpolates_and_uses_initial_history() {
        let mut h = InputHistory::new(1, 0.1, 0.25, Some(vec![Signal::Ramp { offset: 0.0, slope: 10.0 }]));
        for k in 0..5u64 {
            h.push(k, &[k as f64]);
        }
        let mut out = [0.0];
        h.read(2.5, false, &mut out).unwrap();
        assert!((out[0] - 2.5).abs() < 1e-12);
        h.read(0.5, false, &mut out).unwrap();
        assert!((out[0] - 0.5).abs() < 1e-12);
        h.read(-1.0, false, &mut out).unwrap();
        assert!((out[0] + 1.0).abs() < 1e-12);
        h.read(0.0, true, &mut out).unwrap();
        assert_eq!(out[0], 0.0);
        h.read(0.0, false, &mut out).unwrap();
        assert_eq!(out[0], 0.0);
        h.read(4.0, false, &mut out).unwrap();
        assert_eq!(out[0], 4.0);
        assert!(matches!(h.read(4.5, false, &mut out), Err(SimError::HistoryUnderflow { .. })));
    }

    #[test]
    fn cubic_samples_are_exact() {
        let mut h = InputHistory::new(1, 0.5, 2.0, None);
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t * t;
        for k in 0..6u64 {
            h.push(k, &[f(k as f64)]);
        }
        let mut out = [0.0];
        for pos in [0.25, 1.5, 2.75, 4.5] {
            h.read(pos, false, &mut out).unwrap();
            assert!((out[0] - f(pos)).abs() < 1e-12, "{pos}");
        }
    }

    #[test]
    fn drops_old_samples() {
        let mut h = InputHistory::new(2, 0.1, 0.2, None);
        for k in 0..100u64 {
            h.push(k, &[k as f64, -(k as f64)]);
        }
        let mut out = [0.0; 2];
        h.read(97.5, false, &mut out).unwrap();
        assert_eq!(out, [97.5, -97.5]);
        assert!(matches!(h.read(10.0, false, &mut out), Err(SimError::HistoryUnderflow { .. })));
    }
}
