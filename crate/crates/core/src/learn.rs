//! Pairwise q-values learned from route co-occurrences.
//!
//! Values near 0 mark city pairs that keep ending up in the same route of the
//! selected solution; values near 1 mark pairs that show up together in the
//! pool but not in the selection.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::pool::Pool;

pub const INITIAL_Q: f64 = 0.5;

/// Symmetric matrix of q-values over non-depot cities.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    size: usize,
    values: Vec<f64>,
}

impl QMatrix {
    /// All-0.5 matrix for cities `1..=n_cities`.
    pub fn new(n_cities: usize) -> Self {
        let size = n_cities + 1;
        QMatrix {
            size,
            values: vec![INITIAL_Q; size * size],
        }
    }

    pub fn n_cities(&self) -> usize {
        self.size - 1
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.values[i * self.size + j] = value;
        self.values[j * self.size + i] = value;
    }

    pub fn reset(&mut self) {
        self.values.fill(INITIAL_Q);
    }

    /// Applies one learning step to every pair seen in the pool: pairs that
    /// share a route of the selected solution move toward 0, the others
    /// toward 1.
    pub fn update(&mut self, s_cand: &PairCounts, s_best: &PairCounts, l_rate: f64) {
        for i in 1..self.size {
            for j in (i + 1)..self.size {
                if s_cand.get(i, j) == 0 {
                    continue;
                }
                let q = self.get(i, j);
                let next = if s_best.get(i, j) > 0 {
                    q - l_rate * q
                } else {
                    q + l_rate * (1.0 - q)
                };
                self.set(i, j, next);
            }
        }
    }

    /// Mean absolute deviation of the q-values from 0.5 over all unordered
    /// city pairs. Lies in `[0, 0.5]`.
    pub fn convergence_proxy(&self) -> Result<f64> {
        let n = self.n_cities();
        if n < 2 {
            return Err(Error::InvalidInstance(
                "convergence proxy needs at least two cities".into(),
            ));
        }
        let mut sum = 0.0;
        for i in 1..self.size {
            for j in (i + 1)..self.size {
                sum += (0.5 - self.get(i, j)).abs();
            }
        }
        Ok(2.0 * sum / (n as f64 * (n as f64 - 1.0)))
    }
}

/// Per-pair count of routes containing both cities.
#[derive(Debug, Clone)]
pub struct PairCounts {
    size: usize,
    counts: Vec<u32>,
}

impl PairCounts {
    pub fn get(&self, i: usize, j: usize) -> u32 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.counts[a * self.size + b]
    }
}

/// Counts, for every unordered city pair, the routes visiting both.
pub fn cooccurrence<'a, I>(n_cities: usize, routes: I) -> PairCounts
where
    I: IntoIterator<Item = &'a [usize]>,
{
    let size = n_cities + 1;
    let mut counts = vec![0u32; size * size];
    let mut sorted = Vec::new();
    for seq in routes {
        sorted.clear();
        sorted.extend_from_slice(seq);
        sorted.sort_unstable();
        sorted.dedup();
        for (k, &a) in sorted.iter().enumerate() {
            for &b in &sorted[k + 1..] {
                counts[a * size + b] += 1;
            }
        }
    }
    PairCounts { size, counts }
}

/// Detects stagnation of the convergence proxy over a sliding window.
///
/// Time is whatever clock the caller uses (seconds or iterations). The
/// monitor fires when the observed series spans at least `window`, the
/// samples inside the last `window` number at least `min_samples`, and their
/// range is below `threshold`. Firing restarts the observation period.
#[derive(Debug, Clone)]
pub struct StagnationMonitor {
    window: f64,
    min_samples: usize,
    threshold: f64,
    start: Option<f64>,
    samples: VecDeque<(f64, f64)>,
}

impl StagnationMonitor {
    pub fn new(window: f64, min_samples: usize, threshold: f64) -> Self {
        StagnationMonitor {
            window,
            min_samples,
            threshold,
            start: None,
            samples: VecDeque::new(),
        }
    }

    /// 10 time units, at least 5 samples, range below 1e-3.
    pub fn with_defaults() -> Self {
        Self::new(10.0, 5, 1e-3)
    }

    /// Records a sample and reports whether stagnation was detected.
    pub fn record(&mut self, time: f64, proxy: f64) -> bool {
        let start = *self.start.get_or_insert(time);
        self.samples.push_back((time, proxy));
        while let Some(&(t, _)) = self.samples.front() {
            if t < time - self.window {
                self.samples.pop_front();
            } else {
                break;
            }
        }
        if time - start < self.window || self.samples.len() < self.min_samples {
            return false;
        }
        let (lo, hi) = self
            .samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, p)| {
                (lo.min(p), hi.max(p))
            });
        if hi - lo < self.threshold {
            self.start = None;
            self.samples.clear();
            true
        } else {
            false
        }
    }
}

/// Records `proxy` and, on stagnation, resets the q-values and empties the
/// pool. Returns whether a reset happened.
pub fn maybe_reset(
    monitor: &mut StagnationMonitor,
    time: f64,
    proxy: f64,
    q: &mut QMatrix,
    pool: &mut Pool,
) -> bool {
    if monitor.record(time, proxy) {
        q.reset();
        pool.clear();
        true
    } else {
        false
    }
}
