use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

/// A closed tour from the depot through `seq` and back. The depot is
/// implicit at both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub seq: Vec<usize>,
    pub length: f64,
}

impl Route {
    pub fn new(seq: Vec<usize>, inst: &Instance) -> Self {
        let length = tour_length(&seq, inst);
        Route { seq, length }
    }

    pub fn empty() -> Self {
        Route {
            seq: Vec::new(),
            length: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// City at position `i`, where position `-1` and `len` are the depot.
    #[inline]
    pub(crate) fn pred(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.seq[i - 1]
        }
    }

    #[inline]
    pub(crate) fn succ(&self, i: usize) -> usize {
        self.seq.get(i + 1).copied().unwrap_or(0)
    }

    /// Recomputes the cached length from the sequence.
    pub fn recompute(&mut self, inst: &Instance) {
        self.length = tour_length(&self.seq, inst);
    }
}

pub fn tour_length(seq: &[usize], inst: &Instance) -> f64 {
    let mut prev = 0;
    let mut total = 0.0;
    for &c in seq {
        total += inst.d(prev, c);
        prev = c;
    }
    total + inst.d(prev, 0)
}

/// A set of `m` routes with cached objective values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub routes: Vec<Route>,
    /// Length of the longest route.
    pub z: f64,
    /// Sum of route lengths.
    pub total: f64,
}

impl Solution {
    pub fn new(routes: Vec<Route>) -> Self {
        let mut sol = Solution {
            routes,
            z: 0.0,
            total: 0.0,
        };
        sol.refresh();
        sol
    }

    pub fn m(&self) -> usize {
        self.routes.len()
    }

    /// Recomputes `z` and `total` from the cached route lengths.
    pub fn refresh(&mut self) {
        self.z = self.routes.iter().map(|r| r.length).fold(0.0, f64::max);
        self.total = self.routes.iter().map(|r| r.length).sum();
    }

    /// Index of the longest route, smallest index on ties.
    pub fn longest(&self) -> usize {
        let mut best = 0;
        for (i, r) in self.routes.iter().enumerate() {
            if r.length > self.routes[best].length {
                best = i;
            }
        }
        best
    }

    /// Checks that every city occurs in exactly one route.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        let mut seen = vec![0usize; inst.size()];
        for r in &self.routes {
            for &c in &r.seq {
                if c == 0 || c > inst.n_cities() {
                    return Err(Error::Infeasible(format!("invalid city index {c}")));
                }
                seen[c] += 1;
            }
        }
        let duplicated: Vec<usize> = inst.cities().filter(|&c| seen[c] > 1).collect();
        let missing: Vec<usize> = inst.cities().filter(|&c| seen[c] == 0).collect();
        if duplicated.is_empty() && missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Infeasible(format!(
                "duplicated cities {duplicated:?}, missing cities {missing:?}"
            )))
        }
    }
}
