use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tunable parameters of the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Solutions constructed per iteration.
    pub n_solutions: usize,
    /// Probability of the greedy choice during cluster assignment.
    pub d_rate_construct: f64,
    /// Probability of the greedy choice in the Remove/Shift/Swap operators.
    pub d_rate_improve: f64,
    /// Q-value learning rate.
    pub l_rate: f64,
    /// Pool routes reaching this age are evicted.
    pub age_max: u32,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    1e-9
}

/// Tuned settings by salesmen-to-cities ratio: (ratio, n_solutions,
/// d_rate_construct, d_rate_improve, l_rate, age_max).
const TUNED: [(f64, usize, f64, f64, f64, u32); 4] = [
    (0.01, 19, 0.87, 0.96, 0.31, 12),
    (0.05, 17, 0.83, 0.97, 0.26, 13),
    (0.10, 13, 0.66, 0.98, 0.45, 2),
    (0.15, 17, 0.86, 0.93, 0.20, 15),
];

impl Params {
    /// Tuned defaults for the ratio bucket nearest to `m / n_cities`.
    pub fn for_ratio(m: usize, n_cities: usize) -> Self {
        let ratio = m as f64 / n_cities.max(1) as f64;
        let &(_, n_solutions, d_rate_construct, d_rate_improve, l_rate, age_max) = TUNED
            .iter()
            .min_by(|a, b| (a.0 - ratio).abs().total_cmp(&(b.0 - ratio).abs()))
            .expect("table is non-empty");
        Params {
            n_solutions,
            d_rate_construct,
            d_rate_improve,
            l_rate,
            age_max,
            epsilon: default_epsilon(),
        }
    }

    /// Tuned defaults for one of the four table columns (1, 5, 10 or 15 percent).
    pub fn tuned(percent: u32) -> Option<Self> {
        let ratio = percent as f64 / 100.0;
        TUNED
            .iter()
            .find(|row| (row.0 - ratio).abs() < 1e-12)
            .map(|&(_, n_solutions, d_rate_construct, d_rate_improve, l_rate, age_max)| Params {
                n_solutions,
                d_rate_construct,
                d_rate_improve,
                l_rate,
                age_max,
                epsilon: default_epsilon(),
            })
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} = {v} is not in [0, 1]")))
            }
        };
        prob("d_rate_construct", self.d_rate_construct)?;
        prob("d_rate_improve", self.d_rate_improve)?;
        if !(self.l_rate > 0.0 && self.l_rate < 1.0) {
            return Err(Error::InvalidParams(format!("l_rate = {} is not in (0, 1)", self.l_rate)));
        }
        if self.n_solutions == 0 {
            return Err(Error::InvalidParams("n_solutions must be at least 1".into()));
        }
        if self.age_max == 0 {
            return Err(Error::InvalidParams("age_max must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParams(format!("epsilon = {} must be positive", self.epsilon)));
        }
        Ok(())
    }
}

impl Default for Params {
    fn default() -> Self {
        Params::tuned(1).expect("1% column exists")
    }
}
