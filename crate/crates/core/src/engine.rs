//! The main loop: construct, merge, solve, improve, learn, adapt.
//!
//! Random streams: every construction draws from its own ChaCha8 stream,
//! `stream = (iteration << 32) | (k + 1)` for construction `k`, all keyed by
//! the run seed. Stream 0 drives the improvement phase. Constructions are
//! merged in index order, so serial and parallel runs coincide.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::construct_solution;
use crate::error::{Error, Result};
use crate::improve::improve;
use crate::instance::Instance;
use crate::learn::{cooccurrence, maybe_reset, QMatrix, StagnationMonitor};
use crate::params::Params;
use crate::pool::Pool;
use crate::route::{tour_length, Route, Solution};
use crate::subsolver::{
    solve_restricted, Column, RestrictedProblem, SolveLimits, SolveOutcome, DEFAULT_TIEBREAK_NODES,
};
use crate::TOLERANCE;

/// Time axis fed to the stagnation monitor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StagnationClock {
    /// Elapsed wall-clock seconds.
    WallSeconds,
    /// Iteration index; makes resets independent of machine speed.
    Iterations,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub time_limit: Duration,
    /// Stop after this many iterations.
    pub max_iterations: Option<u64>,
    /// Stop once the incumbent is at most this value.
    pub target: Option<f64>,
    pub stagnation_clock: StagnationClock,
    /// Branch-and-bound node budget per subsolver call. When set, the
    /// subsolver runs without a time cap, which keeps runs reproducible.
    pub subsolver_nodes: Option<u64>,
    /// Fan the construction phase out over the rayon pool.
    pub parallel: bool,
}

impl RunConfig {
    /// Wall-clock budget with the per-call subsolver cap of
    /// `min(2 s, 10% of the remaining budget)`.
    pub fn timed(seed: u64, time_limit: Duration) -> Self {
        RunConfig {
            seed,
            time_limit,
            max_iterations: None,
            target: None,
            stagnation_clock: StagnationClock::WallSeconds,
            subsolver_nodes: None,
            parallel: false,
        }
    }

    /// Iteration budget with no timing-dependent decisions. The time limit is
    /// only a safety net.
    pub fn deterministic(seed: u64, max_iterations: u64) -> Self {
        RunConfig {
            seed,
            time_limit: Duration::from_secs(3600),
            max_iterations: Some(max_iterations),
            target: None,
            stagnation_clock: StagnationClock::Iterations,
            subsolver_nodes: Some(DETERMINISTIC_NODES),
            parallel: false,
        }
    }
}

pub const DETERMINISTIC_NODES: u64 = 2_000_000;

const MAX_SUBSOLVER_CAP: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u64,
    /// Pool size handed to the subsolver.
    pub pool_size: usize,
    /// `optimal`, `timed_out` or `infeasible`.
    pub subsolver_status: String,
    pub subsolver_objective: Option<f64>,
    pub post_improve_z: Option<f64>,
    pub incumbent: f64,
    pub proxy: f64,
    pub reset: bool,
    pub elapsed_s: f64,
}

/// An accepted incumbent, recorded when it replaced the previous one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncumbentUpdate {
    pub iteration: u64,
    pub z: f64,
    pub routes: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub instance: String,
    pub m: usize,
    pub seed: u64,
    pub params: Params,
    pub iterations: Vec<IterationRecord>,
    pub best_value: f64,
    pub time_to_best_s: f64,
    pub resets: u32,
    pub incumbents: Vec<IncumbentUpdate>,
    pub routes: Vec<Vec<usize>>,
}

/// Recomputes `(z, total)` from the instance after checking that every city
/// is visited exactly once.
pub fn evaluate(sol: &Solution, inst: &Instance) -> Result<(f64, f64)> {
    sol.validate(inst)?;
    let mut z = 0.0f64;
    let mut total = 0.0;
    for r in &sol.routes {
        let len = tour_length(&r.seq, inst);
        z = z.max(len);
        total += len;
    }
    Ok((z, total))
}

fn construction_rng(seed: u64, iteration: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((iteration << 32) | (k as u64 + 1));
    rng
}

fn construct_round(
    inst: &Instance,
    q: &QMatrix,
    m: usize,
    params: &Params,
    config: &RunConfig,
    iteration: u64,
) -> Result<Vec<Solution>> {
    let one = |k: usize| {
        let mut rng = construction_rng(config.seed, iteration, k);
        construct_solution(inst, q, m, params, &mut rng)
    };
    if config.parallel {
        (0..params.n_solutions).into_par_iter().map(one).collect()
    } else {
        (0..params.n_solutions).map(one).collect()
    }
}

fn better(a: &Solution, b: &Solution) -> bool {
    a.z < b.z || (a.z == b.z && a.total < b.total)
}

fn check_incumbent(sol: &Solution, inst: &Instance) -> Result<()> {
    let (z, _) = evaluate(sol, inst)?;
    if (z - sol.z).abs() > TOLERANCE * z.max(1.0) {
        return Err(Error::Infeasible(format!("cached z {} differs from recomputed {z}", sol.z)));
    }
    Ok(())
}

/// Runs the search and returns the best solution with its log.
pub fn run(inst: &Instance, m: usize, params: &Params, config: &RunConfig) -> Result<(Solution, RunLog)> {
    let n = inst.n_cities();
    if m == 0 || m > n {
        return Err(Error::InvalidM { m, n_cities: n });
    }
    params.validate()?;
    if config.time_limit.is_zero() {
        return Err(Error::InvalidParams("time limit must be positive".into()));
    }
    let start = Instant::now();
    let deadline = start + config.time_limit;
    let lower_bound = inst.star_bound();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut q = QMatrix::new(n);
    let mut pool = Pool::new();
    let mut monitor = StagnationMonitor::with_defaults();
    let mut incumbent: Option<Solution> = None;
    let mut time_to_best = 0.0;
    let mut records = Vec::new();
    let mut resets = 0;
    let mut history = Vec::new();
    let snapshot = |iteration: u64, sol: &Solution| IncumbentUpdate {
        iteration,
        z: sol.z,
        routes: sol.routes.iter().map(|r| r.seq.clone()).collect(),
    };

    let mut iteration: u64 = 0;
    loop {
        if let Some(best) = &incumbent {
            let done = best.z <= lower_bound + TOLERANCE
                || config.target.is_some_and(|t| best.z <= t + TOLERANCE)
                || config.max_iterations.is_some_and(|k| iteration >= k)
                || Instant::now() >= deadline;
            if done {
                break;
            }
        }

        // Construct
        let constructed = construct_round(inst, &q, m, params, config, iteration)?;
        if incumbent.is_none() {
            let mut first = constructed
                .iter()
                .reduce(|a, b| if better(b, a) { b } else { a })
                .cloned()
                .expect("n_solutions >= 1");
            for r in &mut first.routes {
                r.recompute(inst);
            }
            first.refresh();
            check_incumbent(&first, inst)?;
            time_to_best = start.elapsed().as_secs_f64();
            history.push(snapshot(iteration, &first));
            incumbent = Some(first);
        }
        let inc_z = incumbent.as_ref().map(|s| s.z).unwrap_or(f64::INFINITY);

        // Merge
        pool.merge(constructed.into_iter().flat_map(|s| s.routes), inc_z);

        // Solve
        let pooled: Vec<Route> = pool.routes().cloned().collect();
        let prob = RestrictedProblem {
            routes: pooled
                .iter()
                .map(|r| Column {
                    cities: r.seq.clone(),
                    length: r.length,
                })
                .collect(),
            m,
            n_cities: n,
            upper_bound: inc_z,
        };
        let limits = match config.subsolver_nodes {
            Some(nodes) => SolveLimits {
                time_cap: None,
                node_limit: Some(nodes),
                tiebreak_node_limit: Some(DEFAULT_TIEBREAK_NODES),
            },
            None => {
                let remaining = deadline.saturating_duration_since(Instant::now());
                SolveLimits::with_time_cap(MAX_SUBSOLVER_CAP.min(remaining / 10))
            }
        };
        let outcome = solve_restricted(&prob, limits);
        let status = match &outcome {
            SolveOutcome::Optimal(_) => "optimal",
            SolveOutcome::TimedOut(_) => "timed_out",
            SolveOutcome::Infeasible => "infeasible",
        };
        let subsolver_objective = outcome.selection().map(|s| s.objective);

        // Improve
        let mut post_improve_z = None;
        let r_best: Solution = match outcome.selection() {
            Some(sel) if Instant::now() < deadline || config.subsolver_nodes.is_some() => {
                let selected = Solution::new(sel.indices.iter().map(|&i| pooled[i].clone()).collect());
                let improved = improve(selected, inst, params.d_rate_improve, &mut rng)?;
                post_improve_z = Some(improved.z);
                if improved.z < inc_z - TOLERANCE {
                    check_incumbent(&improved, inst)?;
                    time_to_best = start.elapsed().as_secs_f64();
                    history.push(snapshot(iteration, &improved));
                    incumbent = Some(improved.clone());
                }
                improved
            }
            _ => incumbent.clone().expect("incumbent exists after the first round"),
        };
        let inc_z = incumbent.as_ref().map(|s| s.z).unwrap_or(f64::INFINITY);

        // Learn
        let s_cand = cooccurrence(n, pool.routes().map(|r| r.seq.as_slice()));
        let s_best = cooccurrence(n, r_best.routes.iter().map(|r| r.seq.as_slice()));
        q.update(&s_cand, &s_best, params.l_rate);
        let proxy = q.convergence_proxy().unwrap_or(0.0);
        let clock = match config.stagnation_clock {
            StagnationClock::WallSeconds => start.elapsed().as_secs_f64(),
            StagnationClock::Iterations => iteration as f64,
        };

        // Adapt
        pool.adapt(&r_best.routes, params.age_max, inc_z);
        let reset = n >= 2 && maybe_reset(&mut monitor, clock, proxy, &mut q, &mut pool);
        if reset {
            resets += 1;
        }

        records.push(IterationRecord {
            iteration,
            pool_size: prob.routes.len(),
            subsolver_status: status.to_string(),
            subsolver_objective,
            post_improve_z,
            incumbent: inc_z,
            proxy,
            reset,
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        iteration += 1;
    }

    let best = incumbent.expect("at least one construction round ran");
    let log = RunLog {
        instance: inst.name().to_string(),
        m,
        seed: config.seed,
        params: *params,
        iterations: records,
        best_value: best.z,
        time_to_best_s: time_to_best,
        resets,
        incumbents: history,
        routes: best.routes.iter().map(|r| r.seq.clone()).collect(),
    };
    Ok((best, log))
}
