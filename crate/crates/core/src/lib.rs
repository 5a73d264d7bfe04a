//! Solver for the symmetric single-depot min-max multiple traveling salesman
//! problem.
//!
//! The search iterates six phases until a budget is exhausted: probabilistic
//! construction guided by pairwise q-values, merging of the constructed routes
//! into a signature-deduplicated pool, an exact min-max set-covering selection
//! over that pool, inter-route improvement of the selection, a q-value update
//! from route co-occurrences, and age-based pool adaptation.

pub mod construct;
pub mod engine;
pub mod error;
pub mod improve;
pub mod instance;
pub mod learn;
pub mod params;
pub mod pool;
pub mod route;
pub mod select;
pub mod subsolver;

pub use construct::{construct_solution, Clustering};
pub use engine::{evaluate, run, IncumbentUpdate, IterationRecord, RunConfig, RunLog, StagnationClock};
pub use error::{Error, Result};
pub use improve::{improve, improve_logged, MoveLog};
pub use instance::{angdist, Instance};
pub use learn::{QMatrix, StagnationMonitor};
pub use params::Params;
pub use pool::{signature, Pool, Signature};
pub use route::{Route, Solution};
pub use subsolver::{brute_force_reference, solve_restricted, RestrictedProblem, Selection, SolveOutcome};

/// Absolute tolerance used when comparing objective values.
pub const TOLERANCE: f64 = 1e-9;

/// Smallest length decrease accepted as an improving local-search move.
pub(crate) const MIN_GAIN: f64 = 1e-10;
