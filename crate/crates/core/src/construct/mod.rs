//! Probabilistic construction of complete solutions.

mod cluster;
mod tour;

use rand::Rng;

pub use cluster::{
    assign_cities, assignment_scores, cluster, seed_centers, two_closest_points,
    AssignmentScores, Clustering,
};
pub use tour::{apply_or_move, build_route, or_delta, or_moves, or_opt, two_opt, OrMove};

use crate::error::{Error, Result};
use crate::improve::local_search;
use crate::instance::Instance;
use crate::learn::QMatrix;
use crate::params::Params;
use crate::route::Solution;

/// Builds one solution: cluster, route each cluster, polish each route with
/// 2-opt then Or-opt, and finish with shift/swap moves that involve the
/// longest route.
pub fn construct_solution<R: Rng + ?Sized>(
    inst: &Instance,
    q: &QMatrix,
    m: usize,
    params: &Params,
    rng: &mut R,
) -> Result<Solution> {
    if m == 0 || m > inst.n_cities() {
        return Err(Error::InvalidM {
            m,
            n_cities: inst.n_cities(),
        });
    }
    let clustering = cluster(inst, q, m, params.d_rate_construct, params.epsilon, rng)?;
    let mut routes = Vec::with_capacity(m);
    for members in &clustering.clusters {
        let mut route = build_route(members, inst)?;
        two_opt(&mut route, inst, rng);
        or_opt(&mut route, inst, rng);
        routes.push(route);
    }
    let mut sol = Solution::new(routes);
    local_search(&mut sol, inst, params.d_rate_improve, rng, true, None);
    Ok(sol)
}
