//! Cluster stage: q-biased k-means++ style seeding followed by a weighted,
//! load-aware assignment of the remaining cities.
//!
//! Random draws happen in a fixed order so that a seeded stream reproduces a
//! clustering exactly:
//! 1. one roulette draw per center over the unassigned cities (ascending ids);
//! 2. per assigned city, one roulette draw for the city, one `f64` coin for
//!    the greedy/roulette decision, then either a tie-breaking argmin or a
//!    roulette draw over clusters.

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{angdist, Instance};
use crate::learn::QMatrix;
use crate::select::{argmin_random_ties, roulette_or_uniform};

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Member cities of each cluster; element 0 is always the depot.
    pub clusters: Vec<Vec<usize>>,
    pub centers: Vec<usize>,
    /// Provisional route-length estimates.
    pub l_approx: Vec<f64>,
}

impl Clustering {
    pub fn m(&self) -> usize {
        self.centers.len()
    }

    /// Cities not yet assigned to any cluster, ascending.
    pub fn unassigned(&self, inst: &Instance) -> Vec<usize> {
        let mut assigned = vec![false; inst.size()];
        for c in self.clusters.iter().flatten() {
            assigned[*c] = true;
        }
        inst.cities().filter(|&c| !assigned[c]).collect()
    }
}

/// Picks `m` distinct centers. The first is drawn with probability
/// proportional to its squared depot distance; afterwards each city's weight
/// shrinks to `min(w, D(i,c)² · Q(i,c)²)` for every chosen center `c`.
pub fn seed_centers<R: Rng + ?Sized>(
    inst: &Instance,
    q: &QMatrix,
    m: usize,
    rng: &mut R,
) -> Result<Clustering> {
    let n = inst.n_cities();
    if m == 0 || m > n {
        return Err(Error::InvalidM { m, n_cities: n });
    }
    let mut unassigned: Vec<usize> = inst.cities().collect();
    let mut weights: Vec<f64> = unassigned.iter().map(|&i| inst.d(0, i).powi(2)).collect();
    let mut clustering = Clustering {
        clusters: Vec::with_capacity(m),
        centers: Vec::with_capacity(m),
        l_approx: Vec::with_capacity(m),
    };
    for _ in 0..m {
        let k = roulette_or_uniform(&weights, rng);
        let center = unassigned.remove(k);
        weights.remove(k);
        clustering.clusters.push(vec![0, center]);
        clustering.centers.push(center);
        clustering.l_approx.push(2.0 * inst.d(0, center));
        for (w, &i) in weights.iter_mut().zip(&unassigned) {
            let shrunk = inst.d(i, center).powi(2) * q.get(i, center).powi(2);
            *w = w.min(shrunk);
        }
    }
    Ok(clustering)
}

/// The two members of `cluster` closest to `u`, smaller index first on ties.
pub fn two_closest_points(u: usize, cluster: &[usize], inst: &Instance) -> Result<(usize, usize)> {
    if cluster.len() < 2 {
        return Err(Error::InvalidInstance(format!(
            "cluster needs two members, has {}",
            cluster.len()
        )));
    }
    let key = |v: usize| (inst.d(u, v), v);
    let (mut a, mut b) = (cluster[0], cluster[1]);
    if key(b) < key(a) {
        std::mem::swap(&mut a, &mut b);
    }
    for &v in &cluster[2..] {
        if key(v) < key(a) {
            b = a;
            a = v;
        } else if key(v) < key(b) {
            b = v;
        }
    }
    Ok((a, b))
}

/// Score terms for placing `u` into each cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentScores {
    pub insertion: Vec<f64>,
    pub scores: Vec<f64>,
}

pub fn assignment_scores(
    u: usize,
    clustering: &Clustering,
    inst: &Instance,
    q: &QMatrix,
    epsilon: f64,
) -> AssignmentScores {
    let l_max = clustering.l_approx.iter().copied().fold(0.0, f64::max);
    let m = clustering.m();
    let mut insertion = Vec::with_capacity(m);
    let mut scores = Vec::with_capacity(m);
    for (j, members) in clustering.clusters.iter().enumerate() {
        let (a, b) = two_closest_points(u, members, inst).expect("clusters hold depot and center");
        let d = inst.d(u, a) + inst.d(u, b) - inst.d(a, b);
        let cities = &members[1..];
        let q_mean = cities.iter().map(|&v| q.get(u, v)).sum::<f64>() / cities.len() as f64;
        let r = if l_max > 0.0 {
            l_max.max(clustering.l_approx[j] + d) / l_max
        } else {
            1.0
        };
        insertion.push(d);
        scores.push((d + epsilon) * r * q_mean);
    }
    AssignmentScores { insertion, scores }
}

/// Assigns every remaining city to a cluster. Returns the assignment order
/// as `(city, cluster)` pairs.
pub fn assign_cities<R: Rng + ?Sized>(
    clustering: &mut Clustering,
    inst: &Instance,
    q: &QMatrix,
    d_rate: f64,
    epsilon: f64,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let mut unassigned = clustering.unassigned(inst);
    let mut order_weights: Vec<f64> = unassigned
        .iter()
        .map(|&u| {
            let delta = clustering
                .centers
                .iter()
                .map(|&c| angdist(inst.theta(u), inst.theta(c)))
                .fold(f64::INFINITY, f64::min);
            1.0 / (delta + epsilon)
        })
        .collect();
    let mut trace = Vec::with_capacity(unassigned.len());
    while !unassigned.is_empty() {
        let k = roulette_or_uniform(&order_weights, rng);
        let u = unassigned.remove(k);
        order_weights.remove(k);

        let AssignmentScores { insertion, scores } =
            assignment_scores(u, clustering, inst, q, epsilon);
        let j = if rng.gen::<f64>() < d_rate {
            argmin_random_ties(&scores, rng)
        } else {
            let inv: Vec<f64> = scores.iter().map(|s| 1.0 / s).collect();
            roulette_or_uniform(&inv, rng)
        };
        clustering.clusters[j].push(u);
        clustering.l_approx[j] += insertion[j];
        trace.push((u, j));
    }
    trace
}

/// Seeds and assigns: a full partition of the cities into `m` clusters.
pub fn cluster<R: Rng + ?Sized>(
    inst: &Instance,
    q: &QMatrix,
    m: usize,
    d_rate: f64,
    epsilon: f64,
    rng: &mut R,
) -> Result<Clustering> {
    let mut clustering = seed_centers(inst, q, m, rng)?;
    assign_cities(&mut clustering, inst, q, d_rate, epsilon, rng);
    Ok(clustering)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::SQRT_2;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn cross() -> Instance {
        Instance::from_coords(
            "cross",
            vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)],
        )
        .unwrap()
    }

    #[test]
    fn all_cities_become_centers() {
        let inst = cross();
        let q = QMatrix::new(4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = seed_centers(&inst, &q, 4, &mut rng).unwrap();
        let mut centers = c.centers.clone();
        centers.sort_unstable();
        assert_eq!(centers, vec![1, 2, 3, 4]);
        for (members, &center) in c.clusters.iter().zip(&c.centers) {
            assert_eq!(members, &vec![0, center]);
        }
        assert_eq!(c.l_approx, vec![2.0; 4]);
        assert!(c.unassigned(&inst).is_empty());
        assert!(seed_centers(&inst, &q, 5, &mut rng).is_err());
        assert!(seed_centers(&inst, &q, 0, &mut rng).is_err());
    }

    #[test]
    fn first_center_follows_squared_distance() {
        // depot distances 2 and 1: probabilities 4/5 and 1/5
        let inst = Instance::from_coords("two", vec![(0.0, 0.0), (2.0, 0.0), (0.0, 1.0)]).unwrap();
        let q = QMatrix::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let draws = 50_000;
        let far = (0..draws)
            .filter(|_| seed_centers(&inst, &q, 1, &mut rng).unwrap().centers[0] == 1)
            .count();
        let p = far as f64 / draws as f64;
        assert!((p - 0.8).abs() < 0.01, "p = {p}");
    }

    #[test]
    fn zero_q_excludes_later_centers() {
        let inst = Instance::generate_random(6, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let mut q = QMatrix::new(6);
            // city 2 can only be picked first; once any other city is a
            // center its weight is zero
            for c in 1..=6 {
                if c != 2 {
                    q.set(2, c, 0.0);
                }
            }
            let centers = seed_centers(&inst, &q, 3, &mut rng).unwrap().centers;
            assert!(!centers[1..].contains(&2));
        }
    }

    #[test]
    fn two_closest_examples() {
        let inst = cross();
        assert_eq!(two_closest_points(3, &[0, 2], &inst).unwrap(), (0, 2));
        // distances from (-1,0): depot 1, city 1 at 2, city 2 at √2
        assert_eq!(inst.d(3, 2), SQRT_2);
        assert_eq!(two_closest_points(3, &[0, 1, 2], &inst).unwrap(), (0, 2));
        // from (1,0): city 2 and city 4 both at √2, depot at 1 -> (0, 2)
        assert_eq!(two_closest_points(1, &[0, 4, 2], &inst).unwrap(), (0, 2));
        assert!(two_closest_points(1, &[0], &inst).is_err());
    }

    #[test]
    fn two_closest_tie_rule() {
        // depot and three members all at distance 1 from city 4
        let inst = Instance::from_coords(
            "ties",
            vec![(0.0, 0.0), (2.0, 0.0), (1.0, 1.0), (1.0, -1.0), (1.0, 0.0)],
        )
        .unwrap();
        assert_eq!(two_closest_points(4, &[3, 1, 2], &inst).unwrap(), (1, 2));
        assert_eq!(two_closest_points(4, &[0, 3, 1, 2], &inst).unwrap(), (0, 1));
    }

    #[test]
    fn single_cluster_takes_everything() {
        let inst = Instance::generate_random(20, 1).unwrap();
        let q = QMatrix::new(20);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = cluster(&inst, &q, 1, 0.3, 1e-9, &mut rng).unwrap();
        assert_eq!(c.clusters[0].len(), 21);
    }

    #[test]
    fn low_q_attracts_city() {
        // two clusters with similar insertion cost for city 3; Q favours A
        let inst = Instance::from_coords(
            "toy",
            vec![(0.0, 0.0), (1.0, 1.0), (1.0, -1.0), (1.2, 0.0)],
        )
        .unwrap();
        let mut q = QMatrix::new(3);
        q.set(3, 1, 1e-6);
        q.set(3, 2, 1.0);
        let c = Clustering {
            clusters: vec![vec![0, 1], vec![0, 2]],
            centers: vec![1, 2],
            l_approx: vec![2.0 * SQRT_2, 2.0 * SQRT_2],
        };
        let s = assignment_scores(3, &c, &inst, &q, 1e-9);
        assert_eq!(s.insertion[0], s.insertion[1]);
        assert!(s.scores[0] < 1e-5 * s.scores[1]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut greedy = c.clone();
        assign_cities(&mut greedy, &inst, &q, 1.0, 1e-9, &mut rng);
        assert_eq!(greedy.clusters[0], vec![0, 1, 3]);
    }
}
