mod common;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mtsp_core::construct::{build_route, or_opt, two_opt};
use mtsp_core::improve::{local_search, remove_duplicates};
use mtsp_core::route::tour_length;
use mtsp_core::{improve, improve_logged, Instance, MoveLog, Route, Solution};

use common::{brute_force_tour, find_admissible_move, intra_route_neighbours};

#[test]
fn two_opt_or_opt_leave_no_improving_move() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for seed in 0..100 {
        let inst = Instance::generate_random(8, seed).unwrap();
        let mut seq: Vec<usize> = (1..=8).collect();
        seq.shuffle(&mut rng);
        let mut route = Route::new(seq, &inst);
        // alternate until neither changes anything
        while two_opt(&mut route, &inst, &mut rng) + or_opt(&mut route, &inst, &mut rng) > 0 {}
        let base = tour_length(&route.seq, &inst);
        for n in intra_route_neighbours(&route.seq) {
            assert!(tour_length(&n, &inst) >= base - 1e-9, "seed {seed}: {n:?} beats {:?}", route.seq);
        }
    }
}

#[test]
fn three_city_route_reaches_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..50 {
        let inst = Instance::generate_random(3, seed).unwrap();
        let mut route = Route::new(vec![1, 2, 3], &inst);
        two_opt(&mut route, &inst, &mut rng);
        or_opt(&mut route, &inst, &mut rng);
        assert!((route.length - brute_force_tour(&[1, 2, 3], &inst)).abs() < 1e-12);
    }
}

#[test]
fn insertion_then_polish_near_optimal_on_small_routes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..30 {
        let inst = Instance::generate_random(7, seed).unwrap();
        let cities: Vec<usize> = (0..=7).collect();
        let mut route = build_route(&cities, &inst).unwrap();
        two_opt(&mut route, &inst, &mut rng);
        or_opt(&mut route, &inst, &mut rng);
        let opt = brute_force_tour(&cities[1..], &inst);
        assert!(route.length <= opt * 1.1 + 1e-12, "seed {seed}: {} vs {opt}", route.length);
    }
}

fn random_split(inst: &Instance, m: usize, rng: &mut ChaCha8Rng) -> Solution {
    let mut cities: Vec<usize> = inst.cities().collect();
    cities.shuffle(rng);
    let mut routes = vec![Vec::new(); m];
    for (k, c) in cities.into_iter().enumerate() {
        let r = if k < m { k } else { rng.gen_range(0..m) };
        routes[r].push(c);
    }
    Solution::new(routes.into_iter().map(|s| Route::new(s, inst)).collect())
}

#[test]
fn improve_leaves_no_admissible_move() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seed in 0..50 {
        let inst = Instance::generate_random(8, 1000 + seed).unwrap();
        let sol = random_split(&inst, 2, &mut rng);
        let out = improve(sol, &inst, 0.9, &mut rng).unwrap();
        out.validate(&inst).unwrap();
        if let Some(mv) = find_admissible_move(&out, &inst, 1e-9) {
            panic!("seed {seed}: {mv} still admissible in {:?}", out.routes);
        }
    }
}

#[test]
fn improve_trace_decreases_lexicographically() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..40 {
        let inst = Instance::generate_random(20, 2000 + seed).unwrap();
        let m = rng.gen_range(2..=5);
        let sol = random_split(&inst, m, &mut rng);
        let mut log = MoveLog::default();
        improve_logged(sol, &inst, 0.5, &mut rng, Some(&mut log)).unwrap();
        for w in log.states.windows(2) {
            let ((z0, t0), (z1, t1)) = (w[0], w[1]);
            assert!(z1 <= z0, "z rose from {z0} to {z1}");
            assert!(z1 < z0 || t1 < t0, "({z0}, {t0}) -> ({z1}, {t1})");
        }
    }
}

#[test]
fn remove_turns_overlapping_selection_into_partition() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 0..50 {
        let inst = Instance::generate_random(12, 3000 + seed).unwrap();
        let mut routes = Vec::new();
        for _ in 0..3 {
            let mut seq: Vec<usize> = inst.cities().filter(|_| rng.gen_bool(0.5)).collect();
            seq.shuffle(&mut rng);
            routes.push(seq);
        }
        // make sure every city is covered at least once
        for c in inst.cities() {
            if !routes.iter().any(|r| r.contains(&c)) {
                routes[c % 3].push(c);
            }
        }
        let mut sol = Solution::new(routes.into_iter().map(|s| Route::new(s, &inst)).collect());
        remove_duplicates(&mut sol, &inst, 0.7, &mut rng).unwrap();
        sol.validate(&inst).unwrap();
        for r in &sol.routes {
            assert!((r.length - tour_length(&r.seq, &inst)).abs() < 1e-9);
        }
    }
}

#[test]
fn restricted_search_touches_longest_route_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for seed in 0..20 {
        let inst = Instance::generate_random(15, 4000 + seed).unwrap();
        let mut sol = random_split(&inst, 3, &mut rng);
        let z0 = sol.z;
        local_search(&mut sol, &inst, 1.0, &mut rng, true, None);
        assert!(sol.z <= z0);
        sol.validate(&inst).unwrap();
    }
}
