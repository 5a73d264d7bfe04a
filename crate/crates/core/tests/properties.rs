use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mtsp_core::learn::cooccurrence;
use mtsp_core::subsolver::{Column, SolveLimits};
use mtsp_core::{
    brute_force_reference, construct_solution, evaluate, signature, solve_restricted, Instance, Params, Pool,
    QMatrix, RestrictedProblem, Route,
};

fn problem() -> impl Strategy<Value = RestrictedProblem> {
    (1usize..=8, 1usize..=12).prop_flat_map(|(n_cities, n_routes)| {
        let column = (prop::collection::btree_set(1..=n_cities, 1..=n_cities), 1u32..=40)
            .prop_map(|(cities, len)| Column {
                cities: cities.into_iter().collect(),
                length: len as f64,
            });
        (
            prop::collection::vec(column, n_routes),
            1..=n_routes,
            prop::option::of(5u32..=45),
        )
            .prop_map(move |(routes, m, bound)| RestrictedProblem {
                routes,
                m,
                n_cities,
                upper_bound: bound.map_or(f64::INFINITY, f64::from),
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn subsolver_matches_enumeration(prob in problem()) {
        let exact = brute_force_reference(&prob).unwrap();
        let found = solve_restricted(&prob, SolveLimits::default());
        prop_assert_eq!(exact.as_ref().map(|s| s.objective), found.selection().map(|s| s.objective));
        if let Some(sel) = found.selection() {
            prop_assert_eq!(sel.indices.len(), prob.m);
            prop_assert!(sel.objective < prob.upper_bound);
            for c in 1..=prob.n_cities {
                prop_assert!(sel.indices.iter().any(|&i| prob.routes[i].cities.contains(&c)));
            }
        }
    }

    #[test]
    fn loosening_bound_never_hurts(prob in problem()) {
        let tight = solve_restricted(&prob, SolveLimits::default());
        let loose = RestrictedProblem { upper_bound: f64::INFINITY, ..prob };
        let loose = solve_restricted(&loose, SolveLimits::default());
        if let Some(t) = tight.selection() {
            prop_assert!(loose.selection().unwrap().objective <= t.objective);
        }
    }

    #[test]
    fn construction_is_a_partition(n in 1usize..40, m_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let inst = Instance::generate_random(n, seed).unwrap();
        let m = 1 + ((n - 1) as f64 * m_frac) as usize;
        let params = Params::for_ratio(m, n);
        let mut q = QMatrix::new(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // skew a few q-values so the learned bias is exercised
        for i in 1..n {
            q.set(i, i + 1, (i % 3) as f64 / 2.0);
        }
        let sol = construct_solution(&inst, &q, m, &params, &mut rng).unwrap();
        prop_assert_eq!(sol.m(), m);
        let (z, total) = evaluate(&sol, &inst).unwrap();
        prop_assert!((z - sol.z).abs() < 1e-9);
        prop_assert!((total - sol.total).abs() < 1e-9);
    }

    #[test]
    fn signature_ignores_order(mut seq in prop::collection::vec(1usize..50, 1..12), seed in any::<u64>()) {
        seq.sort_unstable();
        seq.dedup();
        let sig = signature(&seq);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(&mut seq[..], &mut rng);
        prop_assert_eq!(signature(&seq), sig);
    }

    #[test]
    fn q_values_stay_in_unit_interval(steps in prop::collection::vec((any::<bool>(), 0.01f64..0.99), 1..200)) {
        let mut q = QMatrix::new(3);
        let cand = cooccurrence(3, [&[1usize, 2, 3][..]]);
        for (reinforce, l) in steps {
            let best = if reinforce {
                cooccurrence(3, [&[1usize, 2][..]])
            } else {
                cooccurrence(3, [&[3usize][..]])
            };
            q.update(&cand, &best, l);
            for (i, j) in [(1, 2), (1, 3), (2, 3)] {
                let v = q.get(i, j);
                prop_assert!((0.0..=1.0).contains(&v));
                prop_assert_eq!(v, q.get(j, i));
            }
        }
    }

    #[test]
    fn pool_keeps_invariants(ops in prop::collection::vec((prop::collection::vec(1usize..8, 1..5), 0u8..3), 1..60)) {
        let inst = Instance::generate_random(8, 17).unwrap();
        let age_max = 3;
        let mut pool = Pool::new();
        let mut z = f64::INFINITY;
        for (mut seq, op) in ops {
            seq.sort_unstable();
            seq.dedup();
            let route = Route::new(seq, &inst);
            match op {
                0 => pool.merge([route], z),
                1 => pool.adapt(&[route], age_max, z),
                _ => {
                    z = z.min(route.length + 0.5);
                    pool.prune(z);
                }
            }
            for (sig, entry) in pool.iter() {
                prop_assert_eq!(sig, &signature(&entry.route.seq));
                prop_assert!(entry.age < age_max);
                prop_assert!(entry.route.length < z);
            }
        }
    }
}
