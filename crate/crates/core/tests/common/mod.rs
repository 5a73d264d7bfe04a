#![allow(dead_code)]

use mtsp_core::route::tour_length;
use mtsp_core::{Instance, Solution};

/// Shortest closed tour from the depot over `cities`, by enumerating every
/// permutation.
pub fn brute_force_tour(cities: &[usize], inst: &Instance) -> f64 {
    fn rec(rest: &mut Vec<usize>, seq: &mut Vec<usize>, inst: &Instance, best: &mut f64) {
        if rest.is_empty() {
            *best = best.min(tour_length(seq, inst));
            return;
        }
        for k in 0..rest.len() {
            let c = rest.remove(k);
            seq.push(c);
            rec(rest, seq, inst, best);
            seq.pop();
            rest.insert(k, c);
        }
    }
    let mut best = f64::INFINITY;
    rec(&mut cities.to_vec(), &mut Vec::new(), inst, &mut best);
    best
}

/// Every sequence reachable by one 2-opt reversal or one relocation of a
/// segment of one or two cities (both orientations).
pub fn intra_route_neighbours(seq: &[usize]) -> Vec<Vec<usize>> {
    let k = seq.len();
    let mut out = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            let mut s = seq.to_vec();
            s[i..=j].reverse();
            out.push(s);
        }
    }
    for len in 1..=2usize.min(k) {
        for start in 0..=(k - len) {
            let mut rest = seq.to_vec();
            let seg: Vec<usize> = rest.drain(start..start + len).collect();
            for gap in 0..=rest.len() {
                for reversed in [false, true] {
                    let mut s = rest.clone();
                    let mut piece = seg.clone();
                    if reversed {
                        piece.reverse();
                    }
                    s.splice(gap..gap, piece);
                    out.push(s);
                }
            }
        }
    }
    out
}

fn stats(routes: &[Vec<usize>], inst: &Instance) -> (f64, f64) {
    let lens: Vec<f64> = routes.iter().map(|r| tour_length(r, inst)).collect();
    (lens.iter().copied().fold(0.0, f64::max), lens.iter().sum())
}

/// Looks for a shift or swap that keeps the longest route at or below `z`
/// and lowers either the total length or `z` by more than `tol`. Returns a
/// description of the first one found.
pub fn find_admissible_move(sol: &Solution, inst: &Instance, tol: f64) -> Option<String> {
    let routes: Vec<Vec<usize>> = sol.routes.iter().map(|r| r.seq.clone()).collect();
    let (z, total) = stats(&routes, inst);
    let improves = |cand: &[Vec<usize>]| {
        let (nz, nt) = stats(cand, inst);
        nz <= z + 1e-12 && (nt < total - tol || nz < z - tol)
    };
    for s in 0..routes.len() {
        for t in 0..routes.len() {
            if s == t {
                continue;
            }
            for i in 0..routes[s].len() {
                for p in 0..=routes[t].len() {
                    let mut cand = routes.clone();
                    let u = cand[s].remove(i);
                    cand[t].insert(p, u);
                    if improves(&cand) {
                        return Some(format!("shift {u} from route {s} to route {t} at {p}"));
                    }
                }
                if s < t {
                    for j in 0..routes[t].len() {
                        let mut cand = routes.clone();
                        let u = cand[s][i];
                        cand[s][i] = cand[t][j];
                        cand[t][j] = u;
                        if improves(&cand) {
                            return Some(format!("swap positions {i} of {s} and {j} of {t}"));
                        }
                    }
                }
            }
        }
    }
    None
}
