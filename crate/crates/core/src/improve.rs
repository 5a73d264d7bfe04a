//! Inter-route improvement: duplicate removal, then cross-route relocation
//! (shift) and 1-1 exchange (swap) under the min-max acceptance rule.
//!
//! A shift or swap is admissible when the longest route after the move is
//! no longer than the current longest route `z`, and either the total length
//! strictly drops or `z` strictly drops. Every accepted move therefore
//! decreases `(z, total)` lexicographically, which bounds the number of moves.
//! Among admissible moves the largest gain is taken with probability
//! `d_rate`; otherwise one is drawn with weight `exp(gain / z)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::route::{Route, Solution};
use crate::select::{argmax_random_ties, roulette_or_uniform};
use crate::MIN_GAIN;

/// Sequence of `(z, total)` states: the starting state followed by the state
/// after every accepted shift or swap.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MoveLog {
    pub states: Vec<(f64, f64)>,
}

impl MoveLog {
    fn push(&mut self, sol: &Solution) {
        self.states.push((sol.z, sol.total));
    }
}

/// Length saved by splicing out the city at position `i`.
#[inline]
fn removal_gain(route: &Route, i: usize, inst: &Instance) -> f64 {
    let (a, u, b) = (route.pred(i), route.seq[i], route.succ(i));
    inst.d(a, u) + inst.d(u, b) - inst.d(a, b)
}

fn gains_of(route: &Route, inst: &Instance) -> Vec<f64> {
    (0..route.len()).map(|i| removal_gain(route, i, inst)).collect()
}

/// Exp-weight of a move gain, with the exponent clamped to [-50, 50].
#[inline]
fn move_weight(gain: f64, z: f64) -> f64 {
    let x = if z > 0.0 { gain / z } else { 0.0 };
    x.clamp(-50.0, 50.0).exp()
}

#[inline]
fn admissible(gain: f64, new_max: f64, z: f64) -> bool {
    new_max <= z && (gain > MIN_GAIN || new_max < z - MIN_GAIN)
}

/// The three largest route lengths with their indices, for O(1) "longest
/// route other than s and t" queries.
struct TopLengths([(f64, usize); 3]);

impl TopLengths {
    fn new(sol: &Solution) -> Self {
        let mut top = [(f64::NEG_INFINITY, usize::MAX); 3];
        for (i, r) in sol.routes.iter().enumerate() {
            let entry = (r.length, i);
            if entry.0 > top[0].0 {
                top = [entry, top[0], top[1]];
            } else if entry.0 > top[1].0 {
                top = [top[0], entry, top[1]];
            } else if entry.0 > top[2].0 {
                top[2] = entry;
            }
        }
        TopLengths(top)
    }

    fn excluding(&self, s: usize, t: usize) -> f64 {
        self.0
            .iter()
            .find(|(_, i)| *i != s && *i != t)
            .map(|(l, _)| l.max(0.0))
            .unwrap_or(0.0)
    }
}

fn pick<R: Rng + ?Sized>(gains: &[f64], z: f64, d_rate: f64, rng: &mut R) -> usize {
    if rng.gen::<f64>() < d_rate {
        argmax_random_ties(gains, rng)
    } else {
        let weights: Vec<f64> = gains.iter().map(|&g| move_weight(g, z)).collect();
        roulette_or_uniform(&weights, rng)
    }
}

#[cfg(debug_assertions)]
fn check_cache(sol: &Solution, gains: &[Vec<f64>], inst: &Instance) {
    for (r, cached) in sol.routes.iter().zip(gains) {
        let fresh = gains_of(r, inst);
        debug_assert_eq!(cached.len(), fresh.len());
        for (a, b) in cached.iter().zip(&fresh) {
            debug_assert!((a - b).abs() < 1e-9, "stale removal gain {a} vs {b}");
        }
        let exact = crate::route::tour_length(&r.seq, inst);
        debug_assert!((r.length - exact).abs() < 1e-9 * exact.max(1.0));
    }
}

/// Removes repeated visits until every city occurs once. Occurrences whose
/// removal would empty a route are only considered when nothing else is
/// left. Returns the number of removals.
pub fn remove_duplicates<R: Rng + ?Sized>(
    sol: &mut Solution,
    inst: &Instance,
    d_rate: f64,
    rng: &mut R,
) -> Result<usize> {
    let mut count = vec![0usize; inst.size()];
    for c in sol.routes.iter().flat_map(|r| r.seq.iter()) {
        count[*c] += 1;
    }
    let missing: Vec<usize> = inst.cities().filter(|&c| count[c] == 0).collect();
    if !missing.is_empty() {
        return Err(Error::Infeasible(format!("cities {missing:?} are not covered")));
    }
    let mut removed = 0;
    loop {
        let mut cands: Vec<(usize, usize, f64)> = Vec::new();
        let mut safe: Vec<(usize, usize, f64)> = Vec::new();
        for (r, route) in sol.routes.iter().enumerate() {
            for (i, &u) in route.seq.iter().enumerate() {
                if count[u] > 1 {
                    let delta = removal_gain(route, i, inst);
                    let entry = (r, i, delta);
                    if route.len() > 1 {
                        safe.push(entry);
                    }
                    cands.push(entry);
                }
            }
        }
        if cands.is_empty() {
            break;
        }
        let pool = if safe.is_empty() { cands } else { safe };
        // longer routes are preferred: the removal gain is scaled by length
        let scores: Vec<f64> = pool
            .iter()
            .map(|&(r, _, delta)| delta * sol.routes[r].length)
            .collect();
        let k = if rng.gen::<f64>() < d_rate {
            argmax_random_ties(&scores, rng)
        } else {
            roulette_or_uniform(&scores, rng)
        };
        let (r, i, delta) = pool[k];
        debug_assert!(delta >= -1e-9, "removal lengthened a route by {}", -delta);
        let route = &mut sol.routes[r];
        let u = route.seq.remove(i);
        route.length = if route.is_empty() { 0.0 } else { route.length - delta };
        count[u] -= 1;
        removed += 1;
    }
    sol.refresh();
    Ok(removed)
}

#[derive(Debug, Clone, Copy)]
struct Shift {
    src: usize,
    pos: usize,
    dst: usize,
    at: usize,
    removal: f64,
    insertion: f64,
}

/// Relocates single cities between routes until no admissible relocation
/// remains. With `restrict_to_longest`, only moves into or out of the
/// current longest route are considered. Returns the number of moves.
pub fn shift_pass<R: Rng + ?Sized>(
    sol: &mut Solution,
    inst: &Instance,
    d_rate: f64,
    rng: &mut R,
    restrict_to_longest: bool,
    mut log: Option<&mut MoveLog>,
) -> usize {
    if sol.m() < 2 {
        return 0;
    }
    sol.refresh();
    let mut gains: Vec<Vec<f64>> = sol.routes.iter().map(|r| gains_of(r, inst)).collect();
    let mut applied = 0;
    let mut moves: Vec<Shift> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    loop {
        moves.clear();
        values.clear();
        let z = sol.z;
        let longest = sol.longest();
        let top = TopLengths::new(sol);
        for (src, from) in sol.routes.iter().enumerate() {
            for (dst, to) in sol.routes.iter().enumerate() {
                if src == dst || (restrict_to_longest && src != longest && dst != longest) {
                    continue;
                }
                let other = top.excluding(src, dst);
                for (pos, &u) in from.seq.iter().enumerate() {
                    let removal = gains[src][pos];
                    let new_src = from.length - removal;
                    for at in 0..=to.len() {
                        let c = if at == 0 { 0 } else { to.seq[at - 1] };
                        let d = to.seq.get(at).copied().unwrap_or(0);
                        let insertion = inst.d(c, u) + inst.d(u, d) - inst.d(c, d);
                        let gain = removal - insertion;
                        let new_max = new_src.max(to.length + insertion).max(other);
                        if admissible(gain, new_max, z) {
                            moves.push(Shift {
                                src,
                                pos,
                                dst,
                                at,
                                removal,
                                insertion,
                            });
                            values.push(gain);
                        }
                    }
                }
            }
        }
        if moves.is_empty() {
            break;
        }
        let mv = moves[pick(&values, z, d_rate, rng)];
        let u = sol.routes[mv.src].seq.remove(mv.pos);
        let src = &mut sol.routes[mv.src];
        src.length = if src.is_empty() { 0.0 } else { src.length - mv.removal };
        let dst = &mut sol.routes[mv.dst];
        dst.seq.insert(mv.at, u);
        dst.length += mv.insertion;
        sol.refresh();
        gains[mv.src] = gains_of(&sol.routes[mv.src], inst);
        gains[mv.dst] = gains_of(&sol.routes[mv.dst], inst);
        #[cfg(debug_assertions)]
        check_cache(sol, &gains, inst);
        applied += 1;
        if let Some(log) = log.as_deref_mut() {
            log.push(sol);
        }
    }
    applied
}

#[derive(Debug, Clone, Copy)]
struct Swap {
    a: usize,
    i: usize,
    b: usize,
    j: usize,
    gain_a: f64,
    gain_b: f64,
}

/// Exchanges single cities between routes until no admissible exchange
/// remains. Returns the number of moves.
pub fn swap_pass<R: Rng + ?Sized>(
    sol: &mut Solution,
    inst: &Instance,
    d_rate: f64,
    rng: &mut R,
    restrict_to_longest: bool,
    mut log: Option<&mut MoveLog>,
) -> usize {
    if sol.m() < 2 {
        return 0;
    }
    sol.refresh();
    let mut applied = 0;
    let mut moves: Vec<Swap> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    loop {
        moves.clear();
        values.clear();
        let z = sol.z;
        let longest = sol.longest();
        let top = TopLengths::new(sol);
        for a in 0..sol.m() {
            for b in (a + 1)..sol.m() {
                if restrict_to_longest && a != longest && b != longest {
                    continue;
                }
                let (ra, rb) = (&sol.routes[a], &sol.routes[b]);
                let other = top.excluding(a, b);
                for (i, &u) in ra.seq.iter().enumerate() {
                    let (pa, sa) = (ra.pred(i), ra.succ(i));
                    let u_in_a = inst.d(pa, u) + inst.d(u, sa);
                    for (j, &v) in rb.seq.iter().enumerate() {
                        let (pb, sb) = (rb.pred(j), rb.succ(j));
                        let gain_a = u_in_a - (inst.d(pa, v) + inst.d(v, sa));
                        let gain_b = (inst.d(pb, v) + inst.d(v, sb)) - (inst.d(pb, u) + inst.d(u, sb));
                        let gain = gain_a + gain_b;
                        let new_max = (ra.length - gain_a).max(rb.length - gain_b).max(other);
                        if admissible(gain, new_max, z) {
                            moves.push(Swap {
                                a,
                                i,
                                b,
                                j,
                                gain_a,
                                gain_b,
                            });
                            values.push(gain);
                        }
                    }
                }
            }
        }
        if moves.is_empty() {
            break;
        }
        let mv = moves[pick(&values, z, d_rate, rng)];
        let u = sol.routes[mv.a].seq[mv.i];
        let v = sol.routes[mv.b].seq[mv.j];
        sol.routes[mv.a].seq[mv.i] = v;
        sol.routes[mv.a].length -= mv.gain_a;
        sol.routes[mv.b].seq[mv.j] = u;
        sol.routes[mv.b].length -= mv.gain_b;
        sol.refresh();
        #[cfg(debug_assertions)]
        {
            let gains: Vec<Vec<f64>> = sol.routes.iter().map(|r| gains_of(r, inst)).collect();
            check_cache(sol, &gains, inst);
        }
        applied += 1;
        if let Some(log) = log.as_deref_mut() {
            log.push(sol);
        }
    }
    applied
}

/// Alternates shift and swap passes until neither finds an admissible move.
pub fn local_search<R: Rng + ?Sized>(
    sol: &mut Solution,
    inst: &Instance,
    d_rate: f64,
    rng: &mut R,
    restrict_to_longest: bool,
    mut log: Option<&mut MoveLog>,
) -> usize {
    sol.refresh();
    if let Some(log) = log.as_deref_mut() {
        log.push(sol);
    }
    let mut total = 0;
    loop {
        total += shift_pass(sol, inst, d_rate, rng, restrict_to_longest, log.as_deref_mut());
        let swaps = swap_pass(sol, inst, d_rate, rng, restrict_to_longest, log.as_deref_mut());
        total += swaps;
        if swaps == 0 {
            break;
        }
    }
    total
}

/// Remove, then shift and swap over all route pairs.
pub fn improve<R: Rng + ?Sized>(
    sol: Solution,
    inst: &Instance,
    d_rate: f64,
    rng: &mut R,
) -> Result<Solution> {
    improve_logged(sol, inst, d_rate, rng, None)
}

pub fn improve_logged<R: Rng + ?Sized>(
    mut sol: Solution,
    inst: &Instance,
    d_rate: f64,
    rng: &mut R,
    log: Option<&mut MoveLog>,
) -> Result<Solution> {
    remove_duplicates(&mut sol, inst, d_rate, rng)?;
    local_search(&mut sol, inst, d_rate, rng, false, log);
    // drop accumulated rounding from incremental updates
    for r in &mut sol.routes {
        r.recompute(inst);
    }
    sol.refresh();
    Ok(sol)
}
