//! Route stage: cheapest insertion followed by 2-opt and Or-opt with random
//! scan order and first-improvement acceptance.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::route::Route;
use crate::MIN_GAIN;

/// Builds a tour over `cities` by cheapest insertion, starting from the city
/// farthest from the depot. Ties go to the smaller city index, then to the
/// earlier position.
pub fn build_route(cities: &[usize], inst: &Instance) -> Result<Route> {
    let Some(&first) = cities
        .iter()
        .filter(|&&c| c != 0)
        .max_by(|&&a, &&b| inst.d(0, a).total_cmp(&inst.d(0, b)).then(b.cmp(&a)))
    else {
        return Err(Error::InvalidInstance("cannot route an empty cluster".into()));
    };
    let mut remaining: Vec<usize> = cities.iter().copied().filter(|&c| c != 0 && c != first).collect();
    remaining.sort_unstable();
    remaining.dedup();
    let mut seq = vec![first];
    while !remaining.is_empty() {
        let mut best = (f64::INFINITY, 0, 0);
        for (k, &u) in remaining.iter().enumerate() {
            for pos in 0..=seq.len() {
                let a = if pos == 0 { 0 } else { seq[pos - 1] };
                let b = seq.get(pos).copied().unwrap_or(0);
                let cost = inst.d(a, u) + inst.d(u, b) - inst.d(a, b);
                if cost < best.0 {
                    best = (cost, k, pos);
                }
            }
        }
        let (_, k, pos) = best;
        seq.insert(pos, remaining.remove(k));
    }
    Ok(Route::new(seq, inst))
}

/// 2-opt until no improving edge exchange remains.
pub fn two_opt<R: Rng + ?Sized>(route: &mut Route, inst: &Instance, rng: &mut R) -> usize {
    let k = route.seq.len();
    if k < 3 {
        return 0;
    }
    // tour = [0, seq.., 0]; move (i, j) replaces edges (t_i, t_i+1) and
    // (t_j, t_j+1) by reversing t_i+1..=t_j
    let mut moves: Vec<(usize, usize)> = Vec::with_capacity(k * k / 2);
    for i in 0..k {
        for j in (i + 2)..=k {
            if !(i == 0 && j == k) {
                moves.push((i, j));
            }
        }
    }
    let mut tour = Vec::with_capacity(k + 2);
    tour.push(0);
    tour.extend_from_slice(&route.seq);
    tour.push(0);
    let mut applied = 0;
    loop {
        moves.shuffle(rng);
        let mut improved = false;
        for &(i, j) in &moves {
            let (a, b, c, d) = (tour[i], tour[i + 1], tour[j], tour[j + 1]);
            let delta = inst.d(a, c) + inst.d(b, d) - inst.d(a, b) - inst.d(c, d);
            if delta < -MIN_GAIN {
                tour[i + 1..=j].reverse();
                route.length += delta;
                applied += 1;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    route.seq.copy_from_slice(&tour[1..=k]);
    route.recompute(inst);
    applied
}

/// An Or-opt move: the segment `seq[start..start + len]` is reinserted into
/// gap `gap` of the remaining sequence, optionally reversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrMove {
    pub start: usize,
    pub len: usize,
    pub gap: usize,
    pub reversed: bool,
}

/// Every Or-opt move on a route with `k` cities.
pub fn or_moves(k: usize) -> Vec<OrMove> {
    let mut moves = Vec::new();
    for len in 1..=2usize {
        if k <= len {
            continue;
        }
        for start in 0..=(k - len) {
            for gap in 0..=(k - len) {
                if gap == start {
                    continue;
                }
                for reversed in [false, true] {
                    if len == 1 && reversed {
                        continue;
                    }
                    moves.push(OrMove {
                        start,
                        len,
                        gap,
                        reversed,
                    });
                }
            }
        }
    }
    moves
}

/// Length change of applying `mv` to `seq`.
pub fn or_delta(seq: &[usize], mv: OrMove, inst: &Instance) -> f64 {
    let k = seq.len();
    let at = |i: isize| -> usize {
        if i < 0 || i as usize >= k {
            0
        } else {
            seq[i as usize]
        }
    };
    let s0 = seq[mv.start];
    let s1 = seq[mv.start + mv.len - 1];
    let p = at(mv.start as isize - 1);
    let n = at((mv.start + mv.len) as isize);
    let gain = inst.d(p, s0) + inst.d(s1, n) - inst.d(p, n);
    // remaining sequence index r maps to seq index r (< start) or r + len
    let rem = |r: isize| -> usize {
        if r < 0 || r as usize >= k - mv.len {
            0
        } else if (r as usize) < mv.start {
            seq[r as usize]
        } else {
            seq[r as usize + mv.len]
        }
    };
    let x = rem(mv.gap as isize - 1);
    let y = rem(mv.gap as isize);
    let (first, last) = if mv.reversed { (s1, s0) } else { (s0, s1) };
    let cost = inst.d(x, first) + inst.d(last, y) - inst.d(x, y);
    cost - gain
}

pub fn apply_or_move(seq: &mut Vec<usize>, mv: OrMove) {
    let mut segment: Vec<usize> = seq.drain(mv.start..mv.start + mv.len).collect();
    if mv.reversed {
        segment.reverse();
    }
    let tail = seq.split_off(mv.gap);
    seq.extend(segment);
    seq.extend(tail);
}

/// Or-opt with segments of one and two cities until no improving relocation
/// remains.
pub fn or_opt<R: Rng + ?Sized>(route: &mut Route, inst: &Instance, rng: &mut R) -> usize {
    let mut moves = or_moves(route.seq.len());
    if moves.is_empty() {
        return 0;
    }
    let mut applied = 0;
    loop {
        moves.shuffle(rng);
        let mut improved = false;
        for &mv in &moves {
            let delta = or_delta(&route.seq, mv, inst);
            if delta < -MIN_GAIN {
                apply_or_move(&mut route.seq, mv);
                route.length += delta;
                applied += 1;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    route.recompute(inst);
    applied
}
