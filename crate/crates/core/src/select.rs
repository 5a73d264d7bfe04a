//! Roulette-wheel and greedy selection helpers shared by the construction and
//! improvement phases.

use rand::Rng;

/// Samples an index with probability proportional to `weights`.
///
/// Negative, zero and NaN weights are never drawn. If some weights are
/// `+inf`, one of those is drawn uniformly. Returns `None` when no weight is
/// positive.
pub fn roulette<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let infinite = weights.iter().filter(|w| **w == f64::INFINITY).count();
    if infinite > 0 {
        let pick = rng.gen_range(0..infinite);
        return weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w == f64::INFINITY)
            .map(|(i, _)| i)
            .nth(pick);
    }
    let total: f64 = weights.iter().filter(|w| **w > 0.0).sum();
    if !(total > 0.0 && total.is_finite()) {
        return None;
    }
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = Some(i);
            if target < acc {
                return Some(i);
            }
        }
    }
    // rounding can leave `target` a hair above the accumulated sum
    last
}

/// Roulette draw that falls back to a uniform draw when no weight is usable.
pub fn roulette_or_uniform<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    debug_assert!(!weights.is_empty());
    roulette(weights, rng).unwrap_or_else(|| rng.gen_range(0..weights.len()))
}

/// Index of the minimum value; ties are broken uniformly at random by
/// reservoir sampling.
pub fn argmin_random_ties<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    let mut best = 0;
    let mut seen = 0u32;
    for (i, &v) in values.iter().enumerate() {
        if i == 0 || v < values[best] {
            best = i;
            seen = 1;
        } else if v == values[best] {
            seen += 1;
            if rng.gen_range(0..seen) == 0 {
                best = i;
            }
        }
    }
    best
}

/// Index of the maximum value; ties are broken uniformly at random.
pub fn argmax_random_ties<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    let mut best = 0;
    let mut seen = 0u32;
    for (i, &v) in values.iter().enumerate() {
        if i == 0 || v > values[best] {
            best = i;
            seen = 1;
        } else if v == values[best] {
            seen += 1;
            if rng.gen_range(0..seen) == 0 {
                best = i;
            }
        }
    }
    best
}
