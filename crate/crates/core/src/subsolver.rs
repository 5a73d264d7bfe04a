//! Exact min-max route selection over the pool.
//!
//! Chooses exactly `m` distinct routes that together visit every city at
//! least once and minimize the longest selected route, subject to that length
//! staying strictly below the incumbent. The optimal threshold is found by
//! binary search over the sorted route lengths; each probe is a set-cover
//! feasibility test with a cardinality limit, answered by branch and bound
//! with memoized infeasible states. Among optimal selections the one with the
//! smallest total length is preferred, then the lexicographically smallest
//! index set.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};

/// One candidate route: its city set and length.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub cities: Vec<usize>,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedProblem {
    pub routes: Vec<Column>,
    pub m: usize,
    pub n_cities: usize,
    /// Selected routes must be strictly shorter than this.
    pub upper_bound: f64,
}

/// A set of exactly `m` route indices, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub indices: Vec<usize>,
    /// Longest selected route.
    pub objective: f64,
    /// Sum of selected lengths, accumulated in index order.
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Optimal(Selection),
    Infeasible,
    /// The budget ran out; carries the best selection found, if any.
    TimedOut(Option<Selection>),
}

impl SolveOutcome {
    pub fn selection(&self) -> Option<&Selection> {
        match self {
            SolveOutcome::Optimal(s) => Some(s),
            SolveOutcome::TimedOut(s) => s.as_ref(),
            SolveOutcome::Infeasible => None,
        }
    }
}

/// Budget for one call. `None` fields are unlimited.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveLimits {
    pub time_cap: Option<Duration>,
    /// Branch-and-bound nodes over the whole call.
    pub node_limit: Option<u64>,
    /// Nodes spent on the total-length tie-break once the optimal max length
    /// is known. The tie-break keeps its best selection when this runs out.
    pub tiebreak_node_limit: Option<u64>,
}

impl SolveLimits {
    pub fn with_time_cap(cap: Duration) -> Self {
        SolveLimits {
            time_cap: Some(cap),
            node_limit: None,
            tiebreak_node_limit: Some(DEFAULT_TIEBREAK_NODES),
        }
    }
}

pub const DEFAULT_TIEBREAK_NODES: u64 = 50_000;

/// Largest pool accepted by [`brute_force_reference`].
pub const BRUTE_FORCE_MAX_ROUTES: usize = 20;

#[derive(Debug)]
struct OutOfBudget;

struct Budget {
    start: Instant,
    time_cap: Option<Duration>,
    node_limit: Option<u64>,
    nodes: u64,
}

impl Budget {
    fn tick(&mut self) -> std::result::Result<(), OutOfBudget> {
        self.nodes += 1;
        if let Some(limit) = self.node_limit {
            if self.nodes > limit {
                return Err(OutOfBudget);
            }
        }
        if self.nodes.is_multiple_of(512) {
            if let Some(cap) = self.time_cap {
                if self.start.elapsed() >= cap {
                    return Err(OutOfBudget);
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Bits(Box<[u64]>);

impl Bits {
    fn zeros(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)].into_boxed_slice())
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn intersection_count(&self, other: &Bits) -> u32 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a & !b == 0)
    }

    fn minus(&self, other: &Bits) -> Bits {
        Bits(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a & !b)
                .collect(),
        )
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let t = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(w * 64 + t)
                }
            })
        })
    }
}

/// Sum of lengths over `indices` in the given (ascending) order.
fn canonical_total(routes: &[Column], indices: &[usize]) -> f64 {
    indices.iter().map(|&i| routes[i].length).sum()
}

fn make_selection(routes: &[Column], mut indices: Vec<usize>) -> Selection {
    indices.sort_unstable();
    let objective = indices
        .iter()
        .map(|&i| routes[i].length)
        .fold(f64::NEG_INFINITY, f64::max);
    let total = canonical_total(routes, &indices);
    Selection {
        indices,
        objective,
        total,
    }
}

/// `a` is preferred over `b`: smaller max, then smaller total, then
/// lexicographically smaller indices.
fn better(a: &Selection, b: &Selection) -> bool {
    (a.objective, a.total, &a.indices) < (b.objective, b.total, &b.indices)
}

struct Prepared {
    /// Route bitsets over cities `1..=n` stored at bit `city - 1`.
    sets: Vec<Bits>,
    universe: Bits,
}

impl Prepared {
    fn new(prob: &RestrictedProblem) -> Self {
        let n = prob.n_cities;
        let sets = prob
            .routes
            .iter()
            .map(|col| {
                let mut b = Bits::zeros(n);
                for &c in &col.cities {
                    if (1..=n).contains(&c) {
                        b.set(c - 1);
                    }
                }
                b
            })
            .collect();
        let mut universe = Bits::zeros(n);
        for i in 0..n {
            universe.set(i);
        }
        Prepared { sets, universe }
    }
}

/// Cover test: can every bit of `universe` be covered by at most `slots` of
/// the routes in `allowed`?
struct CoverSearch<'a> {
    sets: &'a [Bits],
    routes: Vec<usize>,
    by_city: Vec<Vec<usize>>,
    failed: HashMap<Bits, usize>,
}

impl<'a> CoverSearch<'a> {
    fn new(sets: &'a [Bits], allowed: &[usize], n: usize) -> Self {
        // drop routes whose city set is contained in another allowed route
        let mut order: Vec<usize> = allowed.to_vec();
        order.sort_by_key(|&r| (std::cmp::Reverse(sets[r].count()), r));
        let mut kept: Vec<usize> = Vec::new();
        for &r in &order {
            if sets[r].is_empty() {
                continue;
            }
            if !kept.iter().any(|&k| sets[r].is_subset(&sets[k])) {
                kept.push(r);
            }
        }
        let mut by_city = vec![Vec::new(); n];
        for &r in &kept {
            for c in sets[r].ones() {
                by_city[c].push(r);
            }
        }
        CoverSearch {
            sets,
            routes: kept,
            by_city,
            failed: HashMap::new(),
        }
    }

    fn search(
        &mut self,
        uncovered: &Bits,
        slots: usize,
        budget: &mut Budget,
    ) -> std::result::Result<Option<Vec<usize>>, OutOfBudget> {
        if uncovered.is_empty() {
            return Ok(Some(Vec::new()));
        }
        if slots == 0 {
            return Ok(None);
        }
        if self.failed.get(uncovered).is_some_and(|&s| s >= slots) {
            return Ok(None);
        }
        budget.tick()?;

        let remaining = uncovered.count();
        let max_gain = self
            .routes
            .iter()
            .map(|&r| self.sets[r].intersection_count(uncovered))
            .max()
            .unwrap_or(0);
        if max_gain == 0 || remaining.div_ceil(max_gain) as usize > slots {
            self.failed.insert(uncovered.clone(), slots);
            return Ok(None);
        }

        let city = uncovered
            .ones()
            .min_by_key(|&c| (self.by_city[c].len(), c))
            .expect("uncovered is non-empty");
        let mut branches: Vec<(u32, usize)> = self.by_city[city]
            .iter()
            .map(|&r| (self.sets[r].intersection_count(uncovered), r))
            .collect();
        branches.sort_by_key(|&(gain, r)| (std::cmp::Reverse(gain), r));
        for (_, r) in branches {
            let rest = uncovered.minus(&self.sets[r]);
            if let Some(mut chosen) = self.search(&rest, slots - 1, budget)? {
                chosen.push(r);
                return Ok(Some(chosen));
            }
        }
        let entry = self.failed.entry(uncovered.clone()).or_insert(0);
        *entry = (*entry).max(slots);
        Ok(None)
    }
}

/// Pads `cover` with the cheapest other routes from `by_length` up to `m`.
fn complete(cover: &[usize], by_length: &[usize], m: usize) -> Option<Vec<usize>> {
    let mut sel = cover.to_vec();
    for &r in by_length {
        if sel.len() >= m {
            break;
        }
        if !cover.contains(&r) {
            sel.push(r);
        }
    }
    (sel.len() == m).then_some(sel)
}

/// Among selections drawn from `allowed`, finds the smallest total length.
struct TotalSearch<'a> {
    prob: &'a RestrictedProblem,
    sets: &'a [Bits],
    by_length: Vec<usize>,
    by_city: Vec<Vec<usize>>,
    best: Selection,
    slack: f64,
}

impl TotalSearch<'_> {
    fn bound(&self, chosen: &[usize], cost: f64) -> f64 {
        let need = self.prob.m - chosen.len();
        cost + self
            .by_length
            .iter()
            .filter(|r| !chosen.contains(r))
            .take(need)
            .map(|&r| self.prob.routes[r].length)
            .sum::<f64>()
    }

    fn search(
        &mut self,
        uncovered: &Bits,
        chosen: &mut Vec<usize>,
        cost: f64,
        budget: &mut Budget,
    ) -> std::result::Result<(), OutOfBudget> {
        if self.bound(chosen, cost) > self.best.total + self.slack {
            return Ok(());
        }
        if uncovered.is_empty() {
            if let Some(sel) = complete(chosen, &self.by_length, self.prob.m) {
                let cand = make_selection(&self.prob.routes, sel);
                if better(&cand, &self.best) {
                    self.best = cand;
                }
            }
            return Ok(());
        }
        if chosen.len() == self.prob.m {
            return Ok(());
        }
        budget.tick()?;
        let city = uncovered
            .ones()
            .min_by_key(|&c| (self.by_city[c].len(), c))
            .expect("uncovered is non-empty");
        let branches = self.by_city[city].clone();
        for r in branches {
            chosen.push(r);
            let rest = uncovered.minus(&self.sets[r]);
            let res = self.search(&rest, chosen, cost + self.prob.routes[r].length, budget);
            chosen.pop();
            res?;
        }
        Ok(())
    }
}

/// Solves the restricted selection problem exactly within `limits`.
pub fn solve_restricted(prob: &RestrictedProblem, limits: SolveLimits) -> SolveOutcome {
    let n = prob.n_cities;
    if prob.m == 0 || prob.routes.len() < prob.m {
        return SolveOutcome::Infeasible;
    }
    let prepared = Prepared::new(prob);

    let mut by_length: Vec<usize> = (0..prob.routes.len())
        .filter(|&r| prob.routes[r].length < prob.upper_bound)
        .collect();
    by_length.sort_by(|&a, &b| {
        prob.routes[a]
            .length
            .total_cmp(&prob.routes[b].length)
            .then(a.cmp(&b))
    });
    if by_length.len() < prob.m {
        return SolveOutcome::Infeasible;
    }

    // every city needs some route no longer than the threshold, and m routes
    // must fit under it
    let mut cheapest = vec![f64::INFINITY; n];
    for &r in &by_length {
        for c in prepared.sets[r].ones() {
            cheapest[c] = cheapest[c].min(prob.routes[r].length);
        }
    }
    let mut lower = prob.routes[by_length[prob.m - 1]].length;
    for &c in &cheapest {
        if c == f64::INFINITY {
            return SolveOutcome::Infeasible;
        }
        lower = lower.max(c);
    }

    let mut budget = Budget {
        start: Instant::now(),
        time_cap: limits.time_cap,
        node_limit: limits.node_limit,
        nodes: 0,
    };

    // prefix end (exclusive) of by_length for a threshold position
    let prefix_end = |pos: usize| {
        let len = prob.routes[by_length[pos]].length;
        pos + by_length[pos..]
            .iter()
            .take_while(|&&r| prob.routes[r].length == len)
            .count()
    };
    let feasible_at = |pos: usize,
                           budget: &mut Budget|
     -> std::result::Result<Option<Vec<usize>>, OutOfBudget> {
        let end = prefix_end(pos);
        let allowed = &by_length[..end];
        let mut search = CoverSearch::new(&prepared.sets, allowed, n);
        Ok(search
            .search(&prepared.universe, prob.m, budget)?
            .and_then(|cover| complete(&cover, allowed, prob.m)))
    };

    let mut lo = by_length
        .iter()
        .position(|&r| prob.routes[r].length >= lower)
        .expect("lower bound is attained by some route");
    let mut hi = by_length.len() - 1;
    let mut best: Option<Selection> = match feasible_at(hi, &mut budget) {
        Ok(Some(sel)) => Some(make_selection(&prob.routes, sel)),
        Ok(None) => return SolveOutcome::Infeasible,
        Err(OutOfBudget) => return SolveOutcome::TimedOut(None),
    };
    if let Some(sel) = &best {
        hi = by_length
            .iter()
            .position(|&r| prob.routes[r].length == sel.objective)
            .expect("objective is a route length");
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match feasible_at(mid, &mut budget) {
            Ok(Some(sel)) => {
                let sel = make_selection(&prob.routes, sel);
                hi = by_length
                    .iter()
                    .position(|&r| prob.routes[r].length == sel.objective)
                    .expect("objective is a route length");
                best = Some(sel);
            }
            Ok(None) => lo = prefix_end(mid),
            Err(OutOfBudget) => return SolveOutcome::TimedOut(best),
        }
    }
    let best = best.expect("feasible selection recorded");

    // tie-break on total length among selections with the optimal max
    let end = prefix_end(hi);
    let allowed: Vec<usize> = by_length[..end].to_vec();
    let mut by_city = vec![Vec::new(); n];
    for &r in &allowed {
        for c in prepared.sets[r].ones() {
            by_city[c].push(r);
        }
    }
    let scale = best.total.abs().max(1.0);
    let mut total_search = TotalSearch {
        prob,
        sets: &prepared.sets,
        by_length: allowed,
        by_city,
        best,
        slack: 1e-12 * scale,
    };
    let mut tie_budget = Budget {
        start: budget.start,
        time_cap: limits.time_cap,
        node_limit: match (limits.node_limit, limits.tiebreak_node_limit) {
            (Some(total), Some(tie)) => Some(total.saturating_sub(budget.nodes).min(tie)),
            (Some(total), None) => Some(total.saturating_sub(budget.nodes)),
            (None, tie) => tie,
        },
        nodes: 0,
    };
    let _ = total_search.search(&prepared.universe, &mut Vec::new(), 0.0, &mut tie_budget);
    SolveOutcome::Optimal(total_search.best)
}

/// Exhaustive enumeration of all `m`-subsets; testing oracle for
/// [`solve_restricted`].
pub fn brute_force_reference(prob: &RestrictedProblem) -> Result<Option<Selection>> {
    let k = prob.routes.len();
    if k > BRUTE_FORCE_MAX_ROUTES {
        return Err(Error::TooLarge {
            routes: k,
            max: BRUTE_FORCE_MAX_ROUTES,
        });
    }
    if prob.m == 0 || prob.m > k {
        return Ok(None);
    }
    let prepared = Prepared::new(prob);
    let mut best: Option<Selection> = None;
    let mut idx: Vec<usize> = (0..prob.m).collect();
    loop {
        let mut covered = Bits::zeros(prob.n_cities);
        for &i in &idx {
            for (w, word) in covered.0.iter_mut().enumerate() {
                *word |= prepared.sets[i].0[w];
            }
        }
        if covered == prepared.universe
            && idx.iter().all(|&i| prob.routes[i].length < prob.upper_bound)
        {
            let cand = make_selection(&prob.routes, idx.clone());
            if best.as_ref().is_none_or(|b| better(&cand, b)) {
                best = Some(cand);
            }
        }
        // next combination in lexicographic order
        let mut pos = prob.m;
        while pos > 0 && idx[pos - 1] == k - prob.m + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        idx[pos - 1] += 1;
        for j in pos..prob.m {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(best)
}

impl RestrictedProblem {
    /// The selection model in CPLEX LP format, one constraint per line.
    pub fn to_lp(&self) -> String {
        let big_m = self
            .routes
            .iter()
            .map(|c| c.length)
            .fold(0.0, f64::max);
        let mut out = String::new();
        let _ = writeln!(out, "\\ min-max route selection: {} routes, m = {}", self.routes.len(), self.m);
        let _ = writeln!(out, "Minimize");
        let _ = writeln!(out, " obj: z");
        let _ = writeln!(out, "Subject To");
        for (r, col) in self.routes.iter().enumerate() {
            // z >= l_r - M (1 - x_r)
            let _ = writeln!(out, " len_{r}: z - {big_m:?} x{r} >= {:?}", col.length - big_m);
        }
        let vars: Vec<String> = (0..self.routes.len()).map(|r| format!("x{r}")).collect();
        let _ = writeln!(out, " card: {} = {}", vars.join(" + "), self.m);
        let prepared = Prepared::new(self);
        for city in 0..self.n_cities {
            let covering: Vec<String> = (0..self.routes.len())
                .filter(|&r| prepared.sets[r].contains(city))
                .map(|r| format!("x{r}"))
                .collect();
            let lhs = if covering.is_empty() {
                "0 x0".to_string()
            } else {
                covering.join(" + ")
            };
            let _ = writeln!(out, " cover_{}: {lhs} >= 1", city + 1);
        }
        let _ = writeln!(out, "Bounds");
        if self.upper_bound.is_finite() {
            let _ = writeln!(out, " z <= {:?}", self.upper_bound);
        } else {
            let _ = writeln!(out, " z >= 0");
        }
        let _ = writeln!(out, "Binary");
        for v in &vars {
            let _ = writeln!(out, " {v}");
        }
        let _ = writeln!(out, "End");
        out
    }
}
