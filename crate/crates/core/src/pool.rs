//! The candidate route pool: one representative per visited-city set, with
//! ages driving eviction.

use std::collections::{BTreeMap, BTreeSet};

use crate::route::Route;

/// Ascending, deduplicated city set of a route.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature(Vec<usize>);

impl Signature {
    pub fn cities(&self) -> &[usize] {
        &self.0
    }
}

pub fn signature(seq: &[usize]) -> Signature {
    let mut cities = seq.to_vec();
    cities.sort_unstable();
    cities.dedup();
    Signature(cities)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub route: Route,
    pub age: u32,
}

/// Signature-keyed route pool. Iteration follows signature order, which keeps
/// everything derived from it deterministic.
#[derive(Debug, Clone, Default)]
pub struct Pool {
    entries: BTreeMap<Signature, PoolEntry>,
}

impl Pool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Signature, &PoolEntry)> {
        self.entries.iter()
    }

    pub fn routes(&self) -> impl Iterator<Item = &Route> {
        self.entries.values().map(|e| &e.route)
    }

    pub fn get(&self, sig: &Signature) -> Option<&PoolEntry> {
        self.entries.get(sig)
    }

    /// Inserts `route` with age 0 unless an entry with the same city set is
    /// at most as long. Empty routes are ignored.
    fn insert(&mut self, route: Route) -> bool {
        if route.is_empty() {
            return false;
        }
        let sig = signature(&route.seq);
        match self.entries.get_mut(&sig) {
            Some(entry) if entry.route.length <= route.length => false,
            Some(entry) => {
                *entry = PoolEntry { route, age: 0 };
                true
            }
            None => {
                self.entries.insert(sig, PoolEntry { route, age: 0 });
                true
            }
        }
    }

    /// Adds constructed routes and drops every route that cannot be part of a
    /// selection strictly better than `incumbent_z`.
    pub fn merge<I: IntoIterator<Item = Route>>(&mut self, routes: I, incumbent_z: f64) {
        for r in routes {
            self.insert(r);
        }
        self.prune(incumbent_z);
    }

    pub fn prune(&mut self, incumbent_z: f64) {
        self.entries.retain(|_, e| e.route.length < incumbent_z);
    }

    /// Ages every route not in `best_routes`, (re)inserts the routes of
    /// `best_routes` with age 0, evicts routes whose age reached `age_max`,
    /// and prunes against `incumbent_z`.
    pub fn adapt(&mut self, best_routes: &[Route], age_max: u32, incumbent_z: f64) {
        let selected: BTreeSet<Signature> = best_routes
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| signature(&r.seq))
            .collect();
        for (sig, entry) in self.entries.iter_mut() {
            if selected.contains(sig) {
                entry.age = 0;
            } else {
                entry.age += 1;
            }
        }
        for r in best_routes {
            self.insert(r.clone());
        }
        self.entries.retain(|_, e| e.age < age_max);
        self.prune(incumbent_z);
    }
}
