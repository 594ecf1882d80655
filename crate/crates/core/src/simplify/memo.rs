use std::collections::{BTreeMap, HashMap};

use super::normalize::DEFAULT_BUDGET;
use super::Literal;

#[derive(Debug, Clone)]
struct Entry {
    value: Vec<Vec<Literal>>,
    hits: u64,
}

/// Memoization table keyed by target, oracle fingerprint and the canonical
/// sorted form of a compound subexpression.
#[derive(Debug, Clone)]
pub struct MemoTable {
    entries: HashMap<String, Entry>,
    hits: u64,
    misses: u64,
    proper: u64,
    budget: usize,
    enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MemoStats {
    pub entries: usize,
    pub hits: u64,
    pub misses: u64,
    /// Entries whose result has fewer literals than their input.
    pub proper_simplifications: u64,
    /// hit count -> number of entries with that many hits
    pub hit_histogram: BTreeMap<u64, usize>,
}

impl Default for MemoTable {
    fn default() -> Self {
        MemoTable::new(DEFAULT_BUDGET)
    }
}

impl MemoTable {
    pub fn new(budget: usize) -> Self {
        MemoTable { entries: HashMap::new(), hits: 0, misses: 0, proper: 0, budget, enabled: true }
    }

    /// A table that never stores anything; lookups always miss.
    pub fn disabled(budget: usize) -> Self {
        MemoTable { enabled: false, ..MemoTable::new(budget) }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn clear(&mut self) {
        let (budget, enabled) = (self.budget, self.enabled);
        *self = MemoTable::new(budget);
        self.enabled = enabled;
    }

    pub(super) fn lookup(&mut self, key: &str) -> Option<Vec<Vec<Literal>>> {
        if !self.enabled {
            return None;
        }
        match self.entries.get_mut(key) {
            Some(e) => {
                e.hits += 1;
                self.hits += 1;
                Some(e.value.clone())
            }
            None => {
                self.misses += 1;
                None
            }
        }
    }

    pub(super) fn insert(&mut self, key: String, value: Vec<Vec<Literal>>, input_literals: usize, output_literals: usize) {
        if !self.enabled {
            return;
        }
        if output_literals < input_literals {
            self.proper += 1;
        }
        self.entries.insert(key, Entry { value, hits: 0 });
    }

    pub fn stats(&self) -> MemoStats {
        let mut hit_histogram = BTreeMap::new();
        for e in self.entries.values() {
            *hit_histogram.entry(e.hits).or_insert(0) += 1;
        }
        MemoStats {
            entries: self.entries.len(),
            hits: self.hits,
            misses: self.misses,
            proper_simplifications: self.proper,
            hit_histogram,
        }
    }
}
