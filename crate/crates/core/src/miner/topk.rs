//! Bounded result list ordered by score, then canonical pattern order.

use std::cmp::Ordering;
use std::collections::HashSet;

use crate::model::TrajectoryPattern;
use crate::scalar::{cmp_scores, is_positive, Scalar};

/// Total result order: higher score first, ties broken by the canonical
/// pattern order.
pub fn result_order<S: Scalar>(a: &(TrajectoryPattern, S), b: &(TrajectoryPattern, S)) -> Ordering {
    cmp_scores(&b.1, &a.1).then_with(|| a.0.cmp(&b.0))
}

#[derive(Clone, Debug)]
pub struct TopKList<S> {
    k: usize,
    entries: Vec<(TrajectoryPattern, S)>,
    members: HashSet<TrajectoryPattern>,
}

impl<S: Scalar> TopKList<S> {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            entries: Vec::with_capacity(k.saturating_add(1).min(1 << 16)),
            members: HashSet::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.k
    }

    /// Score of the worst entry once full, zero before.
    pub fn threshold(&self) -> S {
        match self.entries.last() {
            Some((_, s)) if self.is_full() => s.clone(),
            _ => S::zero(),
        }
    }

    pub fn contains(&self, pattern: &TrajectoryPattern) -> bool {
        self.members.contains(pattern)
    }

    /// Inserts the pattern when it beats the current worst entry in the
    /// result order. Duplicates and non-positive scores are ignored.
    pub fn offer(&mut self, pattern: TrajectoryPattern, score: S) -> bool {
        if self.k == 0 || !is_positive(&score) || self.members.contains(&pattern) {
            return false;
        }
        let candidate = (pattern, score);
        if self.is_full() {
            let worst = self.entries.last().expect("full list is non-empty");
            if result_order(&candidate, worst) != Ordering::Less {
                return false;
            }
            let (evicted, _) = self.entries.pop().expect("full list is non-empty");
            self.members.remove(&evicted);
        }
        let at = self
            .entries
            .partition_point(|e| result_order(e, &candidate) == Ordering::Less);
        self.members.insert(candidate.0.clone());
        self.entries.insert(at, candidate);
        true
    }

    /// Entries best first.
    pub fn entries(&self) -> &[(TrajectoryPattern, S)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(TrajectoryPattern, S)> {
        self.entries
    }
}
