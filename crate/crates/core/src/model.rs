//! wLAS sequences, trajectory patterns and the matching relations between
//! them (containment, exact matches, pivot match, projected subsequence).

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{CellId, WeightedLocationSet};
use crate::scalar::Scalar;

fn normalize_activities<I: IntoIterator<Item = String>>(activities: I) -> Vec<String> {
    let mut acts: Vec<String> = activities.into_iter().collect();
    acts.sort_unstable();
    acts.dedup();
    acts
}

/// `small ⊆ large` for sorted, deduplicated slices.
pub(crate) fn is_sorted_subset<T: Ord>(small: &[T], large: &[T]) -> bool {
    let mut it = large.iter();
    'outer: for x in small {
        for y in it.by_ref() {
            match y.cmp(x) {
                Ordering::Less => continue,
                Ordering::Equal => continue 'outer,
                Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

/// One term of a wLAS-sequence: a weighted location set and a
/// lexicographically ordered activity set.
#[derive(Clone, Debug, PartialEq)]
pub struct WlasTerm<S> {
    locations: WeightedLocationSet<S>,
    activities: Vec<String>,
}

impl<S: Scalar> WlasTerm<S> {
    pub fn new<I: IntoIterator<Item = String>>(locations: WeightedLocationSet<S>, activities: I) -> Self {
        Self {
            locations,
            activities: normalize_activities(activities),
        }
    }

    pub fn locations(&self) -> &WeightedLocationSet<S> {
        &self.locations
    }

    pub fn activities(&self) -> &[String] {
        &self.activities
    }

    pub fn has_activity(&self, act: &str) -> bool {
        self.activities.binary_search_by(|a| a.as_str().cmp(act)).is_ok()
    }

    /// A term with no locations or no activities is "null" and never
    /// appears in a projected subsequence.
    pub fn is_null(&self) -> bool {
        self.locations.is_empty() || self.activities.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WlasSequence<S> {
    pub id: String,
    pub terms: Vec<WlasTerm<S>>,
}

impl<S: Scalar> WlasSequence<S> {
    pub fn new(id: impl Into<String>, terms: Vec<WlasTerm<S>>) -> Self {
        Self { id: id.into(), terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Ordered collection of wLAS-sequences with unique ids.
#[derive(Clone, Debug, PartialEq)]
pub struct WlasDatabase<S> {
    sequences: Vec<WlasSequence<S>>,
}

impl<S: Scalar> WlasDatabase<S> {
    pub fn new(sequences: Vec<WlasSequence<S>>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(sequences.len());
        for seq in &sequences {
            if !seen.insert(seq.id.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate sequence id `{}`", seq.id)));
            }
        }
        Ok(Self { sequences })
    }

    pub fn empty() -> Self {
        Self { sequences: Vec::new() }
    }

    pub fn sequences(&self) -> &[WlasSequence<S>] {
        &self.sequences
    }

    pub fn into_sequences(self) -> Vec<WlasSequence<S>> {
        self.sequences
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn activity_alphabet(&self) -> BTreeSet<String> {
        self.sequences
            .iter()
            .flat_map(|s| &s.terms)
            .flat_map(|t| t.activities.iter().cloned())
            .collect()
    }

    pub fn cell_universe(&self) -> BTreeSet<CellId> {
        self.sequences
            .iter()
            .flat_map(|s| &s.terms)
            .flat_map(|t| t.locations.cells())
            .collect()
    }

    /// Concatenation of two databases; fails on shared ids.
    pub fn union(&self, other: &WlasDatabase<S>) -> Result<WlasDatabase<S>> {
        let mut all = self.sequences.clone();
        all.extend(other.sequences.iter().cloned());
        WlasDatabase::new(all)
    }
}

/// A `(cell set, activity set)` pattern term. Complete once it carries at
/// least one activity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternTerm {
    cells: Vec<CellId>,
    activities: Vec<String>,
}

impl PatternTerm {
    pub fn new<C, A, T>(cells: C, activities: A) -> Self
    where
        C: IntoIterator<Item = CellId>,
        A: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let mut cells: Vec<CellId> = cells.into_iter().collect();
        cells.sort_unstable();
        cells.dedup();
        Self {
            cells,
            activities: normalize_activities(activities.into_iter().map(Into::into)),
        }
    }

    pub fn cells(&self) -> &[CellId] {
        &self.cells
    }

    pub fn activities(&self) -> &[String] {
        &self.activities
    }

    pub fn is_complete(&self) -> bool {
        !self.activities.is_empty()
    }

    pub fn max_cell(&self) -> Option<CellId> {
        self.cells.last().copied()
    }

    pub fn max_activity(&self) -> Option<&str> {
        self.activities.last().map(String::as_str)
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.cells.iter().map(|c| c.to_string()).collect();
        write!(f, "({{{}}},{{{}}})", cells.join(","), self.activities.join(","))
    }
}

/// A sequence of pattern terms. Ordered canonically by term count, then
/// term-wise by cell ids and then activities.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TrajectoryPattern {
    terms: Vec<PatternTerm>,
}

impl TrajectoryPattern {
    pub fn new(terms: Vec<PatternTerm>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[PatternTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn last_term(&self) -> Option<&PatternTerm> {
        self.terms.last()
    }

    /// Every term, including the last, carries cells and activities.
    pub fn is_emittable(&self) -> bool {
        !self.terms.is_empty() && self.terms.iter().all(|t| t.is_complete() && !t.cells.is_empty())
    }

    /// `self ⊆ other`: an order-preserving injection of terms where each
    /// term of `self` is item-wise contained in its image.
    pub fn is_subpattern_of(&self, other: &TrajectoryPattern) -> bool {
        let mut j = 0;
        for t in &self.terms {
            loop {
                let Some(o) = other.terms.get(j) else {
                    return false;
                };
                j += 1;
                if is_sorted_subset(&t.cells, &o.cells) && is_sorted_subset(&t.activities, &o.activities) {
                    break;
                }
            }
        }
        true
    }
}

impl Ord for TrajectoryPattern {
    fn cmp(&self, other: &Self) -> Ordering {
        self.terms
            .len()
            .cmp(&other.terms.len())
            .then_with(|| self.terms.cmp(&other.terms))
    }
}

impl PartialOrd for TrajectoryPattern {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TrajectoryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for t in &self.terms {
            write!(f, "{t}")?;
        }
        f.write_str(">")
    }
}

/// Strictly increasing 0-based term indices of a sequence, one per pattern
/// term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MatchEmbedding(pub Vec<usize>);

impl MatchEmbedding {
    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }
}

/// Read access to the items of a term, shared by pattern and wLAS terms.
pub trait TermItems {
    fn cell_ids(&self) -> Vec<CellId>;
    fn activity_set(&self) -> &[String];
}

impl TermItems for PatternTerm {
    fn cell_ids(&self) -> Vec<CellId> {
        self.cells.clone()
    }

    fn activity_set(&self) -> &[String] {
        &self.activities
    }
}

impl<S: Scalar> TermItems for WlasTerm<S> {
    fn cell_ids(&self) -> Vec<CellId> {
        self.locations.cells().collect()
    }

    fn activity_set(&self) -> &[String] {
        &self.activities
    }
}

/// Cell ids and activities of `inner` are subsets of those of `outer`;
/// weights are ignored.
pub fn contains_term<T: TermItems + ?Sized, S: Scalar>(inner: &T, outer: &WlasTerm<S>) -> bool {
    is_sorted_subset(inner.activity_set(), &outer.activities)
        && inner.cell_ids().iter().all(|c| outer.locations.contains(*c))
}

fn pattern_term_in<S: Scalar>(term: &PatternTerm, outer: &WlasTerm<S>) -> bool {
    is_sorted_subset(&term.activities, &outer.activities) && term.cells.iter().all(|c| outer.locations.contains(*c))
}

/// All embeddings of `pattern` in `seq`, in lexicographic order of index
/// tuples. Empty when the pattern does not match (or is empty).
pub fn find_exact_matches<S: Scalar>(pattern: &TrajectoryPattern, seq: &WlasSequence<S>) -> Vec<MatchEmbedding> {
    fn walk<S: Scalar>(
        terms: &[PatternTerm],
        seq: &WlasSequence<S>,
        start: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<MatchEmbedding>,
    ) {
        let Some((head, rest)) = terms.split_first() else {
            out.push(MatchEmbedding(stack.clone()));
            return;
        };
        // leave room for the remaining terms
        let end = seq.terms.len().saturating_sub(rest.len());
        for j in start..end {
            if pattern_term_in(head, &seq.terms[j]) {
                stack.push(j);
                walk(rest, seq, j + 1, stack, out);
                stack.pop();
            }
        }
    }

    let mut out = Vec::new();
    if !pattern.is_empty() {
        walk(&pattern.terms, seq, 0, &mut Vec::new(), &mut out);
    }
    out
}

/// The earliest-ending exact matches of a pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotMatch {
    /// 0-based index of the pivot term in the sequence.
    pub pivot_term: usize,
    /// Every embedding whose last index is `pivot_term`.
    pub embeddings: Vec<MatchEmbedding>,
}

pub fn pivot_match<S: Scalar>(pattern: &TrajectoryPattern, seq: &WlasSequence<S>) -> Option<PivotMatch> {
    let (last, prefix) = pattern.terms.split_last()?;
    // earliest position each prefix term can occupy
    let mut earliest_end = 0usize;
    for t in prefix {
        let j = (earliest_end..seq.terms.len()).find(|&j| pattern_term_in(t, &seq.terms[j]))?;
        earliest_end = j + 1;
    }
    let pivot_term = (earliest_end..seq.terms.len()).find(|&j| pattern_term_in(last, &seq.terms[j]))?;
    let prefix_pattern = TrajectoryPattern::new(prefix.to_vec());
    let head = WlasSequence::new(seq.id.clone(), seq.terms[..pivot_term].to_vec());
    let embeddings = if prefix.is_empty() {
        vec![MatchEmbedding(vec![pivot_term])]
    } else {
        find_exact_matches(&prefix_pattern, &head)
            .into_iter()
            .map(|mut e| {
                e.0.push(pivot_term);
                e
            })
            .collect()
    };
    Some(PivotMatch { pivot_term, embeddings })
}

/// Suffix of `seq` after the pivot match: the pivot term keeps only cells
/// and activities strictly greater than the largest ones of the pattern's
/// last term (dropped entirely when either set empties), followed by all
/// later terms unchanged.
pub fn projected_subsequence<S: Scalar>(pattern: &TrajectoryPattern, seq: &WlasSequence<S>) -> Option<WlasSequence<S>> {
    let pivot = pivot_match(pattern, seq)?;
    let last = pattern.last_term()?;
    let pivot_term = &seq.terms[pivot.pivot_term];

    let cells: Vec<(CellId, S)> = pivot_term
        .locations
        .entries()
        .iter()
        .filter(|(c, _)| last.max_cell().is_none_or(|m| *c > m))
        .cloned()
        .collect();
    let activities: Vec<String> = pivot_term
        .activities
        .iter()
        .filter(|a| last.max_activity().is_none_or(|m| a.as_str() > m))
        .cloned()
        .collect();

    let mut terms = Vec::with_capacity(seq.terms.len() - pivot.pivot_term);
    let head = WlasTerm {
        locations: WeightedLocationSet::new(cells).expect("subset of a valid set"),
        activities,
    };
    if !head.is_null() {
        terms.push(head);
    }
    terms.extend(seq.terms[pivot.pivot_term + 1..].iter().cloned());
    Some(WlasSequence::new(seq.id.clone(), terms))
}

/// The raw pattern: one term per sequence term with all its items.
pub fn r_pattern<S: Scalar>(seq: &WlasSequence<S>) -> TrajectoryPattern {
    TrajectoryPattern::new(
        seq.terms
            .iter()
            .map(|t| PatternTerm {
                cells: t.locations.cells().collect(),
                activities: t.activities.clone(),
            })
            .collect(),
    )
}

#[cfg(test)]
pub(crate) mod fixtures {
    //! Worked examples used across unit tests.
    use super::*;
    use num_rational::BigRational;

    pub type Q = BigRational;

    pub fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    pub fn term(cells: &[(u32, Q)], acts: &[&str]) -> WlasTerm<Q> {
        WlasTerm::new(
            WeightedLocationSet::new(cells.iter().map(|(c, w)| (CellId(*c), w.clone())).collect()).unwrap(),
            acts.iter().map(|s| s.to_string()),
        )
    }

    pub fn pt(cells: &[u32], acts: &[&str]) -> PatternTerm {
        PatternTerm::new(cells.iter().map(|c| CellId(*c)), acts.iter().copied())
    }

    pub fn pattern(terms: &[(&[u32], &[&str])]) -> TrajectoryPattern {
        TrajectoryPattern::new(terms.iter().map(|(c, a)| pt(c, a)).collect())
    }

    /// gamma: three terms over cells p2,p3,p4,p6.
    pub fn gamma() -> WlasSequence<Q> {
        WlasSequence::new(
            "gamma",
            vec![
                term(&[(2, q(6, 10)), (3, q(4, 10))], &["b", "e", "h"]),
                term(&[(3, q(2, 10)), (4, q(8, 10))], &["a", "b", "f", "g"]),
                term(&[(4, q(3, 10)), (6, q(7, 10))], &["c", "f", "h"]),
            ],
        )
    }

    /// Three-sequence sample database.
    pub fn sample_db() -> WlasDatabase<Q> {
        let a1 = WlasSequence::new(
            "a1",
            vec![
                term(
                    &[(1, q(25, 100)), (2, q(25, 100)), (5, q(25, 100)), (6, q(25, 100))],
                    &["a", "b", "h"],
                ),
                term(
                    &[(1, q(2, 10)), (2, q(2, 10)), (5, q(4, 10)), (7, q(2, 10))],
                    &["a", "b", "g", "j"],
                ),
                term(
                    &[(3, q(2, 10)), (5, q(1, 10)), (7, q(25, 100)), (11, q(45, 100))],
                    &["a", "c", "d", "g"],
                ),
            ],
        );
        let a2 = WlasSequence::new(
            "a2",
            vec![
                term(
                    &[(3, q(26, 100)), (4, q(22, 100)), (7, q(3, 10)), (8, q(22, 100))],
                    &["d", "e", "h"],
                ),
                term(
                    &[(6, q(13, 100)), (7, q(2, 10)), (10, q(2, 10)), (11, q(47, 100))],
                    &["e", "f", "g"],
                ),
                term(
                    &[(9, q(24, 100)), (10, q(34, 100)), (13, q(22, 100)), (14, q(2, 10))],
                    &["d", "f"],
                ),
            ],
        );
        let a3 = WlasSequence::new(
            "a3",
            vec![
                term(
                    &[(1, q(2, 10)), (2, q(4, 10)), (6, q(1, 10)), (7, q(3, 10))],
                    &["a", "b", "h"],
                ),
                term(
                    &[(5, q(2, 10)), (6, q(3, 10)), (10, q(2, 10)), (11, q(3, 10))],
                    &["a", "g", "h"],
                ),
            ],
        );
        WlasDatabase::new(vec![a1, a2, a3]).unwrap()
    }

    /// T = <({p1,p2},{a,b}) (p5,g)>.
    pub fn t_example() -> TrajectoryPattern {
        pattern(&[(&[1, 2], &["a", "b"]), (&[5], &["g"])])
    }
}
