//! Projected-relevance matrix and the (activity, term) inverted index.

use std::collections::HashMap;

use crate::grid::CellId;
use crate::model::WlasDatabase;
use crate::scalar::{is_positive, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct PrmEntry<S> {
    /// Weight of the cell in the term, zero when absent.
    pub match_relevance: S,
    /// Total weight strictly after this cell in the term, plus every later
    /// term.
    pub remaining_relevance: S,
}

/// One sequence's slice of the matrix: rows are the cells present anywhere
/// in the sequence, columns are term indices.
#[derive(Clone, Debug)]
pub struct SequenceMatrix<S> {
    cells: Vec<CellId>,
    n_terms: usize,
    entries: Vec<PrmEntry<S>>,
    term_cells: Vec<Vec<CellId>>,
    sequence_relevance: S,
}

impl<S: Scalar> SequenceMatrix<S> {
    pub fn cells(&self) -> &[CellId] {
        &self.cells
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn entry(&self, cell: CellId, term: usize) -> Option<&PrmEntry<S>> {
        let row = self.cells.binary_search(&cell).ok()?;
        (term < self.n_terms).then(|| &self.entries[row * self.n_terms + term])
    }

    /// Weight of `cell` in `term` when present.
    pub(crate) fn weight(&self, cell: CellId, term: usize) -> Option<&S> {
        self.entry(cell, term)
            .map(|e| &e.match_relevance)
            .filter(|w| is_positive(*w))
    }

    pub(crate) fn remaining(&self, cell: CellId, term: usize) -> S {
        self.entry(cell, term)
            .map(|e| e.remaining_relevance.clone())
            .unwrap_or_else(S::zero)
    }

    /// Cells of one term, ascending.
    pub fn term_cells(&self, term: usize) -> &[CellId] {
        &self.term_cells[term]
    }

    pub fn sequence_relevance(&self) -> &S {
        &self.sequence_relevance
    }
}

/// Per-sequence `(cell, term) -> (match relevance, remaining relevance)`
/// table, built in one pass over the database.
#[derive(Clone, Debug)]
pub struct ProjectedRelevanceMatrix<S> {
    sequences: Vec<SequenceMatrix<S>>,
}

impl<S: Scalar> ProjectedRelevanceMatrix<S> {
    pub fn build(db: &WlasDatabase<S>) -> Self {
        let sequences = db
            .sequences()
            .iter()
            .map(|seq| {
                let n_terms = seq.terms.len();
                let mut cells: Vec<CellId> = seq.terms.iter().flat_map(|t| t.locations().cells()).collect();
                cells.sort_unstable();
                cells.dedup();

                let term_totals: Vec<S> = seq.terms.iter().map(|t| t.locations().total()).collect();
                let mut after = vec![S::zero(); n_terms];
                for t in (0..n_terms.saturating_sub(1)).rev() {
                    after[t] = after[t + 1].clone() + term_totals[t + 1].clone();
                }

                let mut entries = vec![
                    PrmEntry {
                        match_relevance: S::zero(),
                        remaining_relevance: S::zero(),
                    };
                    cells.len() * n_terms
                ];
                for (t, term) in seq.terms.iter().enumerate() {
                    let wls = term.locations().entries();
                    // walk cells descending, accumulating the in-term suffix
                    let mut suffix = S::zero();
                    let mut k = wls.len();
                    for (row, cell) in cells.iter().enumerate().rev() {
                        while k > 0 && wls[k - 1].0 > *cell {
                            suffix = suffix + wls[k - 1].1.clone();
                            k -= 1;
                        }
                        let e = &mut entries[row * n_terms + t];
                        if k > 0 && wls[k - 1].0 == *cell {
                            e.match_relevance = wls[k - 1].1.clone();
                        }
                        e.remaining_relevance = suffix.clone() + after[t].clone();
                    }
                }
                SequenceMatrix {
                    cells,
                    n_terms,
                    entries,
                    term_cells: seq.terms.iter().map(|t| t.locations().cells().collect()).collect(),
                    sequence_relevance: term_totals.into_iter().sum(),
                }
            })
            .collect();
        Self { sequences }
    }

    pub fn sequence(&self, index: usize) -> &SequenceMatrix<S> {
        &self.sequences[index]
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }
}

/// Inverted list `(activity, term index) -> sequence indices` (ascending).
/// Activities are interned to their rank in the sorted alphabet.
#[derive(Clone, Debug)]
pub struct ActivityIndex {
    alphabet: Vec<String>,
    postings: HashMap<(u32, usize), Vec<usize>>,
    term_acts: Vec<Vec<Vec<u32>>>,
}

impl ActivityIndex {
    pub fn build<S: Scalar>(db: &WlasDatabase<S>) -> Self {
        let alphabet: Vec<String> = db.activity_alphabet().into_iter().collect();
        let mut postings: HashMap<(u32, usize), Vec<usize>> = HashMap::new();
        let mut term_acts = Vec::with_capacity(db.len());
        for (s, seq) in db.sequences().iter().enumerate() {
            let mut per_term = Vec::with_capacity(seq.terms.len());
            for (t, term) in seq.terms.iter().enumerate() {
                let ids: Vec<u32> = term
                    .activities()
                    .iter()
                    .map(|a| alphabet.binary_search(a).expect("alphabet covers db") as u32)
                    .collect();
                for &id in &ids {
                    postings.entry((id, t)).or_default().push(s);
                }
                per_term.push(ids);
            }
            term_acts.push(per_term);
        }
        Self {
            alphabet,
            postings,
            term_acts,
        }
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn id_of(&self, activity: &str) -> Option<u32> {
        self.alphabet
            .binary_search_by(|a| a.as_str().cmp(activity))
            .ok()
            .map(|i| i as u32)
    }

    pub fn name(&self, id: u32) -> &str {
        &self.alphabet[id as usize]
    }

    /// Sequences holding `activity` at `term`.
    pub fn sequences_with(&self, activity: &str, term: usize) -> &[usize] {
        self.id_of(activity)
            .and_then(|id| self.postings.get(&(id, term)))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub(crate) fn contains(&self, activity: u32, term: usize, seq: usize) -> bool {
        self.postings
            .get(&(activity, term))
            .is_some_and(|ids| ids.binary_search(&seq).is_ok())
    }

    /// Interned activities of one term, ascending.
    pub(crate) fn term_activities(&self, seq: usize, term: usize) -> &[u32] {
        &self.term_acts[seq][term]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::relevance::sequence_relevance;

    #[test]
    fn entry_for_present_cell() {
        let db = sample_db();
        let prm = ProjectedRelevanceMatrix::build(&db);
        let e = prm.sequence(2).entry(CellId(6), 1).unwrap();
        assert_eq!(e.match_relevance, q(3, 10));
        assert_eq!(e.remaining_relevance, q(5, 10));
    }

    #[test]
    fn entry_for_absent_cell_is_zero_match() {
        let db = sample_db();
        let prm = ProjectedRelevanceMatrix::build(&db);
        // p1 is absent from the second term of a3; p5, p6, p10, p11 remain
        let e = prm.sequence(2).entry(CellId(1), 1).unwrap();
        assert_eq!(e.match_relevance, q(0, 1));
        assert_eq!(e.remaining_relevance, q(1, 1));
        assert!(prm.sequence(2).entry(CellId(99), 0).is_none());
    }

    #[test]
    fn last_cell_of_last_term_has_nothing_remaining() {
        let db = sample_db();
        let prm = ProjectedRelevanceMatrix::build(&db);
        let e = prm.sequence(0).entry(CellId(11), 2).unwrap();
        assert_eq!(e.match_relevance, q(45, 100));
        assert_eq!(e.remaining_relevance, q(0, 1));
    }

    #[test]
    fn remaining_is_non_increasing_in_item_order() {
        let db = sample_db();
        let prm = ProjectedRelevanceMatrix::build(&db);
        for s in 0..prm.len() {
            let m = prm.sequence(s);
            let mut prev: Option<Q> = None;
            for t in 0..m.n_terms() {
                for &c in m.cells() {
                    let r = m.entry(c, t).unwrap().remaining_relevance.clone();
                    if let Some(p) = &prev {
                        assert!(r <= *p);
                    }
                    prev = Some(r);
                }
            }
        }
    }

    #[test]
    fn sequence_relevance_matches_reference() {
        let db = sample_db();
        let prm = ProjectedRelevanceMatrix::build(&db);
        for (i, seq) in db.sequences().iter().enumerate() {
            assert_eq!(prm.sequence(i).sequence_relevance(), &sequence_relevance(seq));
        }
    }

    #[test]
    fn activity_index_postings() {
        let db = sample_db();
        let act = ActivityIndex::build(&db);
        assert_eq!(act.sequences_with("h", 0), &[0, 1, 2]);
        assert_eq!(act.sequences_with("g", 1), &[0, 1, 2]);
        assert_eq!(act.sequences_with("j", 1), &[0]);
        assert!(act.sequences_with("j", 0).is_empty());
        assert!(act.sequences_with("zz", 0).is_empty());
        for (s, seq) in db.sequences().iter().enumerate() {
            for (t, term) in seq.terms.iter().enumerate() {
                for a in act.alphabet() {
                    assert_eq!(act.sequences_with(a, t).contains(&s), term.has_activity(a));
                }
            }
        }
    }
}
