//! Relevance calculus over wLAS data: term relevance, per-sequence maximum
//! relevance, database relevance, sequence relevance, matching
//! sequence-relevance (MSR), pivot-match relevance, projected-subsequence
//! relevance and projected trajectory-pattern relevance (PTR).
//!
//! These are direct implementations of the definitions, used as the
//! reference semantics; the miner computes the same quantities
//! incrementally from its projected-relevance matrix.

use std::collections::BTreeMap;

use crate::model::{
    find_exact_matches, is_sorted_subset, pivot_match, projected_subsequence, r_pattern, PatternTerm,
    TrajectoryPattern, WlasDatabase, WlasSequence, WlasTerm,
};
use crate::scalar::{max_of, Scalar};

/// Sum of the weights of the term's cells in `wlas`, or zero when any cell
/// or activity of the term is missing. Activities carry no weight, so the
/// minimum over activities collapses to this sum.
pub fn term_relevance<S: Scalar>(term: &PatternTerm, wlas: &WlasTerm<S>) -> S {
    if !is_sorted_subset(term.activities(), wlas.activities()) {
        return S::zero();
    }
    let mut total = S::zero();
    for cell in term.cells() {
        match wlas.locations().weight(*cell) {
            Some(w) => total = total + w.clone(),
            None => return S::zero(),
        }
    }
    total
}

/// Relevance of every exact match, in embedding order.
pub fn relevance_values<S: Scalar>(pattern: &TrajectoryPattern, seq: &WlasSequence<S>) -> Vec<S> {
    find_exact_matches(pattern, seq)
        .iter()
        .map(|e| {
            pattern
                .terms()
                .iter()
                .zip(&e.0)
                .map(|(t, &j)| term_relevance(t, &seq.terms[j]))
                .sum()
        })
        .collect()
}

/// Best total relevance over all exact matches; zero without a match.
///
/// Dynamic program over (pattern prefix, end position) so long sequences
/// don't enumerate embeddings.
pub fn max_relevance<S: Scalar>(pattern: &TrajectoryPattern, seq: &WlasSequence<S>) -> S {
    best_ending_at(pattern, seq)
        .into_iter()
        .flatten()
        .reduce(max_of)
        .unwrap_or_else(S::zero)
}

/// For each position `j`, the best relevance of an exact match whose last
/// term sits at `j`.
fn best_ending_at<S: Scalar>(pattern: &TrajectoryPattern, seq: &WlasSequence<S>) -> Vec<Option<S>> {
    let n = seq.terms.len();
    let Some((first, rest)) = pattern.terms().split_first() else {
        return vec![None; n];
    };
    let mut best: Vec<Option<S>> = seq
        .terms
        .iter()
        .map(|t| crate::model::contains_term(first, t).then(|| term_relevance(first, t)))
        .collect();
    for term in rest {
        let mut next = vec![None; n];
        let mut running: Option<S> = None;
        for j in 0..n {
            if let (Some(prev), true) = (&running, crate::model::contains_term(term, &seq.terms[j])) {
                next[j] = Some(prev.clone() + term_relevance(term, &seq.terms[j]));
            }
            if let Some(b) = best[j].clone() {
                running = Some(match running {
                    Some(r) => max_of(r, b),
                    None => b,
                });
            }
        }
        best = next;
    }
    best
}

pub fn db_relevance<S: Scalar>(pattern: &TrajectoryPattern, db: &WlasDatabase<S>) -> S {
    db.sequences().iter().map(|s| max_relevance(pattern, s)).sum()
}

/// Relevance of the sequence's raw pattern in the sequence itself.
pub fn sequence_relevance<S: Scalar>(seq: &WlasSequence<S>) -> S {
    if seq.is_empty() {
        return S::zero();
    }
    max_relevance(&r_pattern(seq), seq)
}

pub fn matches<S: Scalar>(pattern: &TrajectoryPattern, seq: &WlasSequence<S>) -> bool {
    pivot_match(pattern, seq).is_some()
}

/// Sum of sequence relevance over sequences the pattern matches.
pub fn msr<S: Scalar>(pattern: &TrajectoryPattern, db: &WlasDatabase<S>) -> S {
    db.sequences()
        .iter()
        .filter(|s| matches(pattern, s))
        .map(sequence_relevance)
        .sum()
}

/// Best relevance among the pivot embeddings; `None` without a match.
pub fn pivot_match_relevance<S: Scalar>(pattern: &TrajectoryPattern, seq: &WlasSequence<S>) -> Option<S> {
    let pm = pivot_match(pattern, seq)?;
    pm.embeddings
        .iter()
        .map(|e| {
            pattern
                .terms()
                .iter()
                .zip(&e.0)
                .map(|(t, &j)| term_relevance(t, &seq.terms[j]))
                .sum::<S>()
        })
        .reduce(max_of)
}

/// Sequence relevance of the projected subsequence; `None` without a match.
pub fn rest_relevance<S: Scalar>(pattern: &TrajectoryPattern, seq: &WlasSequence<S>) -> Option<S> {
    projected_subsequence(pattern, seq).map(|p| sequence_relevance(&p))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ptr<S> {
    pub total: S,
    /// Every sequence id; zero for non-matching sequences.
    pub per_sequence: BTreeMap<String, S>,
}

/// Pivot-match relevance plus projected-subsequence relevance, per sequence
/// and summed over the database.
pub fn ptr<S: Scalar>(pattern: &TrajectoryPattern, db: &WlasDatabase<S>) -> Ptr<S> {
    let mut per_sequence = BTreeMap::new();
    let mut total = S::zero();
    for seq in db.sequences() {
        let value = match (pivot_match_relevance(pattern, seq), rest_relevance(pattern, seq)) {
            (Some(pm), Some(rest)) => pm + rest,
            _ => S::zero(),
        };
        total = total + value.clone();
        per_sequence.insert(seq.id.clone(), value);
    }
    Ptr { total, per_sequence }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::{WlasDatabase, WlasSequence};

    #[test]
    fn term_relevance_of_worked_terms() {
        let db = sample_db();
        let a1 = &db.sequences()[0];
        assert_eq!(term_relevance(&pt(&[1, 2], &["a", "b"]), &a1.terms[0]), q(1, 2));
        assert_eq!(term_relevance(&pt(&[5], &["g"]), &a1.terms[2]), q(1, 10));
        assert_eq!(term_relevance(&pt(&[1], &["z"]), &a1.terms[0]), q(0, 1));
        assert_eq!(term_relevance(&pt(&[1, 3], &["a"]), &a1.terms[0]), q(0, 1));
    }

    #[test]
    fn max_relevance_of_worked_pattern() {
        let db = sample_db();
        let t = t_example();
        let s = db.sequences();
        assert_eq!(max_relevance(&t, &s[0]), q(9, 10));
        assert_eq!(max_relevance(&t, &s[1]), q(0, 1));
        assert_eq!(max_relevance(&t, &s[2]), q(8, 10));
        assert_eq!(relevance_values(&t, &s[0]), vec![q(9, 10), q(6, 10), q(5, 10)]);
    }

    #[test]
    fn db_relevance_of_worked_pattern() {
        let db = sample_db();
        assert_eq!(db_relevance(&t_example(), &db), q(17, 10));
        assert_eq!(db_relevance(&t_example(), &WlasDatabase::<Q>::empty()), q(0, 1));
        let single = WlasDatabase::new(vec![db.sequences()[0].clone()]).unwrap();
        assert_eq!(db_relevance(&t_example(), &single), q(9, 10));
    }

    #[test]
    fn sequence_relevance_counts_terms_for_normalized_data() {
        let db = sample_db();
        assert_eq!(sequence_relevance(&db.sequences()[0]), q(3, 1));
        assert_eq!(sequence_relevance(&db.sequences()[2]), q(2, 1));
        assert_eq!(sequence_relevance(&WlasSequence::<Q>::new("e", vec![])), q(0, 1));
    }

    #[test]
    fn msr_values() {
        let db = sample_db();
        assert_eq!(msr(&t_example(), &db), q(5, 1));
        assert_eq!(msr(&pattern(&[(&[5], &["g"])]), &db), q(5, 1));
        assert_eq!(msr(&pattern(&[(&[99], &["a"])]), &db), q(0, 1));
    }

    #[test]
    fn pivot_rest_and_ptr_of_worked_pattern() {
        let db = sample_db();
        let s = db.sequences();
        let t = t_example();
        assert_eq!(pivot_match_relevance(&t, &s[0]), Some(q(9, 10)));
        assert_eq!(rest_relevance(&t, &s[0]), Some(q(12, 10)));
        assert_eq!(rest_relevance(&t, &s[2]), Some(q(8, 10)));
        assert_eq!(pivot_match_relevance(&t, &s[1]), None);
        assert_eq!(rest_relevance(&t, &s[1]), None);

        let p = ptr(&t, &db);
        assert_eq!(p.total, q(37, 10));
        assert_eq!(p.per_sequence["a1"], q(21, 10));
        assert_eq!(p.per_sequence["a2"], q(0, 1));
        assert_eq!(p.per_sequence["a3"], q(16, 10));

        let t2 = pattern(&[(&[7], &["e"]), (&[9], &["d"])]);
        assert_eq!(pivot_match_relevance(&t2, &s[1]), Some(q(54, 100)));

        assert_eq!(ptr(&pattern(&[(&[99], &["a"])]), &db).total, q(0, 1));
    }

    #[test]
    fn ptr_equals_relevance_when_nothing_remains() {
        let seq = WlasSequence::new("s", vec![term(&[(1, q(1, 2)), (2, q(1, 2))], &["a"])]);
        let db = WlasDatabase::new(vec![seq.clone()]).unwrap();
        let t = pattern(&[(&[2], &["a"])]);
        assert_eq!(rest_relevance(&t, &seq), Some(q(0, 1)));
        assert_eq!(ptr(&t, &db).total, max_relevance(&t, &seq));
    }

    #[test]
    fn dp_agrees_with_enumeration() {
        let g = gamma();
        for t in [
            pattern(&[(&[3], &["b"]), (&[4], &["f"])]),
            pattern(&[(&[3], &["b"]), (&[6], &["c"])]),
            pattern(&[(&[2], &["b"]), (&[3], &["b"])]),
            r_pattern(&g),
        ] {
            let enumerated = relevance_values(&t, &g).into_iter().reduce(max_of).unwrap();
            assert_eq!(max_relevance(&t, &g), enumerated);
        }
    }
}
