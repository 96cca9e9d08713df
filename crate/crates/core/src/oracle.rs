//! Brute-force reference: every emittable pattern of a small database with
//! its relevance, computed by direct embedding enumeration.
//!
//! Shares nothing with the miner or the relevance module beyond the data
//! types, so agreement between them means something.

use crate::error::{Error, Result};
use crate::miner::result_order;
use crate::model::{PatternTerm, TrajectoryPattern, WlasDatabase, WlasSequence, WlasTerm};
use crate::scalar::Scalar;

/// Default cap on candidate (pattern, sequence) generations.
pub const DEFAULT_CANDIDATE_CAP: u128 = 10_000_000;

fn subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    (1u32..(1 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

/// Number of candidates enumeration would generate before deduplication.
pub fn candidate_count<S: Scalar>(db: &WlasDatabase<S>) -> u128 {
    db.sequences()
        .iter()
        .map(|seq| {
            seq.terms
                .iter()
                .map(|t| {
                    let c = 1u128.checked_shl(t.locations().len() as u32).unwrap_or(u128::MAX);
                    let a = 1u128.checked_shl(t.activities().len() as u32).unwrap_or(u128::MAX);
                    (c - 1).saturating_mul(a.saturating_sub(1)).saturating_add(1)
                })
                .fold(1u128, |acc, f| acc.saturating_mul(f))
                - 1
        })
        .fold(0u128, |acc, n| acc.saturating_add(n))
}

fn check_cap<S: Scalar>(db: &WlasDatabase<S>, cap: u128) -> Result<()> {
    let count = candidate_count(db);
    if count > cap {
        return Err(Error::SizeLimit {
            bound: "candidate patterns",
            value: count,
            cap,
        });
    }
    Ok(())
}

/// Walks every pattern of one sequence exactly once: each pattern is
/// produced only from its leftmost embedding, and only by the first
/// sequence containing it.
struct Walker<'d, S, F> {
    db: &'d WlasDatabase<S>,
    seq: usize,
    options: Vec<Vec<PatternTerm>>,
    visit: F,
}

impl<S: Scalar, F: FnMut(&TrajectoryPattern)> Walker<'_, S, F> {
    fn extend(&mut self, start: usize, prefix: &mut Vec<PatternTerm>) {
        let seq = &self.db.sequences()[self.seq];
        for j in start..self.options.len() {
            for o in 0..self.options[j].len() {
                let option = self.options[j][o].clone();
                // a match further left exists, so this is not the leftmost embedding
                if (start..j).any(|i| term_score(&option, &seq.terms[i]).is_some()) {
                    continue;
                }
                prefix.push(option);
                let pattern = TrajectoryPattern::new(prefix.clone());
                let seen_before = self.db.sequences()[..self.seq]
                    .iter()
                    .any(|earlier| best_in(pattern.terms(), earlier, 0).is_some());
                if !seen_before {
                    (self.visit)(&pattern);
                }
                self.extend(j + 1, prefix);
                prefix.pop();
            }
        }
    }
}

/// Calls `visit` once for every distinct emittable pattern with at least one
/// match.
pub fn for_each_pattern<S: Scalar>(
    db: &WlasDatabase<S>,
    cap: u128,
    mut visit: impl FnMut(&TrajectoryPattern),
) -> Result<()> {
    check_cap(db, cap)?;
    for (s, seq) in db.sequences().iter().enumerate() {
        let options: Vec<Vec<PatternTerm>> = seq
            .terms
            .iter()
            .map(|t| {
                let cells: Vec<_> = t.locations().cells().collect();
                let mut v = Vec::new();
                for cs in subsets(&cells) {
                    for acts in subsets(t.activities()) {
                        v.push(PatternTerm::new(cs.clone(), acts));
                    }
                }
                v
            })
            .collect();
        let mut walker = Walker {
            db,
            seq: s,
            options,
            visit: &mut visit,
        };
        walker.extend(0, &mut Vec::new());
    }
    Ok(())
}

/// Every distinct emittable pattern with at least one match, in canonical
/// order.
pub fn enumerate_patterns<S: Scalar>(db: &WlasDatabase<S>) -> Result<Vec<TrajectoryPattern>> {
    enumerate_patterns_capped(db, DEFAULT_CANDIDATE_CAP)
}

pub fn enumerate_patterns_capped<S: Scalar>(db: &WlasDatabase<S>, cap: u128) -> Result<Vec<TrajectoryPattern>> {
    let mut out = Vec::new();
    for_each_pattern(db, cap, |p| out.push(p.clone()))?;
    out.sort();
    Ok(out)
}

fn term_score<S: Scalar>(term: &PatternTerm, wlas: &WlasTerm<S>) -> Option<S> {
    if !term.activities().iter().all(|a| wlas.activities().contains(a)) {
        return None;
    }
    let mut total = S::zero();
    for c in term.cells() {
        let (_, w) = wlas.locations().entries().iter().find(|(id, _)| id == c)?;
        total = total + w.clone();
    }
    Some(total)
}

fn best_in<S: Scalar>(pattern: &[PatternTerm], seq: &WlasSequence<S>, start: usize) -> Option<S> {
    let Some((first, rest)) = pattern.split_first() else {
        return Some(S::zero());
    };
    let mut best: Option<S> = None;
    for j in start..seq.terms.len() {
        let Some(here) = term_score(first, &seq.terms[j]) else {
            continue;
        };
        if let Some(tail) = best_in(rest, seq, j + 1) {
            let total = here + tail;
            if best.as_ref().is_none_or(|b| total > *b) {
                best = Some(total);
            }
        }
    }
    best
}

/// Database relevance by trying every embedding.
pub fn brute_relevance<S: Scalar>(pattern: &TrajectoryPattern, db: &WlasDatabase<S>) -> S {
    db.sequences()
        .iter()
        .filter_map(|seq| best_in(pattern.terms(), seq, 0))
        .sum()
}

/// The `k` best patterns under the miner's result order.
pub fn brute_topk<S: Scalar>(db: &WlasDatabase<S>, k: usize) -> Result<Vec<(TrajectoryPattern, S)>> {
    brute_topk_capped(db, k, DEFAULT_CANDIDATE_CAP)
}

pub fn brute_topk_capped<S: Scalar>(db: &WlasDatabase<S>, k: usize, cap: u128) -> Result<Vec<(TrajectoryPattern, S)>> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut kept: Vec<(TrajectoryPattern, S)> = Vec::new();
    for_each_pattern(db, cap, |p| {
        kept.push((p.clone(), brute_relevance(p, db)));
        if kept.len() >= 2 * k + 1024 {
            kept.sort_by(result_order);
            kept.truncate(k);
        }
    })?;
    kept.sort_by(result_order);
    kept.truncate(k);
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::find_exact_matches;
    use crate::model::fixtures::*;
    use crate::relevance::db_relevance;

    fn one(cells: &[(u32, Q)], acts: &[&str]) -> WlasDatabase<Q> {
        WlasDatabase::new(vec![WlasSequence::new("s", vec![term(cells, acts)])]).unwrap()
    }

    #[test]
    fn singleton_database() {
        let db = one(&[(1, q(1, 1))], &["a"]);
        assert_eq!(enumerate_patterns(&db).unwrap(), vec![pattern(&[(&[1], &["a"])])]);
        assert_eq!(brute_topk(&db, 3).unwrap(), vec![(pattern(&[(&[1], &["a"])]), q(1, 1))]);
    }

    #[test]
    fn universe_has_no_duplicates() {
        let mut twin = gamma();
        twin.id = "twin".into();
        let db = WlasDatabase::new(vec![gamma(), twin]).unwrap();
        let all = enumerate_patterns(&db).unwrap();
        let distinct: std::collections::BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(distinct.len(), all.len());
        assert!(all.contains(&pattern(&[(&[3], &["b"]), (&[3], &["b"])])));
        let single = enumerate_patterns(&WlasDatabase::new(vec![gamma()]).unwrap()).unwrap();
        assert_eq!(single, all);
    }

    #[test]
    fn two_cells_two_activities_give_nine() {
        let db = one(&[(1, q(1, 2)), (2, q(1, 2))], &["a", "b"]);
        let all = enumerate_patterns(&db).unwrap();
        assert_eq!(all.len(), 9);
        let top = brute_topk(&db, 100).unwrap();
        assert_eq!(top.len(), 9);
        assert_eq!(top[0].1, q(1, 1));
    }

    #[test]
    fn sample_universe_patterns_all_match() {
        let db = sample_db();
        let mut seen = 0usize;
        for_each_pattern(&db, DEFAULT_CANDIDATE_CAP, |p| {
            seen += 1;
            if seen % 9973 == 1 {
                assert!(db.sequences().iter().any(|s| !find_exact_matches(p, s).is_empty()));
                assert_eq!(brute_relevance(p, &db), db_relevance(p, &db));
            }
        })
        .unwrap();
        assert!(seen > 0);
    }

    #[test]
    fn cap_is_enforced() {
        let db = WlasDatabase::new(vec![gamma()]).unwrap();
        let n = candidate_count(&db);
        assert_eq!(n, 22 * 46 * 22 - 1);
        assert!(matches!(
            enumerate_patterns_capped(&db, n - 1),
            Err(Error::SizeLimit {
                bound: "candidate patterns",
                ..
            })
        ));
        assert!(enumerate_patterns_capped(&db, n).is_ok());
    }
}
