#![allow(dead_code)]

use num_rational::BigRational;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use trajmine::grid::{CellId, WeightedLocationSet};
use trajmine::synth::{random_database, SynthParams};
use trajmine::{PatternTerm, Scalar, TrajectoryPattern, WlasDatabase, WlasSequence, WlasTerm};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

pub fn term<S: Scalar>(cells: &[(u32, (i64, i64))], acts: &[&str]) -> WlasTerm<S> {
    WlasTerm::new(
        WeightedLocationSet::new(
            cells
                .iter()
                .map(|&(c, (n, d))| (CellId(c), S::from_ratio(n, d)))
                .collect(),
        )
        .unwrap(),
        acts.iter().map(|s| s.to_string()),
    )
}

pub fn pt(cells: &[u32], acts: &[&str]) -> PatternTerm {
    PatternTerm::new(cells.iter().map(|c| CellId(*c)), acts.iter().copied())
}

pub fn pattern(terms: &[(&[u32], &[&str])]) -> TrajectoryPattern {
    TrajectoryPattern::new(terms.iter().map(|(c, a)| pt(c, a)).collect())
}

/// The three-sequence worked database, cells numbered as in its figures.
pub fn sample_db<S: Scalar>() -> WlasDatabase<S> {
    let a1 = WlasSequence::new(
        "a1",
        vec![
            term(
                &[(1, (25, 100)), (2, (25, 100)), (5, (25, 100)), (6, (25, 100))],
                &["a", "b", "h"],
            ),
            term(
                &[(1, (2, 10)), (2, (2, 10)), (5, (4, 10)), (7, (2, 10))],
                &["a", "b", "g", "j"],
            ),
            term(
                &[(3, (2, 10)), (5, (1, 10)), (7, (25, 100)), (11, (45, 100))],
                &["a", "c", "d", "g"],
            ),
        ],
    );
    let a2 = WlasSequence::new(
        "a2",
        vec![
            term(
                &[(3, (26, 100)), (4, (22, 100)), (7, (3, 10)), (8, (22, 100))],
                &["d", "e", "h"],
            ),
            term(
                &[(6, (13, 100)), (7, (2, 10)), (10, (2, 10)), (11, (47, 100))],
                &["e", "f", "g"],
            ),
            term(
                &[(9, (24, 100)), (10, (34, 100)), (13, (22, 100)), (14, (2, 10))],
                &["d", "f"],
            ),
        ],
    );
    let a3 = WlasSequence::new(
        "a3",
        vec![
            term(
                &[(1, (2, 10)), (2, (4, 10)), (6, (1, 10)), (7, (3, 10))],
                &["a", "b", "h"],
            ),
            term(
                &[(5, (2, 10)), (6, (3, 10)), (10, (2, 10)), (11, (3, 10))],
                &["a", "g", "h"],
            ),
        ],
    );
    WlasDatabase::new(vec![a1, a2, a3]).unwrap()
}

/// <({p1,p2},{a,b}) (p5,g)>
pub fn t_example() -> TrajectoryPattern {
    pattern(&[(&[1, 2], &["a", "b"]), (&[5], &["g"])])
}

/// <(p7,e) (p9,d)>
pub fn t_prime() -> TrajectoryPattern {
    pattern(&[(&[7], &["e"]), (&[9], &["d"])])
}

/// Seeded small random database (oracle-sized).
pub fn small_db(seed: u64) -> WlasDatabase<Q> {
    random_database(&SynthParams::small(), &mut StdRng::seed_from_u64(seed))
}

fn non_empty_subset<T: Clone, R: Rng>(items: &[T], rng: &mut R) -> Vec<T> {
    loop {
        let picked: Vec<T> = items.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        if !picked.is_empty() {
            return picked;
        }
    }
}

/// A random pattern with at least one match: increasing terms of one
/// sequence, each reduced to non-empty cell and activity subsets.
pub fn random_matching_pattern<R: Rng>(db: &WlasDatabase<Q>, rng: &mut R) -> TrajectoryPattern {
    let seq = db.sequences().choose(rng).unwrap();
    let indices: Vec<usize> = non_empty_subset(&(0..seq.terms.len()).collect::<Vec<_>>(), rng);
    TrajectoryPattern::new(
        indices
            .iter()
            .map(|&j| {
                let t = &seq.terms[j];
                let cells: Vec<CellId> = t.locations().cells().collect();
                PatternTerm::new(non_empty_subset(&cells, rng), non_empty_subset(t.activities(), rng))
            })
            .collect(),
    )
}

/// A random sub-pattern: some terms kept, each with non-empty subsets.
pub fn random_subpattern<R: Rng>(p: &TrajectoryPattern, rng: &mut R) -> TrajectoryPattern {
    let kept = non_empty_subset(p.terms(), rng);
    TrajectoryPattern::new(
        kept.iter()
            .map(|t| PatternTerm::new(non_empty_subset(t.cells(), rng), non_empty_subset(t.activities(), rng)))
            .collect(),
    )
}

pub fn median(mut xs: Vec<u64>) -> f64 {
    xs.sort_unstable();
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2] as f64
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) as f64 / 2.0
    }
}
