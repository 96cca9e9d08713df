//! Seeded random data for tests, benchmarks and the CLI `synth` command.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::anonymize::{RawPoint, RawTrajectory};
use crate::grid::{CellId, Region, WeightedLocationSet};
use crate::model::{WlasDatabase, WlasSequence, WlasTerm};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthParams {
    pub sequences: usize,
    pub max_terms: usize,
    /// Size of the cell universe `0..cells`.
    pub cells: u32,
    /// Size of the activity alphabet `a, b, c, ...`.
    pub activities: usize,
    pub max_cells_per_term: usize,
    pub max_activities_per_term: usize,
    /// Raw integer weights are drawn from `1..=max_raw_weight` and then
    /// normalized per term.
    pub max_raw_weight: i64,
}

impl SynthParams {
    /// Databases the brute-force oracle handles quickly: at most 5
    /// sequences of 3 terms over 6 cells and 4 activities.
    pub fn small() -> Self {
        Self {
            sequences: 5,
            max_terms: 3,
            cells: 6,
            activities: 4,
            max_cells_per_term: 3,
            max_activities_per_term: 2,
            max_raw_weight: 4,
        }
    }
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            sequences: 50,
            max_terms: 6,
            cells: 64,
            activities: 10,
            max_cells_per_term: 4,
            max_activities_per_term: 3,
            max_raw_weight: 9,
        }
    }
}

/// `a`..`z`, then `a26`, `a27`, ...
pub fn activity_name(i: usize) -> String {
    if i < 26 {
        char::from(b'a' + i as u8).to_string()
    } else {
        format!("a{i}")
    }
}

fn pick<R: Rng>(n: usize, max: usize, rng: &mut R) -> Vec<usize> {
    let count = rng.gen_range(1..=max.min(n).max(1));
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(count);
    all.sort_unstable();
    all
}

/// A random wLAS database: 1 to `sequences` sequences of 1 to `max_terms`
/// terms, weights normalized to sum to 1 per term.
pub fn random_database<S: Scalar, R: Rng>(params: &SynthParams, rng: &mut R) -> WlasDatabase<S> {
    let n_seq = rng.gen_range(1..=params.sequences.max(1));
    let sequences = (0..n_seq)
        .map(|s| {
            let n_terms = rng.gen_range(1..=params.max_terms.max(1));
            let terms = (0..n_terms)
                .map(|_| {
                    let cells = pick(params.cells as usize, params.max_cells_per_term, rng);
                    let raw: Vec<i64> = cells
                        .iter()
                        .map(|_| rng.gen_range(1..=params.max_raw_weight.max(1)))
                        .collect();
                    let total: i64 = raw.iter().sum();
                    let entries = cells
                        .iter()
                        .zip(&raw)
                        .map(|(&c, &w)| (CellId(c as u32), S::from_ratio(w, total)))
                        .collect();
                    let acts = pick(params.activities, params.max_activities_per_term, rng);
                    WlasTerm::new(
                        WeightedLocationSet::new(entries).expect("distinct ascending cells"),
                        acts.into_iter().map(activity_name),
                    )
                })
                .collect();
            WlasSequence::new(format!("s{s}"), terms)
        })
        .collect();
    WlasDatabase::new(sequences).expect("generated ids are distinct")
}

/// Random raw trajectories with points drawn on a `1/4` lattice inside the
/// region, so rational backends stay small.
pub fn random_raw<S: Scalar, R: Rng>(
    region: &Region<S>,
    trajectories: usize,
    points: usize,
    activities: usize,
    rng: &mut R,
) -> Vec<RawTrajectory<S>> {
    let steps = |lo: &S, hi: &S| {
        let span = (hi.clone() - lo.clone()) * S::from_ratio(4, 1);
        span.floor_index().unwrap_or(0).max(1)
    };
    let nx = steps(&region.x_min, &region.x_max);
    let ny = steps(&region.y_min, &region.y_max);
    (0..trajectories)
        .map(|t| RawTrajectory {
            id: format!("u{t}"),
            points: (0..points)
                .map(|_| {
                    let x = region.x_min.clone() + S::from_ratio(rng.gen_range(0..nx) as i64, 4);
                    let y = region.y_min.clone() + S::from_ratio(rng.gen_range(0..ny) as i64, 4);
                    RawPoint {
                        x,
                        y,
                        activities: pick(activities, 2, rng).into_iter().map(activity_name).collect(),
                    }
                })
                .collect(),
        })
        .collect()
}
