//! Anonymous trajectories and a toy k-anonymity / l-diversity anonymizer
//! used to produce synthetic input data.
//!
//! The anonymizer groups trajectories greedily by nearest neighbour and
//! publishes, for every member of a group, the group's per-term bounding
//! rectangles and activity unions. It is test infrastructure and makes no
//! privacy claims beyond the post-hoc checks in [`validate_anonymization`].

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::grid::Mbr;
use crate::scalar::{max_of, min_of, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct AnonymousTerm<S> {
    pub mbr: Mbr<S>,
    pub activities: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnonymousTrajectory<S> {
    pub id: String,
    pub terms: Vec<AnonymousTerm<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawPoint<S> {
    pub x: S,
    pub y: S,
    pub activities: Vec<String>,
}

/// A pre-anonymization activity trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTrajectory<S> {
    pub id: String,
    pub points: Vec<RawPoint<S>>,
}

fn closed_contains<S: Scalar>(mbr: &Mbr<S>, x: &S, y: &S) -> bool {
    mbr.x_min <= *x && *x <= mbr.x_max && mbr.y_min <= *y && *y <= mbr.y_max
}

fn prefix_distance<S: Scalar>(a: &RawTrajectory<S>, b: &RawTrajectory<S>) -> f64 {
    let common: f64 = a
        .points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| {
            let dx = p.x.to_f64() - q.x.to_f64();
            let dy = p.y.to_f64() - q.y.to_f64();
            (dx * dx + dy * dy).sqrt()
        })
        .sum();
    common + a.points.len().abs_diff(b.points.len()) as f64
}

/// Widens a degenerate extent `[lo, hi]` to `min_extent` around its centre.
fn inflate<S: Scalar>(lo: S, hi: S, min_extent: &S) -> (S, S) {
    if lo < hi {
        return (lo, hi);
    }
    let half = min_extent.clone() / S::from_ratio(2, 1);
    (lo.clone() - half.clone(), hi + half)
}

/// Groups trajectories into anonymity sets of at least `k_anon` members and
/// publishes per-term MBRs and activity unions. Every term must end up with
/// `k_anon` distinct locations and `l_div` distinct activities.
pub fn toy_anonymize<S: Scalar>(
    raw: &[RawTrajectory<S>],
    k_anon: usize,
    l_div: usize,
    seed: u64,
    min_extent: S,
) -> Result<Vec<AnonymousTrajectory<S>>> {
    if k_anon == 0 || l_div == 0 {
        return Err(Error::InvalidArgument("k and l must be at least 1".into()));
    }
    // also rejects NaN
    if min_extent.partial_cmp(&S::zero()) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidArgument("min extent must be positive".into()));
    }
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    if raw.len() < k_anon {
        return Err(Error::Infeasible {
            term: 0,
            message: format!("{} trajectories cannot form a group of {k_anon}", raw.len()),
        });
    }

    let mut rng = StdRng::seed_from_u64(seed);
    let mut remaining: Vec<usize> = (0..raw.len()).collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    while remaining.len() >= k_anon {
        let anchor = remaining.swap_remove(rng.gen_range(0..remaining.len()));
        let mut by_distance: Vec<(f64, usize)> = remaining
            .iter()
            .map(|&i| (prefix_distance(&raw[anchor], &raw[i]), i))
            .collect();
        by_distance.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut group = vec![anchor];
        group.extend(by_distance.iter().take(k_anon - 1).map(|&(_, i)| i));
        remaining.retain(|i| !group.contains(i));
        groups.push(group);
    }
    if let Some(last) = groups.last_mut() {
        last.append(&mut remaining);
    }

    let mut out: Vec<Option<AnonymousTrajectory<S>>> = vec![None; raw.len()];
    for group in groups {
        let len = group.iter().map(|&i| raw[i].points.len()).min().unwrap_or(0);
        let mut terms = Vec::with_capacity(len);
        for t in 0..len {
            let points: Vec<&RawPoint<S>> = group.iter().map(|&i| &raw[i].points[t]).collect();
            let mut distinct: Vec<(&S, &S)> = Vec::new();
            for p in &points {
                if !distinct.iter().any(|(x, y)| **x == p.x && **y == p.y) {
                    distinct.push((&p.x, &p.y));
                }
            }
            if distinct.len() < k_anon {
                return Err(Error::Infeasible {
                    term: t,
                    message: format!("{} distinct locations, {k_anon} required", distinct.len()),
                });
            }
            let activities: BTreeSet<String> = points.iter().flat_map(|p| p.activities.iter().cloned()).collect();
            if activities.len() < l_div {
                return Err(Error::Infeasible {
                    term: t,
                    message: format!("{} distinct activities, {l_div} required", activities.len()),
                });
            }
            let xs = points.iter().map(|p| p.x.clone());
            let ys = points.iter().map(|p| p.y.clone());
            let x_min = xs.clone().reduce(min_of).expect("non-empty group");
            let x_max = xs.reduce(max_of).expect("non-empty group");
            let y_min = ys.clone().reduce(min_of).expect("non-empty group");
            let y_max = ys.reduce(max_of).expect("non-empty group");
            let (x_min, x_max) = inflate(x_min, x_max, &min_extent);
            let (y_min, y_max) = inflate(y_min, y_max, &min_extent);
            terms.push(AnonymousTerm {
                mbr: Mbr::new(x_min, y_min, x_max, y_max)?,
                activities: activities.into_iter().collect(),
            });
        }
        for &i in &group {
            out[i] = Some(AnonymousTrajectory {
                id: raw[i].id.clone(),
                terms: terms.clone(),
            });
        }
    }
    Ok(out.into_iter().map(|t| t.expect("every trajectory grouped")).collect())
}

/// Checks the four anonymous-trajectory constraints: location and activity
/// containment along an increasing sub-trajectory of the source, at least
/// `k_anon` distinct source locations inside every MBR, and at least
/// `l_div` activities in every anonymous activity set.
pub fn validate_anonymization<S: Scalar>(
    raw: &[RawTrajectory<S>],
    anon: &[AnonymousTrajectory<S>],
    k_anon: usize,
    l_div: usize,
) -> Result<()> {
    let all_points: Vec<&RawPoint<S>> = raw.iter().flat_map(|r| &r.points).collect();
    for at in anon {
        let source = raw
            .iter()
            .find(|r| r.id == at.id)
            .ok_or_else(|| Error::InvalidArgument(format!("no source trajectory for `{}`", at.id)))?;
        let mut cursor = 0;
        for (k, term) in at.terms.iter().enumerate() {
            let found = (cursor..source.points.len()).find(|&i| {
                let p = &source.points[i];
                closed_contains(&term.mbr, &p.x, &p.y) && p.activities.iter().all(|a| term.activities.contains(a))
            });
            let Some(i) = found else {
                return Err(Error::Infeasible {
                    term: k,
                    message: format!("`{}`: containment constraint violated", at.id),
                });
            };
            cursor = i + 1;

            let mut inside: Vec<(&S, &S)> = Vec::new();
            for p in &all_points {
                if closed_contains(&term.mbr, &p.x, &p.y) && !inside.iter().any(|(x, y)| **x == p.x && **y == p.y) {
                    inside.push((&p.x, &p.y));
                }
            }
            if inside.len() < k_anon {
                return Err(Error::Infeasible {
                    term: k,
                    message: format!("`{}`: only {} locations in region", at.id, inside.len()),
                });
            }
            let distinct: BTreeSet<&String> = term.activities.iter().collect();
            if distinct.len() < l_div {
                return Err(Error::Infeasible {
                    term: k,
                    message: format!("`{}`: only {} activities", at.id, distinct.len()),
                });
            }
        }
    }
    Ok(())
}
