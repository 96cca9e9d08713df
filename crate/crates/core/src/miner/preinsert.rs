//! Threshold raising by seeding the result list before the search.
//!
//! Seeds are every one-cell one-activity pattern, every one-term pattern
//! with two cells and one activity or one cell and two activities, every
//! two-term pattern of two one-cell one-activity terms, and the raw pattern
//! of every sequence. Their scores come out of a single pass over the data.

use std::collections::HashMap;

use crate::model::{r_pattern, TrajectoryPattern, WlasDatabase};
use crate::relevance::db_relevance;
use crate::scalar::{cmp_scores, Scalar};

use super::node::{MiningContext, NodeTerm};
use super::topk::TopKList;

fn bump<S: Scalar>(local: &mut HashMap<Vec<NodeTerm>, S>, key: Vec<NodeTerm>, score: S) {
    match local.get_mut(&key) {
        Some(best) => {
            if score > *best {
                *best = score;
            }
        }
        None => {
            local.insert(key, score);
        }
    }
}

fn single(cells: Vec<crate::grid::CellId>, acts: Vec<u32>) -> NodeTerm {
    NodeTerm { cells, acts }
}

/// Seeds with their database relevance.
fn scored_seeds<S: Scalar>(ctx: &MiningContext<'_, S>) -> HashMap<Vec<NodeTerm>, S> {
    let db = ctx.database();
    let prm = ctx.prm();
    let act = ctx.activity_index();
    let mut scores: HashMap<Vec<NodeTerm>, S> = HashMap::new();

    for s in 0..db.len() {
        let m = prm.sequence(s);
        let mut local: HashMap<Vec<NodeTerm>, S> = HashMap::new();
        let mut singles: Vec<Vec<(NodeTerm, S)>> = Vec::with_capacity(m.n_terms());
        for t in 0..m.n_terms() {
            let cells = m.term_cells(t);
            let acts = act.term_activities(s, t);
            let w = |c| m.entry(c, t).expect("cell of term").match_relevance.clone();
            let mut here = Vec::new();
            for (i, &c) in cells.iter().enumerate() {
                for (x, &a) in acts.iter().enumerate() {
                    let term = single(vec![c], vec![a]);
                    bump(&mut local, vec![term.clone()], w(c));
                    here.push((term, w(c)));
                    for &b in &acts[x + 1..] {
                        bump(&mut local, vec![single(vec![c], vec![a, b])], w(c));
                    }
                }
                for &d in &cells[i + 1..] {
                    for &a in acts {
                        bump(&mut local, vec![single(vec![c, d], vec![a])], w(c) + w(d));
                    }
                }
            }
            singles.push(here);
        }
        for i in 0..singles.len() {
            for j in i + 1..singles.len() {
                for (x, wx) in &singles[i] {
                    for (y, wy) in &singles[j] {
                        bump(&mut local, vec![x.clone(), y.clone()], wx.clone() + wy.clone());
                    }
                }
            }
        }
        for (key, v) in local {
            match scores.get_mut(&key) {
                Some(total) => *total = total.clone() + v,
                None => {
                    scores.insert(key, v);
                }
            }
        }
    }

    for seq in db.sequences() {
        let pattern = r_pattern(seq);
        if !pattern.is_emittable() {
            continue;
        }
        let key: Vec<NodeTerm> = pattern
            .terms()
            .iter()
            .map(|t| NodeTerm {
                cells: t.cells().to_vec(),
                acts: t
                    .activities()
                    .iter()
                    .map(|a| act.id_of(a).expect("db activity"))
                    .collect(),
            })
            .collect();
        scores.entry(key).or_insert_with(|| db_relevance(&pattern, db));
    }
    scores
}

/// Every seed pattern of the database, in canonical order.
pub fn seed_pool<S: Scalar>(db: &WlasDatabase<S>) -> Vec<(TrajectoryPattern, S)> {
    let ctx = MiningContext::new(db, false, false);
    let mut pool: Vec<(TrajectoryPattern, S)> = scored_seeds(&ctx)
        .into_iter()
        .map(|(key, s)| (to_pattern(&ctx, key), s))
        .collect();
    pool.sort_by(|a, b| a.0.cmp(&b.0));
    pool
}

fn to_pattern<S: Scalar>(ctx: &MiningContext<'_, S>, key: Vec<NodeTerm>) -> TrajectoryPattern {
    let act = ctx.activity_index();
    TrajectoryPattern::new(
        key.into_iter()
            .map(|t| crate::model::PatternTerm::new(t.cells, t.acts.iter().map(|&a| act.name(a).to_string())))
            .collect(),
    )
}

/// Seeds a result list of capacity `k`. Returns the list and its threshold
/// (zero unless the list is full).
pub fn preinsert<S: Scalar>(db: &WlasDatabase<S>, k: usize) -> (TopKList<S>, S) {
    preinsert_with(&MiningContext::new(db, false, false), k)
}

pub(crate) fn preinsert_with<S: Scalar>(ctx: &MiningContext<'_, S>, k: usize) -> (TopKList<S>, S) {
    let mut seeds: Vec<(Vec<NodeTerm>, S)> = scored_seeds(ctx).into_iter().collect();
    // interned ids preserve the lexicographic order, so this is the result
    // order without building patterns for every seed
    seeds.sort_by(|a, b| {
        cmp_scores(&b.1, &a.1)
            .then(a.0.len().cmp(&b.0.len()))
            .then_with(|| a.0.cmp(&b.0))
    });
    let mut list = TopKList::new(k);
    for (key, score) in seeds.into_iter().take(k) {
        list.offer(to_pattern(ctx, key), score);
    }
    let threshold = list.threshold();
    (list, threshold)
}
