//! Top-k trajectory-pattern mining.
//!
//! The search tree grows patterns with three operators: add a cell to the
//! last term (l), add an activity to the last term (a), or start a new
//! one-cell term (s). Cells never follow activities on the same term, and
//! activities are drawn from the tail of the parent's a-list, so every
//! pattern is generated at most once. A pattern is emitted when its last
//! term gains an activity.
//!
//! Four strategies can be toggled independently: pre-insertion of easy
//! patterns to raise the threshold early (TI), bound-ordered extension
//! lists (TU), width pruning by matching sequence-relevance, and depth
//! pruning by the node's upper bound. None of them changes the result.

mod node;
mod preinsert;
mod prm;
mod topk;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use log::debug;

use crate::error::{Error, Result};
use crate::model::{TrajectoryPattern, WlasDatabase};
use crate::scalar::Scalar;

pub use node::{concat_pattern, Extension, ExtensionLists, MiningContext, Operator, SearchNode};
pub use preinsert::{preinsert, seed_pool};
pub use prm::{ActivityIndex, PrmEntry, ProjectedRelevanceMatrix, SequenceMatrix};
pub use topk::{result_order, TopKList};

use node::{ActivityScope, NodeTerm};

/// Strategy presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Width and depth pruning, threshold from zero, lexicographic lists.
    Baseline,
    /// Baseline plus pre-insertion.
    BaselineI,
    /// Baseline plus bound-ordered lists.
    BaselineS,
    Full,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Baseline, Variant::BaselineI, Variant::BaselineS, Variant::Full];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::BaselineI => "baseline+i",
            Variant::BaselineS => "baseline+s",
            Variant::Full => "full",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variant `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiningConfig {
    pub k: usize,
    pub ti: bool,
    pub tu: bool,
    pub width_prune: bool,
    pub depth_prune: bool,
    /// Count nodes generated more than once (costs a hash set per run).
    pub audit_nodes: bool,
    /// Keep every depth-pruned node with the threshold at prune time.
    pub record_pruned: bool,
}

impl MiningConfig {
    pub fn new(k: usize, variant: Variant) -> Self {
        let (ti, tu) = match variant {
            Variant::Baseline => (false, false),
            Variant::BaselineI => (true, false),
            Variant::BaselineS => (false, true),
            Variant::Full => (true, true),
        };
        Self {
            k,
            ti,
            tu,
            width_prune: true,
            depth_prune: true,
            audit_nodes: false,
            record_pruned: false,
        }
    }

    pub fn full(k: usize) -> Self {
        Self::new(k, Variant::Full)
    }

    /// Turns off width and depth pruning.
    pub fn without_pruning(mut self) -> Self {
        self.width_prune = false;
        self.depth_prune = false;
        self
    }
}

/// A node cut off by depth pruning.
#[derive(Clone, Debug, PartialEq)]
pub struct PrunedNode<S> {
    /// May end in a term without activities.
    pub pattern: TrajectoryPattern,
    pub bound: S,
    pub threshold: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MiningMetrics<S> {
    pub recursive_calls: u64,
    pub candidates_generated: u64,
    pub insertions: u64,
    pub width_pruned: u64,
    pub depth_pruned: u64,
    pub preinserted: u64,
    /// `(call index, threshold)` at the start and at every change; the
    /// threshold holds until the next point.
    pub threshold_trace: Vec<(u64, S)>,
    /// Only counted when auditing is on.
    pub duplicate_nodes: u64,
    pub pruned_nodes: Vec<PrunedNode<S>>,
}

impl<S: Scalar> Default for MiningMetrics<S> {
    fn default() -> Self {
        Self {
            recursive_calls: 0,
            candidates_generated: 0,
            insertions: 0,
            width_pruned: 0,
            depth_pruned: 0,
            preinserted: 0,
            threshold_trace: Vec::new(),
            duplicate_nodes: 0,
            pruned_nodes: Vec::new(),
        }
    }
}

impl<S: Scalar> MiningMetrics<S> {
    /// Threshold in force during the given recursive call.
    pub fn threshold_at(&self, call: u64) -> S {
        let i = self.threshold_trace.partition_point(|(c, _)| *c <= call);
        match i {
            0 => S::zero(),
            _ => self.threshold_trace[i - 1].1.clone(),
        }
    }

    fn trace(&mut self, threshold: S) {
        if self.threshold_trace.last().is_none_or(|(_, t)| *t != threshold) {
            self.threshold_trace.push((self.recursive_calls, threshold));
        }
    }
}

#[derive(Clone, Debug)]
pub struct MiningOutcome<S> {
    /// Best first.
    pub results: Vec<(TrajectoryPattern, S)>,
    pub metrics: MiningMetrics<S>,
}

struct Search<'c, 'a, S> {
    ctx: &'c MiningContext<'a, S>,
    config: &'c MiningConfig,
    topk: TopKList<S>,
    metrics: MiningMetrics<S>,
    seen: HashSet<Vec<NodeTerm>>,
}

impl<S: Scalar> Search<'_, '_, S> {
    fn expand(&mut self, node: &SearchNode<S>, scope: ActivityScope<'_>) {
        self.metrics.recursive_calls += 1;
        let threshold = self.topk.threshold();
        self.metrics.trace(threshold.clone());
        let lists = self.ctx.candidates(node, scope, &threshold);
        self.metrics.width_pruned += lists.width_pruned;

        for child in &lists.l {
            self.descend(&child.node, ActivityScope::Open);
        }
        for (i, child) in lists.a.iter().enumerate() {
            let tail: Vec<u32> = lists.a[i + 1..]
                .iter()
                .map(|c| match c.item {
                    node::Item::Act(a) => a,
                    _ => unreachable!("a-list holds activities"),
                })
                .collect();
            self.descend(&child.node, ActivityScope::Tail(&tail));
        }
        for child in &lists.s {
            self.descend(&child.node, ActivityScope::Open);
        }
    }

    fn descend(&mut self, node: &SearchNode<S>, scope: ActivityScope<'_>) {
        self.metrics.candidates_generated += 1;
        if self.config.audit_nodes && !self.seen.insert(node.terms.clone()) {
            self.metrics.duplicate_nodes += 1;
        }
        if node.last_operator() == Operator::Activity && *node.relevance() >= self.topk.threshold() {
            let pattern = self.ctx.pattern(node);
            if self.topk.offer(pattern, node.relevance().clone()) {
                self.metrics.insertions += 1;
            }
        }
        let threshold = self.topk.threshold();
        if self.config.width_prune && node.last_operator() != Operator::Activity && *node.msr() < threshold {
            self.metrics.width_pruned += 1;
            return;
        }
        if self.config.depth_prune && *node.bound() < threshold {
            self.metrics.depth_pruned += 1;
            if self.config.record_pruned {
                self.metrics.pruned_nodes.push(PrunedNode {
                    pattern: self.ctx.pattern(node),
                    bound: node.bound().clone(),
                    threshold,
                });
            }
            return;
        }
        self.expand(node, scope);
    }
}

/// Mines the `config.k` patterns of highest database relevance.
pub fn mine_topk<S: Scalar>(db: &WlasDatabase<S>, config: &MiningConfig) -> Result<MiningOutcome<S>> {
    if config.k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let ctx = MiningContext::new(db, config.width_prune, config.tu);
    Ok(mine_with(&ctx, config))
}

/// Runs a search over a prepared context. The context's own width and TU
/// settings shape the lists; `config` supplies the rest.
pub fn mine_with<S: Scalar>(ctx: &MiningContext<'_, S>, config: &MiningConfig) -> MiningOutcome<S> {
    let mut metrics = MiningMetrics::default();
    let topk = if config.ti {
        let (list, _) = preinsert::preinsert_with(ctx, config.k);
        metrics.preinserted = list.len() as u64;
        list
    } else {
        TopKList::new(config.k)
    };
    debug!(
        "mining k={} ti={} tu={} width={} depth={} over {} sequences",
        config.k,
        config.ti,
        config.tu,
        config.width_prune,
        config.depth_prune,
        ctx.database().len()
    );
    let mut search = Search {
        ctx,
        config,
        topk,
        metrics,
        seen: HashSet::new(),
    };
    let root = ctx.root();
    search.expand(&root, ActivityScope::Open);
    let Search { topk, mut metrics, .. } = search;
    metrics.trace(topk.threshold());
    debug!(
        "done: {} calls, {} candidates, {} results",
        metrics.recursive_calls,
        metrics.candidates_generated,
        topk.len()
    );
    MiningOutcome {
        results: topk.into_entries(),
        metrics,
    }
}
