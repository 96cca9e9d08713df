//! Search-tree nodes, the three concatenation operators, and candidate
//! extension lists.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::grid::CellId;
use crate::model::{PatternTerm, TrajectoryPattern, WlasDatabase};
use crate::scalar::{cmp_scores, max_of, Scalar};

use super::prm::{ActivityIndex, ProjectedRelevanceMatrix};

/// Operator that produced a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operator {
    Root,
    /// l-concatenation: a cell added to the last term.
    Location,
    /// a-concatenation: an activity added to the last term.
    Activity,
    /// s-concatenation: a new one-cell term without activities.
    Sequence,
}

/// One concatenation step.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Extension {
    Location(CellId),
    Activity(String),
    Sequence(CellId),
}

/// Applies one operator to a bare pattern. Unlike [`MiningContext::concat`]
/// this does not enforce the search-tree restriction against adding a cell
/// to a term that already has activities; it only checks item order.
pub fn concat_pattern(pattern: &TrajectoryPattern, ext: &Extension) -> Result<TrajectoryPattern> {
    let mut terms = pattern.terms().to_vec();
    match ext {
        Extension::Sequence(cell) => {
            terms.push(PatternTerm::new([*cell], Vec::<String>::new()));
        }
        Extension::Location(cell) => {
            let last = terms
                .pop()
                .ok_or_else(|| Error::Precondition("l-concatenation on an empty pattern".into()))?;
            if last.max_cell().is_some_and(|m| *cell <= m) {
                return Err(Error::Precondition(format!(
                    "cell {cell} does not exceed the last term's largest cell"
                )));
            }
            terms.push(PatternTerm::new(
                last.cells().iter().copied().chain([*cell]),
                last.activities().iter().cloned(),
            ));
        }
        Extension::Activity(act) => {
            let last = terms
                .pop()
                .ok_or_else(|| Error::Precondition("a-concatenation on an empty pattern".into()))?;
            if last.max_activity().is_some_and(|m| act.as_str() <= m) {
                return Err(Error::Precondition(format!(
                    "activity `{act}` does not exceed the last term's largest activity"
                )));
            }
            terms.push(PatternTerm::new(
                last.cells().iter().copied(),
                last.activities().iter().cloned().chain([act.clone()]),
            ));
        }
    }
    Ok(TrajectoryPattern::new(terms))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct NodeTerm {
    pub(crate) cells: Vec<CellId>,
    /// Interned activity ids, ascending.
    pub(crate) acts: Vec<u32>,
}

/// Per-sequence projection: every term index where a match of the node's
/// pattern can end, with the best relevance of such a match.
#[derive(Clone, Debug)]
pub(crate) struct SeqState<S> {
    pub(crate) seq: usize,
    pub(crate) ends: Vec<(usize, S)>,
}

#[derive(Clone, Debug)]
pub struct SearchNode<S> {
    pub(crate) terms: Vec<NodeTerm>,
    last_op: Operator,
    pub(crate) states: Vec<SeqState<S>>,
    relevance: S,
    bound: S,
    msr: S,
}

impl<S: Scalar> SearchNode<S> {
    pub fn last_operator(&self) -> Operator {
        self.last_op
    }

    /// Database relevance of the node's pattern.
    pub fn relevance(&self) -> &S {
        &self.relevance
    }

    /// Upper bound on the relevance of the node and every descendant:
    /// per sequence, the best match ending at some term plus everything
    /// after the last term's largest cell.
    pub fn bound(&self) -> &S {
        &self.bound
    }

    /// Sum of sequence relevance over the sequences the pattern matches.
    pub fn msr(&self) -> &S {
        &self.msr
    }

    pub fn matching_sequences(&self) -> usize {
        self.states.len()
    }

    pub fn is_emittable(&self) -> bool {
        !self.terms.is_empty() && self.terms.iter().all(|t| !t.acts.is_empty())
    }

    fn last_term(&self) -> Option<&NodeTerm> {
        self.terms.last()
    }
}

/// One candidate child: the item and the node it produces.
#[derive(Clone, Debug)]
pub(crate) struct Child<S> {
    pub(crate) item: Item,
    pub(crate) node: SearchNode<S>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Item {
    Loc(CellId),
    Act(u32),
    Seq(CellId),
}

#[derive(Debug, Default)]
pub(crate) struct Candidates<S> {
    pub(crate) l: Vec<Child<S>>,
    pub(crate) a: Vec<Child<S>>,
    pub(crate) s: Vec<Child<S>>,
    pub(crate) width_pruned: u64,
}

/// Ordered extension items of a node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtensionLists {
    pub l_list: Vec<CellId>,
    pub a_list: Vec<String>,
    pub s_list: Vec<CellId>,
}

/// Where the next a-concatenation may draw activities from.
#[derive(Clone, Copy, Debug)]
pub(crate) enum ActivityScope<'t> {
    /// Any activity not yet in the last term.
    Open,
    /// Only activities after the last one in lexicographic order.
    AfterMax,
    /// Only the remaining items of the parent's a-list, in that order.
    Tail(&'t [u32]),
}

/// Immutable per-database state shared by a mining run: the database, its
/// PRM and activity index, plus the strategy toggles that shape lists.
#[derive(Debug)]
pub struct MiningContext<'a, S> {
    db: &'a WlasDatabase<S>,
    prm: ProjectedRelevanceMatrix<S>,
    act: ActivityIndex,
    width_prune: bool,
    tu: bool,
}

impl<'a, S: Scalar> MiningContext<'a, S> {
    pub fn new(db: &'a WlasDatabase<S>, width_prune: bool, tu: bool) -> Self {
        Self {
            db,
            prm: ProjectedRelevanceMatrix::build(db),
            act: ActivityIndex::build(db),
            width_prune,
            tu,
        }
    }

    pub fn database(&self) -> &WlasDatabase<S> {
        self.db
    }

    pub fn prm(&self) -> &ProjectedRelevanceMatrix<S> {
        &self.prm
    }

    pub fn activity_index(&self) -> &ActivityIndex {
        &self.act
    }

    pub fn root(&self) -> SearchNode<S> {
        SearchNode {
            terms: Vec::new(),
            last_op: Operator::Root,
            states: (0..self.db.len())
                .map(|seq| SeqState { seq, ends: Vec::new() })
                .collect(),
            relevance: S::zero(),
            bound: self
                .db
                .sequences()
                .iter()
                .map(|s| s.terms.iter().map(|t| t.locations().total()).sum::<S>())
                .sum(),
            msr: (0..self.prm.len())
                .map(|i| self.prm.sequence(i).sequence_relevance().clone())
                .sum(),
        }
    }

    pub fn pattern(&self, node: &SearchNode<S>) -> TrajectoryPattern {
        TrajectoryPattern::new(
            node.terms
                .iter()
                .map(|t| {
                    PatternTerm::new(
                        t.cells.iter().copied(),
                        t.acts.iter().map(|&a| self.act.name(a).to_string()),
                    )
                })
                .collect(),
        )
    }

    /// Checked concatenation: enforces cell order within a term, the
    /// restriction that cells may not follow activities on the same term,
    /// and that a new term only starts after the previous one is complete.
    pub fn concat(&self, node: &SearchNode<S>, ext: &Extension) -> Result<SearchNode<S>> {
        let item = match ext {
            Extension::Location(cell) => {
                match node.last_op {
                    Operator::Root => return Err(Error::Precondition("l-concatenation at the root".into())),
                    Operator::Activity => {
                        return Err(Error::Precondition(
                            "l-concatenation after an a-concatenation on the same term".into(),
                        ))
                    }
                    _ => {}
                }
                let max = node.last_term().and_then(|t| t.cells.last()).copied();
                if max.is_some_and(|m| *cell <= m) {
                    return Err(Error::Precondition(format!(
                        "cell {cell} does not exceed the last term's largest cell"
                    )));
                }
                Item::Loc(*cell)
            }
            Extension::Activity(name) => {
                let Some(last) = node.last_term() else {
                    return Err(Error::Precondition("a-concatenation at the root".into()));
                };
                let id = self
                    .act
                    .id_of(name)
                    .ok_or_else(|| Error::Precondition(format!("activity `{name}` does not occur in the database")))?;
                if last.acts.contains(&id) {
                    return Err(Error::Precondition(format!(
                        "activity `{name}` already in the last term"
                    )));
                }
                Item::Act(id)
            }
            Extension::Sequence(cell) => {
                if matches!(node.last_op, Operator::Location | Operator::Sequence) {
                    return Err(Error::Precondition(
                        "s-concatenation before the last term has an activity".into(),
                    ));
                }
                Item::Seq(*cell)
            }
        };
        Ok(self.extend(node, item))
    }

    /// Builds the node of a pattern by replaying s, l and a steps from the
    /// root.
    pub fn node_for(&self, pattern: &TrajectoryPattern) -> Result<SearchNode<S>> {
        let mut node = self.root();
        for term in pattern.terms() {
            let (first, rest) = term
                .cells()
                .split_first()
                .ok_or_else(|| Error::Precondition("pattern term without cells".into()))?;
            node = self.concat(&node, &Extension::Sequence(*first))?;
            for c in rest {
                node = self.concat(&node, &Extension::Location(*c))?;
            }
            for a in term.activities() {
                node = self.concat(&node, &Extension::Activity(a.clone()))?;
            }
        }
        Ok(node)
    }

    pub(crate) fn extend(&self, node: &SearchNode<S>, item: Item) -> SearchNode<S> {
        let mut terms = node.terms.clone();
        let (last_op, states): (Operator, Vec<SeqState<S>>) = match item {
            Item::Loc(c) => {
                terms.last_mut().expect("l-step on a non-root node").cells.push(c);
                let states = node
                    .states
                    .iter()
                    .filter_map(|st| {
                        let m = self.prm.sequence(st.seq);
                        let ends: Vec<(usize, S)> = st
                            .ends
                            .iter()
                            .filter_map(|(j, r)| m.weight(c, *j).map(|w| (*j, r.clone() + w.clone())))
                            .collect();
                        (!ends.is_empty()).then_some(SeqState { seq: st.seq, ends })
                    })
                    .collect();
                (Operator::Location, states)
            }
            Item::Act(x) => {
                let acts = &mut terms.last_mut().expect("a-step on a non-root node").acts;
                let at = acts.partition_point(|a| *a < x);
                acts.insert(at, x);
                let states = node
                    .states
                    .iter()
                    .filter_map(|st| {
                        let ends: Vec<(usize, S)> = st
                            .ends
                            .iter()
                            .filter(|(j, _)| self.act.contains(x, *j, st.seq))
                            .cloned()
                            .collect();
                        (!ends.is_empty()).then_some(SeqState { seq: st.seq, ends })
                    })
                    .collect();
                (Operator::Activity, states)
            }
            Item::Seq(c) => {
                terms.push(NodeTerm {
                    cells: vec![c],
                    acts: Vec::new(),
                });
                let from_root = node.last_op == Operator::Root;
                let states = node
                    .states
                    .iter()
                    .filter_map(|st| {
                        let m = self.prm.sequence(st.seq);
                        let mut running: Option<S> = from_root.then(S::zero);
                        let mut k = 0;
                        let mut ends = Vec::new();
                        for j in 0..m.n_terms() {
                            while k < st.ends.len() && st.ends[k].0 < j {
                                let r = st.ends[k].1.clone();
                                running = Some(match running {
                                    Some(cur) => max_of(cur, r),
                                    None => r,
                                });
                                k += 1;
                            }
                            if let (Some(r), Some(w)) = (&running, m.weight(c, j)) {
                                ends.push((j, r.clone() + w.clone()));
                            }
                        }
                        (!ends.is_empty()).then_some(SeqState { seq: st.seq, ends })
                    })
                    .collect();
                (Operator::Sequence, states)
            }
        };
        self.finish(terms, last_op, states)
    }

    fn finish(&self, terms: Vec<NodeTerm>, last_op: Operator, states: Vec<SeqState<S>>) -> SearchNode<S> {
        let max_cell = terms.last().and_then(|t| t.cells.last()).copied();
        let mut relevance = S::zero();
        let mut bound = S::zero();
        let mut msr = S::zero();
        for st in &states {
            let m = self.prm.sequence(st.seq);
            let best = st
                .ends
                .iter()
                .map(|(_, r)| r.clone())
                .reduce(max_of)
                .unwrap_or_else(S::zero);
            let reach = st
                .ends
                .iter()
                .map(|(j, r)| match max_cell {
                    Some(c) => r.clone() + m.remaining(c, *j),
                    None => r.clone(),
                })
                .reduce(max_of)
                .unwrap_or_else(S::zero);
            relevance = relevance + best;
            bound = bound + reach;
            msr = msr + m.sequence_relevance().clone();
        }
        SearchNode {
            terms,
            last_op,
            states,
            relevance,
            bound,
            msr,
        }
    }

    /// Candidate children of a node, width-pruned against `threshold` and
    /// ordered. Lists follow the operator precedence l, a, s.
    pub(crate) fn candidates(&self, node: &SearchNode<S>, scope: ActivityScope<'_>, threshold: &S) -> Candidates<S> {
        self.candidates_with(node, scope, threshold, self.width_prune, self.tu)
    }

    fn candidates_with(
        &self,
        node: &SearchNode<S>,
        scope: ActivityScope<'_>,
        threshold: &S,
        width_prune: bool,
        tu: bool,
    ) -> Candidates<S> {
        let mut out = Candidates {
            l: Vec::new(),
            a: Vec::new(),
            s: Vec::new(),
            width_pruned: 0,
        };
        let open_term = matches!(node.last_op, Operator::Location | Operator::Sequence);
        let complete = matches!(node.last_op, Operator::Root | Operator::Activity);

        if open_term {
            let max = node.last_term().and_then(|t| t.cells.last()).copied();
            let mut cells = BTreeSet::new();
            for st in &node.states {
                let m = self.prm.sequence(st.seq);
                for (j, _) in &st.ends {
                    cells.extend(m.term_cells(*j).iter().filter(|c| max.is_none_or(|mx| **c > mx)));
                }
            }
            out.l = self.pruned_children(
                node,
                cells.into_iter().map(Item::Loc),
                threshold,
                width_prune,
                tu,
                &mut out.width_pruned,
            );
        }

        if node.last_op != Operator::Root {
            let last = node.last_term().expect("non-root node has a term");
            let mut present = BTreeSet::new();
            for st in &node.states {
                for (j, _) in &st.ends {
                    present.extend(self.act.term_activities(st.seq, *j).iter().copied());
                }
            }
            let items: Vec<u32> = match scope {
                ActivityScope::Tail(tail) => tail.iter().copied().filter(|a| present.contains(a)).collect(),
                ActivityScope::AfterMax => {
                    let max = last.acts.last().copied();
                    present.into_iter().filter(|a| max.is_none_or(|m| *a > m)).collect()
                }
                ActivityScope::Open => present.into_iter().filter(|a| !last.acts.contains(a)).collect(),
            };
            out.a = items
                .into_iter()
                .map(|a| Child {
                    item: Item::Act(a),
                    node: self.extend(node, Item::Act(a)),
                })
                .collect();
            // a tail keeps the parent's order
            if !matches!(scope, ActivityScope::Tail(_)) {
                order(&mut out.a, tu);
            }
        }

        if complete {
            let mut cells = BTreeSet::new();
            for st in &node.states {
                let m = self.prm.sequence(st.seq);
                let start = if node.last_op == Operator::Root {
                    0
                } else {
                    st.ends.first().map_or(m.n_terms(), |(j, _)| j + 1)
                };
                for j in start..m.n_terms() {
                    cells.extend(m.term_cells(j).iter().copied());
                }
            }
            out.s = self.pruned_children(
                node,
                cells.into_iter().map(Item::Seq),
                threshold,
                width_prune,
                tu,
                &mut out.width_pruned,
            );
        }
        out
    }

    fn pruned_children(
        &self,
        node: &SearchNode<S>,
        items: impl Iterator<Item = Item>,
        threshold: &S,
        width_prune: bool,
        tu: bool,
        width_pruned: &mut u64,
    ) -> Vec<Child<S>> {
        let mut children = Vec::new();
        for item in items {
            let child = self.extend(node, item);
            if child.states.is_empty() {
                continue;
            }
            if width_prune && child.msr < *threshold {
                *width_pruned += 1;
                continue;
            }
            children.push(Child { item, node: child });
        }
        order(&mut children, tu);
        children
    }

    /// The ordered extension lists of a node. At an activity node the
    /// a-list holds activities after the last one lexicographically.
    pub fn extension_lists(&self, node: &SearchNode<S>, threshold: &S) -> ExtensionLists {
        let c = self.candidates(node, ActivityScope::AfterMax, threshold);
        let cell = |ch: &Child<S>| match ch.item {
            Item::Loc(c) | Item::Seq(c) => c,
            Item::Act(_) => unreachable!("cell list holds cells"),
        };
        ExtensionLists {
            l_list: c.l.iter().map(cell).collect(),
            a_list: c
                .a
                .iter()
                .map(|ch| match ch.item {
                    Item::Act(a) => self.act.name(a).to_string(),
                    _ => unreachable!("activity list holds activities"),
                })
                .collect(),
            s_list: c.s.iter().map(cell).collect(),
        }
    }

    /// Best relevance among the node and all its emittable descendants,
    /// searched without any pruning. Exponential; for tests on small data.
    pub fn best_descendant(&self, node: &SearchNode<S>) -> S {
        let mut best = if node.is_emittable() {
            node.relevance.clone()
        } else {
            S::zero()
        };
        let scope = if node.last_op == Operator::Activity {
            ActivityScope::AfterMax
        } else {
            ActivityScope::Open
        };
        self.walk(node, scope, &mut best);
        best
    }

    fn walk(&self, node: &SearchNode<S>, scope: ActivityScope<'_>, best: &mut S) {
        let c = self.candidates_with(node, scope, &S::zero(), false, false);
        for child in c.l.iter().chain(&c.s) {
            self.walk(&child.node, ActivityScope::Open, best);
        }
        for child in &c.a {
            if child.node.relevance > *best {
                *best = child.node.relevance.clone();
            }
            self.walk(&child.node, ActivityScope::AfterMax, best);
        }
    }
}

/// Lexicographic by item, or by descending child bound when TU is on.
fn order<S: Scalar>(children: &mut [Child<S>], tu: bool) {
    if tu {
        children.sort_by(|x, y| cmp_scores(&y.node.bound, &x.node.bound).then(x.item.cmp(&y.item)));
    } else {
        children.sort_by_key(|x| x.item);
    }
}
