//! Disjunctive resolved feature structures in compact form.
//!
//! All resolvents of a structure share its graph and differ only in their
//! labels, so the whole set is one graph plus a relation over node labels.
//! [`CompactDrfs`] stores that relation factored as finely as possible: a
//! node whose species never varies is `Fixed`, a node that varies
//! independently of everything else is `Free`, and each group of nodes that
//! vary jointly shares one named disjunction whose alternatives are chosen
//! together across all of its columns.

use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::csp::{self, Component, Csp};
use crate::factor::{self, Block};
use crate::fstruct::{merge_graphs, FeatureGraph};
use crate::hierarchy::CompiledSignature;
use crate::resolve::{self, LabellingRelation, ResolvedFs};
use crate::species::{NodeId, SpeciesId, SpeciesSet};

/// Name of a disjunction, local to one structure; numbered from 1 in
/// first-occurrence order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DisjunctionName(u32);

impl DisjunctionName {
    pub fn number(self) -> u32 {
        self.0
    }

    fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for DisjunctionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${}", self.0)
    }
}

/// How a node's species is chosen.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Binding {
    Fixed(SpeciesId),
    /// Any member, independently of every other choice.
    Free(SpeciesSet),
    /// The value at the chosen alternative of `name`.
    Column { name: DisjunctionName, values: Vec<SpeciesId> },
}

impl Binding {
    fn species(&self, universe: usize) -> SpeciesSet {
        match self {
            Binding::Fixed(s) => SpeciesSet::singleton(universe, *s),
            Binding::Free(set) => set.clone(),
            Binding::Column { values, .. } => SpeciesSet::from_iter_in(universe, values.iter().copied()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DrfsError {
    #[error("cannot compact an empty labelling relation")]
    EmptyRelation,
    #[error("relation has arity {found}, graph has {expected} nodes")]
    ArityMismatch { expected: usize, found: usize },
    #[error("node {0} already has that feature")]
    ArcExists(NodeId),
    #[error("no node {0}")]
    NoSuchNode(NodeId),
    #[error("the feature is not appropriate to any choice at node {0}")]
    Inappropriate(NodeId),
}

/// One graph, one factored labelling relation. Always in canonical form:
/// nodes numbered in DFS order, names numbered by first node, alternatives
/// sorted. Structural equality is therefore isomorphism.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CompactDrfs {
    graph: FeatureGraph,
    bindings: Vec<Binding>,
    arities: Vec<usize>,
}

impl CompactDrfs {
    /// Build from a shape and a set of blocks covering every node exactly
    /// once. Returns the structure and, per canonical node, the input node.
    pub(crate) fn from_blocks(shape: &FeatureGraph, blocks: Vec<Block>) -> (CompactDrfs, Vec<NodeId>) {
        let (canon, from) = shape.canonical();
        let mut new_id = vec![0usize; shape.len()];
        for (i, old) in from.iter().enumerate() {
            new_id[old.index()] = i;
        }
        let mut parts: Vec<Block> = blocks
            .into_iter()
            .flat_map(|b| {
                let renamed = Block::new(b.vars.iter().map(|&v| new_id[v]).collect(), b.tuples);
                factor::finest(&renamed.sorted())
            })
            .collect();
        parts.sort_by_key(|b| b.vars[0]);

        let universe = shape.label(shape.root()).universe();
        let mut bindings: Vec<Option<Binding>> = vec![None; shape.len()];
        let mut arities = Vec::new();
        for part in parts {
            if part.vars.len() == 1 {
                let values = part.tuples.iter().map(|t| SpeciesId::new(t[0]));
                let binding = if part.tuples.len() == 1 {
                    Binding::Fixed(SpeciesId::new(part.tuples[0][0]))
                } else {
                    Binding::Free(SpeciesSet::from_iter_in(universe, values))
                };
                assert!(bindings[part.vars[0]].replace(binding).is_none(), "node bound twice");
                continue;
            }
            arities.push(part.tuples.len());
            let name = DisjunctionName(arities.len() as u32);
            for (pos, &v) in part.vars.iter().enumerate() {
                let values = part.tuples.iter().map(|t| SpeciesId::new(t[pos])).collect();
                assert!(bindings[v].replace(Binding::Column { name, values }).is_none(), "node bound twice");
            }
        }
        let bindings: Vec<Binding> =
            bindings.into_iter().map(|b| b.expect("every node needs a binding")).collect();
        let graph = canon
            .relabel(bindings.iter().map(|b| b.species(universe)))
            .expect("bindings are nonempty");
        (CompactDrfs { graph, bindings, arities }, from)
    }

    /// Bindings as blocks over node indices.
    pub(crate) fn blocks(&self) -> Vec<Block> {
        let mut named: Vec<Block> = self.arities.iter().map(|_| Block::new(Vec::new(), Vec::new())).collect();
        let mut out = Vec::new();
        for (n, binding) in self.bindings.iter().enumerate() {
            match binding {
                Binding::Fixed(s) => out.push(Block::new(vec![n], vec![vec![s.index()]])),
                Binding::Free(set) => out.push(Block::new(vec![n], set.iter().map(|s| vec![s.index()]).collect())),
                Binding::Column { name, values } => {
                    let block = &mut named[name.index()];
                    if block.tuples.is_empty() {
                        block.tuples = vec![Vec::new(); values.len()];
                    }
                    block.vars.push(n);
                    for (row, v) in block.tuples.iter_mut().zip(values) {
                        row.push(v.index());
                    }
                }
            }
        }
        out.extend(named);
        out
    }

    pub fn graph(&self) -> &FeatureGraph {
        &self.graph
    }

    pub fn binding(&self, node: NodeId) -> &Binding {
        &self.bindings[node.index()]
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }

    /// Arity of each name, `$1` first.
    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn names(&self) -> impl Iterator<Item = (DisjunctionName, usize)> + '_ {
        self.arities.iter().enumerate().map(|(i, &k)| (DisjunctionName(i as u32 + 1), k))
    }

    /// Nodes carrying a column of `name`, in node order.
    pub fn columns(&self, name: DisjunctionName) -> Vec<NodeId> {
        self.bindings
            .iter()
            .enumerate()
            .filter(|(_, b)| matches!(b, Binding::Column { name: n, .. } if *n == name))
            .map(|(i, _)| NodeId::new(i))
            .collect()
    }

    /// Product of arities and Free sizes.
    pub fn expansion_size(&self) -> u128 {
        let names: u128 = self.arities.iter().map(|&k| k as u128).product();
        let free: u128 = self
            .bindings
            .iter()
            .filter_map(|b| match b {
                Binding::Free(s) => Some(s.len() as u128),
                _ => None,
            })
            .product();
        names * free
    }

    /// The labelling relation this structure stands for.
    pub fn relation(&self) -> LabellingRelation {
        let components: Vec<Component> = self
            .blocks()
            .into_iter()
            .map(|b| Component { vars: b.vars, tuples: b.tuples })
            .collect();
        let tuples = csp::product(self.graph.len(), &components);
        LabellingRelation::new(self.graph.len(), tuples.into_iter().map(|t| t.into_iter().map(SpeciesId::new).collect()))
    }

    /// Every resolved structure in the set, in relation order.
    pub fn expand(&self) -> Vec<ResolvedFs> {
        self.relation().materialize(&self.graph)
    }

    /// Structural invariants; `Err` names the first one violated.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !self.graph.is_canonical() {
            return Err("graph is not in canonical order".into());
        }
        if self.bindings.len() != self.graph.len() {
            return Err("one binding per node required".into());
        }
        let universe = self.graph.label(self.graph.root()).universe();
        for (n, b) in self.bindings.iter().enumerate() {
            if &b.species(universe) != self.graph.label(NodeId::new(n)) {
                return Err(format!("label of node {n} disagrees with its binding"));
            }
            match b {
                Binding::Free(s) if s.len() < 2 => return Err(format!("Free set at node {n} has fewer than two members")),
                Binding::Column { name, values } => {
                    if name.index() >= self.arities.len() || values.len() != self.arities[name.index()] {
                        return Err(format!("column at node {n} has the wrong arity for {name}"));
                    }
                    if values.iter().all(|v| *v == values[0]) {
                        return Err(format!("column at node {n} is constant"));
                    }
                }
                _ => {}
            }
        }
        let mut first_nodes = Vec::new();
        for (name, arity) in self.names() {
            if arity < 2 {
                return Err(format!("{name} has arity {arity}"));
            }
            let nodes = self.columns(name);
            if nodes.len() < 2 {
                return Err(format!("{name} has fewer than two columns"));
            }
            first_nodes.push(nodes[0]);
            let block = self.blocks().into_iter().find(|b| b.vars == nodes.iter().map(|n| n.index()).collect::<Vec<_>>());
            let block = block.ok_or_else(|| format!("{name} is not a block"))?;
            let mut distinct = block.tuples.clone();
            distinct.sort();
            distinct.dedup();
            if distinct.len() != block.tuples.len() || distinct != block.tuples {
                return Err(format!("alternatives of {name} are repeated or unsorted"));
            }
            if factor::finest(&block).len() != 1 {
                return Err(format!("{name} factors into independent disjunctions"));
            }
        }
        if first_nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err("names are not numbered in first-occurrence order".into());
        }
        Ok(())
    }

    /// Whether every expansion is well typed at the species level.
    pub fn all_resolved(&self, sig: &CompiledSignature) -> bool {
        let blocks = self.blocks();
        let mut owner = vec![(0usize, 0usize); self.graph.len()];
        for (bi, b) in blocks.iter().enumerate() {
            for (pos, &v) in b.vars.iter().enumerate() {
                owner[v] = (bi, pos);
            }
        }
        let licensed = |s: usize, f, t: usize| {
            sig.spec_approp(SpeciesId::new(s), f).is_some_and(|v| v.contains(SpeciesId::new(t)))
        };
        self.graph.arcs().all(|(n, f, m)| {
            let (bn, pn) = owner[n.index()];
            let (bm, pm) = owner[m.index()];
            if bn == bm {
                blocks[bn].tuples.iter().all(|t| licensed(t[pn], f, t[pm]))
            } else {
                blocks[bn].tuples.iter().all(|a| blocks[bm].tuples.iter().all(|b| licensed(a[pn], f, b[pm])))
            }
        })
    }

    /// Remove the leaf arc `(node, feature)` and its target, projecting the
    /// relation. Returns the smaller structure and the new id of `node`.
    pub(crate) fn remove_leaf(&self, node: NodeId, feature: crate::species::FeatureId) -> (CompactDrfs, NodeId) {
        let leaf = self.graph.arc(node, feature).expect("arc to remove");
        assert!(self.graph.node(leaf).arcs.is_empty() && leaf != self.graph.root());
        let keep: Vec<usize> = (0..self.graph.len()).filter(|&i| i != leaf.index()).collect();
        let mut old_to_new = vec![usize::MAX; self.graph.len()];
        for (new, &old) in keep.iter().enumerate() {
            old_to_new[old] = new;
        }
        let mut builder = crate::fstruct::GraphBuilder::new();
        for &old in &keep {
            builder.node(self.graph.label(NodeId::new(old)).clone());
        }
        for (n, f, m) in self.graph.arcs() {
            if n == node && f == feature {
                continue;
            }
            builder
                .arc(NodeId::new(old_to_new[n.index()]), f, NodeId::new(old_to_new[m.index()]))
                .expect("arcs stay deterministic");
        }
        let shape = builder.finish(NodeId::new(old_to_new[self.graph.root().index()])).expect("still connected");
        let blocks: Vec<Block> = self
            .blocks()
            .into_iter()
            .filter_map(|b| {
                let positions: Vec<usize> = (0..b.vars.len()).filter(|&p| b.vars[p] != leaf.index()).collect();
                if positions.is_empty() {
                    return None;
                }
                let projected = b.project(&positions);
                Some(Block::new(projected.vars.iter().map(|&v| old_to_new[v]).collect(), projected.tuples))
            })
            .collect();
        let (out, from) = CompactDrfs::from_blocks(&shape, blocks);
        let moved = NodeId::new(old_to_new[node.index()]);
        let new_node = NodeId::new(from.iter().position(|&n| n == moved).unwrap());
        (out, new_node)
    }
}

/// Compact a nonempty labelling relation over `graph`'s nodes.
pub fn compact(graph: &FeatureGraph, rel: &LabellingRelation) -> Result<CompactDrfs, DrfsError> {
    if rel.is_empty() {
        return Err(DrfsError::EmptyRelation);
    }
    if rel.nodes().len() != graph.len() {
        return Err(DrfsError::ArityMismatch { expected: graph.len(), found: rel.nodes().len() });
    }
    let tuples = rel.tuples().iter().map(|t| t.iter().map(|s| s.index()).collect()).collect();
    let block = Block::new((0..graph.len()).collect(), tuples);
    Ok(CompactDrfs::from_blocks(graph, vec![block]).0)
}

/// Resolve and compact without materializing the full relation. `None` when
/// `graph` is unsatisfiable.
pub fn resolve_compact(sig: &CompiledSignature, graph: &FeatureGraph) -> Option<CompactDrfs> {
    let components = resolve::resolve_factored(sig, graph)?;
    let blocks = components.into_iter().map(|c| Block::new(c.vars, c.tuples)).collect();
    Some(CompactDrfs::from_blocks(graph, blocks).0)
}

/// Variables for the names of `d`, tied to the node variables `image`.
fn add_name_constraints(csp: &mut Csp, d: &CompactDrfs, image: &[NodeId], universe: usize) {
    let vars: Vec<usize> = d
        .arities
        .iter()
        .map(|&k| {
            let mut all = FixedBitSet::with_capacity(k);
            all.insert_range(..);
            csp.add_var(all)
        })
        .collect();
    for (n, binding) in d.bindings.iter().enumerate() {
        if let Binding::Column { name, values } = binding {
            csp.add_constraint(vars[name.index()], image[n].index(), |alt| {
                let mut only = FixedBitSet::with_capacity(universe);
                only.insert(values[alt].index());
                only
            });
        }
    }
}

/// Solve a shape against embedded structures and keep the node columns.
fn solve_over(sig: &CompiledSignature, shape: &FeatureGraph, embedded: &[(&CompactDrfs, &[NodeId])]) -> Option<CompactDrfs> {
    let universe = sig.species_count();
    let mut csp = resolve::resolution_csp(sig, shape);
    for (d, image) in embedded {
        add_name_constraints(&mut csp, d, image, universe);
    }
    let node_count = shape.len();
    let components = csp.solve()?;
    let blocks = components
        .into_iter()
        .filter_map(|c| {
            let positions: Vec<usize> = (0..c.vars.len()).filter(|&p| c.vars[p] < node_count).collect();
            if positions.is_empty() {
                return None;
            }
            Some(Block::new(c.vars, c.tuples).project(&positions))
        })
        .collect();
    Some(CompactDrfs::from_blocks(shape, blocks).0)
}

/// Unify two compact structures. Arcs present on one side only are filled
/// on demand from the appropriateness table; choices that cannot take a
/// demanded feature drop out. `None` when no pair of alternatives agrees.
pub fn drfs_unify(sig: &CompiledSignature, a: &CompactDrfs, b: &CompactDrfs) -> Option<CompactDrfs> {
    let merged = merge_graphs(&a.graph, &b.graph)?;
    solve_over(sig, &merged.graph, &[(a, &merged.left), (b, &merged.right)])
}

/// Add arc `feature` from `node` to a fresh node whose species is anything
/// appropriate to the species chosen at `node`.
pub fn fill_node(
    sig: &CompiledSignature,
    d: &CompactDrfs,
    node: NodeId,
    feature: crate::species::FeatureId,
) -> Result<CompactDrfs, DrfsError> {
    if node.index() >= d.graph.len() {
        return Err(DrfsError::NoSuchNode(node));
    }
    if d.graph.arc(node, feature).is_some() {
        return Err(DrfsError::ArcExists(node));
    }
    let mut builder = crate::fstruct::GraphBuilder::new();
    for n in d.graph.nodes() {
        builder.node(d.graph.label(n).clone());
    }
    for (n, f, m) in d.graph.arcs() {
        builder.arc(n, f, m).expect("copied arcs are deterministic");
    }
    let fresh = builder.node(sig.all_species());
    builder.arc(node, feature, fresh).expect("checked above");
    let shape = builder.finish(d.graph.root()).expect("fresh node hangs off a reachable node");
    let image: Vec<NodeId> = d.graph.nodes().collect();
    solve_over(sig, &shape, &[(d, &image)]).ok_or(DrfsError::Inappropriate(node))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolve::resolve;
    use crate::test_fixtures::{graph, rho, rho2};

    fn compacted(sig: &CompiledSignature, avm: &str) -> CompactDrfs {
        let g = graph(sig, avm);
        compact(&g, &resolve(sig, &g)).unwrap()
    }

    fn species(sig: &CompiledSignature, names: &[&str]) -> Vec<SpeciesId> {
        names.iter().map(|n| sig.species_id(n).unwrap()).collect()
    }

    #[test]
    fn rho_compaction_has_one_name() {
        let sig = rho();
        let d = compacted(&sig, "t(f:bool, g:bool)");
        d.check_invariants().unwrap();
        assert_eq!(d.arities(), &[2]);
        let name = DisjunctionName(1);
        assert_eq!(d.binding(NodeId::new(0)), &Binding::Column { name, values: species(&sig, &["t'", "t''"]) });
        assert_eq!(d.binding(NodeId::new(1)), &Binding::Column { name, values: species(&sig, &["+", "-"]) });
        assert_eq!(d.binding(NodeId::new(2)), &Binding::Column { name, values: species(&sig, &["+", "-"]) });
        assert_eq!(d.expansion_size(), 2);
        let expanded = d.expand();
        assert!(expanded[0].is_isomorphic(&graph(&sig, "t'(f:+, g:+)")));
        assert!(expanded[1].is_isomorphic(&graph(&sig, "t''(f:-, g:-)")));
    }

    #[test]
    fn singleton_relation_is_all_fixed() {
        let sig = rho();
        let d = compacted(&sig, "t(f:+)");
        assert!(d.arities().is_empty());
        assert!(d.bindings().iter().all(|b| matches!(b, Binding::Fixed(_))));
        assert_eq!(d.expand().len(), 1);
    }

    #[test]
    fn independent_substructures_get_independent_names() {
        let sig = rho2();
        let d = compacted(&sig, "pair(l:t(f:bool, g:bool), r:t(f:bool, g:bool))");
        d.check_invariants().unwrap();
        assert_eq!(d.arities(), &[2, 2]);
        let first = d.columns(DisjunctionName(1));
        let second = d.columns(DisjunctionName(2));
        assert_eq!(first.iter().map(|n| n.index()).collect::<Vec<_>>(), [1, 2, 3]);
        assert_eq!(second.iter().map(|n| n.index()).collect::<Vec<_>>(), [4, 5, 6]);
        assert_eq!(d.expand().len(), 4);
    }

    #[test]
    fn free_binding_expands_per_member() {
        let sig = rho();
        let d = compacted(&sig, "bool");
        assert!(matches!(d.binding(NodeId::new(0)), Binding::Free(s) if s.len() == 2));
        assert_eq!(d.expand().len(), 2);
        assert_eq!(d.relation(), resolve(&sig, &graph(&sig, "bool")));
    }

    #[test]
    fn compact_rejects_empty_relation() {
        let sig = rho();
        let g = graph(&sig, "t(f:+, g:-)");
        assert_eq!(compact(&g, &resolve(&sig, &g)), Err(DrfsError::EmptyRelation));
        assert!(resolve_compact(&sig, &g).is_none());
    }

    #[test]
    fn resolve_compact_matches_compact_of_resolve() {
        let sig = rho2();
        for avm in ["pair(l:t(f:bool, g:bool), r:t(f:bool, g:bool))", "t(f:bool)", "pair(l:#1=t, r:#1)"] {
            let g = graph(&sig, avm);
            assert_eq!(resolve_compact(&sig, &g).unwrap(), compact(&g, &resolve(&sig, &g)).unwrap(), "{avm}");
        }
    }

    #[test]
    fn unify_fills_on_demand() {
        let sig = rho();
        let bare = compacted(&sig, "t");
        let other = compacted(&sig, "t(g:-)");
        let u = drfs_unify(&sig, &bare, &other).unwrap();
        assert_eq!(u, compacted(&sig, "t''(g:-)"));
    }

    #[test]
    fn unify_is_idempotent_on_rho() {
        let sig = rho();
        let d = compacted(&sig, "t(f:bool, g:bool)");
        assert_eq!(drfs_unify(&sig, &d, &d).unwrap(), d);
    }

    #[test]
    fn unify_reproduces_the_counterexample_failure() {
        let sig = rho();
        let a = compacted(&sig, "t(f:+)");
        let b = compacted(&sig, "t(g:-)");
        assert!(drfs_unify(&sig, &a, &b).is_none());
    }

    #[test]
    fn fill_examples() {
        let sig = rho();
        let f = sig.feature_id("f").unwrap();
        let bare = compacted(&sig, "t");
        let filled = fill_node(&sig, &bare, NodeId::new(0), f).unwrap();
        assert_eq!(filled, compacted(&sig, "t(f:bool)"));
        assert_eq!(filled.arities(), &[2]);

        let fixed = compacted(&sig, "t'");
        assert_eq!(fill_node(&sig, &fixed, NodeId::new(0), f).unwrap(), compacted(&sig, "t'(f:+)"));

        let plus = compacted(&sig, "+");
        assert_eq!(fill_node(&sig, &plus, NodeId::new(0), f), Err(DrfsError::Inappropriate(NodeId::new(0))));
        assert_eq!(fill_node(&sig, &filled, NodeId::new(0), f), Err(DrfsError::ArcExists(NodeId::new(0))));
    }

    #[test]
    fn fill_prunes_choices_without_the_feature() {
        // root is {+, t'}: only t' takes f
        let sig = rho();
        let g = graph(&sig, "{+ t'}");
        let d = compact(&g, &resolve(&sig, &g)).unwrap();
        let filled = fill_node(&sig, &d, NodeId::new(0), sig.feature_id("f").unwrap()).unwrap();
        assert_eq!(filled, compacted(&sig, "t'(f:+)"));
    }

    #[test]
    fn all_resolved_detects_bad_free_sets() {
        let sig = rho();
        let d = compacted(&sig, "t(f:bool, g:bool)");
        assert!(d.all_resolved(&sig));
        // root {t',t''} independent of f {+,-}: not every choice is licensed
        let g = graph(&sig, "t(f:bool)");
        let rel = LabellingRelation::new(2, brute_pairs(&sig));
        let loose = compact(&g, &rel).unwrap();
        assert!(!loose.all_resolved(&sig));
    }

    fn brute_pairs(sig: &CompiledSignature) -> Vec<Vec<SpeciesId>> {
        let mut out = Vec::new();
        for r in species(sig, &["t'", "t''"]) {
            for v in species(sig, &["+", "-"]) {
                out.push(vec![r, v]);
            }
        }
        out
    }
}
