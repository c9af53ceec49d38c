//! Well-typedness, well-typability and type resolution.
//!
//! Resolution is the decision procedure: a structure is satisfiable iff it
//! has at least one resolvent, a same-graph relabelling with one species per
//! node in which every arc is licensed by the species-level appropriateness
//! table. Well-typability is weaker and is kept for contrast: it only asks
//! for *some* types, not species, so it misses restrictions that are encoded
//! exclusively on species.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use thiserror::Error;

use crate::csp::{self, Component, Csp};
use crate::fstruct::FeatureGraph;
use crate::hierarchy::CompiledSignature;
use crate::species::{FeatureId, NodeId, SpeciesId, SpeciesSet, TypeId};

/// A feature graph whose every label is a single species.
pub type ResolvedFs = FeatureGraph;

/// Default cap on the Cartesian product explored by [`brute_force_resolve`].
pub const DEFAULT_BOUND: u64 = 1_000_000;

/// The resolvents of one graph, as species tuples indexed by node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabellingRelation {
    nodes: Vec<NodeId>,
    tuples: BTreeSet<Vec<SpeciesId>>,
}

impl LabellingRelation {
    /// A relation over nodes `0..node_count`.
    pub fn new(node_count: usize, tuples: impl IntoIterator<Item = Vec<SpeciesId>>) -> Self {
        let tuples: BTreeSet<Vec<SpeciesId>> = tuples.into_iter().collect();
        assert!(tuples.iter().all(|t| t.len() == node_count), "tuple arity must match node count");
        LabellingRelation { nodes: (0..node_count).map(NodeId::new).collect(), tuples }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn tuples(&self) -> &BTreeSet<Vec<SpeciesId>> {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[SpeciesId]) -> bool {
        self.tuples.contains(tuple)
    }

    /// The resolvents as graphs, in tuple order.
    pub fn materialize(&self, graph: &FeatureGraph) -> Vec<ResolvedFs> {
        self.tuples.iter().map(|t| materialize(graph, t)).collect()
    }
}

/// Relabel `graph` with one species per node.
pub fn materialize(graph: &FeatureGraph, tuple: &[SpeciesId]) -> ResolvedFs {
    let universe = graph.label(graph.root()).universe();
    graph
        .relabel(tuple.iter().map(|&s| SpeciesSet::singleton(universe, s)))
        .expect("singleton labels are never empty")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypingError {
    #[error("label of node {0} is not the species set of any declared type")]
    NotDenotable(NodeId),
    #[error("feature {feature:?} on node {node} is not appropriate with that value")]
    IllTypedArc { node: NodeId, feature: FeatureId },
    #[error("no consistent assignment of types to nodes")]
    Inconsistent,
}

fn type_bits(sig: &CompiledSignature, pick: impl Fn(TypeId) -> bool) -> FixedBitSet {
    let mut bits = FixedBitSet::with_capacity(sig.type_count());
    for t in sig.types().filter(|&t| pick(t)) {
        bits.insert(t.index());
    }
    bits
}

/// Type-level network: node `n` ranges over the types in `domain(n)`, and an
/// arc `(n, f, m)` admits `(t, u)` iff `Approp(t, f)` is defined and
/// subsumes `u`.
fn typing_csp(sig: &CompiledSignature, graph: &FeatureGraph, domains: Vec<FixedBitSet>) -> Csp {
    let mut csp = Csp::new();
    for d in domains {
        csp.add_var(d);
    }
    for (n, f, m) in graph.arcs() {
        csp.add_constraint(n.index(), m.index(), |t| {
            match sig.approp(TypeId::new(t), f) {
                Some(v) => type_bits(sig, |u| sig.species_set(u).is_subset(sig.species_set(v))),
                None => FixedBitSet::with_capacity(sig.type_count()),
            }
        });
    }
    csp
}

/// Like [`is_well_typed`], with a diagnostic on failure.
pub fn check_well_typed(sig: &CompiledSignature, graph: &FeatureGraph) -> Result<(), TypingError> {
    let mut domains = Vec::with_capacity(graph.len());
    for n in graph.nodes() {
        let d = type_bits(sig, |t| sig.species_set(t) == graph.label(n));
        if d.is_clear() {
            return Err(TypingError::NotDenotable(n));
        }
        domains.push(d);
    }
    for (n, f, m) in graph.arcs() {
        let ok = domains[n.index()].ones().any(|t| {
            sig.approp(TypeId::new(t), f)
                .is_some_and(|v| graph.label(m).is_subset(sig.species_set(v)))
        });
        if !ok {
            return Err(TypingError::IllTypedArc { node: n, feature: f });
        }
    }
    if typing_csp(sig, graph, domains).satisfiable() {
        Ok(())
    } else {
        Err(TypingError::Inconsistent)
    }
}

/// Every arc's source type has the feature appropriate with a value type that
/// subsumes the target's type. A node's type is any declared type whose
/// species set equals the node's label, chosen consistently per node.
pub fn is_well_typed(sig: &CompiledSignature, graph: &FeatureGraph) -> bool {
    check_well_typed(sig, graph).is_ok()
}

/// Some same-graph refinement of the labels to declared types is well typed.
pub fn is_well_typable(sig: &CompiledSignature, graph: &FeatureGraph) -> bool {
    let domains = graph
        .nodes()
        .map(|n| type_bits(sig, |t| sig.species_set(t).is_subset(graph.label(n))))
        .collect();
    typing_csp(sig, graph, domains).satisfiable()
}

/// Species-level network over the nodes of `graph`.
pub(crate) fn resolution_csp(sig: &CompiledSignature, graph: &FeatureGraph) -> Csp {
    let mut csp = Csp::new();
    for n in graph.nodes() {
        csp.add_var(graph.label(n).bits().clone());
    }
    add_arc_constraints(sig, graph, &mut csp);
    csp
}

/// Arc constraints for node variables numbered like the graph's nodes.
pub(crate) fn add_arc_constraints(sig: &CompiledSignature, graph: &FeatureGraph, csp: &mut Csp) {
    for (n, f, m) in graph.arcs() {
        csp.add_constraint(n.index(), m.index(), |s| match sig.spec_approp(SpeciesId::new(s), f) {
            Some(values) => values.bits().clone(),
            None => FixedBitSet::with_capacity(sig.species_count()),
        });
    }
}

/// Resolution in factored form; `None` when unsatisfiable.
pub(crate) fn resolve_factored(sig: &CompiledSignature, graph: &FeatureGraph) -> Option<Vec<Component>> {
    resolution_csp(sig, graph).solve()
}

/// All resolvents of `graph`. Empty means unsatisfiable.
pub fn resolve(sig: &CompiledSignature, graph: &FeatureGraph) -> LabellingRelation {
    let tuples = match resolve_factored(sig, graph) {
        Some(components) => csp::product(graph.len(), &components),
        None => Vec::new(),
    };
    LabellingRelation::new(graph.len(), tuples.into_iter().map(|t| t.into_iter().map(SpeciesId::new).collect()))
}

pub fn is_satisfiable(sig: &CompiledSignature, graph: &FeatureGraph) -> bool {
    resolution_csp(sig, graph).satisfiable()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{combinations} labellings exceed the bound of {bound}")]
pub struct BoundExceeded {
    pub combinations: u128,
    pub bound: u64,
}

/// Resolution by literal enumeration of every per-node species choice.
pub fn brute_force_resolve(
    sig: &CompiledSignature,
    graph: &FeatureGraph,
    bound: u64,
) -> Result<LabellingRelation, BoundExceeded> {
    let combinations: u128 = graph.nodes().map(|n| graph.label(n).len() as u128).product();
    if combinations > u128::from(bound) {
        return Err(BoundExceeded { combinations, bound });
    }
    let choices: Vec<Vec<SpeciesId>> = graph.nodes().map(|n| graph.label(n).iter().collect()).collect();
    let arcs: Vec<(NodeId, FeatureId, NodeId)> = graph.arcs().collect();
    let licensed = |tuple: &[SpeciesId]| {
        arcs.iter().all(|&(n, f, m)| {
            sig.spec_approp(tuple[n.index()], f).is_some_and(|v| v.contains(tuple[m.index()]))
        })
    };
    let tuples = choices.into_iter().multi_cartesian_product().filter(|t| licensed(t));
    Ok(LabellingRelation::new(graph.len(), tuples))
}
