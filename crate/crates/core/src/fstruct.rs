//! Feature-structure graphs.
//!
//! A [`FeatureGraph`] is a rooted graph whose nodes are labelled with sets of
//! species and whose arcs carry features. Every node is reachable from the
//! root, each node has at most one arc per feature, and no label is empty.
//! Reentrancy is node sharing; cycles are allowed.

use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::hierarchy::CompiledSignature;
use crate::species::{FeatureId, NodeId, SpeciesSet};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub label: SpeciesSet,
    pub arcs: BTreeMap<FeatureId, NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeatureGraph {
    root: NodeId,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node {0} has an empty label")]
    EmptyLabel(usize),
    #[error("node {0} is not reachable from the root")]
    Unreachable(usize),
    #[error("arc target {target} out of range")]
    DanglingArc { target: usize },
    #[error("node {node} already has feature {feature}")]
    DuplicateFeature { node: usize, feature: usize },
    #[error("graph has no root node")]
    Empty,
}

/// Incremental graph construction.
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    nodes: Vec<Node>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, label: SpeciesSet) -> NodeId {
        self.nodes.push(Node { label, arcs: BTreeMap::new() });
        NodeId::new(self.nodes.len() - 1)
    }

    pub fn arc(&mut self, from: NodeId, feature: FeatureId, to: NodeId) -> Result<(), GraphError> {
        if to.index() >= self.nodes.len() {
            return Err(GraphError::DanglingArc { target: to.index() });
        }
        let arcs = &mut self.nodes[from.index()].arcs;
        if arcs.contains_key(&feature) {
            return Err(GraphError::DuplicateFeature { node: from.index(), feature: feature.index() });
        }
        arcs.insert(feature, to);
        Ok(())
    }

    pub fn label_mut(&mut self, node: NodeId) -> &mut SpeciesSet {
        &mut self.nodes[node.index()].label
    }

    pub fn finish(self, root: NodeId) -> Result<FeatureGraph, GraphError> {
        FeatureGraph::new(root, self.nodes)
    }
}

impl FeatureGraph {
    pub fn new(root: NodeId, nodes: Vec<Node>) -> Result<Self, GraphError> {
        if root.index() >= nodes.len() {
            return Err(GraphError::Empty);
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.label.is_empty() {
                return Err(GraphError::EmptyLabel(i));
            }
            if let Some(bad) = node.arcs.values().find(|t| t.index() >= nodes.len()) {
                return Err(GraphError::DanglingArc { target: bad.index() });
            }
        }
        let graph = FeatureGraph { root, nodes };
        let seen = graph.preorder();
        if seen.len() != graph.nodes.len() {
            let mut reached = vec![false; graph.nodes.len()];
            for n in seen {
                reached[n.index()] = true;
            }
            let missing = reached.iter().position(|r| !r).unwrap();
            return Err(GraphError::Unreachable(missing));
        }
        Ok(graph)
    }

    /// A single node with no arcs.
    pub fn atom(label: SpeciesSet) -> Self {
        assert!(!label.is_empty(), "empty label");
        FeatureGraph { root: NodeId::new(0), nodes: vec![Node { label, arcs: BTreeMap::new() }] }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId::new)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn label(&self, id: NodeId) -> &SpeciesSet {
        &self.nodes[id.index()].label
    }

    pub fn arc(&self, from: NodeId, feature: FeatureId) -> Option<NodeId> {
        self.nodes[from.index()].arcs.get(&feature).copied()
    }

    /// All arcs as `(source, feature, target)`, by source then feature.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, FeatureId, NodeId)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .flat_map(|(i, n)| n.arcs.iter().map(move |(&f, &t)| (NodeId::new(i), f, t)))
    }

    pub fn arc_count(&self) -> usize {
        self.nodes.iter().map(|n| n.arcs.len()).sum()
    }

    /// Number of incoming arcs per node.
    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for (_, _, t) in self.arcs() {
            deg[t.index()] += 1;
        }
        deg
    }

    /// Same graph, new labels.
    pub fn relabel(&self, labels: impl IntoIterator<Item = SpeciesSet>) -> Result<Self, GraphError> {
        let nodes: Vec<Node> = self
            .nodes
            .iter()
            .zip(labels)
            .map(|(n, label)| Node { label, arcs: n.arcs.clone() })
            .collect();
        assert_eq!(nodes.len(), self.nodes.len(), "one label per node");
        FeatureGraph::new(self.root, nodes)
    }

    /// Nodes in DFS preorder from the root, children in feature order.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n.index()], true) {
                continue;
            }
            order.push(n);
            // reversed so the smallest feature is popped first
            for &t in self.nodes[n.index()].arcs.values().rev() {
                if !seen[t.index()] {
                    stack.push(t);
                }
            }
        }
        order
    }

    /// Nodes in DFS finishing order (children before parents).
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack: Vec<(NodeId, std::collections::btree_map::Values<'_, FeatureId, NodeId>)> = Vec::new();
        seen[self.root.index()] = true;
        stack.push((self.root, self.nodes[self.root.index()].arcs.values()));
        while let Some((node, children)) = stack.last_mut() {
            match children.next() {
                Some(&t) if !seen[t.index()] => {
                    seen[t.index()] = true;
                    stack.push((t, self.nodes[t.index()].arcs.values()));
                }
                Some(_) => {}
                None => {
                    order.push(*node);
                    stack.pop();
                }
            }
        }
        order
    }

    /// Renumber nodes in canonical DFS order. Returns the canonical graph and,
    /// for each canonical node, the node it came from.
    pub fn canonical(&self) -> (FeatureGraph, Vec<NodeId>) {
        let order = self.preorder();
        let mut new_id = vec![NodeId::new(0); self.nodes.len()];
        for (i, &old) in order.iter().enumerate() {
            new_id[old.index()] = NodeId::new(i);
        }
        let nodes = order
            .iter()
            .map(|&old| {
                let n = &self.nodes[old.index()];
                Node {
                    label: n.label.clone(),
                    arcs: n.arcs.iter().map(|(&f, &t)| (f, new_id[t.index()])).collect(),
                }
            })
            .collect();
        (FeatureGraph { root: NodeId::new(0), nodes }, order)
    }

    pub fn is_canonical(&self) -> bool {
        self.root.index() == 0 && self.preorder().iter().enumerate().all(|(i, n)| n.index() == i)
    }

    /// Rooted isomorphism, labels included.
    pub fn is_isomorphic(&self, other: &FeatureGraph) -> bool {
        self.len() == other.len() && self.canonical().0 == other.canonical().0
    }
}

/// `general` subsumes `specific`: the root-preserving, arc-preserving map
/// from `general`'s nodes into `specific` exists and never widens a label.
///
/// Arcs are deterministic, so the map is forced by following paths from the
/// root; the check is linear in the size of `general`.
pub fn fs_subsumes(general: &FeatureGraph, specific: &FeatureGraph) -> bool {
    let mut image: Vec<Option<NodeId>> = vec![None; general.len()];
    let mut stack = vec![(general.root(), specific.root())];
    while let Some((g, s)) = stack.pop() {
        match image[g.index()] {
            Some(prev) if prev == s => continue,
            Some(_) => return false,
            None => image[g.index()] = Some(s),
        }
        if !specific.label(s).is_subset(general.label(g)) {
            return false;
        }
        for (&f, &gt) in &general.node(g).arcs {
            match specific.arc(s, f) {
                Some(st) => stack.push((gt, st)),
                None => return false,
            }
        }
    }
    true
}

/// The result of merging two graphs from their roots.
#[derive(Clone, Debug)]
pub struct Merge {
    pub graph: FeatureGraph,
    /// Image of each node of the left input.
    pub left: Vec<NodeId>,
    /// Image of each node of the right input.
    pub right: Vec<NodeId>,
}

/// Union-find merge of `a` and `b` with their roots identified. Merged
/// labels are intersections; returns `None` on an empty intersection.
pub fn merge_graphs(a: &FeatureGraph, b: &FeatureGraph) -> Option<Merge> {
    let offset = a.len();
    let total = offset + b.len();
    let mut classes: UnionFind<usize> = UnionFind::new(total);
    let mut labels: Vec<SpeciesSet> =
        a.nodes.iter().chain(&b.nodes).map(|n| n.label.clone()).collect();
    let mut arcs: Vec<BTreeMap<FeatureId, usize>> = a
        .nodes
        .iter()
        .map(|n| n.arcs.iter().map(|(&f, &t)| (f, t.index())).collect())
        .chain(b.nodes.iter().map(|n| n.arcs.iter().map(|(&f, &t)| (f, t.index() + offset)).collect()))
        .collect();

    let mut pending = vec![(a.root().index(), b.root().index() + offset)];
    while let Some((x, y)) = pending.pop() {
        let (rx, ry) = (classes.find_mut(x), classes.find_mut(y));
        if rx == ry {
            continue;
        }
        classes.union(rx, ry);
        let keep = classes.find_mut(rx);
        let gone = if keep == rx { ry } else { rx };
        let merged = labels[keep].intersection(&labels[gone]);
        if merged.is_empty() {
            return None;
        }
        labels[keep] = merged;
        for (f, t) in std::mem::take(&mut arcs[gone]) {
            match arcs[keep].get(&f) {
                Some(&other) => pending.push((t, other)),
                None => {
                    arcs[keep].insert(f, t);
                }
            }
        }
    }

    // number the classes reachable from the merged root
    let root = classes.find_mut(a.root().index());
    let mut number: BTreeMap<usize, NodeId> = BTreeMap::new();
    let mut nodes = Vec::new();
    let mut stack = vec![root];
    number.insert(root, NodeId::new(0));
    nodes.push(Node { label: labels[root].clone(), arcs: BTreeMap::new() });
    while let Some(rep) = stack.pop() {
        let id = number[&rep];
        let outgoing: Vec<(FeatureId, usize)> = arcs[rep].iter().map(|(&f, &t)| (f, t)).collect();
        for (f, t) in outgoing {
            let t = classes.find_mut(t);
            let tid = match number.get(&t) {
                Some(&tid) => tid,
                None => {
                    let tid = NodeId::new(nodes.len());
                    number.insert(t, tid);
                    nodes.push(Node { label: labels[t].clone(), arcs: BTreeMap::new() });
                    stack.push(t);
                    tid
                }
            };
            nodes[id.index()].arcs.insert(f, tid);
        }
    }
    let left = (0..a.len()).map(|i| number[&classes.find_mut(i)]).collect();
    let right = (0..b.len()).map(|i| number[&classes.find_mut(i + offset)]).collect();
    let graph = FeatureGraph { root: NodeId::new(0), nodes };
    Some(Merge { graph, left, right })
}

/// Unification of two feature graphs; `None` when some merged label is empty.
pub fn graph_unify(_sig: &CompiledSignature, a: &FeatureGraph, b: &FeatureGraph) -> Option<FeatureGraph> {
    merge_graphs(a, b).map(|m| m.graph)
}
