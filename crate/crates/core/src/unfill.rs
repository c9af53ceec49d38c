//! Unfilling: dropping arcs whose values the appropriateness table already
//! predicts.
//!
//! An arc `(n, f, m)` is redundant when `m` is a leaf reached only through
//! that arc and re-adding it with [`fill_node`] gives back exactly the same
//! structure. Removal runs bottom-up and repeats until nothing more can go,
//! so chains of predictable values disappear one level at a time.

use crate::drfs::{fill_node, CompactDrfs};
use crate::hierarchy::CompiledSignature;
use crate::species::{FeatureId, NodeId};

/// One removal: `after` plus arc `feature` at `node` is `before`.
#[derive(Clone, Debug)]
pub struct Removal {
    pub before: CompactDrfs,
    pub after: CompactDrfs,
    pub node: NodeId,
    pub feature: FeatureId,
}

/// Remove every redundant arc.
pub fn unfill(sig: &CompiledSignature, d: &CompactDrfs) -> CompactDrfs {
    unfill_logged(sig, d).0
}

/// [`unfill`], also returning each removal in order.
pub fn unfill_logged(sig: &CompiledSignature, d: &CompactDrfs) -> (CompactDrfs, Vec<Removal>) {
    let mut current = d.clone();
    let mut log = Vec::new();
    while let Some(removal) = first_redundant(sig, &current) {
        current = removal.after.clone();
        log.push(removal);
    }
    (current, log)
}

fn first_redundant(sig: &CompiledSignature, d: &CompactDrfs) -> Option<Removal> {
    let graph = d.graph();
    let in_degree = graph.in_degrees();
    for n in graph.postorder() {
        for (&f, &m) in &graph.node(n).arcs {
            if m == graph.root() || in_degree[m.index()] != 1 || !graph.node(m).arcs.is_empty() {
                continue;
            }
            let (smaller, node) = d.remove_leaf(n, f);
            if fill_node(sig, &smaller, node, f).as_ref() == Ok(d) {
                return Some(Removal { before: d.clone(), after: smaller, node, feature: f });
            }
        }
    }
    None
}

/// Whether some arc of `d` is redundant.
pub fn has_redundant_arc(sig: &CompiledSignature, d: &CompactDrfs) -> bool {
    first_redundant(sig, d).is_some()
}
