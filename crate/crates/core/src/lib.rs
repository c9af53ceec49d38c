//! Typed feature structures with appropriateness enforced by type resolution.
//!
//! A [`CompiledSignature`] fixes the types, their species and which features
//! each species carries. [`resolve`] enumerates every way of assigning
//! species to the nodes of a [`FeatureGraph`] that the signature licenses;
//! [`compact`] stores that set with named disjunctions; [`unfill`] drops arcs
//! the signature predicts anyway; and [`drfs_unify`] unifies compact
//! structures directly.

mod csp;
pub mod drfs;
mod factor;
pub mod fstruct;
pub mod hierarchy;
pub mod resolve;
pub mod species;
pub mod textio;
pub mod unfill;

pub use drfs::{compact, drfs_unify, fill_node, resolve_compact, Binding, CompactDrfs, DisjunctionName, DrfsError};
pub use fstruct::{fs_subsumes, graph_unify, merge_graphs, FeatureGraph, GraphBuilder, GraphError, Merge, Node};
pub use hierarchy::{compile_signature, CompiledSignature, SignatureDecls, SignatureError};
pub use resolve::{
    brute_force_resolve, check_well_typed, is_satisfiable, is_well_typable, is_well_typed, materialize, resolve,
    BoundExceeded, LabellingRelation, ResolvedFs, TypingError, DEFAULT_BOUND,
};
pub use species::{FeatureId, NodeId, SpeciesId, SpeciesSet, TypeId};
pub use textio::{parse_avm, parse_drfs, parse_signature, print_drfs, print_graph, AvmError, ParseError, SourceSpan};
pub use unfill::{has_redundant_arc, unfill, unfill_logged, Removal};
