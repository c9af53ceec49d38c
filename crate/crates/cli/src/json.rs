//! JSON records mirroring the canonical text output.

use serde::Serialize;
use tfs_core::{Binding, CompactDrfs, CompiledSignature, FeatureGraph, SpeciesSet};

#[derive(Serialize)]
pub struct Arc {
    pub from: usize,
    pub feature: String,
    pub to: usize,
}

#[derive(Serialize)]
pub struct GraphNode {
    pub id: usize,
    pub label: Vec<String>,
}

#[derive(Serialize)]
pub struct Graph {
    pub text: String,
    pub root: usize,
    pub nodes: Vec<GraphNode>,
    pub arcs: Vec<Arc>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BindingRecord {
    Fixed { species: String },
    Free { species: Vec<String> },
    Column { name: u32, values: Vec<String> },
}

#[derive(Serialize)]
pub struct DrfsNode {
    pub id: usize,
    pub binding: BindingRecord,
}

#[derive(Serialize)]
pub struct Name {
    pub name: u32,
    pub arity: usize,
}

#[derive(Serialize)]
pub struct Drfs {
    pub text: String,
    pub root: usize,
    pub nodes: Vec<DrfsNode>,
    pub arcs: Vec<Arc>,
    pub names: Vec<Name>,
    pub expansion_size: String,
}

fn names(sig: &CompiledSignature, set: &SpeciesSet) -> Vec<String> {
    set.iter().map(|s| sig.species_name(s).to_owned()).collect()
}

fn arcs(sig: &CompiledSignature, g: &FeatureGraph) -> Vec<Arc> {
    g.arcs()
        .map(|(a, f, b)| Arc { from: a.index(), feature: sig.feature_name(f).to_owned(), to: b.index() })
        .collect()
}

pub fn graph(sig: &CompiledSignature, g: &FeatureGraph) -> Graph {
    let (g, _) = g.canonical();
    Graph {
        text: tfs_core::print_graph(sig, &g),
        root: g.root().index(),
        nodes: g.nodes().map(|n| GraphNode { id: n.index(), label: names(sig, g.label(n)) }).collect(),
        arcs: arcs(sig, &g),
    }
}

pub fn drfs(sig: &CompiledSignature, d: &CompactDrfs) -> Drfs {
    let g = d.graph();
    let nodes = g
        .nodes()
        .map(|n| {
            let binding = match d.binding(n) {
                Binding::Fixed(s) => BindingRecord::Fixed { species: sig.species_name(*s).to_owned() },
                Binding::Free(set) => BindingRecord::Free { species: names(sig, set) },
                Binding::Column { name, values } => BindingRecord::Column {
                    name: name.number(),
                    values: values.iter().map(|&s| sig.species_name(s).to_owned()).collect(),
                },
            };
            DrfsNode { id: n.index(), binding }
        })
        .collect();
    Drfs {
        text: tfs_core::print_drfs(sig, d),
        root: g.root().index(),
        nodes,
        arcs: arcs(sig, g),
        names: d.names().map(|(name, arity)| Name { name: name.number(), arity }).collect(),
        expansion_size: d.expansion_size().to_string(),
    }
}

#[derive(Serialize)]
pub struct SpeciesApprop {
    pub species: String,
    pub approp: Vec<(String, Vec<String>)>,
}

#[derive(Serialize)]
pub struct Signature {
    pub types: Vec<String>,
    pub species: Vec<SpeciesApprop>,
    pub features: Vec<String>,
}

pub fn signature(sig: &CompiledSignature) -> Signature {
    Signature {
        types: sig.types().map(|t| sig.type_name(t).to_owned()).collect(),
        species: sig
            .species()
            .map(|s| SpeciesApprop {
                species: sig.species_name(s).to_owned(),
                approp: sig
                    .features()
                    .filter_map(|f| sig.spec_approp(s, f).map(|v| (sig.feature_name(f).to_owned(), names(sig, v))))
                    .collect(),
            })
            .collect(),
        features: sig.features().map(|f| sig.feature_name(f).to_owned()).collect(),
    }
}
