use std::fmt::Write;

use crate::drfs::{Binding, CompactDrfs};
use crate::fstruct::FeatureGraph;
use crate::hierarchy::CompiledSignature;
use crate::species::{NodeId, SpeciesSet};

/// Print a feature structure in the syntax [`super::parse_avm`] reads.
/// Features appear in name order; shared nodes are tagged `#1`, `#2`, ... in
/// order of first visit.
pub fn print_graph(sig: &CompiledSignature, g: &FeatureGraph) -> String {
    Printer::new(sig, g).run(&|n| set_label(sig, g.label(n)))
}

/// Print a compact structure in the syntax [`super::parse_drfs`] reads.
pub fn print_drfs(sig: &CompiledSignature, d: &CompactDrfs) -> String {
    Printer::new(sig, d.graph()).run(&|n| match d.binding(n) {
        Binding::Fixed(s) => sig.species_name(*s).to_owned(),
        Binding::Free(set) => set_label(sig, set),
        Binding::Column { name, values } => {
            let alts: Vec<&str> = values.iter().map(|&s| sig.species_name(s)).collect();
            format!("{name}<{}>", alts.join("|"))
        }
    })
}

fn set_label(sig: &CompiledSignature, set: &SpeciesSet) -> String {
    if let Some(s) = set.as_singleton() {
        return sig.species_name(s).to_owned();
    }
    match sig.most_general_type(set) {
        Some(ty) => sig.type_name(ty).to_owned(),
        None => {
            let names: Vec<&str> = set.iter().map(|s| sig.species_name(s)).collect();
            format!("{{{}}}", names.join(","))
        }
    }
}

struct Printer<'a> {
    sig: &'a CompiledSignature,
    g: &'a FeatureGraph,
    shared: Vec<bool>,
    tag: Vec<Option<usize>>,
    next_tag: usize,
    out: String,
}

impl<'a> Printer<'a> {
    fn new(sig: &'a CompiledSignature, g: &'a FeatureGraph) -> Self {
        let root = g.root().index();
        let shared = g
            .in_degrees()
            .into_iter()
            .enumerate()
            .map(|(i, d)| d + usize::from(i == root) >= 2)
            .collect();
        Printer { sig, g, shared, tag: vec![None; g.len()], next_tag: 1, out: String::new() }
    }

    fn run(mut self, label: &dyn Fn(NodeId) -> String) -> String {
        self.node(self.g.root(), label);
        self.out
    }

    fn node(&mut self, n: NodeId, label: &dyn Fn(NodeId) -> String) {
        if let Some(k) = self.tag[n.index()] {
            write!(self.out, "#{k}").unwrap();
            return;
        }
        if self.shared[n.index()] {
            let k = self.next_tag;
            self.next_tag += 1;
            self.tag[n.index()] = Some(k);
            write!(self.out, "#{k}=").unwrap();
        }
        self.out.push_str(&label(n));
        let arcs: Vec<_> = self.g.node(n).arcs.iter().map(|(&f, &m)| (f, m)).collect();
        if arcs.is_empty() {
            return;
        }
        self.out.push('(');
        for (i, (f, m)) in arcs.into_iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            write!(self.out, "{}:", self.sig.feature_name(f)).unwrap();
            self.node(m, label);
        }
        self.out.push(')');
    }
}
