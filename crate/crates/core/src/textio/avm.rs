//! ```text
//! avm      := tag? node | ref
//! node     := typeexpr ("(" feat ":" avm ("," feat ":" avm)* ")")?
//! tag      := "#"? ident "="        (also "#" int "=")
//! ref      := "#" (ident | int) | ident      (an ident naming a tag)
//! typeexpr := ident | "$" int "<" ident ("|" ident)+ ">" | "{" ident ("," ? ident)* "}"
//! ```
//!
//! A bare identifier that names a tag defined anywhere in the input is a
//! reference to it, even if a type of the same name exists.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use super::{Cursor, ParseError, SourceSpan, Tok};
use crate::drfs::CompactDrfs;
use crate::factor::Block;
use crate::fstruct::{FeatureGraph, GraphBuilder};
use crate::hierarchy::CompiledSignature;
use crate::species::{NodeId, SpeciesId, SpeciesSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AvmError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("{span}: unknown type `{name}`")]
    UnknownType { name: String, span: SourceSpan },
    #[error("{span}: unknown feature `{name}`")]
    UnknownFeature { name: String, span: SourceSpan },
    #[error("{span}: feature `{name}` appears twice at one node")]
    DuplicateFeature { name: String, span: SourceSpan },
    #[error("{span}: tag `{name}` is never defined")]
    DanglingTag { name: String, span: SourceSpan },
    #[error("{span}: tag `{name}` is defined twice")]
    DuplicateTag { name: String, span: SourceSpan },
    #[error("{span}: named disjunction is only allowed in compact structures")]
    DisjunctionNotAllowed { span: SourceSpan },
    #[error("{span}: `{name}` is not a species")]
    NotSpecies { name: String, span: SourceSpan },
    #[error("{span}: ${name} has {found} alternatives here but {expected} elsewhere")]
    ArityMismatch { name: u32, expected: usize, found: usize, span: SourceSpan },
    #[error("some choice of alternatives is not licensed by the signature")]
    Unlicensed,
}

#[derive(Clone, Debug)]
enum Label {
    Type(String, SourceSpan),
    Set(Vec<(String, SourceSpan)>),
    Column { name: u32, alts: Vec<(String, SourceSpan)>, span: SourceSpan },
}

#[derive(Clone, Debug)]
enum Avm {
    Node { tag: Option<(String, SourceSpan)>, label: Label, feats: Vec<(String, SourceSpan, Avm)> },
    Ref(String, SourceSpan),
}

fn parse_tree(text: &str) -> Result<Avm, ParseError> {
    let mut cur = Cursor::new(text)?;
    let avm = parse_avm_node(&mut cur)?;
    cur.expect_end()?;
    Ok(avm)
}

fn parse_avm_node(cur: &mut Cursor) -> Result<Avm, ParseError> {
    let mut tag = None;
    if cur.at_punct('#') {
        cur.bump();
        let (name, span) = match cur.peek().clone() {
            Tok::Int(n) => (n.to_string(), cur.bump().span),
            Tok::Ident(s) => (s, cur.bump().span),
            _ => return Err(cur.unexpected("a tag name")),
        };
        if !cur.eat_punct('=') {
            return Ok(Avm::Ref(name, span));
        }
        tag = Some((name, span));
    } else if matches!(cur.peek(), Tok::Ident(_)) && *cur.peek_at(1) == Tok::Punct('=') {
        let (name, span) = cur.ident("a tag name")?;
        cur.bump();
        tag = Some((name, span));
    }

    let label = parse_label(cur)?;
    let mut feats = Vec::new();
    if cur.eat_punct('(') {
        loop {
            let (feat, span) = cur.ident("a feature name")?;
            cur.expect_punct(':')?;
            let value = parse_avm_node(cur)?;
            feats.push((feat, span, value));
            if cur.eat_punct(')') {
                break;
            }
            cur.expect_punct(',')?;
        }
    }
    Ok(Avm::Node { tag, label, feats })
}

fn parse_label(cur: &mut Cursor) -> Result<Label, ParseError> {
    if cur.at_punct('$') {
        let span = cur.bump().span;
        let (name, _) = cur.int("a disjunction number")?;
        cur.expect_punct('<')?;
        let mut alts = vec![cur.ident("a species")?];
        while cur.eat_punct('|') {
            alts.push(cur.ident("a species")?);
        }
        cur.expect_punct('>')?;
        return Ok(Label::Column { name, alts, span });
    }
    if cur.eat_punct('{') {
        let mut members = vec![cur.ident("a type name")?];
        while !cur.eat_punct('}') {
            cur.eat_punct(',');
            members.push(cur.ident("a type name")?);
        }
        return Ok(Label::Set(members));
    }
    let (name, span) = cur.ident("a type")?;
    Ok(Label::Type(name, span))
}

fn collect_tags<'a>(avm: &'a Avm, defs: &mut HashMap<String, &'a Avm>) -> Result<(), AvmError> {
    if let Avm::Node { tag, feats, .. } = avm {
        if let Some((name, span)) = tag {
            if defs.insert(name.clone(), avm).is_some() {
                return Err(AvmError::DuplicateTag { name: name.clone(), span: *span });
            }
        }
        for (_, _, value) in feats {
            collect_tags(value, defs)?;
        }
    }
    Ok(())
}

/// Per-node label as written, before it is turned into a label or binding.
#[derive(Clone, Debug)]
enum Written {
    Set(SpeciesSet),
    Column { name: u32, alts: Vec<SpeciesId>, span: SourceSpan },
}

struct Builder<'a> {
    sig: &'a CompiledSignature,
    defs: HashMap<String, &'a Avm>,
    built: HashMap<String, NodeId>,
    graph: GraphBuilder,
    written: Vec<Written>,
    allow_columns: bool,
}

impl<'a> Builder<'a> {
    fn species_set(&self, name: &str, span: SourceSpan) -> Result<SpeciesSet, AvmError> {
        self.sig
            .species_set_of(name)
            .cloned()
            .map_err(|_| AvmError::UnknownType { name: name.to_owned(), span })
    }

    fn label(&self, label: &Label) -> Result<Written, AvmError> {
        match label {
            Label::Type(name, span) => Ok(Written::Set(self.species_set(name, *span)?)),
            Label::Set(members) => {
                let mut set = self.sig.empty_set();
                for (name, span) in members {
                    set = set.union(&self.species_set(name, *span)?);
                }
                Ok(Written::Set(set))
            }
            Label::Column { name, alts, span } => {
                if !self.allow_columns {
                    return Err(AvmError::DisjunctionNotAllowed { span: *span });
                }
                let alts = alts
                    .iter()
                    .map(|(a, s)| {
                        self.sig.species_id(a).ok_or_else(|| {
                            if self.sig.type_id(a).is_some() {
                                AvmError::NotSpecies { name: a.clone(), span: *s }
                            } else {
                                AvmError::UnknownType { name: a.clone(), span: *s }
                            }
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Written::Column { name: *name, alts, span: *span })
            }
        }
    }

    fn build(&mut self, avm: &'a Avm) -> Result<NodeId, AvmError> {
        match avm {
            Avm::Ref(name, span) => self.build_tag(name, *span),
            Avm::Node { tag: None, label: Label::Type(name, span), feats }
                if feats.is_empty() && self.defs.contains_key(name.as_str()) =>
            {
                self.build_tag(name, *span)
            }
            Avm::Node { tag, label, feats } => {
                if let Some((name, _)) = tag {
                    if let Some(&id) = self.built.get(name) {
                        return Ok(id);
                    }
                }
                let written = self.label(label)?;
                let id = self.graph.node(self.sig.all_species());
                self.written.push(written);
                if let Some((name, _)) = tag {
                    self.built.insert(name.clone(), id);
                }
                let mut seen = HashSet::new();
                for (feat, span, value) in feats {
                    let f = self
                        .sig
                        .feature_id(feat)
                        .ok_or_else(|| AvmError::UnknownFeature { name: feat.clone(), span: *span })?;
                    if !seen.insert(f) {
                        return Err(AvmError::DuplicateFeature { name: feat.clone(), span: *span });
                    }
                    let target = self.build(value)?;
                    self.graph.arc(id, f, target).expect("feature checked for duplicates");
                }
                Ok(id)
            }
        }
    }

    fn build_tag(&mut self, name: &str, span: SourceSpan) -> Result<NodeId, AvmError> {
        if let Some(&id) = self.built.get(name) {
            return Ok(id);
        }
        let def = *self.defs.get(name).ok_or_else(|| AvmError::DanglingTag { name: name.to_owned(), span })?;
        self.build(def)
    }
}

fn build<'a>(sig: &'a CompiledSignature, tree: &'a Avm, allow_columns: bool) -> Result<(FeatureGraph, Vec<Written>), AvmError> {
    let mut defs = HashMap::new();
    collect_tags(tree, &mut defs)?;
    let mut b = Builder { sig, defs, built: HashMap::new(), graph: GraphBuilder::new(), written: Vec::new(), allow_columns };
    let root = b.build(tree)?;
    let mut graph = b.graph;
    for (i, w) in b.written.iter().enumerate() {
        let label = match w {
            Written::Set(s) => s.clone(),
            Written::Column { alts, .. } => SpeciesSet::from_iter_in(sig.species_count(), alts.iter().copied()),
        };
        if label.is_empty() {
            // only reachable through an empty `{}` set, which the grammar rejects
            unreachable!("empty label");
        }
        *graph.label_mut(NodeId::new(i)) = label;
    }
    let graph = graph.finish(root).expect("parsed graphs are rooted and deterministic");
    Ok((graph, b.written))
}

/// Parse a plain feature structure.
pub fn parse_avm(sig: &CompiledSignature, text: &str) -> Result<FeatureGraph, AvmError> {
    let tree = parse_tree(text)?;
    Ok(build(sig, &tree, false)?.0)
}

/// Parse a compact structure, named disjunctions included. Type names and
/// `{...}` sets become `Free` (or `Fixed` when they denote one species).
/// The result is re-factored into canonical form and must be fully licensed.
pub fn parse_drfs(sig: &CompiledSignature, text: &str) -> Result<CompactDrfs, AvmError> {
    let tree = parse_tree(text)?;
    let (graph, written) = build(sig, &tree, true)?;
    let mut blocks = Vec::new();
    // per name: columns, rows of alternatives, first occurrence
    type Columns = (Vec<usize>, Vec<Vec<usize>>, SourceSpan);
    let mut named: BTreeMap<u32, Columns> = BTreeMap::new();
    for (n, w) in written.into_iter().enumerate() {
        match w {
            Written::Set(set) => blocks.push(Block::new(vec![n], set.iter().map(|s| vec![s.index()]).collect())),
            Written::Column { name, alts, span } => {
                let entry = named.entry(name).or_insert_with(|| (Vec::new(), vec![Vec::new(); alts.len()], span));
                if entry.1.len() != alts.len() {
                    return Err(AvmError::ArityMismatch { name, expected: entry.1.len(), found: alts.len(), span });
                }
                entry.0.push(n);
                for (row, s) in entry.1.iter_mut().zip(&alts) {
                    row.push(s.index());
                }
            }
        }
    }
    for (vars, mut tuples, _) in named.into_values() {
        tuples.sort();
        tuples.dedup();
        blocks.push(Block::new(vars, tuples));
    }
    let (d, _) = CompactDrfs::from_blocks(&graph, blocks);
    if !d.all_resolved(sig) {
        return Err(AvmError::Unlicensed);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drfs::Binding;
    use crate::test_fixtures::rho;

    #[test]
    fn phi_parses() {
        let sig = rho();
        let g = parse_avm(&sig, "t(f:+, g:-)").unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.label(g.root()), sig.species_set_of("t").unwrap());
        let f = g.arc(g.root(), sig.feature_id("f").unwrap()).unwrap();
        assert_eq!(g.label(f).as_singleton(), sig.species_id("+"));
    }

    #[test]
    fn bare_type() {
        let sig = rho();
        let g = parse_avm(&sig, "t").unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.label(g.root()).len(), 2);
    }

    #[test]
    fn tags_share_nodes() {
        let sig = rho();
        let g = parse_avm(&sig, "X1=t(f:X2=bool, g:X2)").unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.arc_count(), 2);
        let (f, gf) = (sig.feature_id("f").unwrap(), sig.feature_id("g").unwrap());
        assert_eq!(g.arc(g.root(), f), g.arc(g.root(), gf));
        // forward references and hash tags
        let h = parse_avm(&sig, "t(f:#1, g:#1=bool)").unwrap();
        assert!(h.is_isomorphic(&g));
        // cycles
        let c = parse_avm(&sig, "#r={t' +}(f:#r)").unwrap();
        assert_eq!(c.arc(c.root(), f), Some(c.root()));
    }

    #[test]
    fn errors() {
        let sig = rho();
        assert!(matches!(parse_avm(&sig, "u"), Err(AvmError::UnknownType { .. })));
        assert!(matches!(parse_avm(&sig, "t(h:+)"), Err(AvmError::UnknownFeature { .. })));
        assert!(matches!(parse_avm(&sig, "t(f:+, f:-)"), Err(AvmError::DuplicateFeature { .. })));
        assert!(matches!(parse_avm(&sig, "t(f:#9)"), Err(AvmError::DanglingTag { .. })));
        assert!(matches!(parse_avm(&sig, "t(f:#1=+, g:#1=+)"), Err(AvmError::DuplicateTag { .. })));
        assert!(matches!(parse_avm(&sig, "$1<t'|t''>"), Err(AvmError::DisjunctionNotAllowed { .. })));
        assert!(matches!(parse_avm(&sig, "t(f:+"), Err(AvmError::Syntax(_))));
        assert!(matches!(parse_avm(&sig, "t t"), Err(AvmError::Syntax(_))));
    }

    #[test]
    fn drfs_input() {
        let sig = rho();
        let d = parse_drfs(&sig, "$1<t'|t''>(f:$1<+|->, g:$1<+|->)").unwrap();
        assert_eq!(d.arities(), &[2]);
        d.check_invariants().unwrap();
        let free = parse_drfs(&sig, "t").unwrap();
        assert!(matches!(free.binding(NodeId::new(0)), Binding::Free(_)));
        let fixed = parse_drfs(&sig, "{t'}").unwrap();
        assert!(matches!(fixed.binding(NodeId::new(0)), Binding::Fixed(_)));
        // a name that factors is split on the way in
        assert_eq!(parse_drfs(&sig, "$1<+|->").unwrap(), parse_drfs(&sig, "bool").unwrap());
        assert_eq!(parse_drfs(&sig, "$7<+|+>").unwrap(), parse_drfs(&sig, "+").unwrap());
        assert!(matches!(parse_drfs(&sig, "$1<t'|t''>(f:$1<+>)"), Err(AvmError::ArityMismatch { .. })));
        assert!(matches!(parse_drfs(&sig, "$1<t|t''>(f:$1<+|->)"), Err(AvmError::NotSpecies { .. })));
        assert_eq!(parse_drfs(&sig, "$1<t'|t''>(f:$1<-|+>)"), Err(AvmError::Unlicensed));
        assert_eq!(parse_drfs(&sig, "t(f:+)"), Err(AvmError::Unlicensed));
    }
}
