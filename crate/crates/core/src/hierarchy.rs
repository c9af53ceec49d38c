//! Type signatures: a finite partial order of types plus an appropriateness
//! partial function, compiled into species sets and per-species feature
//! tables.
//!
//! Approp entries declared on a type are inherited by every type it
//! subsumes. A subtype may redeclare a feature with a value type that the
//! inherited value type subsumes (e.g. `bool` refined to `+`); any other
//! redeclaration is rejected. When several incomparable ancestors declare the
//! same feature, their values must have a most specific member.

use std::collections::{BTreeMap, HashMap};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::species::{FeatureId, SpeciesId, SpeciesSet, TypeId};
use crate::textio::SourceSpan;

/// A declared type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub span: Option<SourceSpan>,
}

/// `general ⊑ specific`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtypeDecl {
    pub general: String,
    pub specific: String,
    pub span: Option<SourceSpan>,
}

/// `Approp(ty, feature) = value`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Approp {
    pub ty: String,
    pub feature: String,
    pub value: String,
    pub span: Option<SourceSpan>,
}

/// Uncompiled signature declarations, in source order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignatureDecls {
    pub types: Vec<TypeDecl>,
    pub subtypes: Vec<SubtypeDecl>,
    pub approp: Vec<Approp>,
}

impl SignatureDecls {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ty(mut self, name: &str) -> Self {
        self.types.push(TypeDecl { name: name.to_owned(), span: None });
        self
    }

    pub fn sub(mut self, general: &str, specific: &str) -> Self {
        self.subtypes.push(SubtypeDecl {
            general: general.to_owned(),
            specific: specific.to_owned(),
            span: None,
        });
        self
    }

    pub fn approp(mut self, ty: &str, feature: &str, value: &str) -> Self {
        self.approp.push(Approp {
            ty: ty.to_owned(),
            feature: feature.to_owned(),
            value: value.to_owned(),
            span: None,
        });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("signature declares no types")]
    NoTypes,
    #[error("type `{name}` declared more than once")]
    DuplicateType { name: String, span: Option<SourceSpan> },
    #[error("undeclared type `{name}` in {context}")]
    UndeclaredType { name: String, context: &'static str, span: Option<SourceSpan> },
    #[error("subtype cycle: {}", .types.join(" ⊑ "))]
    Cycle { types: Vec<String> },
    #[error("duplicate appropriateness declaration for `{ty}` on feature `{feature}`")]
    DuplicateApprop { ty: String, feature: String, span: Option<SourceSpan> },
    #[error(
        "`{ty}` declares `{feature}:{value}` but inherits `{feature}:{inherited}` from `{from}`, \
         and `{inherited}` does not subsume `{value}`"
    )]
    OverrideNotSubsumed {
        ty: String,
        feature: String,
        value: String,
        from: String,
        inherited: String,
        span: Option<SourceSpan>,
    },
    #[error("`{ty}` inherits incompatible values for `{feature}` ({}) with no overriding declaration", .values.join(", "))]
    InheritanceConflict { ty: String, feature: String, values: Vec<String> },
}

impl SignatureError {
    pub fn span(&self) -> Option<SourceSpan> {
        match self {
            SignatureError::DuplicateType { span, .. }
            | SignatureError::UndeclaredType { span, .. }
            | SignatureError::DuplicateApprop { span, .. }
            | SignatureError::OverrideNotSubsumed { span, .. } => *span,
            _ => None,
        }
    }
}

/// A compiled, immutable signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledSignature {
    type_names: Vec<String>,
    type_index: HashMap<String, TypeId>,
    /// Per type, the types it subsumes (itself included).
    below: Vec<FixedBitSet>,
    species: Vec<TypeId>,
    species_of_type: Vec<Option<SpeciesId>>,
    species_sets: Vec<SpeciesSet>,
    feature_names: Vec<String>,
    feature_index: HashMap<String, FeatureId>,
    /// Per type and feature, the effective (inherited or declared) value type.
    type_approp: Vec<Vec<Option<TypeId>>>,
    /// Per species and feature, the species of the value type.
    spec_approp: Vec<Vec<Option<SpeciesSet>>>,
    denoting: HashMap<SpeciesSet, Vec<TypeId>>,
}

// Errors are rare and built once; their size does not matter.
#[allow(clippy::result_large_err)]
pub fn compile_signature(decls: &SignatureDecls) -> Result<CompiledSignature, SignatureError> {
    if decls.types.is_empty() {
        return Err(SignatureError::NoTypes);
    }
    let mut seen: HashMap<&str, ()> = HashMap::new();
    for decl in &decls.types {
        if seen.insert(decl.name.as_str(), ()).is_some() {
            return Err(SignatureError::DuplicateType { name: decl.name.clone(), span: decl.span });
        }
    }
    let mut type_names: Vec<String> = decls.types.iter().map(|d| d.name.clone()).collect();
    type_names.sort();
    let type_index: HashMap<String, TypeId> =
        type_names.iter().enumerate().map(|(i, n)| (n.clone(), TypeId::new(i))).collect();
    let n = type_names.len();
    let lookup = |name: &str, context: &'static str, span: Option<SourceSpan>| {
        type_index.get(name).copied().ok_or_else(|| SignatureError::UndeclaredType {
            name: name.to_owned(),
            context,
            span,
        })
    };

    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for edge in &decls.subtypes {
        let g = lookup(&edge.general, "subtype declaration", edge.span)?;
        let s = lookup(&edge.specific, "subtype declaration", edge.span)?;
        // reflexive edges are harmless: the order is reflexive anyway
        if g != s {
            children[g.index()].push(s.index());
        }
    }
    for c in &mut children {
        c.sort_unstable();
        c.dedup();
    }

    let order = topological_order(&children).map_err(|cycle| SignatureError::Cycle {
        types: cycle.into_iter().map(|t| type_names[t].clone()).collect(),
    })?;

    // reverse topological order: children are closed before their parents
    let mut below = vec![FixedBitSet::with_capacity(n); n];
    for &t in order.iter().rev() {
        let mut set = FixedBitSet::with_capacity(n);
        set.insert(t);
        for &c in &children[t] {
            set.union_with(&below[c]);
        }
        below[t] = set;
    }

    let species: Vec<TypeId> =
        (0..n).filter(|&t| below[t].count_ones(..) == 1).map(TypeId::new).collect();
    let mut species_of_type = vec![None; n];
    for (i, t) in species.iter().enumerate() {
        species_of_type[t.index()] = Some(SpeciesId::new(i));
    }
    let universe = species.len();
    let species_sets: Vec<SpeciesSet> = below
        .iter()
        .map(|b| {
            SpeciesSet::from_iter_in(universe, b.ones().filter_map(|t| species_of_type[t]))
        })
        .collect();
    assert!(species_sets.iter().all(|s| !s.is_empty()), "finite order without a species below some type");

    // features and declared approp
    let mut declared: BTreeMap<String, BTreeMap<TypeId, (TypeId, Option<SourceSpan>)>> =
        BTreeMap::new();
    for entry in &decls.approp {
        let ty = lookup(&entry.ty, "appropriateness declaration", entry.span)?;
        let value = lookup(&entry.value, "appropriateness value", entry.span)?;
        let slot = declared.entry(entry.feature.clone()).or_default();
        if slot.insert(ty, (value, entry.span)).is_some() {
            return Err(SignatureError::DuplicateApprop {
                ty: entry.ty.clone(),
                feature: entry.feature.clone(),
                span: entry.span,
            });
        }
    }
    let feature_names: Vec<String> = declared.keys().cloned().collect();
    let feature_index: HashMap<String, FeatureId> =
        feature_names.iter().enumerate().map(|(i, n)| (n.clone(), FeatureId::new(i))).collect();

    let subsumes = |a: TypeId, b: TypeId| below[a.index()].contains(b.index());
    let mut type_approp = vec![vec![None; feature_names.len()]; n];
    for (fi, (feature, decl)) in declared.iter().enumerate() {
        for (&upper, &(upper_value, _)) in decl {
            for (&lower, &(lower_value, span)) in decl {
                if upper != lower && subsumes(upper, lower) && !subsumes(upper_value, lower_value) {
                    return Err(SignatureError::OverrideNotSubsumed {
                        ty: type_names[lower.index()].clone(),
                        feature: feature.clone(),
                        value: type_names[lower_value.index()].clone(),
                        from: type_names[upper.index()].clone(),
                        inherited: type_names[upper_value.index()].clone(),
                        span,
                    });
                }
            }
        }
        for t in 0..n {
            let t = TypeId::new(t);
            let values: Vec<TypeId> =
                decl.iter().filter(|(&a, _)| subsumes(a, t)).map(|(_, &(v, _))| v).collect();
            if values.is_empty() {
                continue;
            }
            let most_specific = values.iter().copied().find(|&v| values.iter().all(|&w| subsumes(w, v)));
            match most_specific {
                Some(v) => type_approp[t.index()][fi] = Some(v),
                None => {
                    let mut names: Vec<String> =
                        values.iter().map(|v| type_names[v.index()].clone()).collect();
                    names.sort();
                    names.dedup();
                    return Err(SignatureError::InheritanceConflict {
                        ty: type_names[t.index()].clone(),
                        feature: feature.clone(),
                        values: names,
                    });
                }
            }
        }
    }

    let spec_approp = species
        .iter()
        .map(|s| {
            type_approp[s.index()]
                .iter()
                .map(|v| v.map(|v| species_sets[v.index()].clone()))
                .collect()
        })
        .collect();

    let mut denoting: HashMap<SpeciesSet, Vec<TypeId>> = HashMap::new();
    for (t, set) in species_sets.iter().enumerate() {
        denoting.entry(set.clone()).or_default().push(TypeId::new(t));
    }

    Ok(CompiledSignature {
        type_names,
        type_index,
        below,
        species,
        species_of_type,
        species_sets,
        feature_names,
        feature_index,
        type_approp,
        spec_approp,
        denoting,
    })
}

/// Iterative DFS topological sort; on failure returns the types on one cycle.
fn topological_order(children: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let n = children.len();
    let mut mark = vec![Mark::New; n];
    let mut finished = Vec::with_capacity(n);
    for start in 0..n {
        if mark[start] != Mark::New {
            continue;
        }
        // (node, next child position)
        let mut stack = vec![(start, 0usize)];
        mark[start] = Mark::Open;
        while let Some(&mut (node, ref mut pos)) = stack.last_mut() {
            if let Some(&child) = children[node].get(*pos) {
                *pos += 1;
                match mark[child] {
                    Mark::New => {
                        mark[child] = Mark::Open;
                        stack.push((child, 0));
                    }
                    Mark::Open => {
                        let from = stack.iter().position(|&(t, _)| t == child).unwrap();
                        let mut cycle: Vec<usize> = stack[from..].iter().map(|&(t, _)| t).collect();
                        cycle.push(child);
                        return Err(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                finished.push(node);
                stack.pop();
            }
        }
    }
    finished.reverse();
    Ok(finished)
}

impl CompiledSignature {
    pub fn type_count(&self) -> usize {
        self.type_names.len()
    }

    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn types(&self) -> impl Iterator<Item = TypeId> {
        (0..self.type_names.len()).map(TypeId::new)
    }

    pub fn species(&self) -> impl Iterator<Item = SpeciesId> {
        (0..self.species.len()).map(SpeciesId::new)
    }

    pub fn features(&self) -> impl Iterator<Item = FeatureId> {
        (0..self.feature_names.len()).map(FeatureId::new)
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.type_index.get(name).copied()
    }

    pub fn feature_id(&self, name: &str) -> Option<FeatureId> {
        self.feature_index.get(name).copied()
    }

    pub fn species_id(&self, name: &str) -> Option<SpeciesId> {
        self.type_id(name).and_then(|t| self.species_of_type[t.index()])
    }

    pub fn type_name(&self, ty: TypeId) -> &str {
        &self.type_names[ty.index()]
    }

    pub fn species_name(&self, species: SpeciesId) -> &str {
        self.type_name(self.species[species.index()])
    }

    pub fn feature_name(&self, feature: FeatureId) -> &str {
        &self.feature_names[feature.index()]
    }

    pub fn species_type(&self, species: SpeciesId) -> TypeId {
        self.species[species.index()]
    }

    pub fn as_species(&self, ty: TypeId) -> Option<SpeciesId> {
        self.species_of_type[ty.index()]
    }

    /// The species `ty` subsumes.
    pub fn species_set(&self, ty: TypeId) -> &SpeciesSet {
        &self.species_sets[ty.index()]
    }

    /// [`species_set`](Self::species_set) by name.
    pub fn species_set_of(&self, name: &str) -> Result<&SpeciesSet, UnknownType> {
        self.type_id(name).map(|t| self.species_set(t)).ok_or_else(|| UnknownType(name.to_owned()))
    }

    pub fn empty_set(&self) -> SpeciesSet {
        SpeciesSet::empty(self.species_count())
    }

    pub fn all_species(&self) -> SpeciesSet {
        SpeciesSet::full(self.species_count())
    }

    /// `general ⊑ specific`: every object of type `specific` is of type `general`.
    pub fn subsumes_type(&self, general: TypeId, specific: TypeId) -> bool {
        let closed = self.below[general.index()].contains(specific.index());
        debug_assert!(!closed || self.species_set(specific).is_subset(self.species_set(general)));
        closed
    }

    /// [`subsumes_type`](Self::subsumes_type) by name.
    pub fn subsumes_named(&self, general: &str, specific: &str) -> Result<bool, UnknownType> {
        let g = self.type_id(general).ok_or_else(|| UnknownType(general.to_owned()))?;
        let s = self.type_id(specific).ok_or_else(|| UnknownType(specific.to_owned()))?;
        Ok(self.subsumes_type(g, s))
    }

    /// Effective appropriateness on a type, after inheritance.
    pub fn approp(&self, ty: TypeId, feature: FeatureId) -> Option<TypeId> {
        self.type_approp[ty.index()][feature.index()]
    }

    /// Appropriate value species for `feature` on `species`, or `None` when
    /// the feature is not appropriate.
    pub fn spec_approp(&self, species: SpeciesId, feature: FeatureId) -> Option<&SpeciesSet> {
        self.spec_approp[species.index()][feature.index()].as_ref()
    }

    /// Types whose species set is exactly `set`, in id order.
    pub fn denoting_types(&self, set: &SpeciesSet) -> &[TypeId] {
        self.denoting.get(set).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The unique most general type whose species set is exactly `set`.
    pub fn most_general_type(&self, set: &SpeciesSet) -> Option<TypeId> {
        let candidates = self.denoting_types(set);
        let maximal: Vec<TypeId> = candidates
            .iter()
            .copied()
            .filter(|&t| !candidates.iter().any(|&u| u != t && self.subsumes_type(u, t)))
            .collect();
        match maximal.as_slice() {
            [t] => Some(*t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown type `{0}`")]
pub struct UnknownType(pub String);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_fixtures::rho;

    fn names(sig: &CompiledSignature, set: &SpeciesSet) -> Vec<String> {
        set.iter().map(|s| sig.species_name(s).to_owned()).collect()
    }

    #[test]
    fn rho_species_and_approp() {
        let sig = rho();
        let all: Vec<&str> = sig.species().map(|s| sig.species_name(s)).collect();
        assert_eq!(all, ["+", "-", "t'", "t''"]);
        assert_eq!(names(&sig, sig.species_set_of("t").unwrap()), ["t'", "t''"]);
        assert_eq!(names(&sig, sig.species_set_of("+").unwrap()), ["+"]);
        assert_eq!(names(&sig, sig.species_set_of("bool").unwrap()), ["+", "-"]);
        let tp = sig.species_id("t'").unwrap();
        let f = sig.feature_id("f").unwrap();
        assert_eq!(names(&sig, sig.spec_approp(tp, f).unwrap()), ["+"]);
        assert!(sig.spec_approp(sig.species_id("+").unwrap(), f).is_none());
    }

    #[test]
    fn rho_subsumption() {
        let sig = rho();
        assert!(sig.subsumes_named("t", "t'").unwrap());
        assert!(!sig.subsumes_named("t'", "t''").unwrap());
        assert!(sig.subsumes_named("bool", "bool").unwrap());
        assert!(!sig.subsumes_named("t'", "t").unwrap());
        assert_eq!(sig.subsumes_named("t", "nope"), Err(UnknownType("nope".into())));
        assert!(sig.species_set_of("nope").is_err());
    }

    #[test]
    fn reflexive_edge_is_a_singleton_order() {
        let sig = compile_signature(&SignatureDecls::new().ty("t").sub("t", "t")).unwrap();
        assert_eq!(sig.species_count(), 1);
        assert_eq!(sig.feature_count(), 0);
    }

    #[test]
    fn two_cycle_is_rejected() {
        let err =
            compile_signature(&SignatureDecls::new().ty("a").ty("b").sub("a", "b").sub("b", "a")).unwrap_err();
        assert!(matches!(err, SignatureError::Cycle { .. }), "{err:?}");
    }

    #[test]
    fn empty_signature_is_rejected() {
        assert_eq!(compile_signature(&SignatureDecls::new()), Err(SignatureError::NoTypes));
    }

    #[test]
    fn duplicate_and_undeclared() {
        let err = compile_signature(&SignatureDecls::new().ty("a").ty("a")).unwrap_err();
        assert!(matches!(err, SignatureError::DuplicateType { .. }));
        let err = compile_signature(&SignatureDecls::new().ty("a").approp("a", "f", "b")).unwrap_err();
        assert!(matches!(err, SignatureError::UndeclaredType { ref name, .. } if name == "b"));
        let err = compile_signature(&SignatureDecls::new().ty("a").sub("a", "c")).unwrap_err();
        assert!(matches!(err, SignatureError::UndeclaredType { .. }));
        let err = compile_signature(&SignatureDecls::new().ty("a").approp("a", "f", "a").approp("a", "f", "a"))
            .unwrap_err();
        assert!(matches!(err, SignatureError::DuplicateApprop { .. }));
    }

    #[test]
    fn override_must_be_subsumed() {
        let decls = SignatureDecls::new()
            .ty("bool")
            .ty("+")
            .ty("-")
            .ty("t")
            .ty("u")
            .sub("bool", "+")
            .sub("bool", "-")
            .sub("t", "u")
            .approp("t", "f", "+")
            .approp("u", "f", "bool");
        let err = compile_signature(&decls).unwrap_err();
        assert!(matches!(err, SignatureError::OverrideNotSubsumed { ref ty, .. } if ty == "u"), "{err}");
    }

    #[test]
    fn incomparable_inheritance_conflicts() {
        let decls = SignatureDecls::new()
            .ty("bool")
            .ty("+")
            .ty("-")
            .ty("a")
            .ty("b")
            .ty("s")
            .sub("bool", "+")
            .sub("bool", "-")
            .sub("a", "s")
            .sub("b", "s")
            .approp("a", "f", "+")
            .approp("b", "f", "-");
        let err = compile_signature(&decls).unwrap_err();
        assert!(matches!(err, SignatureError::InheritanceConflict { ref ty, .. } if ty == "s"), "{err}");
        // a declaration on the shared subtype resolves nothing: it cannot refine both
        let fixed = decls.clone().approp("s", "f", "bool");
        assert!(compile_signature(&fixed).is_err());
    }

    #[test]
    fn comparable_multiple_inheritance_takes_most_specific() {
        let decls = SignatureDecls::new()
            .ty("bool")
            .ty("+")
            .ty("-")
            .ty("a")
            .ty("b")
            .ty("s")
            .sub("bool", "+")
            .sub("bool", "-")
            .sub("a", "s")
            .sub("b", "s")
            .approp("a", "f", "bool")
            .approp("b", "f", "+");
        let sig = compile_signature(&decls).unwrap();
        let s = sig.species_id("s").unwrap();
        let f = sig.feature_id("f").unwrap();
        assert_eq!(names(&sig, sig.spec_approp(s, f).unwrap()), ["+"]);
    }

    #[test]
    fn inheritance_reaches_species() {
        let decls = SignatureDecls::new()
            .ty("bool")
            .ty("+")
            .ty("-")
            .ty("t")
            .ty("u")
            .ty("v")
            .sub("bool", "+")
            .sub("bool", "-")
            .sub("t", "u")
            .sub("t", "v")
            .approp("t", "f", "bool")
            .approp("u", "f", "+");
        let sig = compile_signature(&decls).unwrap();
        let f = sig.feature_id("f").unwrap();
        assert_eq!(names(&sig, sig.spec_approp(sig.species_id("u").unwrap(), f).unwrap()), ["+"]);
        assert_eq!(names(&sig, sig.spec_approp(sig.species_id("v").unwrap(), f).unwrap()), ["+", "-"]);
        assert_eq!(sig.approp(sig.type_id("t").unwrap(), f), sig.type_id("bool"));
    }

    #[test]
    fn declaration_order_is_irrelevant() {
        let a = rho();
        let decls = SignatureDecls::new()
            .ty("t''")
            .ty("t")
            .ty("-")
            .ty("t'")
            .ty("bool")
            .ty("+")
            .approp("t''", "g", "-")
            .approp("t''", "f", "-")
            .approp("t'", "g", "+")
            .approp("t", "g", "bool")
            .approp("t'", "f", "+")
            .approp("t", "f", "bool")
            .sub("t", "t''")
            .sub("bool", "-")
            .sub("t", "t'")
            .sub("bool", "+");
        assert_eq!(compile_signature(&decls).unwrap(), a);
    }

    #[test]
    fn most_general_type_of_a_chain() {
        let decls = SignatureDecls::new().ty("a").ty("b").ty("c").sub("a", "b").sub("b", "c");
        let sig = compile_signature(&decls).unwrap();
        let c = sig.species_set_of("c").unwrap().clone();
        assert_eq!(sig.denoting_types(&c).len(), 3);
        assert_eq!(sig.most_general_type(&c), sig.type_id("a"));
        // incomparable denoters have no most general member
        let decls = SignatureDecls::new().ty("a").ty("b").ty("s").sub("a", "s").sub("b", "s");
        let sig = compile_signature(&decls).unwrap();
        assert_eq!(sig.most_general_type(sig.species_set_of("s").unwrap()), None);
    }
}
