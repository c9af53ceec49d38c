//! Random small instances and brute-force oracles shared by the test suites.
//!
//! The oracles here deliberately avoid the library's algorithms: subsumption
//! tries every node map, unification closes an equivalence relation by naive
//! iteration, and resolution enumerates every species assignment.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use tfs_core::{
    compile_signature, parse_signature, CompiledSignature, FeatureGraph, FeatureId, GraphBuilder, NodeId, SpeciesId,
    SpeciesSet,
};

pub const TYPE_NAMES: [&str; 10] = ["a", "b", "c", "d", "e", "f'", "g'", "h-", "i+", "j''"];
pub const FEATURE_NAMES: [&str; 4] = ["F", "G", "H", "K"];
pub const MAX_SPECIES: usize = 8;
pub const MAX_NODES: usize = 6;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A compiled random signature together with its source text.
#[derive(Clone, Debug)]
pub struct RandomSig {
    pub source: String,
    pub sig: CompiledSignature,
}

/// A random signature with at most [`MAX_SPECIES`] species and four
/// features. Hierarchies may have multiple inheritance and unary chains,
/// and subtypes often narrow inherited values so that species constrain
/// several features jointly.
pub fn random_signature(rng: &mut impl Rng) -> RandomSig {
    if rng.random_bool(0.4) {
        let source = cooccurrence_source(rng);
        let sig = compile_signature(&parse_signature(&source).unwrap()).unwrap();
        return RandomSig { source, sig };
    }
    loop {
        let mut draft = Draft::random(rng);
        let Some(mut sig) = draft.compile() else { continue };
        if sig.species_count() > MAX_SPECIES || sig.feature_count() == 0 {
            continue;
        }
        for _ in 0..rng.random_range(2..=12) {
            let candidates: Vec<(usize, FeatureId, Vec<usize>)> = (0..draft.subs.len())
                .flat_map(|t| sig.features().map(move |f| (t, f)))
                .filter_map(|(t, f)| {
                    let ty = sig.type_id(TYPE_NAMES[t])?;
                    let inherited = sig.approp(ty, f)?;
                    let narrower: Vec<usize> = (0..draft.subs.len())
                        .filter(|&v| {
                            let v = sig.type_id(TYPE_NAMES[v]).unwrap();
                            v != inherited && sig.subsumes_type(inherited, v)
                        })
                        .collect();
                    (!narrower.is_empty()).then_some((t, f, narrower))
                })
                .collect();
            let Some((t, f, narrower)) = candidates.choose(rng) else { break };
            let value = *narrower.choose(rng).unwrap();
            let mut next = draft.clone();
            let feature = sig.feature_name(*f).to_owned();
            next.approp[*t].retain(|(g, _)| *g != feature);
            next.approp[*t].push((feature, value));
            if let Some(compiled) = next.compile() {
                draft = next;
                sig = compiled;
            }
        }
        return RandomSig { source: draft.source(), sig };
    }
}

/// A value type and a carrier type whose species each pin some features to
/// particular values, in the manner of a feature cooccurrence restriction.
fn cooccurrence_source(rng: &mut impl Rng) -> String {
    let values = &["b", "c", "d"][..rng.random_range(2..=3)];
    let carriers = &["f'", "g'", "h-"][..rng.random_range(2..=3)];
    let features = &FEATURE_NAMES[..rng.random_range(2..=4)];
    let recursive = rng.random_bool(0.4);
    let mut out = format!("type a sub {{{}}}.\n", values.join(" "));
    for v in values {
        out.push_str(&format!("type {v}.\n"));
    }
    let approp: Vec<String> = features
        .iter()
        .enumerate()
        .map(|(i, f)| if recursive && i == features.len() - 1 { format!("{f}:e") } else { format!("{f}:a") })
        .collect();
    out.push_str(&format!("type e sub {{{}}} approp {{{}}}.\n", carriers.join(" "), approp.join(" ")));
    let pinned = if recursive { &features[..features.len() - 1] } else { features };
    for c in carriers {
        let mut decls = Vec::new();
        for f in pinned {
            if rng.random_bool(0.75) {
                decls.push(format!("{f}:{}", values.choose(rng).unwrap()));
            }
        }
        if decls.is_empty() {
            out.push_str(&format!("type {c}.\n"));
        } else {
            out.push_str(&format!("type {c} approp {{{}}}.\n", decls.join(" ")));
        }
    }
    if rng.random_bool(0.3) {
        out.push_str("type i+.\n");
    }
    out
}

#[derive(Clone)]
struct Draft {
    subs: Vec<Vec<usize>>,
    approp: Vec<Vec<(String, usize)>>,
}

impl Draft {
    fn random(rng: &mut impl Rng) -> Self {
        let n = rng.random_range(2..=TYPE_NAMES.len());
        let nf = rng.random_range(1..=FEATURE_NAMES.len());
        let mut subs: Vec<Vec<usize>> = vec![Vec::new(); n];
        for j in 1..n {
            let parents = match rng.random_range(0..20) {
                0..=2 => 0,
                3..=17 => 1,
                _ => 2,
            };
            for _ in 0..parents {
                let p = rng.random_range(0..j);
                if !subs[p].contains(&j) {
                    subs[p].push(j);
                }
            }
        }
        let mut approp = vec![Vec::new(); n];
        for decls in approp.iter_mut() {
            if !rng.random_bool(0.4) {
                continue;
            }
            for f in &FEATURE_NAMES[..nf] {
                if rng.random_bool(0.6) {
                    decls.push((f.to_string(), rng.random_range(0..n)));
                }
            }
        }
        Draft { subs, approp }
    }

    fn source(&self) -> String {
        let mut out = String::new();
        for (t, subs) in self.subs.iter().enumerate() {
            out.push_str("type ");
            out.push_str(TYPE_NAMES[t]);
            if !subs.is_empty() {
                let names: Vec<&str> = subs.iter().map(|&s| TYPE_NAMES[s]).collect();
                out.push_str(&format!(" sub {{{}}}", names.join(" ")));
            }
            if !self.approp[t].is_empty() {
                let decls: Vec<String> = self.approp[t].iter().map(|(f, v)| format!("{f}:{}", TYPE_NAMES[*v])).collect();
                out.push_str(&format!(" approp {{{}}}", decls.join(" ")));
            }
            out.push_str(".\n");
        }
        out
    }

    fn compile(&self) -> Option<CompiledSignature> {
        compile_signature(&parse_signature(&self.source()).ok()?).ok()
    }
}

fn random_label(rng: &mut impl Rng, sig: &CompiledSignature) -> SpeciesSet {
    if rng.random_bool(0.75) {
        let types: Vec<_> = sig.types().collect();
        return sig.species_set(*types.choose(rng).unwrap()).clone();
    }
    loop {
        let set = SpeciesSet::from_iter_in(sig.species_count(), sig.species().filter(|_| rng.random_bool(0.5)));
        if !set.is_empty() {
            return set;
        }
    }
}

fn pick_feature(rng: &mut impl Rng, sig: &CompiledSignature, label: &SpeciesSet, used: &[FeatureId]) -> Option<FeatureId> {
    let free: Vec<FeatureId> = sig.features().filter(|f| !used.contains(f)).collect();
    let fitting: Vec<FeatureId> =
        free.iter().copied().filter(|&f| label.iter().any(|s| sig.spec_approp(s, f).is_some())).collect();
    // an inappropriate feature now and then keeps unsatisfiable inputs in the mix
    if rng.random_bool(0.1) {
        free.choose(rng).copied()
    } else {
        fitting.choose(rng).copied()
    }
}

/// A random rooted graph of at most `max_nodes` nodes, possibly reentrant
/// and cyclic, in canonical form.
pub fn random_graph(rng: &mut impl Rng, sig: &CompiledSignature, max_nodes: usize) -> FeatureGraph {
    let n = rng.random_range(1..=max_nodes);
    let carriers: Vec<&SpeciesSet> = sig
        .types()
        .map(|t| sig.species_set(t))
        .filter(|set| set.len() >= 2 && set.iter().any(|s| sig.features().any(|f| sig.spec_approp(s, f).is_some())))
        .collect();
    let root = match carriers.choose(rng) {
        Some(&set) if rng.random_bool(0.7) => set.clone(),
        _ => random_label(rng, sig),
    };
    let mut labels: Vec<SpeciesSet> = vec![root];
    let mut arcs: Vec<Vec<(FeatureId, usize)>> = vec![Vec::new(); n];
    'spanning: for child in 1..n {
        for _ in 0..8 {
            let parent = rng.random_range(0..child);
            let used: Vec<FeatureId> = arcs[parent].iter().map(|a| a.0).collect();
            if let Some(f) = pick_feature(rng, sig, &labels[parent], &used) {
                arcs[parent].push((f, child));
                // usually the value the parent's species allow, sometimes anything
                let allowed = labels[parent]
                    .iter()
                    .filter_map(|s| sig.spec_approp(s, f))
                    .fold(sig.empty_set(), |acc, v| acc.union(v));
                let label = if !allowed.is_empty() && rng.random_bool(0.75) { allowed } else { random_label(rng, sig) };
                labels.push(label);
                continue 'spanning;
            }
        }
        break;
    }
    let reached = labels.len();
    let mut b = GraphBuilder::new();
    let ids: Vec<NodeId> = labels[..reached].iter().map(|l| b.node(l.clone())).collect();
    for (from, out) in arcs.iter().enumerate().take(reached) {
        for &(f, to) in out {
            b.arc(ids[from], f, ids[to]).expect("features are distinct per node");
        }
    }
    b.finish(ids[0]).expect("spanning tree reaches every node").canonical().0
}

/// Canonical, totally ordered fingerprint of a graph. Equal keys iff
/// isomorphic.
pub type GraphKey = (usize, Vec<SpeciesSet>, Vec<(usize, FeatureId, usize)>);

pub fn key(g: &FeatureGraph) -> GraphKey {
    let (c, _) = g.canonical();
    let labels = c.nodes().map(|n| c.label(n).clone()).collect();
    let arcs = c.arcs().map(|(a, f, b)| (a.index(), f, b.index())).collect();
    (c.root().index(), labels, arcs)
}

pub fn keys<'a>(graphs: impl IntoIterator<Item = &'a FeatureGraph>) -> BTreeSet<GraphKey> {
    graphs.into_iter().map(key).collect()
}

/// Subsumption by trying every map from `general`'s nodes into `specific`'s.
pub fn subsumes_brute(general: &FeatureGraph, specific: &FeatureGraph) -> bool {
    let ng = general.len();
    let ns = specific.len();
    let mut map = vec![0usize; ng];
    loop {
        let ok = map[general.root().index()] == specific.root().index()
            && general.nodes().all(|n| specific.label(NodeId::new(map[n.index()])).is_subset(general.label(n)))
            && general.arcs().all(|(a, f, b)| specific.arc(NodeId::new(map[a.index()]), f) == Some(NodeId::new(map[b.index()])));
        if ok {
            return true;
        }
        let mut i = 0;
        loop {
            if i == ng {
                return false;
            }
            map[i] += 1;
            if map[i] < ns {
                break;
            }
            map[i] = 0;
            i += 1;
        }
    }
}

/// Most general common extension, by naive congruence closure over the
/// disjoint union of `a` and `b`. `None` when some merged label is empty.
pub fn unify_naive(a: &FeatureGraph, b: &FeatureGraph) -> Option<FeatureGraph> {
    let offset = a.len();
    let total = a.len() + b.len();
    let arc = |n: usize, f: FeatureId| -> Option<usize> {
        if n < offset {
            a.arc(NodeId::new(n), f).map(|m| m.index())
        } else {
            b.arc(NodeId::new(n - offset), f).map(|m| m.index() + offset)
        }
    };
    let label = |n: usize| if n < offset { a.label(NodeId::new(n)) } else { b.label(NodeId::new(n - offset)) };
    let features: BTreeSet<FeatureId> = a.arcs().chain(b.arcs()).map(|(_, f, _)| f).collect();

    let mut class: Vec<usize> = (0..total).collect();
    let join = |class: &mut Vec<usize>, x: usize, y: usize| -> bool {
        let (cx, cy) = (class[x], class[y]);
        if cx == cy {
            return false;
        }
        for c in class.iter_mut() {
            if *c == cy {
                *c = cx;
            }
        }
        true
    };
    join(&mut class, a.root().index(), b.root().index() + offset);
    let mut changed = true;
    while changed {
        changed = false;
        for x in 0..total {
            for y in 0..total {
                if class[x] != class[y] {
                    continue;
                }
                for &f in &features {
                    if let (Some(p), Some(q)) = (arc(x, f), arc(y, f)) {
                        changed |= join(&mut class, p, q);
                    }
                }
            }
        }
    }

    // Keep only classes reachable from the root's class.
    let root_class = class[a.root().index()];
    let mut order = vec![root_class];
    let mut i = 0;
    while i < order.len() {
        let c = order[i];
        for &f in &features {
            if let Some(t) = (0..total).filter(|&x| class[x] == c).find_map(|x| arc(x, f)) {
                if !order.contains(&class[t]) {
                    order.push(class[t]);
                }
            }
        }
        i += 1;
    }
    let mut builder = GraphBuilder::new();
    let mut ids = Vec::new();
    for &c in &order {
        let mut l: Option<SpeciesSet> = None;
        for x in (0..total).filter(|&x| class[x] == c) {
            l = Some(match l {
                None => label(x).clone(),
                Some(s) => s.intersection(label(x)),
            });
        }
        let l = l.unwrap();
        if l.is_empty() {
            return None;
        }
        ids.push(builder.node(l));
    }
    for (i, &c) in order.iter().enumerate() {
        for &f in &features {
            if let Some(t) = (0..total).filter(|&x| class[x] == c).find_map(|x| arc(x, f)) {
                let j = order.iter().position(|&d| d == class[t]).unwrap();
                builder.arc(ids[i], f, ids[j]).unwrap();
            }
        }
    }
    Some(builder.finish(ids[0]).unwrap().canonical().0)
}

/// Whether a species-labelled graph obeys the appropriateness table.
pub fn licensed(sig: &CompiledSignature, g: &FeatureGraph) -> bool {
    g.nodes().all(|n| g.label(n).len() == 1)
        && g.arcs().all(|(a, f, b)| {
            let s: SpeciesId = g.label(a).as_singleton().unwrap();
            sig.spec_approp(s, f).is_some_and(|v| g.label(b).is_subset(v))
        })
}

/// Every resolvent of `g`, by enumerating all species assignments.
/// `None` when there are more than `bound` assignments.
pub fn resolvents_brute(sig: &CompiledSignature, g: &FeatureGraph, bound: u128) -> Option<Vec<FeatureGraph>> {
    let choices: Vec<Vec<SpeciesId>> = g.nodes().map(|n| g.label(n).iter().collect()).collect();
    let size: u128 = choices.iter().map(|c| c.len() as u128).product();
    if size > bound {
        return None;
    }
    let arcs: Vec<(NodeId, FeatureId, NodeId)> = g.arcs().collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; choices.len()];
    loop {
        let species = |n: NodeId| choices[n.index()][pick[n.index()]];
        if arcs.iter().all(|&(a, f, b)| sig.spec_approp(species(a), f).is_some_and(|v| v.contains(species(b)))) {
            let labels = g.nodes().map(|n| SpeciesSet::singleton(sig.species_count(), species(n)));
            out.push(g.relabel(labels).unwrap());
        }
        let mut i = 0;
        loop {
            if i == pick.len() {
                return Some(out);
            }
            pick[i] += 1;
            if pick[i] < choices[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// The set unification `{A ⊔ B | A ∈ left, B ∈ right}` restricted to
/// licensed results.
pub fn unify_sets(sig: &CompiledSignature, left: &[FeatureGraph], right: &[FeatureGraph]) -> BTreeSet<GraphKey> {
    let mut out = BTreeSet::new();
    for a in left {
        for b in right {
            if let Some(u) = unify_naive(a, b) {
                if licensed(sig, &u) {
                    out.insert(key(&u));
                }
            }
        }
    }
    out
}

/// Drop every leaf arc whose value the declared appropriateness of the
/// node's type already allows, without resolving first.
pub fn naive_unfill(sig: &CompiledSignature, g: &FeatureGraph) -> FeatureGraph {
    let in_degree = g.in_degrees();
    let mut b = GraphBuilder::new();
    let mut map = vec![None; g.len()];
    map[g.root().index()] = Some(b.node(g.label(g.root()).clone()));
    let mut stack = vec![g.root()];
    let mut kept = Vec::new();
    while let Some(n) = stack.pop() {
        for (&f, &c) in &g.node(n).arcs {
            let leaf = g.node(c).arcs.is_empty() && in_degree[c.index()] == 1 && c != g.root();
            let predicted = sig
                .most_general_type(g.label(n))
                .and_then(|t| sig.approp(t, f))
                .is_some_and(|v| g.label(c).is_subset(sig.species_set(v)));
            if leaf && predicted {
                continue;
            }
            if map[c.index()].is_none() {
                map[c.index()] = Some(b.node(g.label(c).clone()));
                stack.push(c);
            }
            kept.push((n, f, c));
        }
    }
    for (n, f, c) in kept {
        b.arc(map[n.index()].unwrap(), f, map[c.index()].unwrap()).unwrap();
    }
    b.finish(map[g.root().index()].unwrap()).unwrap()
}
