//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Exact examples go through the `tfs` binary; randomized suites
//! call the library directly.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use tfs_core::*;
use tfs_testkit::{keys, naive_unfill, random_graph, random_signature, resolvents_brute, rng, unify_sets, MAX_NODES};

const TRIPLES: usize = 500;
const PAIRS: usize = 200;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn load(name: &str) -> CompiledSignature {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    compile_signature(&parse_signature(&text).unwrap()).unwrap()
}

/// Run `tfs --sig <fixture> args...`, returning stdout lines and exit code.
fn tfs(sig: &str, args: &[&str]) -> (Vec<String>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_tfs"))
        .arg("--sig")
        .arg(fixture(sig))
        .args(args)
        .output()
        .expect("tfs runs");
    let stdout = String::from_utf8(out.stdout).unwrap();
    (stdout.lines().map(str::to_owned).collect(), out.status.code().unwrap_or(-1))
}

fn lines(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Everything the criteria produce, for the canonical I/O check.
#[derive(Default)]
struct Produced {
    graphs: Vec<(CompiledSignature, FeatureGraph)>,
    drfs: Vec<(CompiledSignature, CompactDrfs)>,
    texts: Vec<(CompiledSignature, String, bool)>,
}

struct Check {
    ok: bool,
    detail: String,
}

impl Check {
    fn new() -> Self {
        Check { ok: true, detail: String::new() }
    }

    fn expect(&mut self, cond: bool, what: impl Into<String>) {
        if !cond && self.ok {
            self.ok = false;
            self.detail = what.into();
        }
    }
}

fn criterion1(p: &mut Produced) -> Check {
    let mut c = Check::new();
    let phi = "t(f:+, g:-)";
    c.expect(tfs("rho.sig", &["welltyped", phi]) == (lines(&["true"]), 0), "welltyped is not true");
    c.expect(tfs("rho.sig", &["welltypable", phi]) == (lines(&["true"]), 0), "welltypable is not true");
    c.expect(tfs("rho.sig", &["resolve", phi]) == (lines(&["UNSATISFIABLE"]), 1), "resolve is not UNSATISFIABLE");
    let sig = load("rho.sig");
    p.graphs.push((sig.clone(), parse_avm(&sig, phi).unwrap()));
    c.detail = c.detail.clone() + if c.ok { "true / true / UNSATISFIABLE" } else { "" };
    c
}

fn criterion2(p: &mut Produced) -> Check {
    let mut c = Check::new();
    let (out, code) = tfs("rho.sig", &["resolve", "t(f:bool, g:bool)"]);
    let got: BTreeSet<String> = out.iter().cloned().collect();
    let want: BTreeSet<String> = lines(&["t'(f:+, g:+)", "t''(f:-, g:-)"]).into_iter().collect();
    c.expect(code == 0 && out.len() == 2 && got == want, format!("got {out:?}"));
    let sig = load("rho.sig");
    for text in out {
        p.texts.push((sig.clone(), text, false));
    }
    if c.ok {
        c.detail = "exactly {t'(f:+, g:+), t''(f:-, g:-)}".into();
    }
    c
}

fn criterion3(p: &mut Produced) -> Check {
    let mut c = Check::new();
    let want = "$1<t'|t''>(f:$1<+|->, g:$1<+|->)";
    let (out, code) = tfs("rho.sig", &["compact", "t(f:bool, g:bool)"]);
    c.expect(code == 0 && out == lines(&[want]), format!("got {out:?}"));
    let sig = load("rho.sig");
    let d = resolve_compact(&sig, &parse_avm(&sig, "t(f:bool, g:bool)").unwrap()).unwrap();
    let name = d.names().next();
    c.expect(
        d.arities() == [2] && name.is_some_and(|(n, _)| d.columns(n).len() == 3),
        "expected one name of arity 2 with three columns",
    );
    p.drfs.push((sig.clone(), d));
    p.texts.push((sig, want.into(), true));
    if c.ok {
        c.detail = want.into();
    }
    c
}

fn criterion4(p: &mut Produced) -> Check {
    let mut c = Check::new();
    c.expect(tfs("rho.sig", &["unfill", "t(f:bool, g:bool)"]) == (lines(&["t"]), 0), "unfill of rho is not t");
    c.expect(tfs("rho.sig", &["unfill", "t(f:+)"]) == (lines(&["t'"]), 0), "unfill of t(f:+) is not t'");
    let sig = load("rho.sig");
    let g = parse_avm(&sig, "t(f:+)").unwrap();
    let careful = unfill(&sig, &resolve_compact(&sig, &g).unwrap());
    let naive = resolve_compact(&sig, &naive_unfill(&sig, &g)).unwrap();
    let expansion = |d: &CompactDrfs| keys(&d.expand());
    c.expect(expansion(&careful) != expansion(&naive), "unfilling before resolving made no difference");
    c.expect(expansion(&careful).len() == 1 && expansion(&naive).len() == 2, "unexpected expansions");
    p.drfs.push((sig.clone(), careful));
    p.drfs.push((sig, naive));
    if c.ok {
        c.detail = "t, t'; unfill-first expands to 2 structures, resolve-first to 1".into();
    }
    c
}

fn criterion5(p: &mut Produced) -> Check {
    let mut c = Check::new();
    c.expect(
        tfs("inv.sig", &["resolve", "verb(INV:+, AUX:-)"]) == (lines(&["UNSATISFIABLE"]), 1),
        "verb(INV:+, AUX:-) is satisfiable",
    );
    c.expect(tfs("inv.sig", &["resolve", "verb(INV:+)"]) == (lines(&["v1(INV:+)"]), 0), "verb(INV:+) is not v1(INV:+)");
    c.expect(
        tfs("inv.sig", &["--no-unfill", "unify", "verb(INV:+)", "verb(AUX:bool)"]) == (lines(&["v1(AUX:+, INV:+)"]), 0),
        "CLI unification does not force AUX:+",
    );
    let sig = load("inv.sig");
    let compacted = |avm: &str| resolve_compact(&sig, &parse_avm(&sig, avm).unwrap()).unwrap();
    let u = drfs_unify(&sig, &compacted("verb(INV:+)"), &compacted("verb(AUX:bool)")).unwrap();
    let aux = sig.feature_id("AUX").unwrap();
    let plus = sig.species_id("+").unwrap();
    let forced = u.expand().iter().all(|r| r.arc(r.root(), aux).is_some_and(|n| r.label(n).as_singleton() == Some(plus)));
    c.expect(forced && u.expansion_size() > 0, "some expansion lacks AUX:+");
    p.drfs.push((sig, u));
    if c.ok {
        c.detail = "UNSATISFIABLE; {v1(INV:+)}; unification forces AUX:+".into();
    }
    c
}

struct Triple {
    sig: CompiledSignature,
    f: FeatureGraph,
    g: FeatureGraph,
}

fn triples() -> Vec<Triple> {
    (0..TRIPLES as u64)
        .map(|seed| {
            let mut r = rng(0xC105 + seed);
            let sig = random_signature(&mut r).sig;
            let f = random_graph(&mut r, &sig, MAX_NODES);
            let g = random_graph(&mut r, &sig, MAX_NODES);
            Triple { sig, f, g }
        })
        .collect()
}

fn criterion6(suite: &[Triple], p: &mut Produced) -> Check {
    let mut c = Check::new();
    let (mut mismatches, mut nonempty) = (0, 0);
    for (i, t) in suite.iter().enumerate() {
        let (rf, rg) = (resolve(&t.sig, &t.f), resolve(&t.sig, &t.g));
        let unified = graph_unify(&t.sig, &t.f, &t.g);
        let expected = match &unified {
            Some(u) => keys(&resolve(&t.sig, u).materialize(u)),
            None => BTreeSet::new(),
        };
        let got = match (compact(&t.f, &rf), compact(&t.g, &rg)) {
            (Ok(a), Ok(b)) => {
                p.drfs.push((t.sig.clone(), a.clone()));
                p.drfs.push((t.sig.clone(), b.clone()));
                match drfs_unify(&t.sig, &a, &b) {
                    Some(d) => {
                        let k = keys(&d.expand());
                        p.drfs.push((t.sig.clone(), d));
                        Some(k)
                    }
                    None => None,
                }
            }
            _ => None,
        };
        let agree = match &got {
            Some(k) => *k == expected && !k.is_empty(),
            None => expected.is_empty(),
        };
        // the right-hand side once more, by set unification of the resolvents
        let pairwise = unify_sets(&t.sig, &rf.materialize(&t.f), &rg.materialize(&t.g));
        if !agree || pairwise != expected {
            mismatches += 1;
            c.expect(false, format!("triple {i} disagrees"));
        }
        if !expected.is_empty() {
            nonempty += 1;
        }
        p.graphs.push((t.sig.clone(), t.f.clone()));
        if let Some(u) = unified {
            p.graphs.push((t.sig.clone(), u));
        }
    }
    c.detail = format!("{} triples, {nonempty} with nonempty unification, {mismatches} mismatches", suite.len()) + &c.detail;
    c
}

fn criterion7(suite: &[Triple]) -> Check {
    let mut c = Check::new();
    let (mut cases, mut mismatches) = (0, 0);
    for t in suite {
        let mut graphs = vec![t.f.clone(), t.g.clone()];
        graphs.extend(graph_unify(&t.sig, &t.f, &t.g));
        for g in &graphs {
            let Ok(brute) = brute_force_resolve(&t.sig, g, DEFAULT_BOUND) else { continue };
            cases += 1;
            let fast = resolve(&t.sig, g);
            let independent = resolvents_brute(&t.sig, g, DEFAULT_BOUND as u128).unwrap();
            if fast != brute || keys(&fast.materialize(g)) != keys(&independent) {
                mismatches += 1;
                c.expect(false, "; first mismatch found");
            }
        }
    }
    c.detail = format!("{cases} graphs, {mismatches} mismatches") + &c.detail;
    c.expect(cases >= TRIPLES, "too few cases within the bound");
    c
}

fn criterion8(p: &mut Produced) -> Check {
    let mut c = Check::new();
    let (mut pairs, mut mismatches, mut literal, mut succeeded) = (0, 0, 0, 0);
    let mut seed = 0u64;
    while pairs < PAIRS {
        seed += 1;
        let mut r = rng(0x0F11 + seed);
        let sig = random_signature(&mut r).sig;
        let f = random_graph(&mut r, &sig, MAX_NODES);
        let g = random_graph(&mut r, &sig, MAX_NODES);
        let (Some(a), Some(b)) = (resolve_compact(&sig, &f), resolve_compact(&sig, &g)) else { continue };
        pairs += 1;
        let unfilled_first = drfs_unify(&sig, &unfill(&sig, &a), &unfill(&sig, &b));
        let unify_first = drfs_unify(&sig, &a, &b).map(|d| unfill(&sig, &d));
        let normalized = unfilled_first.as_ref().map(|d| unfill(&sig, d));
        if normalized != unify_first {
            mismatches += 1;
            c.expect(false, format!("; pair {seed} disagrees"));
        }
        if unfilled_first != unify_first {
            literal += 1;
        }
        if let Some(d) = unify_first {
            succeeded += 1;
            p.drfs.push((sig.clone(), d));
        }
        if let Some(d) = unfilled_first {
            p.drfs.push((sig, d));
        }
    }
    c.detail = format!(
        "{pairs} pairs, {succeeded} unifiable, {mismatches} mismatches after normalizing; \
         {literal} differ before the final unfill"
    ) + &c.detail;
    c
}

fn criterion9(p: &Produced) -> Check {
    let mut c = Check::new();
    let mut checked = 0;
    for (sig, g) in &p.graphs {
        let text = print_graph(sig, g);
        let ok = parse_avm(sig, &text).is_ok_and(|back| back.is_isomorphic(g) && print_graph(sig, &back) == text);
        c.expect(ok, format!("; graph `{text}` does not round-trip"));
        checked += 1;
    }
    for (sig, d) in &p.drfs {
        let text = print_drfs(sig, d);
        let ok = parse_drfs(sig, &text).is_ok_and(|back| back == *d && print_drfs(sig, &back) == text);
        c.expect(ok, format!("; structure `{text}` does not round-trip"));
        checked += 1;
    }
    for (sig, text, compact_syntax) in &p.texts {
        let again = if *compact_syntax {
            parse_drfs(sig, text).map(|d| print_drfs(sig, &d)).ok()
        } else {
            parse_avm(sig, text).map(|g| print_graph(sig, &g)).ok()
        };
        c.expect(again.as_deref() == Some(text.as_str()), format!("; CLI output `{text}` does not round-trip"));
        checked += 1;
    }
    let named = p.drfs.iter().filter(|(_, d)| !d.arities().is_empty()).count();
    c.detail = format!("{checked} structures, {named} with named disjunctions") + &c.detail;
    c
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut produced = Produced::default();
    let suite = triples();
    let results = [
        ("1", "phi: well-typed, well-typable, unsatisfiable", criterion1(&mut produced)),
        ("2", "rho resolves to exactly two resolvents", criterion2(&mut produced)),
        ("3", "rho compaction prints with one name", criterion3(&mut produced)),
        ("4", "unfilling and the resolve-first regression", criterion4(&mut produced)),
        ("5", "inverted verbs", criterion5(&mut produced)),
        ("6", "closure of unification under compaction", criterion6(&suite, &mut produced)),
        ("7", "resolve agrees with brute force", criterion7(&suite)),
        ("8", "unfill commutes with unification", criterion8(&mut produced)),
    ];
    let nine = criterion9(&produced);
    let mut failed = 0;
    for (id, title, check) in results.iter().chain(std::iter::once(&("9", "parse and print round-trip", nine))) {
        let verdict = if check.ok { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {id}: {title} ({})", check.detail);
        failed += usize::from(!check.ok);
    }
    println!("{} of 9 criteria passed in {:.1}s", 9 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
