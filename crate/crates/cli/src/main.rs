//! `tfs`: resolve, compact, unfill and unify typed feature structures.
//!
//! Exit status: 0 success or "true", 1 unsatisfiable, failed or "false",
//! 2 usage or parse error, 3 ill-formed signature.

mod json;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use tfs_core::{
    brute_force_resolve, compact, compile_signature, drfs_unify, is_well_typable, parse_avm, parse_signature,
    print_drfs, print_graph, resolve, unfill, CompactDrfs, CompiledSignature, FeatureGraph, LabellingRelation,
    SignatureDecls,
};

#[derive(Parser)]
#[command(name = "tfs", version, about = "Typed feature structures with type resolution")]
struct Cli {
    /// Signature file.
    #[arg(long, global = true, value_name = "PATH")]
    sig: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Resolve by brute-force enumeration.
    #[arg(long, global = true)]
    oracle: bool,
    /// Largest number of label combinations the brute-force resolver may try.
    #[arg(long, global = true, value_name = "N", default_value_t = tfs_core::DEFAULT_BOUND)]
    bound: u64,
    /// Leave `unify` operands and result filled.
    #[arg(long, global = true)]
    no_unfill: bool,
    #[command(subcommand)]
    command: Command,
}

/// Each AVM argument is read from a file if one exists at that path.
#[derive(Subcommand)]
enum Command {
    /// Compile the signature and list species with their features.
    CheckSig,
    /// Parse a signature file and print its declarations back.
    ParseSig { file: PathBuf },
    /// Is the structure well-typed?
    Welltyped { avm: String },
    /// Is the structure subsumed by some well-typed structure?
    Welltypable { avm: String },
    /// Print every resolvent.
    Resolve { avm: String },
    /// Resolve and print the compacted result.
    Compact { avm: String },
    /// Resolve, compact and drop predictable features.
    Unfill { avm: String },
    /// Unify two structures through their compacted resolvents.
    Unify { left: String, right: String },
}

enum Failure {
    Usage(String),
    Signature(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Signature(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Signature(m) => m,
        }
    }
}

struct Output {
    text: String,
    json: serde_json::Value,
    ok: bool,
}

impl Output {
    fn new(text: impl Into<String>, json: impl Serialize, ok: bool) -> Self {
        Output { text: text.into(), json: serde_json::to_value(json).expect("records serialize"), ok }
    }
}

fn read_input(arg: &str) -> Result<String, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{arg}: {e}")))
    } else {
        Ok(arg.to_owned())
    }
}

fn read_decls(path: &Path) -> Result<SignatureDecls, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_signature(&text).map_err(|e| Failure::Signature(format!("{}:{e}", path.display())))
}

fn load_signature(cli: &Cli) -> Result<CompiledSignature, Failure> {
    let path = cli.sig.as_ref().ok_or_else(|| Failure::Usage("this command needs --sig PATH".into()))?;
    compile_signature(&read_decls(path)?).map_err(|e| {
        let at = e.span().map(|s| format!("{s}: ")).unwrap_or_default();
        Failure::Signature(format!("{}:{at}{e}", path.display()))
    })
}

fn parse(sig: &CompiledSignature, arg: &str) -> Result<FeatureGraph, Failure> {
    parse_avm(sig, &read_input(arg)?).map_err(|e| Failure::Usage(e.to_string()))
}

fn resolution(cli: &Cli, sig: &CompiledSignature, g: &FeatureGraph) -> Result<LabellingRelation, Failure> {
    if cli.oracle {
        brute_force_resolve(sig, g, cli.bound).map_err(|e| {
            Failure::Usage(format!("{} label combinations exceed the bound of {}", e.combinations, e.bound))
        })
    } else {
        Ok(resolve(sig, g))
    }
}

fn compacted(cli: &Cli, sig: &CompiledSignature, arg: &str) -> Result<Option<CompactDrfs>, Failure> {
    let g = parse(sig, arg)?;
    Ok(compact(&g, &resolution(cli, sig, &g)?).ok())
}

fn unsatisfiable() -> Output {
    Output::new("UNSATISFIABLE", serde_json::json!({ "satisfiable": false }), false)
}

fn predicate(value: bool) -> Output {
    Output::new(value.to_string(), serde_json::json!({ "result": value }), value)
}

fn structure(sig: &CompiledSignature, d: &CompactDrfs) -> Output {
    Output::new(print_drfs(sig, d), json::drfs(sig, d), true)
}

fn print_decls(decls: &SignatureDecls) -> String {
    let mut out = String::new();
    for t in &decls.types {
        out.push_str("type ");
        out.push_str(&t.name);
        let subs: Vec<&str> =
            decls.subtypes.iter().filter(|s| s.general == t.name).map(|s| s.specific.as_str()).collect();
        if !subs.is_empty() {
            out.push_str(&format!(" sub {{{}}}", subs.join(" ")));
        }
        let approp: Vec<String> =
            decls.approp.iter().filter(|a| a.ty == t.name).map(|a| format!("{}:{}", a.feature, a.value)).collect();
        if !approp.is_empty() {
            out.push_str(&format!(" approp {{{}}}", approp.join(" ")));
        }
        out.push_str(".\n");
    }
    out
}

fn describe_signature(sig: &CompiledSignature) -> String {
    let mut out = String::new();
    let species: Vec<&str> = sig.species().map(|s| sig.species_name(s)).collect();
    out.push_str(&format!("species: {}\n", species.join(" ")));
    for s in sig.species() {
        out.push_str(sig.species_name(s));
        for f in sig.features() {
            if let Some(v) = sig.spec_approp(s, f) {
                let value = print_graph(sig, &FeatureGraph::atom(v.clone()));
                out.push_str(&format!(" {}:{value}", sig.feature_name(f)));
            }
        }
        out.push('\n');
    }
    out
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    if let Command::ParseSig { file } = &cli.command {
        let decls = read_decls(file)?;
        let text = print_decls(&decls);
        return Ok(Output::new(text.trim_end(), serde_json::json!({ "text": text }), true));
    }
    let sig = load_signature(cli)?;
    Ok(match &cli.command {
        Command::ParseSig { .. } => unreachable!(),
        Command::CheckSig => Output::new(describe_signature(&sig).trim_end(), json::signature(&sig), true),
        Command::Welltyped { avm } => predicate(tfs_core::is_well_typed(&sig, &parse(&sig, avm)?)),
        Command::Welltypable { avm } => predicate(is_well_typable(&sig, &parse(&sig, avm)?)),
        Command::Resolve { avm } => {
            let g = parse(&sig, avm)?;
            let rel = resolution(cli, &sig, &g)?;
            if rel.is_empty() {
                unsatisfiable()
            } else {
                let resolvents = rel.materialize(&g);
                let text: Vec<String> = resolvents.iter().map(|r| print_graph(&sig, r)).collect();
                let records: Vec<json::Graph> = resolvents.iter().map(|r| json::graph(&sig, r)).collect();
                Output::new(text.join("\n"), serde_json::json!({ "satisfiable": true, "resolvents": records }), true)
            }
        }
        Command::Compact { avm } => match compacted(cli, &sig, avm)? {
            Some(d) => structure(&sig, &d),
            None => unsatisfiable(),
        },
        Command::Unfill { avm } => match compacted(cli, &sig, avm)? {
            Some(d) => structure(&sig, &unfill(&sig, &d)),
            None => unsatisfiable(),
        },
        Command::Unify { left, right } => {
            let prepare = |d: CompactDrfs| if cli.no_unfill { d } else { unfill(&sig, &d) };
            let (a, b) = (compacted(cli, &sig, left)?, compacted(cli, &sig, right)?);
            let result = a.zip(b).and_then(|(a, b)| drfs_unify(&sig, &prepare(a), &prepare(b)));
            match result {
                Some(d) => structure(&sig, &prepare(d)),
                None => Output::new("FAIL", serde_json::json!({ "unified": false }), false),
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = if cli.json { serde_json::to_string_pretty(&out.json).expect("valid json") } else { out.text };
            // a closed pipe is not worth a panic
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(failure) => {
            eprintln!("tfs: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
