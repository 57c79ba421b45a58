//! `vorcycle`: enumerate perfect forms, build the top of the Voronoi complex,
//! and verify the top-cycle statements, with an on-disk cache.
//!
//! Exit codes: 0 verified, 1 falsified or internal failure, 2 usage or input
//! error, 3 cache corruption.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};
use vorcycle_core::complex::{build_complex, ComplexOptions, FacetKind, VoronoiComplex};
use vorcycle_core::dd::{dd_sanity, DdReport};
use vorcycle_core::homology::{verify, TheoremReport, VerifyOptions};
use vorcycle_core::perfect::{enumerate_perfect_forms, GroupKind, VoronoiGraph};
use vorcycle_core::persist::{write_atomic, Cache, CacheEntry, PayloadKind};
use vorcycle_core::tess::{check_general_theorem, from_voronoi, sector_fan, TessInstance};
use vorcycle_core::Error;

#[derive(Parser)]
#[command(name = "vorcycle", version, about = "Top-degree Voronoi complex of GL_n(Z) and SL_n(Z)")]
struct Cli {
    /// Cache directory.
    #[arg(long, global = true, env = "VORCYCLE_CACHE", default_value = ".vorcycle")]
    cache_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Target {
    /// Rank of the lattice.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "gl", value_parser = ["gl", "sl"])]
    group: String,
    /// Permit n = 6 and n = 7.
    #[arg(long)]
    allow_long: bool,
    /// Re-randomize representatives with this seed (bypasses the complex cache).
    #[arg(long)]
    seed_perm: Option<u64>,
}

impl Target {
    fn kind(&self) -> GroupKind {
        self.group.parse().expect("validated by clap")
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate perfect forms up to equivalence and print the Voronoi graph.
    Perfect(Target),
    /// Build the top two degrees of the complex and print the differential.
    Complex(Target),
    /// Check the top-cycle statement (or the vanishing statement for GL, n even).
    Verify {
        #[command(flatten)]
        target: Target,
        /// Also check that the composite of the top two differentials vanishes.
        #[arg(long)]
        check_dd: bool,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Abstract tessellation instances.
    Tess {
        #[command(subcommand)]
        command: TessCommand,
    },
}

#[derive(Subcommand)]
enum TessCommand {
    /// Print the quadrant cut into K sectors.
    GenSectorFan {
        k: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Check an instance file (`-` reads standard input).
    Check { input: String },
    /// Export the Voronoi complex as an instance.
    FromVoronoi {
        #[command(flatten)]
        target: Target,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

/// Verdict file contents.
#[derive(Serialize, Deserialize)]
struct Verdict {
    report: TheoremReport,
    dd: Option<DdReport>,
    verified: bool,
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Usage(_) => 2,
        Failure::Core(Error::CacheCorrupt { .. }) => 3,
        Failure::Core(
            Error::UnsupportedRank(..)
            | Error::Parse(_)
            | Error::InvariantViolation(_)
            | Error::IndexOutOfRange(_)
            | Error::WrongGroupParity(_)
            | Error::NotVanishingCase(_),
        ) => 2,
        Failure::Core(_) => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Core(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(exit_code(&f))
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let cache = Cache::new(&cli.cache_dir);
    match &cli.command {
        Command::Perfect(t) => {
            check_rank(t)?;
            let g = graph(&cache, t)?;
            print_graph(&g);
            Ok(0)
        }
        Command::Complex(t) => {
            check_rank(t)?;
            let c = complex(&cache, t)?;
            print_complex(&c);
            Ok(0)
        }
        Command::Verify { target, check_dd, json } => {
            check_rank(target)?;
            let c = complex(&cache, target)?;
            let opts = VerifyOptions { properties: true, seed: target.seed_perm.unwrap_or(0) };
            let report = verify(&c, opts)?;
            let dd = if *check_dd { Some(dd_sanity(&c)?) } else { None };
            let verified = report.verified && dd.as_ref().is_none_or(|d| d.holds);
            let v = Verdict { report, dd, verified };
            if target.seed_perm.is_none() {
                cache.store(PayloadKind::Verdict, target.n, target.kind(), &v)?;
            }
            if *json {
                write_stdout(&format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable")))?;
            } else {
                print_verdict(&v);
            }
            Ok(if verified { 0 } else { 1 })
        }
        Command::Tess { command } => tess(&cache, command),
    }
}

fn check_rank(t: &Target) -> Result<(), Failure> {
    match t.n {
        2..=5 => Ok(()),
        6 | 7 if t.allow_long => Ok(()),
        6 | 7 => Err(Failure::Usage(format!("n = {} is long-running; pass --allow-long", t.n))),
        n => Err(Failure::Usage(format!("n = {n} is outside 2..=7"))),
    }
}

fn graph(cache: &Cache, t: &Target) -> Result<VoronoiGraph, Failure> {
    let kind = t.kind();
    let g = match cache.fetch_graph(t.n, kind)? {
        Some(g) => {
            info!("graph loaded from {}", cache.path(PayloadKind::Graph, t.n, kind).display());
            g
        }
        None => {
            let g = enumerate_perfect_forms(t.n, kind)?;
            cache.store(PayloadKind::Graph, t.n, kind, &g)?;
            g
        }
    };
    Ok(match t.seed_perm {
        Some(s) => g.permuted(s),
        None => g,
    })
}

fn complex(cache: &Cache, t: &Target) -> Result<VoronoiComplex, Failure> {
    let kind = t.kind();
    if let Some(s) = t.seed_perm {
        return Ok(build_complex(&graph(cache, t)?, ComplexOptions { seed: Some(s) })?);
    }
    if let Some(c) = cache.fetch_complex(t.n, kind)? {
        return Ok(c);
    }
    let c = build_complex(&graph(cache, t)?, ComplexOptions::default())?;
    cache.store(PayloadKind::Complex, t.n, kind, &c)?;
    Ok(c)
}

fn print_graph(g: &VoronoiGraph) {
    let names = g.class_names().join(", ");
    match g.nodes.len() {
        1 => println!("1 class: {names}"),
        k => println!("{k} classes: {names}"),
    }
    for node in &g.nodes {
        println!(
            "  {}: |stabilizer| = {}, {} minimal vectors, {} facets",
            node.name,
            node.stab_order(),
            node.minvecs.len(),
            node.facets().len()
        );
    }
    println!("edges (from -> to: facets)");
    let mut counts = std::collections::BTreeMap::new();
    for e in &g.edges {
        *counts.entry((e.from, e.to)).or_insert(0usize) += 1;
    }
    for ((a, b), k) in counts {
        println!("  {} -> {}: {k}", g.nodes[a].name, g.nodes[b].name);
    }
}

fn print_complex(c: &VoronoiComplex) {
    println!("n = {}, group = {}", c.n, c.group);
    println!("top cells:");
    for cell in &c.cells {
        println!(
            "  {}: |stabilizer| = {}, {}",
            cell.name,
            cell.stab_order,
            if cell.kept { "kept" } else { "orientation reversed" }
        );
    }
    println!("facet orbits:");
    for f in &c.facets {
        let kind = match f.kind {
            FacetKind::SelfIntersecting => "self-intersecting",
            FacetKind::NonSelfIntersecting => "non-self-intersecting",
        };
        println!(
            "  {} / {}: {kind}, |stabilizer| = {}, {}",
            c.cells[f.cell].name,
            c.cells[f.other].name,
            f.stab_order,
            if f.kept { "kept" } else { "orientation reversed" }
        );
    }
    let cols: Vec<&str> = c.col_cells.iter().map(|&i| c.cells[i].name.as_str()).collect();
    println!("differential: {} x {} (columns: {})", c.differential.rows, c.differential.cols, cols.join(", "));
    for &(r, col, v) in &c.differential.entries {
        println!("  ({r}, {col}) = {v}");
    }
}

fn print_verdict(v: &Verdict) {
    let r = &v.report;
    println!("statement: {} (n = {}, group = {})", r.statement, r.n, r.group);
    println!("kept top cells: [{}]", r.cells.join(", "));
    println!("kernel dimension: {}", r.kernel_dim);
    let canon: Vec<String> = r.canonical.coefficients.iter().map(ToString::to_string).collect();
    println!("canonical chain: [{}], in kernel: {}", canon.join(", "), r.canonical_in_kernel);
    for p in &r.properties {
        println!(
            "  {}: {} ({} checked){}",
            p.name,
            if p.holds { "ok" } else { "FAILED" },
            p.checked,
            if p.detail.is_empty() { String::new() } else { format!(" {}", p.detail) }
        );
    }
    if let Some(d) = &v.dd {
        println!(
            "d∘d = 0: {} ({} kept codim-2 orbits of {})",
            if d.holds { "ok" } else { "FAILED" },
            d.ridge_orbits,
            d.ridge_orbits_total
        );
    }
    println!("{}", if v.verified { "verified" } else { "FALSIFIED" });
}

fn tess(cache: &Cache, command: &TessCommand) -> Result<u8, Failure> {
    match command {
        TessCommand::GenSectorFan { k, out } => {
            let inst = sector_fan(*k).map_err(|e| Failure::Usage(e.to_string()))?;
            emit(&inst, out.as_deref())?;
            Ok(0)
        }
        TessCommand::FromVoronoi { target, out } => {
            check_rank(target)?;
            let inst = from_voronoi(&complex(cache, target)?);
            emit(&inst, out.as_deref())?;
            Ok(0)
        }
        TessCommand::Check { input } => {
            let (text, origin) = if input == "-" {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s)?;
                (s, "<stdin>".to_string())
            } else {
                let s = std::fs::read_to_string(input).map_err(|e| Failure::Usage(format!("{input}: {e}")))?;
                (s, input.clone())
            };
            let inst = parse_instance(&text, &origin)?;
            let v = check_general_theorem(&inst)?;
            write_stdout(&format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable")))?;
            Ok(if v.holds { 0 } else { 1 })
        }
    }
}

fn emit(inst: &TessInstance, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(inst).expect("serializable");
    text.push('\n');
    match out {
        Some(p) => write_atomic(p, &text)?,
        None => write_stdout(&text)?,
    }
    Ok(())
}

/// A closed pipe on standard output is not an error.
fn write_stdout(text: &str) -> std::io::Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}

/// A bare instance, or one wrapped in a hashed cache entry.
fn parse_instance(text: &str, origin: &str) -> Result<TessInstance, Failure> {
    let wrapped =
        serde_json::from_str::<serde_json::Value>(text).ok().is_some_and(|v| v.get("schema_version").is_some());
    if wrapped {
        let e = CacheEntry::from_text(text, origin)?;
        if e.kind != PayloadKind::TessInstance {
            return Err(Failure::Usage(format!("{origin}: entry holds a {}, not a tess-instance", e.kind.as_str())));
        }
        return Ok(e.decode(origin)?);
    }
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        Failure::Core(Error::Parse(format!("{origin}: at `{}`: {inner}", e.path())))
    })
}
