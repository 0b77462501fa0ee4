//! Command-line surface: diagram validation and invariants, move-script
//! replay with audit logs, ladder/link/detour certificates, subgraph exports,
//! and the acceptance suites. Reports are deterministic byte-for-byte given
//! identical inputs and flags.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;

use crate::diagram::{AttachedComponent, Sign, SurgeryDiagram};
use crate::explorer::{
    self, build_subgraph, classify, ot_ladder, reverse_ladder, to_dot, verify_detour,
    verify_link_theorem, verify_ot_distance_bound, ExplorerError, Generator, Limits,
    PathCertificate, VertexKey,
};
use crate::format::{
    self, content_hash, from_json, rational_str, to_json_pretty, FormatError,
};
use crate::group::GroupSummary;
use crate::invariants::{self, InvariantError};
use crate::moves::{self, MoveError, MoveSpec};
use crate::verification::{self, Budgets};

const EXIT_OK: i32 = 0;
const EXIT_OTHER: i32 = 1;
const EXIT_PARSE: i32 = 2;
const EXIT_VALIDATION: i32 = 3;
const EXIT_PRECONDITION: i32 = 4;
const EXIT_BUDGET: i32 = 5;
const EXIT_VERIFICATION: i32 = 6;

#[derive(Parser)]
#[command(
    name = "csurg",
    about = "Contact (±1)-surgery diagrams: exact invariants, verified moves, certified surgery-graph exploration",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a diagram document for well-formedness violations
    Validate { diagram: PathBuf },
    /// Report homology, d3, Euler class and characteristic sublink data
    Invariants {
        diagram: PathBuf,
        /// also write the machine-readable report here
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Replay a move script against a diagram, with an audit log
    Move {
        diagram: PathBuf,
        script: PathBuf,
        /// write the resulting diagram here
        #[arg(long)]
        out: Option<PathBuf>,
        /// write the move-record audit log here
        #[arg(long)]
        audit: Option<PathBuf>,
    },
    /// Build the verified ladder of overtwisted spheres between two d3 values
    Ladder(LadderArgs),
    /// Certify the ≤2-step path from a single-surgery neighbor to the
    /// stabilization vertex
    LinkTheorem {
        base: PathBuf,
        /// attached-component document describing the surgery edge
        #[arg(long)]
        edge: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reroute a certified path around forbidden vertices via a lens-space
    /// detour of order p
    Detour {
        certificate: PathBuf,
        /// JSON array of vertex keys to avoid
        #[arg(long)]
        forbidden: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        p: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reroute a path between overtwisted spheres so every interior vertex is
    /// certified overtwisted (+2 edges)
    OtDistance {
        certificate: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Breadth-first subgraph over Darboux-ball generators, exported as DOT
    /// and/or a certificate bundle
    Subgraph(SubgraphArgs),
    /// Run every acceptance criterion; exit 0 iff all pass
    VerifyAll,
}

#[derive(Args)]
struct LadderArgs {
    #[arg(long)]
    from: i64,
    #[arg(long)]
    to: i64,
    /// write the certificate (reversed one under --reverse) here
    #[arg(long)]
    out: Option<PathBuf>,
    /// emit the (−1)-direction certificates instead
    #[arg(long)]
    reverse: bool,
}

#[derive(Args)]
struct SubgraphArgs {
    /// seed diagram documents; defaults to the empty diagram
    #[arg(long)]
    seed: Vec<PathBuf>,
    /// generators use tb ∈ [-tb_floor, -1]
    #[arg(long)]
    tb_floor: Option<i64>,
    /// generators use |rot| ≤ rot_bound
    #[arg(long, default_value_t = 1)]
    rot_bound: i64,
    /// restrict generator signs: +1, -1 or both
    #[arg(long, default_value = "both")]
    signs: String,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 512)]
    max_vertices: usize,
    #[arg(long, default_value_t = 4096)]
    max_edges: usize,
    /// write the DOT rendering here
    #[arg(long)]
    dot: Option<PathBuf>,
    /// write a certificate bundle directory here
    #[arg(long)]
    bundle: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        let code = match e {
            FormatError::Parse { .. } => EXIT_PARSE,
            FormatError::Io { .. } => EXIT_OTHER,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<InvariantError> for Failure {
    fn from(e: InvariantError) -> Self {
        let code = match e {
            InvariantError::InvalidDiagram(_) => EXIT_VALIDATION,
            InvariantError::SublinkOverflow => EXIT_BUDGET,
            InvariantError::D3Undefined
            | InvariantError::NoCharacteristicSublink
            | InvariantError::Precondition(_) => EXIT_PRECONDITION,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<MoveError> for Failure {
    fn from(e: MoveError) -> Self {
        let code = match &e {
            MoveError::InvalidDiagram(_) => EXIT_VALIDATION,
            MoveError::UnknownComponent(_) | MoveError::Precondition(_) => EXIT_PRECONDITION,
            MoveError::InvarianceViolation { .. } => EXIT_VERIFICATION,
            MoveError::Invariant(inner) => match inner {
                InvariantError::SublinkOverflow => EXIT_BUDGET,
                InvariantError::InvalidDiagram(_) => EXIT_VALIDATION,
                _ => EXIT_PRECONDITION,
            },
        };
        Failure::new(code, e.to_string())
    }
}

impl From<ExplorerError> for Failure {
    fn from(e: ExplorerError) -> Self {
        match e {
            ExplorerError::Invariant(inner) => inner.into(),
            ExplorerError::Move(inner) => inner.into(),
            ExplorerError::Precondition(_) | ExplorerError::DetourCollision { .. } => {
                Failure::new(EXIT_PRECONDITION, e.to_string())
            }
            ExplorerError::Verification(_) => Failure::new(EXIT_VERIFICATION, e.to_string()),
            ExplorerError::Budget(_) => Failure::new(EXIT_BUDGET, e.to_string()),
        }
    }
}

fn read_diagram(path: &Path) -> Result<SurgeryDiagram, Failure> {
    let text = format::read_file(&path.display().to_string())?;
    Ok(from_json::<SurgeryDiagram>(&text)?)
}

fn write_out(path: &Path, contents: &str) -> Result<(), Failure> {
    format::write_file(&path.display().to_string(), contents)?;
    Ok(())
}

fn kv(label: &str, value: impl std::fmt::Display) {
    println!("{label:<24} {value}");
}

#[derive(Serialize)]
struct InvariantsReport {
    components: usize,
    homology: GroupSummary,
    #[serde(with = "format::rational_opt")]
    d3: Option<num_rational::BigRational>,
    euler_meridian_coordinates: Vec<String>,
    euler_canonical: crate::group::EulerCanon,
    characteristic_sublink_count: u64,
    mod2_nullity: usize,
    key: VertexKey,
    content_hash: String,
}

fn cmd_validate(path: &Path) -> Result<i32, Failure> {
    let d = read_diagram(path)?;
    let violations = d.validate();
    if violations.is_empty() {
        println!("ok: well-formed diagram with {} component(s)", d.len());
        Ok(EXIT_OK)
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        Ok(EXIT_VALIDATION)
    }
}

fn cmd_invariants(path: &Path, json: &Option<PathBuf>) -> Result<i32, Failure> {
    let d = read_diagram(path)?;
    let group = invariants::homology(&d)?;
    let d3 = match invariants::d3(&d) {
        Ok(v) => Some(v),
        Err(InvariantError::D3Undefined) => None,
        Err(e) => return Err(e.into()),
    };
    let euler = invariants::euler_class(&d)?;
    let sublinks = invariants::characteristic_sublinks(&d)?;
    let nullity = invariants::mod2_nullity(&d)?;
    let key = classify(&d, &[])?;

    kv("components", d.len());
    kv("homology", group.summary());
    kv("d3", d3.as_ref().map_or_else(|| "undefined (det Q = 0)".into(), rational_str));
    let euler_note = if group.is_zero_class(&euler.coordinates) { " = 0 in H1" } else { "" };
    kv(
        "euler class (meridians)",
        format!(
            "[{}]{euler_note}",
            euler.coordinates.iter().map(BigInt::to_string).collect::<Vec<_>>().join(", ")
        ),
    );
    kv("characteristic sublinks", format!("{} (mod-2 nullity {nullity})", sublinks.len()));
    kv("vertex key", &key);

    if let Some(json_path) = json {
        let report = InvariantsReport {
            components: d.len(),
            homology: group.summary(),
            d3,
            euler_meridian_coordinates: euler.coordinates.iter().map(BigInt::to_string).collect(),
            euler_canonical: crate::group::canonical_element(&group, &euler.coordinates),
            characteristic_sublink_count: sublinks.len() as u64,
            mod2_nullity: nullity,
            key,
            content_hash: content_hash(&d),
        };
        write_out(json_path, &to_json_pretty(&report))?;
    }
    Ok(EXIT_OK)
}

fn cmd_move(
    diagram: &Path,
    script: &Path,
    out: &Option<PathBuf>,
    audit: &Option<PathBuf>,
) -> Result<i32, Failure> {
    let d = read_diagram(diagram)?;
    let text = format::read_file(&script.display().to_string())?;
    let specs: Vec<MoveSpec> = from_json(&text)?;
    let (result, records) = moves::replay(&d, &specs)?;
    for r in &records {
        let kind = serde_json::to_value(&r.spec)
            .ok()
            .and_then(|v| v.get("kind").and_then(|k| k.as_str().map(String::from)))
            .unwrap_or_else(|| "move".into());
        println!("applied {kind}: {} -> {}", &r.before_hash[..12], &r.after_hash[..12]);
    }
    kv("components", result.len());
    kv("content hash", content_hash(&result));
    if let Some(p) = out {
        write_out(p, &to_json_pretty(&result))?;
    }
    if let Some(p) = audit {
        write_out(p, &to_json_pretty(&records))?;
    }
    Ok(EXIT_OK)
}

fn print_path(path: &PathCertificate) {
    kv("start", &path.start_key);
    for (n, e) in path.edges.iter().enumerate() {
        println!(
            "edge {n:<3} ({}{}) -> {}",
            e.added.component.id,
            match e.sign() {
                Sign::Plus => "(+1)",
                Sign::Minus => "(-1)",
            },
            e.to_key
        );
    }
    kv("length", path.len());
}

fn cmd_ladder(args: &LadderArgs) -> Result<i32, Failure> {
    let path = ot_ladder(args.from, args.to)?;
    let chosen = if args.reverse { reverse_ladder(&path)? } else { path };
    print_path(&chosen);
    if let Some(p) = &args.out {
        write_out(p, &to_json_pretty(&chosen))?;
    }
    Ok(EXIT_OK)
}

fn cmd_link_theorem(base: &Path, edge: &Path, out: &Option<PathBuf>) -> Result<i32, Failure> {
    let base = read_diagram(base)?;
    let text = format::read_file(&edge.display().to_string())?;
    let edge: AttachedComponent = from_json(&text)?;
    let path = verify_link_theorem(&base, &[], &edge)?;
    print_path(&path);
    if let Some(p) = out {
        write_out(p, &to_json_pretty(&path))?;
    }
    Ok(EXIT_OK)
}

fn read_certificate(path: &Path) -> Result<PathCertificate, Failure> {
    let text = format::read_file(&path.display().to_string())?;
    Ok(from_json(&text)?)
}

fn cmd_detour(
    certificate: &Path,
    forbidden: &Option<PathBuf>,
    p: i64,
    out: &Option<PathBuf>,
) -> Result<i32, Failure> {
    let path = read_certificate(certificate)?;
    let forbidden: BTreeSet<VertexKey> = match forbidden {
        None => BTreeSet::new(),
        Some(f) => {
            let text = format::read_file(&f.display().to_string())?;
            from_json::<Vec<VertexKey>>(&text)?.into_iter().collect()
        }
    };
    let rerouted = verify_detour(&path, &forbidden, p)?;
    print_path(&rerouted);
    if let Some(out) = out {
        write_out(out, &to_json_pretty(&rerouted))?;
    }
    Ok(EXIT_OK)
}

fn cmd_ot_distance(certificate: &Path, out: &Option<PathBuf>) -> Result<i32, Failure> {
    let path = read_certificate(certificate)?;
    let rerouted = verify_ot_distance_bound(&path)?;
    print_path(&rerouted);
    if let Some(out) = out {
        write_out(out, &to_json_pretty(&rerouted))?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct BundleIndex {
    vertices: Vec<BundleVertex>,
    edges: Vec<BundleEdge>,
    truncated: bool,
}

#[derive(Serialize)]
struct BundleVertex {
    key: VertexKey,
    diagram: String,
}

#[derive(Serialize)]
struct BundleEdge {
    from: usize,
    to: usize,
    generator: Generator,
    witness: String,
    added: AttachedComponent,
}

fn write_bundle(dir: &Path, graph: &explorer::Subgraph) -> Result<(), Failure> {
    let mk = |sub: &str| {
        let p = dir.join(sub);
        std::fs::create_dir_all(&p)
            .map_err(|e| Failure::new(EXIT_OTHER, format!("cannot create {}: {e}", p.display())))
    };
    mk("vertices")?;
    mk("edges")?;
    let mut vertices = Vec::new();
    for (i, v) in graph.vertices.iter().enumerate() {
        let rel = format!("vertices/v{i:04}.diagram");
        write_out(&dir.join(&rel), &to_json_pretty(&v.diagram))?;
        vertices.push(BundleVertex { key: v.key.clone(), diagram: rel });
    }
    let mut edges = Vec::new();
    for (i, e) in graph.edges.iter().enumerate() {
        let rel = format!("edges/e{i:04}.diagram");
        write_out(&dir.join(&rel), &to_json_pretty(&e.certificate.witness))?;
        edges.push(BundleEdge {
            from: e.from,
            to: e.to,
            generator: e.generator.clone(),
            witness: rel,
            added: e.certificate.added.clone(),
        });
    }
    let index = BundleIndex { vertices, edges, truncated: graph.truncated };
    write_out(&dir.join("index.json"), &to_json_pretty(&index))
}

fn cmd_subgraph(args: &SubgraphArgs) -> Result<i32, Failure> {
    let budgets = Budgets::from_env();
    let depth = args.depth.unwrap_or(budgets.depth);
    let tb_floor = args.tb_floor.unwrap_or(budgets.tb_floor);
    let mut seeds = Vec::new();
    if args.seed.is_empty() {
        seeds.push((SurgeryDiagram::new(), Vec::new()));
    }
    for p in &args.seed {
        seeds.push((read_diagram(p)?, Vec::new()));
    }
    let generators: Vec<Generator> = verification::default_generators(tb_floor, args.rot_bound)
        .into_iter()
        .filter(|g| match args.signs.as_str() {
            "+1" => g.sign == Sign::Plus,
            "-1" => g.sign == Sign::Minus,
            _ => true,
        })
        .collect();
    let limits = Limits { max_vertices: args.max_vertices, max_edges: args.max_edges };
    let graph = build_subgraph(&seeds, &generators, depth, limits)?;

    kv("vertices", graph.vertices.len());
    kv("edges", graph.edges.len());
    kv("generators", generators.len());
    kv("truncated", graph.truncated);
    for (i, v) in graph.vertices.iter().enumerate() {
        println!("  v{i:<4} {}", v.key);
    }
    if let Some(p) = &args.dot {
        write_out(p, &to_dot(&graph))?;
    }
    if let Some(dir) = &args.bundle {
        write_bundle(dir, &graph)?;
    }
    if graph.truncated {
        println!("warning: graph truncated by budget; raise --max-vertices/--max-edges");
        return Ok(EXIT_BUDGET);
    }
    Ok(EXIT_OK)
}

fn cmd_verify_all() -> i32 {
    let budgets = Budgets::from_env();
    let reports = verification::run_all(budgets);
    for r in &reports {
        println!("{}", r.line());
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed == 0 {
        println!("verify-all: all {} criteria passed", reports.len());
        EXIT_OK
    } else {
        println!("verify-all: {failed} criteria FAILED");
        EXIT_VERIFICATION
    }
}

/// Entry point for the `csurg` binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate { diagram } => cmd_validate(diagram),
        Command::Invariants { diagram, json } => cmd_invariants(diagram, json),
        Command::Move { diagram, script, out, audit } => cmd_move(diagram, script, out, audit),
        Command::Ladder(args) => cmd_ladder(args),
        Command::LinkTheorem { base, edge, out } => cmd_link_theorem(base, edge, out),
        Command::Detour { certificate, forbidden, p, out } => {
            cmd_detour(certificate, forbidden, *p, out)
        }
        Command::OtDistance { certificate, out } => cmd_ot_distance(certificate, out),
        Command::Subgraph(args) => cmd_subgraph(args),
        Command::VerifyAll => Ok(cmd_verify_all()),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn diagram_roundtrips_canonically() {
        use crate::format::canonical_diagram_json;
        let mut d = SurgeryDiagram::new();
        d.add_component(crate::diagram::SurgeryComponent::new("u", -2, 1, Sign::Plus));
        let text = to_json_pretty(&d);
        let back: SurgeryDiagram = from_json(&text).unwrap();
        assert_eq!(canonical_diagram_json(&back), canonical_diagram_json(&d));
    }
}
