//! `mgq`: classical and quantum symmetries of finite multigraphs from the command line.
//!
//! Exit status is 0 on success, 1 when a verification fails and 2 on bad input.

use std::f64::consts::FRAC_PI_4;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mgq::abelian::{classical_points_with_limit, candidate_limit};
use mgq::aut::{enumerate_automorphisms, predicted_order, Flavor};
use mgq::cstar::{build_ck_family, verify_ck_coaction, verify_correspondence_covariance};
use mgq::presentation::{emit_presentation, Kind};
use mgq::reps::{default_wreath_rep, example5_witness, verify_rep, MagicUnitaryRep};
use mgq::{Graph, Multigraph};
use serde_json::{json, Value};

/// Above this many edges most enumerations stop being feasible.
const EDGE_WARNING: usize = 64;

#[derive(Parser)]
#[command(name = "mgq", version, about = "Classical and quantum symmetries of finite multigraphs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Residual tolerance for numeric checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Check a multigraph file and report every violation.
    Validate { graph: PathBuf },
    /// Print the adjacency matrix and the uniform components.
    Decompose { graph: PathBuf },
    /// Enumerate the automorphism group or a source/target subgroup.
    Aut {
        graph: PathBuf,
        #[arg(long, default_value = "all", value_parser = parse_flavor)]
        flavor: Flavor,
        /// Print every element.
        #[arg(long)]
        list: bool,
    },
    /// Emit the relations of a quantum group presentation.
    Present {
        graph: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        kind: Kind,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Count the Boolean commutative solutions of a presentation.
    ClassicalPoints {
        graph: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        kind: Kind,
        /// Print every point as the list of generators equal to 1.
        #[arg(long)]
        list: bool,
    },
    /// Check a matrix representation against a presentation.
    VerifyRep {
        graph: PathBuf,
        rep: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        kind: Kind,
    },
    /// Build the wreath-product representation of a uniform multigraph.
    WreathRep {
        graph: PathBuf,
        #[arg(long, default_value_t = FRAC_PI_4)]
        angle: f64,
        /// Output file; standard output when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build and check the noncommutativity witness on a square-shaped graph.
    Witness {
        graph: PathBuf,
        #[arg(long, default_value_t = FRAC_PI_4)]
        angle: f64,
        /// Also assign nontrivial bundle permutations (doubles the dimension).
        #[arg(long)]
        gamma: bool,
    },
    /// Build the Cuntz-Krieger family of an acyclic graph, optionally checking a coaction.
    Cstar {
        graph: PathBuf,
        #[arg(long)]
        rep: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn parse_flavor(s: &str) -> Result<Flavor, String> {
    s.parse()
}

fn parse_kind(s: &str) -> Result<Kind, String> {
    s.parse().map_err(|e: mgq::PresentationError| e.to_string())
}

/// What a successful run concluded.
enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from(passed: bool) -> Self {
        if passed {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_graph(path: &Path) -> Result<Graph> {
    let g = Graph::from_json(&read(path)?).with_context(|| format!("{}", path.display()))?;
    if g.edge_count() > EDGE_WARNING {
        eprintln!("warning: {} has {} edges; enumeration may be infeasible", path.display(), g.edge_count());
    }
    Ok(g)
}

fn load_rep(path: &Path, tol: f64) -> Result<MagicUnitaryRep> {
    let rep = MagicUnitaryRep::from_json(&read(path)?).with_context(|| format!("{}", path.display()))?;
    Ok(rep.with_tol(tol))
}

fn emit(global: &Global, value: Value, text: impl FnOnce() -> String) {
    if global.json {
        println!("{}", serde_json::to_string_pretty(&value).expect("values serialize"));
    } else {
        println!("{}", text());
    }
}

fn validate(global: &Global, path: &Path) -> Result<Verdict> {
    let raw = Multigraph::from_json(&read(path)?).with_context(|| format!("{}", path.display()))?;
    let report = raw.validate();
    let violations: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
    emit(global, json!({"kind": report.kind, "valid": report.is_valid(), "violations": violations}), || report.to_string());
    Ok(Verdict::from(report.is_valid()))
}

fn decompose(global: &Global, g: &Graph) -> Result<Verdict> {
    let w = g.adjacency_matrix();
    let components = g.uniform_decompose();
    let ids = |xs: &[usize], name: &dyn Fn(usize) -> String| xs.iter().map(|&x| name(x)).collect::<Vec<_>>();
    let vname = |i: usize| g.vertex_id(i).to_string();
    let ename = |e: usize| g.edge_id(e).to_string();
    let value = json!({
        "kind": g.kind(),
        "vertices": g.vertices(),
        "adjacency": w.entries,
        "components": components.iter().map(|c| json!({
            "degree": c.degree,
            "vertices": ids(&c.vertices, &vname),
            "edges": ids(&c.edges, &ename),
            "sources": ids(&c.sources, &vname),
            "targets": ids(&c.targets, &vname),
        })).collect::<Vec<_>>(),
    });
    emit(global, value, || {
        let mut out = format!("{} multigraph, {} vertices, {} edges\nadjacency ({}):", g.kind(), g.vertex_count(), g.edge_count(), g.vertices().join(" "));
        for row in &w.entries {
            out += &format!("\n  {}", row.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
        }
        for c in &components {
            out += &format!(
                "\ncomponent m={}: vertices {}; edges {}",
                c.degree,
                ids(&c.vertices, &vname).join(" "),
                ids(&c.edges, &ename).join(" ")
            );
        }
        out
    });
    Ok(Verdict::Pass)
}

fn aut(global: &Global, g: &Graph, flavor: Flavor, list: bool) -> Result<Verdict> {
    let group = enumerate_automorphisms(g, flavor);
    let mut value = json!({"flavor": flavor.to_string(), "order": group.order()});
    if flavor == Flavor::All {
        value["predicted_order"] = json!(predicted_order(g).to_string());
    }
    if list {
        value["elements"] = group.elements.iter().map(|a| a.to_json(g)).collect();
    }
    emit(global, value, || {
        let mut out = format!("order {}", group.order());
        if list {
            for a in &group.elements {
                out += &format!("\n{}", a.to_json(g));
            }
        }
        out
    });
    Ok(Verdict::Pass)
}

fn present(global: &Global, g: &Graph, kind: Kind, format: Format) -> Result<Verdict> {
    let p = emit_presentation(g, kind)?;
    if global.json || matches!(format, Format::Json) {
        println!("{}", serde_json::to_string_pretty(&p.to_json())?);
    } else {
        print!("{}", p.to_text());
    }
    Ok(Verdict::Pass)
}

fn classical(global: &Global, g: &Graph, kind: Kind, list: bool) -> Result<Verdict> {
    let p = emit_presentation(g, kind)?;
    let points = classical_points_with_limit(&p, g, candidate_limit())?;
    let mut value = json!({"kind": kind.name(), "count": points.len()});
    if list {
        value["points"] = points.iter().map(|pt| pt.to_json()).collect();
    }
    emit(global, value, || {
        let mut out = points.len().to_string();
        if list {
            for pt in &points {
                out += &format!("\n{}", pt.support().map(ToString::to_string).collect::<Vec<_>>().join(" "));
            }
        }
        out
    });
    Ok(Verdict::Pass)
}

fn verify(global: &Global, g: &Graph, rep: &Path, kind: Kind) -> Result<Verdict> {
    let rep = load_rep(rep, global.tol)?;
    let report = verify_rep(&rep, &emit_presentation(g, kind)?)?;
    emit(global, report.to_json(), || report.to_string());
    Ok(Verdict::from(report.passed()))
}

fn wreath(global: &Global, g: &Graph, angle: f64, output: Option<&Path>) -> Result<Verdict> {
    let rep = default_wreath_rep(g, angle, global.tol)?;
    let text = serde_json::to_string_pretty(&rep.to_json())?;
    match output {
        Some(path) => {
            fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?;
            let summary = json!({"dim": rep.dim, "generators": rep.assign.len(), "output": path.display().to_string()});
            emit(global, summary, || format!("wrote a {}-dimensional rep of {} generators to {}", rep.dim, rep.assign.len(), path.display()));
        }
        None => println!("{text}"),
    }
    Ok(Verdict::Pass)
}

fn witness(global: &Global, g: &Graph, angle: f64, gamma: bool) -> Result<Verdict> {
    let (_, report) = example5_witness(g, angle, gamma, global.tol)?;
    emit(global, report.to_json(), || report.to_string());
    Ok(Verdict::from(report.passed()))
}

fn cstar(global: &Global, g: &Graph, rep: Option<&Path>) -> Result<Verdict> {
    let ck = build_ck_family(g)?;
    let violations = ck.violations(g);
    let mut value = json!({"dim": ck.dim(), "violations": violations});
    let mut text = format!("Cuntz-Krieger family of dimension {}: {}", ck.dim(), if violations.is_empty() { "exact" } else { "VIOLATED" });
    for v in &violations {
        text += &format!("\n  {v}");
    }
    let mut passed = violations.is_empty();
    if let Some(path) = rep {
        let rep = load_rep(path, global.tol)?;
        let co = verify_ck_coaction(&ck, g, &rep)?;
        let cov = verify_correspondence_covariance(g, &rep)?;
        passed &= co.passed() && cov.passed();
        value["coaction"] = co.to_json();
        value["covariance"] = cov.to_json();
        text += &format!("\ncoaction {co}\ncovariance {cov}");
    }
    emit(global, value, || text);
    Ok(Verdict::from(passed))
}

fn run(cli: Cli) -> Result<Verdict> {
    if !(cli.global.tol.is_finite() && cli.global.tol >= 0.0) {
        bail!("--tol must be a nonnegative number");
    }
    let global = &cli.global;
    match &cli.command {
        Command::Validate { graph } => validate(global, graph),
        Command::Decompose { graph } => decompose(global, &load_graph(graph)?),
        Command::Aut { graph, flavor, list } => aut(global, &load_graph(graph)?, *flavor, *list),
        Command::Present { graph, kind, format } => present(global, &load_graph(graph)?, *kind, *format),
        Command::ClassicalPoints { graph, kind, list } => classical(global, &load_graph(graph)?, *kind, *list),
        Command::VerifyRep { graph, rep, kind } => verify(global, &load_graph(graph)?, rep, *kind),
        Command::WreathRep { graph, angle, output } => wreath(global, &load_graph(graph)?, *angle, output.as_deref()),
        Command::Witness { graph, angle, gamma } => witness(global, &load_graph(graph)?, *angle, *gamma),
        Command::Cstar { graph, rep } => cstar(global, &load_graph(graph)?, rep.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
