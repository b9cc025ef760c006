mod io;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use slice_chroma::coloring::{chromatic_number, export_dimacs_cnf, Budget, ChromaticResult, Status};
use slice_chroma::geom::{attached_sphere_of_points, circumsphere_of_points, Simplex};
use slice_chroma::isbell::isbell_band_check;
use slice_chroma::point::{JsonCoord, PointSetDoc};
use slice_chroma::rational_slice::{pell_solutions, witness_graph};
use slice_chroma::replayer::replay_construction;
use slice_chroma::scalar::{format_rational, parse_rational, BackingKind, Rational};
use slice_chroma::stability::fit_scaling_exponents;
use slice_chroma::udg::{AnyGraph, GraphDoc};

use crate::io::{parse_json, read_input, to_json, write_output};

#[derive(Debug, Parser)]
#[command(name = "slice-chroma", version, about = "Unit-distance graphs, certificates and constructions in slices R^n x [0,eps]^k")]
struct Cli {
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Solutions of 3b^2 - a^2 = 2 from the recursion (a, b) -> (7a + 12b, 4a + 7b).
    Pell {
        #[arg(long)]
        count: usize,
        /// Also write the pairs as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact 4-chromatic witness graph; graph JSON to --out or stdout.
    Witness {
        #[arg(long)]
        n: usize,
        /// Slab width as p/q.
        #[arg(long, value_parser = parse_rational_arg)]
        eps: Rational,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact chromatic number of a graph JSON (file or stdin).
    Chroma {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Certificates JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000_000)]
        max_nodes: u64,
        #[arg(long, default_value_t = 60.0)]
        max_seconds: f64,
        /// DIMACS graph output.
        #[arg(long)]
        dimacs: Option<PathBuf>,
    },
    /// Simplex geometry of a point-set JSON.
    Geom {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Ambient dimension for the attached sphere (default: point dimension).
        #[arg(long)]
        ambient: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scaling exponents of volume^2, circumradius^2 and hull angle; CSV rows to --out or stdout.
    Stability {
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        #[arg(long)]
        delta: f64,
        /// Comma-separated geometric grid, e.g. 0.1,0.05,0.025,0.0125,0.00625.
        #[arg(long, value_delimiter = ',', required = true)]
        h_grid: Vec<f64>,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fit summary JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Replay the ten-point skeleton; report JSON to --out or stdout.
    Replay {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        eps1: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample distance pairs in [1 - eps, 1 + eps] against the 7-color hexagonal tiling.
    IsbellCheck {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        pairs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// DIMACS CNF for "the graph has a proper c-coloring".
    ExportCnf {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        colors: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

enum Outcome {
    Done,
    Inconclusive,
    Failed,
}

fn load_graph(input: Option<&PathBuf>) -> Result<(AnyGraph, Option<u64>)> {
    let (name, text) = read_input(input.map(|p| p.as_path()))?;
    let doc: GraphDoc = parse_json(&name, &text)?;
    let graph = AnyGraph::from_doc(&doc).map_err(|e| anyhow!("{name}: schema error: {e}"))?;
    Ok((graph, doc.seed))
}

#[derive(Serialize)]
struct ChromaDoc<'a> {
    seed: u64,
    #[serde(flatten)]
    result: &'a ChromaticResult,
}

fn pell(count: usize, out: Option<&PathBuf>) -> Result<Outcome> {
    let pairs = pell_solutions(count);
    let line: Vec<String> = pairs.iter().map(|p| format!("({},{})", p.a, p.b)).collect();
    println!("{}", line.join(","));
    if let Some(path) = out {
        write_output(Some(path), &to_json(&pairs)?)?;
    }
    Ok(Outcome::Done)
}

fn witness(n: usize, eps: &Rational, out: Option<&PathBuf>, seed: u64) -> Result<Outcome> {
    let w = witness_graph(n, eps)?;
    eprintln!(
        "n = {n}, eps = {}: x = {}, y = {}, {} rhombi, {} vertices, {} edges, slab extent {}, in slice: {}",
        format_rational(eps),
        w.x,
        w.y,
        w.gadgets,
        w.graph.points.len(),
        w.graph.edges.len(),
        format_rational(&w.slab_extent),
        w.in_slice
    );
    write_output(out, &to_json(&w.graph.to_doc(Some(seed)))?)?;
    Ok(Outcome::Done)
}

fn chroma(
    input: Option<&PathBuf>,
    out: Option<&PathBuf>,
    dimacs: Option<&PathBuf>,
    budget: Budget,
    seed: u64,
) -> Result<Outcome> {
    let (graph, _) = load_graph(input)?;
    if let Some(path) = dimacs {
        write_output(Some(path), &graph.to_dimacs())?;
    }
    let g = graph.graph();
    let r = chromatic_number(&g, budget)?;
    match r.chi {
        Some(chi) => println!("chi = {chi}"),
        None => println!("chi in [{}, {}] (inconclusive after {} nodes)", r.lower_bound, r.upper_bound, r.search_nodes),
    }
    let upper = r.upper.verify(&g)?;
    let lower = r.lower.verify(&g)?;
    println!("upper certificate: {:?}, {upper} colors, verified", r.upper.kind);
    println!("lower certificate: {:?}, {lower} colors needed, verified", r.lower.kind);
    if let Some(path) = out {
        write_output(Some(path), &to_json(&ChromaDoc { seed, result: &r })?)?;
    }
    Ok(match r.status {
        Status::Exact => Outcome::Done,
        Status::Inconclusive => Outcome::Inconclusive,
    })
}

fn geom_values<T: JsonCoord>(doc: &PointSetDoc, ambient: Option<usize>) -> Result<Value> {
    let points = doc.to_points::<T>()?;
    let dim = doc.n + doc.k;
    let simplex = Simplex::new(points.clone())?;
    let cm = simplex.cayley_menger();
    let mut report = json!({
        "backing": doc.backing,
        "vertices": points.len(),
        "dimension": dim,
        "cayley_menger_det": cm.det().to_json(),
        "volume_sq": simplex.volume_sq().to_json(),
        "volume": simplex.volume(),
        "degenerate": cm.is_degenerate(),
    });
    if cm.is_degenerate() {
        return Ok(report);
    }
    let cs = circumsphere_of_points(&points)?;
    report["circumradius_sq"] = cs.radius_sq.to_json();
    report["circumcenter"] = Value::Array(cs.center.iter().map(JsonCoord::to_json).collect());
    report["inradius"] = json!(simplex.inradius().ok());
    let gap = T::one() - cs.radius_sq.clone();
    report["attached_radius_sq"] = if gap.to_f64_lossy() > 0.0 { gap.to_json() } else { Value::Null };
    match attached_sphere_of_points(&points, ambient.unwrap_or(dim)) {
        Ok(s) => {
            report["attached_sphere"] = json!({
                "center": s.center,
                "radius": s.radius,
                "sphere_dim": s.sphere_dim(),
            })
        }
        Err(e) => report["attached_sphere_error"] = json!(e.to_string()),
    }
    Ok(report)
}

fn geom(input: Option<&PathBuf>, ambient: Option<usize>, out: Option<&PathBuf>) -> Result<Outcome> {
    let (name, text) = read_input(input.map(|p| p.as_path()))?;
    let doc: PointSetDoc = parse_json(&name, &text)?;
    let report = match doc.backing {
        BackingKind::Exact => geom_values::<Rational>(&doc, ambient),
        BackingKind::Float => geom_values::<f64>(&doc, ambient),
    }
    .with_context(|| format!("{name}"))?;
    write_output(out, &to_json(&report)?)?;
    Ok(Outcome::Done)
}

fn stability(
    r0: f64,
    delta: f64,
    h_grid: &[f64],
    trials: usize,
    seed: u64,
    out: Option<&PathBuf>,
    report: Option<&PathBuf>,
) -> Result<Outcome> {
    let r = fit_scaling_exponents(r0, delta, h_grid, trials, seed)?;
    eprintln!(
        "slopes: dV2 {:.4} [{:.4}, {:.4}], dR2 {:.4} [{:.4}, {:.4}], dPhi {:.4} [{:.4}, {:.4}]; pair bound holds: {}",
        r.s_v2.slope,
        r.s_v2.ci.0,
        r.s_v2.ci.1,
        r.s_r2.slope,
        r.s_r2.ci.0,
        r.s_r2.ci.1,
        r.s_phi.slope,
        r.s_phi.ci.0,
        r.s_phi.ci.1,
        r.pair_bound_holds
    );
    write_output(out, &r.to_csv())?;
    if let Some(path) = report {
        write_output(Some(path), &to_json(&r)?)?;
    }
    Ok(if r.pair_bound_holds { Outcome::Done } else { Outcome::Failed })
}

fn replay(eps: f64, eps1: f64, delta: f64, seed: u64, out: Option<&PathBuf>) -> Result<Outcome> {
    let r = replay_construction(eps, eps1, delta, seed)?;
    eprintln!(
        "pass: {}; r_attached_4 = {:.12}, r_attached_7 = {:.12}, |r_attached_7 - sqrt(3)/2| = {:e}",
        r.pass, r.r_attached_4, r.r_attached_7, r.limit_gap
    );
    for (name, c) in r.residuals.iter().filter(|(_, c)| !c.ok) {
        eprintln!("failed check {name}: {:e} > {:e}", c.value, c.tol);
    }
    write_output(out, &to_json(&r)?)?;
    Ok(if r.pass { Outcome::Done } else { Outcome::Failed })
}

fn isbell_check(eps: f64, pairs: usize, seed: u64, out: Option<&PathBuf>) -> Result<Outcome> {
    if !(eps > 0.0 && eps < 1.0) {
        bail!("eps must lie in (0, 1)");
    }
    let r = isbell_band_check(eps, pairs, seed);
    eprintln!(
        "s = {}, {} of {} pairs monochromatic; threshold 1 - 4/sqrt(21) = {:.7}",
        r.s, r.monochromatic, r.pairs, r.threshold
    );
    write_output(out, &to_json(&r)?)?;
    Ok(if r.monochromatic == 0 { Outcome::Done } else { Outcome::Failed })
}

fn export_cnf(input: Option<&PathBuf>, colors: usize, out: Option<&PathBuf>) -> Result<Outcome> {
    if colors == 0 {
        bail!("--colors must be at least 1");
    }
    let (graph, _) = load_graph(input)?;
    write_output(out, &export_dimacs_cnf(&graph.graph(), colors))?;
    Ok(Outcome::Done)
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    if cli.threads == 0 {
        bail!("--threads must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .context("thread pool")?;
    let seed = cli.seed;
    match cli.command {
        Cmd::Pell { count, out } => pell(count, out.as_ref()),
        Cmd::Witness { n, eps, out } => witness(n, &eps, out.as_ref(), seed),
        Cmd::Chroma {
            input,
            out,
            max_nodes,
            max_seconds,
            dimacs,
        } => {
            if !(max_seconds.is_finite() && max_seconds >= 0.0) {
                bail!("--max-seconds must be a nonnegative number");
            }
            let budget = Budget {
                max_nodes,
                max_time: Duration::from_secs_f64(max_seconds),
            };
            chroma(input.as_ref(), out.as_ref(), dimacs.as_ref(), budget, seed)
        }
        Cmd::Geom { input, ambient, out } => geom(input.as_ref(), ambient, out.as_ref()),
        Cmd::Stability {
            r0,
            delta,
            h_grid,
            trials,
            out,
            report,
        } => stability(r0, delta, &h_grid, trials, seed, out.as_ref(), report.as_ref()),
        Cmd::Replay { eps, eps1, delta, out } => replay(eps, eps1, delta, seed, out.as_ref()),
        Cmd::IsbellCheck { eps, pairs, out } => isbell_check(eps, pairs, seed, out.as_ref()),
        Cmd::ExportCnf { input, colors, out } => export_cnf(input.as_ref(), colors, out.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Inconclusive) => ExitCode::from(2),
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
