//! `pd`: command-line front end for the fjpd library.
//!
//! Exit codes: 0 on success, 2 for bad input or configuration, 3 when a
//! solver fails to converge or two computation routes disagree.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fjpd::equilibrium::{equilibrium_with, SolverKind};
use fjpd::experiments::{self, ExperimentConfig, OutputFormat};
use fjpd::generators::{gen_ba, gen_er, gen_sbm, sbm_pd_closed_form, SbmSpec};
use fjpd::metrics::{polarization, PdDefinition, PdReport};
use fjpd::opinion::format_values;
use fjpd::perturbation::{
    perturbed_pd_exact_with, perturbed_pd_general_with, reduction_interval_scan, CrossCheck,
    ScanGrid,
};
use fjpd::spectral::{
    pd_bound_alternative, pd_bound_homogeneous, pd_bound_inhomogeneous,
    polarization_change_bound,
};
use fjpd::{
    pd_alternative, Error, Graph, IdMode, IngestOptions, OpinionVector, SolverConfig,
    StubbornnessVector,
};

#[derive(Parser)]
#[command(name = "pd", version, about = "Polarization-disagreement index under Friedkin-Johnsen dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium and PD report for a graph and opinions.
    Compute(ComputeArgs),
    /// Upper bounds on PD and its changes.
    Bounds(BoundsArgs),
    /// PD after raising one node's stubbornness.
    Perturb(PerturbArgs),
    /// Values of one node's opinion for which a boost lowers PD.
    Scan(ScanArgs),
    /// Write a random graph as an edge list.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Closed-form PD on the expected two-block SBM graph.
    SbmTheory(SbmTheoryArgs),
    /// Run a seeded experiment from a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Ids {
    FirstSeen,
    Numeric,
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list file.
    #[arg(long)]
    graph: PathBuf,
    /// How node tokens map to ids.
    #[arg(long, value_enum, default_value = "first-seen")]
    ids: Ids,
    /// Restrict to the largest connected component.
    #[arg(long)]
    largest_component: bool,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    max_iters: Option<usize>,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.max_iters,
            ..SolverConfig::with_tolerance(self.tol)
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Cg,
    FixedPoint,
    Dense,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Innate opinions: JSON array or one value per line, in node-id order.
    #[arg(long)]
    opinions: PathBuf,
    /// Stubbornness file; defaults to all ones.
    #[arg(long)]
    stubbornness: Option<PathBuf>,
    /// Also report the stubbornness-weighted definition.
    #[arg(long)]
    alt: bool,
    #[arg(long, value_enum, default_value = "cg")]
    solver: Solver,
    #[command(flatten)]
    solve: SolverArgs,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Stubbornness file, or a single number for `K = αI`.
    #[arg(long)]
    stubbornness: String,
    /// Opinion radius `R`.
    #[arg(long)]
    radius: f64,
    /// Upper stubbornness for the change bounds (homogeneous only).
    #[arg(long)]
    beta: Option<f64>,
    /// Opinions to measure against the bounds.
    #[arg(long)]
    opinions: Option<PathBuf>,
    #[command(flatten)]
    solve: SolverArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum PerturbMode {
    /// Closed form; needs mean-zero opinions and a neutral node.
    Exact,
    /// Rank-one update for any opinions.
    General,
}

#[derive(Args)]
struct PerturbArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    opinions: PathBuf,
    /// Node label as it appears in the edge list.
    #[arg(long)]
    node: String,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "general")]
    mode: PerturbMode,
    /// Skip the direct recomputation cross-check.
    #[arg(long)]
    no_check: bool,
    #[command(flatten)]
    solve: SolverArgs,
}

#[derive(Args)]
struct ScanArgs {
    /// Edge-list file; defaults to the path a - b - c.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "first-seen")]
    ids: Ids,
    /// Opinions; defaults to (1, -1, 0) on the default path.
    #[arg(long)]
    opinions: Option<PathBuf>,
    #[arg(long)]
    node: String,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    lo: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    hi: f64,
    #[arg(long, default_value_t = 2001)]
    steps: usize,
    #[command(flatten)]
    solve: SolverArgs,
}

#[derive(Subcommand)]
enum GenCommand {
    Er {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    Ba {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    Sbm {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the ±1 block opinions.
        #[arg(long)]
        opinions_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SbmTheoryArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    alpha: f64,
    /// Intra-block probability; only checked against `q < p`.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long)]
    alt: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentKind {
    Sweep,
    SingleNode,
    Category,
    Bubble,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    kind: ExperimentKind,
    #[arg(long)]
    config: PathBuf,
    /// Output path; overrides the config. `.json` selects JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct LoadedGraph {
    graph: Graph,
    labels: Vec<String>,
    /// Original id of each node after an optional component restriction.
    kept: Option<Vec<usize>>,
}

impl LoadedGraph {
    fn node(&self, label: &str) -> Result<usize, Error> {
        let original = self
            .labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Config(format!("unknown node `{label}`")))?;
        match &self.kept {
            None => Ok(original),
            Some(kept) => kept
                .iter()
                .position(|&v| v == original)
                .ok_or_else(|| Error::Config(format!("node `{label}` is outside the largest component"))),
        }
    }

    fn restrict(&self, values: Vec<f64>) -> Result<Vec<f64>, Error> {
        Error::check_len(self.labels.len(), values.len())?;
        Ok(match &self.kept {
            None => values,
            Some(kept) => kept.iter().map(|&v| values[v]).collect(),
        })
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path, ids: Ids, largest: bool) -> Result<LoadedGraph, Error> {
    let options = IngestOptions {
        ids: match ids {
            Ids::FirstSeen => IdMode::FirstSeen,
            Ids::Numeric => IdMode::Numeric,
        },
    };
    let parsed = Graph::from_edge_list(&read(path)?, &options)?;
    if parsed.merged_duplicates > 0 || parsed.dropped_self_loops > 0 {
        eprintln!(
            "note: merged {} duplicate edges, dropped {} self-loops",
            parsed.merged_duplicates, parsed.dropped_self_loops
        );
    }
    if largest {
        let sub = parsed.graph.largest_component();
        Ok(LoadedGraph {
            graph: sub.graph,
            labels: parsed.labels,
            kept: Some(sub.new_to_old),
        })
    } else {
        Ok(LoadedGraph {
            graph: parsed.graph,
            labels: parsed.labels,
            kept: None,
        })
    }
}

impl GraphArgs {
    fn load(&self) -> Result<LoadedGraph, Error> {
        load_graph(&self.graph, self.ids, self.largest_component)
    }
}

fn load_opinions(g: &LoadedGraph, path: &Path) -> Result<OpinionVector, Error> {
    let values = OpinionVector::parse(&read(path)?)?.into_inner();
    OpinionVector::new(g.restrict(values)?)
}

fn load_stubbornness(g: &LoadedGraph, path: &Path) -> Result<StubbornnessVector, Error> {
    let values = StubbornnessVector::parse(&read(path)?)?.as_slice().to_vec();
    StubbornnessVector::new(g.restrict(values)?)
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[derive(Serialize)]
struct ComputeOutput {
    #[serde(flatten)]
    report: PdReport,
    z_star: Vec<f64>,
    iterations: usize,
    residual: f64,
}

fn compute(args: ComputeArgs) -> Result<(), Error> {
    let g = args.graph.load()?;
    let s = load_opinions(&g, &args.opinions)?;
    let n = g.graph.node_count();
    let k = match &args.stubbornness {
        Some(p) => load_stubbornness(&g, p)?,
        None => StubbornnessVector::uniform(n, 1.0)?,
    };
    let cfg = args.solve.config();
    let kind = match args.solver {
        Solver::Cg => SolverKind::Cg,
        Solver::FixedPoint => SolverKind::FixedPoint,
        Solver::Dense => SolverKind::Dense,
    };
    let eq = equilibrium_with(kind, &g.graph, &s, &k, &cfg)?;
    let report = if args.alt {
        pd_alternative(&g.graph, &s, &k, &cfg)?
    } else {
        let p = polarization(&eq.z_bar)?;
        let d = g.graph.laplacian_quadratic(&eq.z_bar)?;
        PdReport {
            polarization: p,
            disagreement: d,
            pd: p + d,
            polarization_alt: None,
            pd_alt: None,
            definition_tag: PdDefinition::Standard,
        }
    };
    print_json(&ComputeOutput {
        report,
        z_star: eq.z_star,
        iterations: eq.iterations,
        residual: eq.residual,
    })
}

fn bounds(args: BoundsArgs) -> Result<(), Error> {
    let g = args.graph.load()?;
    let n = g.graph.node_count();
    let cfg = args.solve.config();
    let alpha: Option<f64> = args.stubbornness.trim().parse().ok();
    let k = match alpha {
        Some(a) => StubbornnessVector::uniform(n, a)?,
        None => load_stubbornness(&g, Path::new(&args.stubbornness))?,
    };
    let s = match &args.opinions {
        Some(p) => {
            let s = load_opinions(&g, p)?;
            let norm = s.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > args.radius * (1.0 + 1e-12) {
                return Err(Error::Config(format!("‖s‖ = {norm} exceeds the radius {}", args.radius)));
            }
            Some(s)
        }
        None => None,
    };
    let pd_at = |k: &StubbornnessVector| -> Result<Option<f64>, Error> {
        s.as_ref()
            .map(|s| fjpd::pd_index(&g.graph, s, k, &cfg).map(|r| r.pd))
            .transpose()
    };

    let mut reports = Vec::new();
    let mut push = |report: fjpd::spectral::BoundReport, actual: Option<f64>| match actual {
        Some(a) => reports.push(report.with_actual(a)),
        None => reports.push(report),
    };
    let actual = pd_at(&k)?;
    push(pd_bound_inhomogeneous(&g.graph, &k, args.radius, &cfg)?, actual);
    if let Some(alpha) = k.homogeneous() {
        push(pd_bound_homogeneous(args.radius, alpha)?, actual);
        if let Some(beta) = args.beta {
            let kb = StubbornnessVector::uniform(n, beta)?;
            let change = match &s {
                Some(s) => {
                    let zb = |k: &StubbornnessVector| fjpd::solve_equilibrium(&g.graph, s, k, &cfg);
                    let (za, zb) = (zb(&k)?, zb(&kb)?);
                    let p = |z: &[f64]| z.iter().map(|v| v * v).sum::<f64>();
                    let pa = pd_alternative(&g.graph, s, &k, &cfg)?.pd_alt;
                    let pb = pd_alternative(&g.graph, s, &kb, &cfg)?.pd_alt;
                    Some((p(&zb.z_bar) - p(&za.z_bar), pb.zip(pa).map(|(b, a)| b - a)))
                }
                None => None,
            };
            push(
                polarization_change_bound(args.radius, alpha, beta)?,
                change.map(|c| c.0),
            );
            push(
                pd_bound_alternative(args.radius, alpha, beta)?,
                change.and_then(|c| c.1),
            );
        }
    } else if args.beta.is_some() {
        eprintln!("note: --beta ignored for inhomogeneous stubbornness");
    }
    print_json(&reports)
}

fn perturb(args: PerturbArgs) -> Result<(), Error> {
    let g = args.graph.load()?;
    let s = load_opinions(&g, &args.opinions)?;
    let l = g.node(&args.node)?;
    let cfg = args.solve.config();
    let check = if args.no_check {
        CrossCheck::FormulaOnly
    } else {
        CrossCheck::Both
    };
    let result = match args.mode {
        PerturbMode::Exact => perturbed_pd_exact_with(&g.graph, &s, l, args.epsilon, &cfg, check)?,
        PerturbMode::General => perturbed_pd_general_with(&g.graph, &s, l, args.epsilon, &cfg, check)?,
    };
    print_json(&result)
}

#[derive(Serialize)]
struct ScanOutput {
    node: usize,
    epsilon: f64,
    intervals: Vec<fjpd::perturbation::Interval>,
}

fn scan(args: ScanArgs) -> Result<(), Error> {
    let (g, s) = match &args.graph {
        Some(path) => {
            let g = load_graph(path, args.ids, false)?;
            let s = match &args.opinions {
                Some(p) => load_opinions(&g, p)?,
                None => return Err(Error::Config("--opinions is required with --graph".into())),
            };
            (g, s)
        }
        None => {
            let g = LoadedGraph {
                graph: Graph::path(3),
                labels: ["a", "b", "c"].map(String::from).to_vec(),
                kept: None,
            };
            let s = match &args.opinions {
                Some(p) => load_opinions(&g, p)?,
                None => OpinionVector::new(vec![1.0, -1.0, 0.0])?,
            };
            (g, s)
        }
    };
    let l = g.node(&args.node)?;
    let grid = ScanGrid {
        lo: args.lo,
        hi: args.hi,
        steps: args.steps,
    };
    let intervals = reduction_interval_scan(&g.graph, &s, l, args.epsilon, grid, &args.solve.config())?;
    print_json(&ScanOutput {
        node: l,
        epsilon: args.epsilon,
        intervals,
    })
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn generate(cmd: GenCommand) -> Result<(), Error> {
    let (g, out) = match cmd {
        GenCommand::Er { n, p, seed, out } => (gen_er(n, p, seed)?, out),
        GenCommand::Ba { n, m, seed, out } => (gen_ba(n, m, seed)?, out),
        GenCommand::Sbm {
            n,
            p,
            q,
            seed,
            out,
            opinions_out,
        } => {
            let (g, s) = gen_sbm(&SbmSpec::new(n, p, q)?, seed)?;
            if let Some(path) = opinions_out {
                write(&path, &format_values(s.as_slice()))?;
            }
            (g, out)
        }
    };
    write(&out, &g.to_edge_list())?;
    eprintln!("wrote {} nodes, {} edges to {}", g.node_count(), g.edge_count(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct SbmTheoryOutput {
    n: usize,
    q: f64,
    alpha: f64,
    definition: PdDefinition,
    pd: f64,
}

fn sbm_theory(args: SbmTheoryArgs) -> Result<(), Error> {
    let spec = SbmSpec::new(args.n, args.p, args.q)?;
    let definition = if args.alt {
        PdDefinition::Alternative
    } else {
        PdDefinition::Standard
    };
    let pd = sbm_pd_closed_form(&spec, args.alpha, definition)?;
    print_json(&SbmTheoryOutput {
        n: args.n,
        q: args.q,
        alpha: args.alpha,
        definition,
        pd,
    })
}

fn experiment(args: ExperimentArgs) -> Result<(), Error> {
    let cfg = ExperimentConfig::load(&args.config).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("{}: {io}", args.config.display())),
        other => other,
    })?;
    let wanted = match args.kind {
        ExperimentKind::Sweep => "sweep",
        ExperimentKind::SingleNode => "single-node",
        ExperimentKind::Category => "category",
        ExperimentKind::Bubble => "bubble",
    };
    if cfg.protocol.name() != wanted {
        return Err(Error::Config(format!(
            "config describes a {} run, not {wanted}",
            cfg.protocol.name()
        )));
    }
    let report = experiments::run(&cfg)?;
    let out = args.out.clone().or_else(|| cfg.output.as_ref().map(|o| o.path.clone()));
    match out {
        Some(path) => {
            let format = cfg
                .output
                .as_ref()
                .filter(|_| args.out.is_none())
                .and_then(|o| o.format)
                .unwrap_or_else(|| OutputFormat::from_path(&path));
            report
                .write(&path, format)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            for a in &report.aggregates {
                eprintln!(
                    "{}mean change {:+.4}%  positive {:.1}%  ({} run, {} skipped)",
                    a.parameter.map(|p| format!("{p}: ")).unwrap_or_default(),
                    100.0 * a.mean_relative_change,
                    100.0 * a.positive_fraction,
                    a.trials_run,
                    a.trials_skipped
                );
            }
            Ok(())
        }
        None => {
            print!("{}", report.to_csv());
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonConvergence { .. } | Error::RouteMismatch { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(a) => compute(a),
        Command::Bounds(a) => bounds(a),
        Command::Perturb(a) => perturb(a),
        Command::Scan(a) => scan(a),
        Command::Gen(c) => generate(c),
        Command::SbmTheory(a) => sbm_theory(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
