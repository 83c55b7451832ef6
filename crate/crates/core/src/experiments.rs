//! Seeded Monte Carlo harness: homogeneous sweeps, single-node and
//! degree/neutrality category boosts, and SBM bubble experiments.
//!
//! Every trial draws its graph, opinions and node selection from its own
//! `(seed, stream)` RNG, so trials run in parallel and the output does not
//! depend on scheduling. The baseline of every trial is `k ≡ 1` on the same
//! graph and opinions as the perturbed run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::SolverConfig;
use crate::error::{Error, Result};
use crate::generators::{gen_ba_with, gen_er_with, gen_sbm_with, SbmSpec};
use crate::graph::{Graph, IngestOptions};
use crate::metrics::{pd_index, relative_change};
use crate::opinion::{
    sample_opinions_with, stream_rng, OpinionDistribution, OpinionVector, StubbornnessVector,
};

/// Default boosted stubbornness.
pub const DEFAULT_TARGET: f64 = 10.0;
/// `|s_i| ≤` this counts as neutral.
pub const NEUTRAL_THRESHOLD: f64 = 0.05;
/// Intra-block probability for bubble runs when the config omits it.
pub const DEFAULT_BUBBLE_P: f64 = 0.3;

const PURPOSE_GRAPH: u64 = 0;
const PURPOSE_OPINIONS: u64 = 1;
const PURPOSE_SELECT: u64 = 2;

fn default_bubble_p() -> f64 {
    DEFAULT_BUBBLE_P
}

fn default_target() -> f64 {
    DEFAULT_TARGET
}

fn default_fraction() -> f64 {
    0.01
}

fn default_repetitions() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    Er {
        n: usize,
        p: f64,
    },
    Ba {
        n: usize,
        m: usize,
    },
    Sbm {
        n: usize,
        #[serde(default = "default_bubble_p")]
        p: f64,
        #[serde(default)]
        q: f64,
    },
    EdgeList {
        path: PathBuf,
        #[serde(default)]
        largest_component: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpinionModel {
    #[default]
    Uniform,
    Gaussian,
    /// Second half of the node ids centered at −0.5, first half at +0.5.
    BipolarGaussian,
}

impl OpinionModel {
    pub fn distribution(self, n: usize) -> OpinionDistribution {
        let tag = match self {
            Self::Uniform => "uniform",
            Self::Gaussian => "gaussian",
            Self::BipolarGaussian => "bipolar-gaussian",
        };
        OpinionDistribution::from_tag(tag, n).expect("known tag")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeClass {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neutrality {
    Neutral,
    NonNeutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Protocol {
    Homogeneous {
        alpha_grid: Vec<f64>,
    },
    SingleNode {
        #[serde(default = "default_target")]
        target: f64,
    },
    Category {
        #[serde(default = "default_fraction")]
        fraction: f64,
        #[serde(default = "default_target")]
        target: f64,
        degree_class: DegreeClass,
        neutrality: Neutrality,
    },
    Bubble {
        #[serde(default = "default_target")]
        target: f64,
        q_grid: Vec<f64>,
    },
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Homogeneous { .. } => "sweep",
            Self::SingleNode { .. } => "single-node",
            Self::Category { .. } => "category",
            Self::Bubble { .. } => "bubble",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    /// `.json` selects JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Self::Json,
            _ => Self::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    #[serde(default)]
    pub opinions: OpinionModel,
    #[serde(default)]
    pub seed: u64,
    pub protocol: Protocol,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn positive_finite(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| match e {
            Error::Validation(m) => Error::Config(m),
            other => other,
        };
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        self.solver.validate().map_err(cfg_err)?;
        match &self.graph {
            GraphSource::Er { n, p } => {
                if *n == 0 || !(0.0..=1.0).contains(p) {
                    return Err(Error::Config(format!("invalid ER source n = {n}, p = {p}")));
                }
            }
            GraphSource::Ba { n, m } => {
                if *m == 0 || m >= n {
                    return Err(Error::Config(format!("invalid BA source n = {n}, m = {m}")));
                }
            }
            GraphSource::Sbm { n, p, q } => {
                SbmSpec { n: *n, p: *p, q: *q }.validate().map_err(cfg_err)?;
            }
            GraphSource::EdgeList { .. } => {}
        }
        match &self.protocol {
            Protocol::Homogeneous { alpha_grid } => {
                if alpha_grid.is_empty() {
                    return Err(Error::Config("alpha_grid is empty".into()));
                }
                for &a in alpha_grid {
                    positive_finite("alpha", a)?;
                }
            }
            Protocol::SingleNode { target } => check_target(*target)?,
            Protocol::Category {
                fraction, target, ..
            } => {
                check_target(*target)?;
                if !(*fraction > 0.0 && *fraction <= 1.0) {
                    return Err(Error::Config(format!("fraction must lie in (0, 1], got {fraction}")));
                }
            }
            Protocol::Bubble { target, q_grid } => {
                check_target(*target)?;
                let GraphSource::Sbm { p, .. } = self.graph else {
                    return Err(Error::Config("bubble runs need an sbm graph source".into()));
                };
                if self.opinions != OpinionModel::BipolarGaussian {
                    return Err(Error::Config("bubble runs need bipolar-gaussian opinions".into()));
                }
                if q_grid.is_empty() {
                    return Err(Error::Config("q_grid is empty".into()));
                }
                for &q in q_grid {
                    if !(0.0..=1.0).contains(&q) {
                        return Err(Error::Config(format!("q must lie in [0, 1], got {q}")));
                    }
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!("p must lie in [0, 1], got {p}")));
                }
            }
        }
        Ok(())
    }

    fn stream(&self, key: u64, purpose: u64) -> rand_chacha::ChaCha8Rng {
        stream_rng(self.seed, (key << 8) | purpose)
    }

    fn target(&self) -> f64 {
        match self.protocol {
            Protocol::SingleNode { target }
            | Protocol::Category { target, .. }
            | Protocol::Bubble { target, .. } => target,
            Protocol::Homogeneous { .. } => DEFAULT_TARGET,
        }
    }
}

fn check_target(target: f64) -> Result<()> {
    if target > 1.0 && target.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("boost target must exceed 1, got {target}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// RNG stream key; the streams used are `key << 8 | purpose`.
    pub stream: u64,
    /// `α` for sweeps, `q` for bubble runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
    pub nodes: Vec<usize>,
    pub pd_baseline: f64,
    pub pd_perturbed: f64,
    pub relative_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTrial {
    pub trial: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
    pub trials_run: usize,
    pub trials_skipped: usize,
    pub mean_relative_change: f64,
    /// Sample standard deviation; 0 for a single trial.
    pub std_relative_change: f64,
    pub positive_fraction: f64,
    pub negative_fraction: f64,
}

impl Aggregate {
    /// Summarizes records in the order given. Panics on an empty slice.
    pub fn from_records(parameter: Option<f64>, records: &[&TrialRecord], skipped: usize) -> Self {
        assert!(!records.is_empty(), "aggregate over no records");
        let m = records.len() as f64;
        let mean = records.iter().map(|r| r.relative_change).sum::<f64>() / m;
        let var = if records.len() > 1 {
            records
                .iter()
                .map(|r| (r.relative_change - mean).powi(2))
                .sum::<f64>()
                / (m - 1.0)
        } else {
            0.0
        };
        let pos = records.iter().filter(|r| r.relative_change > 0.0).count();
        let neg = records.iter().filter(|r| r.relative_change < 0.0).count();
        Self {
            parameter,
            trials_run: records.len(),
            trials_skipped: skipped,
            mean_relative_change: mean,
            std_relative_change: var.sqrt(),
            positive_fraction: pos as f64 / m,
            negative_fraction: neg as f64 / m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub protocol: String,
    pub seed: u64,
    pub repetitions: usize,
    pub records: Vec<TrialRecord>,
    pub skipped: Vec<SkippedTrial>,
    /// One entry per `α` or `q` for series protocols, a single entry otherwise.
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentReport {
    fn build(cfg: &ExperimentConfig, records: Vec<TrialRecord>, skipped: Vec<SkippedTrial>, grid: Option<&[f64]>) -> Self {
        let aggregates = match grid {
            Some(grid) => grid
                .iter()
                .map(|&x| {
                    let group: Vec<&TrialRecord> =
                        records.iter().filter(|r| r.parameter == Some(x)).collect();
                    Aggregate::from_records(Some(x), &group, 0)
                })
                .collect(),
            None => {
                let all: Vec<&TrialRecord> = records.iter().collect();
                vec![Aggregate::from_records(None, &all, skipped.len())]
            }
        };
        Self {
            protocol: cfg.protocol.name().to_string(),
            seed: cfg.seed,
            repetitions: cfg.repetitions,
            records,
            skipped,
            aggregates,
        }
    }

    /// Series protocols emit one row per grid value; the others emit one row
    /// per trial.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.aggregates.iter().all(|a| a.parameter.is_some()) {
            let name = if self.protocol == "bubble" { "q" } else { "alpha" };
            let _ = writeln!(out, "{name},mean_rel_change,std,positive_fraction,trials");
            for a in &self.aggregates {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    a.parameter.unwrap_or_default(),
                    a.mean_relative_change,
                    a.std_relative_change,
                    a.positive_fraction,
                    a.trials_run
                );
            }
        } else {
            out.push_str("trial,stream,nodes,pd_baseline,pd_perturbed,relative_change\n");
            for r in &self.records {
                let nodes: Vec<String> = r.nodes.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.trial,
                    r.stream,
                    nodes.join(";"),
                    r.pd_baseline,
                    r.pd_perturbed,
                    r.relative_change
                );
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        let text = match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json()? + "\n",
        };
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Graph for one trial. Edge lists are read once by the caller.
enum GraphPlan {
    Fixed(Graph),
    Random,
}

fn plan_graph(cfg: &ExperimentConfig) -> Result<GraphPlan> {
    match &cfg.graph {
        GraphSource::EdgeList {
            path,
            largest_component,
        } => {
            let text = std::fs::read_to_string(path)?;
            let g = Graph::from_edge_list(&text, &IngestOptions::default())?.graph;
            Ok(GraphPlan::Fixed(if *largest_component {
                g.largest_component().graph
            } else {
                g
            }))
        }
        _ => Ok(GraphPlan::Random),
    }
}

fn realize_graph(cfg: &ExperimentConfig, plan: &GraphPlan, key: u64) -> Result<Graph> {
    if let GraphPlan::Fixed(g) = plan {
        return Ok(g.clone());
    }
    let mut rng = cfg.stream(key, PURPOSE_GRAPH);
    match cfg.graph {
        GraphSource::Er { n, p } => gen_er_with(n, p, &mut rng),
        GraphSource::Ba { n, m } => gen_ba_with(n, m, &mut rng),
        GraphSource::Sbm { n, p, q } => Ok(gen_sbm_with(&SbmSpec { n, p, q }, &mut rng)?.0),
        GraphSource::EdgeList { .. } => unreachable!("edge lists are planned as fixed"),
    }
}

fn realize_opinions(cfg: &ExperimentConfig, n: usize, key: u64) -> Result<OpinionVector> {
    let dist = cfg.opinions.distribution(n);
    sample_opinions_with(n, &dist, &mut cfg.stream(key, PURPOSE_OPINIONS))
}

fn baseline_pd(g: &Graph, s: &OpinionVector, cfg: &SolverConfig) -> Result<f64> {
    Ok(pd_index(g, s, &StubbornnessVector::uniform(g.node_count(), 1.0)?, cfg)?.pd)
}

fn boosted_pd(g: &Graph, s: &OpinionVector, nodes: &[usize], target: f64, cfg: &SolverConfig) -> Result<f64> {
    let mut k = vec![1.0; g.node_count()];
    for &v in nodes {
        k[v] = target;
    }
    Ok(pd_index(g, s, &StubbornnessVector::new(k)?, cfg)?.pd)
}

fn paired_record(
    trial: usize,
    key: u64,
    parameter: Option<f64>,
    nodes: Vec<usize>,
    pd_baseline: f64,
    pd_perturbed: f64,
) -> Result<TrialRecord> {
    Ok(TrialRecord {
        trial,
        stream: key,
        parameter,
        nodes,
        pd_baseline,
        pd_perturbed,
        relative_change: relative_change(pd_perturbed, pd_baseline)?,
    })
}

/// PD with `k ≡ α` for every grid value, relative to `k ≡ 1`.
pub fn run_homogeneous_sweep(cfg: &ExperimentConfig, alpha_grid: &[f64]) -> Result<ExperimentReport> {
    cfg.validate()?;
    if alpha_grid.is_empty() {
        return Err(Error::Config("alpha_grid is empty".into()));
    }
    for &a in alpha_grid {
        positive_finite("alpha", a)?;
    }
    let plan = plan_graph(cfg)?;
    let per_trial: Vec<Vec<TrialRecord>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|trial| {
            let key = trial as u64;
            let g = realize_graph(cfg, &plan, key)?;
            let n = g.node_count();
            let s = realize_opinions(cfg, n, key)?;
            let base = baseline_pd(&g, &s, &cfg.solver)?;
            alpha_grid
                .iter()
                .map(|&alpha| {
                    let pd = if alpha == 1.0 {
                        base
                    } else {
                        pd_index(&g, &s, &StubbornnessVector::uniform(n, alpha)?, &cfg.solver)?.pd
                    };
                    paired_record(trial, key, Some(alpha), Vec::new(), base, pd)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let records: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();
    Ok(ExperimentReport::build(cfg, records, Vec::new(), Some(alpha_grid)))
}

/// One uniformly chosen node per trial gets stubbornness `target`.
pub fn run_single_node_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let target = cfg.target();
    let plan = plan_graph(cfg)?;
    let records: Vec<TrialRecord> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|trial| {
            let key = trial as u64;
            let g = realize_graph(cfg, &plan, key)?;
            let s = realize_opinions(cfg, g.node_count(), key)?;
            let l = cfg.stream(key, PURPOSE_SELECT).random_range(0..g.node_count());
            let base = baseline_pd(&g, &s, &cfg.solver)?;
            let pd = boosted_pd(&g, &s, &[l], target, &cfg.solver)?;
            paired_record(trial, key, None, vec![l], base, pd)
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentReport::build(cfg, records, Vec::new(), None))
}

/// Nodes of a degree decile, ordered by `(weighted degree, id)`.
pub fn degree_class_nodes(g: &Graph, class: DegreeClass) -> Vec<usize> {
    let n = g.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    let deg = g.degree();
    order.sort_by(|&a, &b| deg[a].total_cmp(&deg[b]).then(a.cmp(&b)));
    let width = (n / 10).max(1);
    let start = match class {
        DegreeClass::Low => 0,
        DegreeClass::Medium => (n - width) / 2,
        DegreeClass::High => n - width,
    };
    let mut nodes = order[start..start + width].to_vec();
    nodes.sort_unstable();
    nodes
}

/// Neutral means within the threshold of the mean opinion `mean`.
pub fn is_neutral(s: f64, mean: f64) -> bool {
    (s - mean).abs() <= NEUTRAL_THRESHOLD
}

/// Boosts a random subset of the (degree class ∩ neutrality class)
/// intersection. The subset has `ceil(fraction·n)` nodes, or the whole
/// intersection when it is smaller; trials with an empty intersection are
/// skipped and logged.
pub fn run_degree_category_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let Protocol::Category {
        fraction,
        target,
        degree_class,
        neutrality,
    } = cfg.protocol
    else {
        return Err(Error::Config("category run needs a category protocol".into()));
    };
    let plan = plan_graph(cfg)?;
    let outcomes: Vec<std::result::Result<TrialRecord, SkippedTrial>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|trial| -> Result<_> {
            let key = trial as u64;
            let g = realize_graph(cfg, &plan, key)?;
            let n = g.node_count();
            let s = realize_opinions(cfg, n, key)?;
            let mean = s.mean();
            let pool: Vec<usize> = degree_class_nodes(&g, degree_class)
                .into_iter()
                .filter(|&v| is_neutral(s.as_slice()[v], mean) == (neutrality == Neutrality::Neutral))
                .collect();
            if pool.is_empty() {
                return Ok(Err(SkippedTrial {
                    trial,
                    reason: "empty class intersection".into(),
                }));
            }
            let quota = ((fraction * n as f64).ceil() as usize).clamp(1, pool.len());
            let mut rng = cfg.stream(key, PURPOSE_SELECT);
            let mut nodes: Vec<usize> = sample(&mut rng, pool.len(), quota)
                .into_iter()
                .map(|i| pool[i])
                .collect();
            nodes.sort_unstable();
            let base = baseline_pd(&g, &s, &cfg.solver)?;
            let pd = boosted_pd(&g, &s, &nodes, target, &cfg.solver)?;
            Ok(Ok(paired_record(trial, key, None, nodes, base, pd)?))
        })
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(s) => skipped.push(s),
        }
    }
    if records.is_empty() {
        return Err(Error::Config(
            "class intersection was empty in every trial".into(),
        ));
    }
    Ok(ExperimentReport::build(cfg, records, skipped, None))
}

/// `(node in V₋ with the largest s, node in V₊ with the smallest s)`,
/// ties to the smaller id.
pub fn bubble_nodes(spec: &SbmSpec, s: &OpinionVector) -> (usize, usize) {
    let half = spec.n / 2;
    let s = s.as_slice();
    let mut neg = half;
    for v in half..spec.n {
        if s[v] > s[neg] {
            neg = v;
        }
    }
    let mut pos = 0;
    for v in 0..half {
        if s[v] < s[pos] {
            pos = v;
        }
    }
    (neg, pos)
}

/// For each `q`, samples an SBM with bipolar opinions and boosts the most
/// moderate node of each block.
pub fn run_bubble_experiment(cfg: &ExperimentConfig, q_grid: &[f64]) -> Result<ExperimentReport> {
    cfg.validate()?;
    let GraphSource::Sbm { n, p, .. } = cfg.graph else {
        return Err(Error::Config("bubble runs need an sbm graph source".into()));
    };
    if q_grid.is_empty() {
        return Err(Error::Config("q_grid is empty".into()));
    }
    let target = cfg.target();
    let specs: Vec<SbmSpec> = q_grid
        .iter()
        .map(|&q| {
            let spec = SbmSpec { n, p, q };
            spec.validate().map(|_| spec).map_err(|e| Error::Config(e.to_string()))
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|qi| (0..cfg.repetitions).map(move |t| (qi, t)))
        .collect();
    let records: Vec<TrialRecord> = jobs
        .into_par_iter()
        .map(|(qi, trial)| {
            let key = ((trial as u64) << 16) | qi as u64;
            let spec = &specs[qi];
            let (g, _) = gen_sbm_with(spec, &mut cfg.stream(key, PURPOSE_GRAPH))?;
            let s = realize_opinions(cfg, n, key)?;
            let (a, b) = bubble_nodes(spec, &s);
            let base = baseline_pd(&g, &s, &cfg.solver)?;
            let pd = boosted_pd(&g, &s, &[a, b], target, &cfg.solver)?;
            paired_record(trial, key, Some(spec.q), vec![a, b], base, pd)
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentReport::build(cfg, records, Vec::new(), Some(q_grid)))
}

/// Dispatches on the configured protocol.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match &cfg.protocol {
        Protocol::Homogeneous { alpha_grid } => run_homogeneous_sweep(cfg, alpha_grid),
        Protocol::SingleNode { .. } => run_single_node_experiment(cfg),
        Protocol::Category { .. } => run_degree_category_experiment(cfg),
        Protocol::Bubble { q_grid, .. } => run_bubble_experiment(cfg, q_grid),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(graph: GraphSource, protocol: Protocol, reps: usize) -> ExperimentConfig {
        ExperimentConfig {
            graph,
            opinions: OpinionModel::Uniform,
            seed: 7,
            protocol,
            repetitions: reps,
            output: None,
            solver: SolverConfig::default(),
        }
    }

    #[test]
    fn parses_json_config() {
        let cfg = ExperimentConfig::from_json(
            r#"{"graph": {"kind": "er", "n": 50, "p": 0.2},
                "opinions": "gaussian", "seed": 3,
                "protocol": {"kind": "category", "degree_class": "high", "neutrality": "non_neutral"},
                "repetitions": 4}"#,
        )
        .unwrap();
        assert_eq!(cfg.opinions, OpinionModel::Gaussian);
        assert_eq!(
            cfg.protocol,
            Protocol::Category {
                fraction: 0.01,
                target: 10.0,
                degree_class: DegreeClass::High,
                neutrality: Neutrality::NonNeutral
            }
        );
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"graph": {"kind": "er", "n": 5, "p": 0.2}, "protocol": {"kind": "single_node", "target": 1.0}}"#,
            r#"{"graph": {"kind": "er", "n": 5, "p": 0.2}, "protocol": {"kind": "single_node"}, "repetitions": 0}"#,
            r#"{"graph": {"kind": "er", "n": 5, "p": 0.2}, "protocol": {"kind": "homogeneous", "alpha_grid": [1, -2]}}"#,
            r#"{"graph": {"kind": "er", "n": 5, "p": 0.2}, "protocol": {"kind": "bubble", "q_grid": [0.1]}}"#,
            r#"{"graph": {"kind": "er", "n": 5, "p": 0.2}, "protocol": {"kind": "category", "fraction": 0, "degree_class": "low", "neutrality": "neutral"}}"#,
            r#"{"graph": {"kind": "er", "n": 5, "p": 0.2}, "protocol": {"kind": "single_node"}, "colour": 1}"#,
        ];
        for text in bad {
            assert!(matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn sweep_baseline_and_monotone() {
        let grid = [1.0, 2.0, 5.0, 20.0];
        let cfg = config(
            GraphSource::Er { n: 60, p: 0.1 },
            Protocol::Homogeneous { alpha_grid: grid.to_vec() },
            3,
        );
        let rep = run(&cfg).unwrap();
        assert_eq!(rep.records.len(), 12);
        assert_eq!(rep.aggregates[0].mean_relative_change, 0.0);
        for w in rep.aggregates.windows(2) {
            assert!(w[1].mean_relative_change >= w[0].mean_relative_change);
        }
        assert!(rep.to_csv().starts_with("alpha,mean_rel_change,std"));
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = config(GraphSource::Ba { n: 80, m: 2 }, Protocol::SingleNode { target: 10.0 }, 6);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let all: Vec<&TrialRecord> = a.records.iter().collect();
        assert_eq!(a.aggregates[0], Aggregate::from_records(None, &all, 0));
    }

    #[test]
    fn degree_classes_are_deciles() {
        let g = Graph::path(20);
        assert_eq!(degree_class_nodes(&g, DegreeClass::Low), vec![0, 19]);
        assert_eq!(degree_class_nodes(&g, DegreeClass::High), vec![17, 18]);
        assert_eq!(degree_class_nodes(&g, DegreeClass::Medium).len(), 2);
    }

    #[test]
    fn category_skips_empty_intersections() {
        let mut cfg = config(
            GraphSource::Er { n: 30, p: 0.3 },
            Protocol::Category {
                fraction: 0.1,
                target: 10.0,
                degree_class: DegreeClass::Low,
                neutrality: Neutrality::Neutral,
            },
            20,
        );
        match run(&cfg) {
            Ok(rep) => {
                assert_eq!(rep.records.len() + rep.skipped.len(), 20);
                assert!(!rep.skipped.is_empty());
            }
            Err(e) => assert!(matches!(e, Error::Config(_))),
        }
        cfg.protocol = Protocol::Category {
            fraction: 0.1,
            target: 10.0,
            degree_class: DegreeClass::High,
            neutrality: Neutrality::NonNeutral,
        };
        let rep = run(&cfg).unwrap();
        for r in &rep.records {
            assert!(!r.nodes.is_empty() && r.nodes.len() <= 3);
        }
    }

    #[test]
    fn bubble_picks_moderates() {
        let spec = SbmSpec::new(6, 0.5, 0.1).unwrap();
        let s = OpinionVector::new(vec![0.6, 0.2, 0.2, -0.9, -0.1, -0.1]).unwrap();
        assert_eq!(bubble_nodes(&spec, &s), (4, 1));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(OutputFormat::from_path(Path::new("a/b.JSON")), OutputFormat::Json);
        assert_eq!(OutputFormat::from_path(Path::new("a/b.csv")), OutputFormat::Csv);
        assert_eq!(OutputFormat::from_path(Path::new("out")), OutputFormat::Csv);
    }
}
