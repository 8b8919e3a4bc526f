//! The in-sample/out-of-sample trade-off study.
//!
//! Scenarios are split into an in-sample part that builds the uncertainty
//! sets and an out-of-sample part used only for evaluation. Every method is
//! solved for every origin–destination pair on the in-sample data and the
//! returned path is scored on both parts.

use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use robust_paths_core::evaluation::{
    default_method_grid, default_parameters, evaluate_path, generate_pairs, Method, Metrics,
    DEFAULT_CVAR_BETA,
};
use robust_paths_core::scenario::{
    compute_stats, filter_scenarios, split_sample, CleaningRules, ScenarioMatrix, ScenarioStats,
};
use robust_paths_core::solvers::{solve_average, solve_robust, MinMaxLimits, SolveOptions};
use robust_paths_core::{Graph, Path, UncertaintyModel, UncertaintySpec};

use crate::io::{read_network, read_scenarios, Unit, WindowSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: PathBuf,
    pub scenarios: PathBuf,
    #[serde(default)]
    pub unit: Unit,
    #[serde(default)]
    pub filter: Option<WindowSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_split")]
    pub split_fraction: f64,
    /// Omitted: the six families over their default grids plus the average case.
    #[serde(default)]
    pub methods: Option<Vec<MethodGrid>>,
    #[serde(default = "default_beta")]
    pub cvar_beta: f64,
    /// Node budget of the scenario min-max search per solve.
    #[serde(default)]
    pub max_nodes: Option<usize>,
}

fn default_pairs() -> usize {
    200
}

fn default_split() -> f64 {
    0.75
}

fn default_beta() -> f64 {
    DEFAULT_CVAR_BETA
}

/// One family and its parameter values; `params` defaults to the family's grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodGrid {
    pub kind: String,
    #[serde(default)]
    pub params: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn from_file(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        // data paths are relative to the config file
        let base = path.parent().unwrap_or(FsPath::new("."));
        config.graph = base.join(&config.graph);
        config.scenarios = base.join(&config.scenarios);
        Ok(config)
    }

    pub fn method_list(&self) -> Result<Vec<Method>> {
        let Some(grids) = &self.methods else {
            return Ok(default_method_grid());
        };
        let mut methods = Vec::new();
        for grid in grids {
            let params = match &grid.params {
                Some(p) => p.clone(),
                None => default_parameters(&grid.kind)
                    .with_context(|| format!("unknown method kind `{}`", grid.kind))?,
            };
            for p in params {
                methods.push(Method::from_kind(&grid.kind, p)?);
            }
        }
        Ok(methods)
    }
}

/// Aggregate of one method over all completed pairs for one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffRecord {
    pub method: String,
    pub param: f64,
    pub sample: Sample,
    pub avg: f64,
    pub max_avg: f64,
    pub cvar_avg: f64,
    /// Total solve time of the method over all pairs.
    pub runtime_s: f64,
    pub completed_pairs: usize,
    pub failed_pairs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sample {
    In,
    Out,
}

impl Sample {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::In => "in",
            Self::Out => "out",
        }
    }
}

/// Result of one method on one pair.
#[derive(Debug, Clone)]
pub struct PairOutcome {
    pub method: usize,
    pub pair: usize,
    pub result: Result<SolvedPair, String>,
}

#[derive(Debug, Clone)]
pub struct SolvedPair {
    pub path: Path,
    pub robust_value: f64,
    pub runtime_seconds: f64,
    pub in_sample: Metrics,
    pub out_sample: Option<Metrics>,
}

pub struct ExperimentReport {
    pub methods: Vec<Method>,
    pub pairs: Vec<(usize, usize)>,
    pub graph: Graph,
    pub in_sample: ScenarioMatrix,
    pub out_sample: ScenarioMatrix,
    pub stats: ScenarioStats,
    /// Sorted by (method, pair).
    pub outcomes: Vec<PairOutcome>,
    pub records: Vec<TradeoffRecord>,
}

impl ExperimentReport {
    pub fn outcome(&self, method: usize, pair: usize) -> &PairOutcome {
        &self.outcomes[method * self.pairs.len() + pair]
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if !(config.split_fraction > 0.0 && config.split_fraction <= 1.0) {
        bail!("split_fraction must lie in (0, 1]");
    }
    if !(config.cvar_beta > 0.0 && config.cvar_beta <= 1.0) {
        bail!("cvar_beta must lie in (0, 1]");
    }
    let network = read_network(&config.graph)?;
    let mut scenarios =
        read_scenarios(&config.scenarios, &network, config.unit, &CleaningRules::default())?;
    if let Some(filter) = &config.filter {
        scenarios = filter_scenarios(&scenarios, &filter.to_window()?)?;
    }
    if scenarios.is_empty() {
        bail!("no scenarios left after filtering");
    }
    let methods = config.method_list()?;
    let (in_sample, out_sample) = split_sample(&scenarios, config.split_fraction, config.seed)?;
    let full = methods.iter().any(|m| {
        matches!(
            m,
            Method::Robust(UncertaintySpec::Ellipsoid {
                diagonal_only: false,
                ..
            })
        )
    });
    let stats = compute_stats(&in_sample, full)?;
    let graph = network.graph;
    let pairs = generate_pairs(&graph, config.pairs, config.seed)?;
    let mut options = SolveOptions::default();
    if let Some(max_nodes) = config.max_nodes {
        options.minmax = MinMaxLimits { max_nodes };
    }

    let model = UncertaintyModel::new(&in_sample, &stats)?;
    for m in &methods {
        if let Method::Robust(spec) = m {
            model.validate(spec).with_context(|| format!("method {spec}"))?;
        }
    }
    let jobs: Vec<(usize, usize)> = (0..methods.len())
        .flat_map(|m| (0..pairs.len()).map(move |p| (m, p)))
        .collect();
    let mut outcomes: Vec<PairOutcome> = jobs
        .par_iter()
        .map(|&(m, p)| {
            let (s, t) = pairs[p];
            let result = solve_pair(&graph, &model, &methods[m], s, t, &options).and_then(
                |(path, robust_value, runtime_seconds)| {
                    let in_metrics = evaluate_path(&path, &in_sample, config.cvar_beta)?;
                    let out_metrics = if out_sample.is_empty() {
                        None
                    } else {
                        Some(evaluate_path(&path, &out_sample, config.cvar_beta)?)
                    };
                    Ok(SolvedPair {
                        path,
                        robust_value,
                        runtime_seconds,
                        in_sample: in_metrics,
                        out_sample: out_metrics,
                    })
                },
            );
            PairOutcome {
                method: m,
                pair: p,
                result: result.map_err(|e| e.to_string()),
            }
        })
        .collect();
    outcomes.sort_by_key(|o| (o.method, o.pair));

    let mut records = Vec::new();
    for (m, method) in methods.iter().enumerate() {
        let chunk = &outcomes[m * pairs.len()..(m + 1) * pairs.len()];
        let solved: Vec<&SolvedPair> = chunk.iter().filter_map(|o| o.result.as_ref().ok()).collect();
        let failed = chunk.len() - solved.len();
        let runtime: f64 = solved.iter().map(|s| s.runtime_seconds).sum();
        let mut push = |sample, metrics: Vec<Metrics>| {
            let n = metrics.len() as f64;
            let mean = |f: fn(&Metrics) -> f64| {
                if metrics.is_empty() {
                    f64::NAN
                } else {
                    metrics.iter().map(f).sum::<f64>() / n
                }
            };
            records.push(TradeoffRecord {
                method: method.kind_name().to_string(),
                param: method.parameter(),
                sample,
                avg: mean(|x| x.average),
                max_avg: mean(|x| x.worst),
                cvar_avg: mean(|x| x.cvar),
                runtime_s: runtime,
                completed_pairs: metrics.len(),
                failed_pairs: failed,
            });
        };
        push(Sample::In, solved.iter().map(|s| s.in_sample).collect());
        if !out_sample.is_empty() {
            push(Sample::Out, solved.iter().filter_map(|s| s.out_sample).collect());
        }
    }

    Ok(ExperimentReport {
        methods,
        pairs,
        graph,
        in_sample,
        out_sample,
        stats,
        outcomes,
        records,
    })
}

fn solve_pair(
    graph: &Graph,
    model: &UncertaintyModel<'_>,
    method: &Method,
    s: usize,
    t: usize,
    options: &SolveOptions,
) -> robust_paths_core::Result<(Path, f64, f64)> {
    let start = Instant::now();
    let sol = match method {
        Method::Average => solve_average(graph, &model.stats.mean, s, t)?,
        Method::Robust(spec) => solve_robust(graph, model, spec, s, t, options)?,
    };
    Ok((sol.path, sol.robust_value, start.elapsed().as_secs_f64()))
}

pub const CSV_HEADER: [&str; 7] = ["method", "param", "sample", "avg", "max_avg", "cvar_avg", "runtime_s"];

/// One row per record; aggregates of methods that failed on every pair are empty.
pub fn write_records_csv<W: Write>(out: W, records: &[TradeoffRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let cell = |v: f64| if v.is_nan() { String::new() } else { v.to_string() };
    for r in records {
        w.write_record([
            r.method.clone(),
            r.param.to_string(),
            r.sample.as_str().to_string(),
            cell(r.avg),
            cell(r.max_avg),
            cell(r.cvar_avg),
            r.runtime_s.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
