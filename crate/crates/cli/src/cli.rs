//! Command-line front end. Exit status: 0 on success, 1 on domain errors,
//! 2 on usage errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use robust_paths_core::graph::enumerate_simple_paths;
use robust_paths_core::grid::{
    correlated_grid_dataset, generate_grid_instance, CorrelatedNoise, Orientation,
};
use robust_paths_core::scenario::{compute_stats, filter_scenarios, CleaningRules, ScenarioMatrix};
use robust_paths_core::solvers::{solve_robust, Algorithm, AlphaRule, MinMaxLimits, SolveOptions};
use robust_paths_core::{UncertaintyModel, UncertaintySpec};

use crate::bench::{parse_alpha_rule, run_grid_benchmark, write_bench_csv, BenchAlgorithm, BenchConfig};
use crate::experiment::{run_experiment, write_records_csv, ExperimentConfig};
use crate::io::{
    read_network, read_scenarios, write_network, write_scenarios, DaySet, Network, Unit, WindowSpec,
};

#[derive(Debug, Parser)]
#[command(name = "robust-paths", version, about = "Robust shortest paths under data-driven uncertainty sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-arc statistics of a scenario file.
    Stats(StatsArgs),
    /// Solve one robust shortest-path problem.
    Solve(SolveArgs),
    /// Run the in-sample/out-of-sample trade-off study from a JSON config.
    Experiment(ExperimentArgs),
    /// Shortest-path counts and timings of the ellipsoid solvers on random grids.
    Gridbench(GridbenchArgs),
    /// List the simple paths between two nodes, optionally with worst-case values.
    Paths(PathsArgs),
    /// Write a random grid graph and scenario file.
    Gengrid(GengridArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for every random choice.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub scenarios: PathBuf,
    #[arg(long, default_value = "minutes")]
    pub unit: Unit,
    /// Keep only scenarios on these days: all, weekdays, weekends or e.g. mon,tue.
    #[arg(long)]
    pub days: Option<String>,
    /// Start of the time-of-day window (HH:MM, inclusive).
    #[arg(long)]
    pub start: Option<String>,
    /// End of the time-of-day window (HH:MM, exclusive).
    #[arg(long)]
    pub end: Option<String>,
}

impl DataArgs {
    fn load(&self) -> Result<(Network, ScenarioMatrix)> {
        let network = read_network(&self.graph)?;
        let mut scenarios =
            read_scenarios(&self.scenarios, &network, self.unit, &CleaningRules::default())?;
        if self.days.is_some() || self.start.is_some() || self.end.is_some() {
            let days = match self.days.as_deref() {
                None => DaySet::Named("all".into()),
                Some(d) if d.contains(',') => {
                    DaySet::List(d.split(',').map(|s| s.trim().to_string()).collect())
                }
                Some(d) => DaySet::Named(d.to_string()),
            };
            let window = WindowSpec {
                days,
                start: self.start.clone().unwrap_or_else(|| "00:00".into()),
                end: self.end.clone().unwrap_or_else(|| "24:00".into()),
            };
            scenarios = filter_scenarios(&scenarios, &window.to_window()?)?;
        }
        if scenarios.is_empty() {
            bail!("no scenarios left after filtering");
        }
        Ok((network, scenarios))
    }
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Uncertainty set as kind:param, e.g. ellipsoid:1.0 or permutohull:3.
    #[arg(long)]
    pub set: UncertaintySpec,
    #[arg(long)]
    pub source: usize,
    #[arg(long)]
    pub target: usize,
    /// auto, naive, bb, minmax or bruteforce.
    #[arg(long, default_value = "auto")]
    pub algorithm: Algorithm,
    /// Direction rule of the ellipsoid branch-and-bound: tangent or reciprocal.
    #[arg(long, default_value = "tangent", value_parser = parse_alpha_rule)]
    pub alpha_rule: AlphaRule,
    /// Node budget of the scenario min-max search.
    #[arg(long)]
    pub max_nodes: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GridbenchArgs {
    /// Grid sides, e.g. 5,10,20.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    /// Any of naive, bb, bruteforce.
    #[arg(long, value_delimiter = ',', default_value = "bb,naive")]
    pub algorithms: Vec<BenchAlgorithm>,
    #[arg(long, default_value = "right-down")]
    pub orientation: Orientation,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value = "tangent", value_parser = parse_alpha_rule)]
    pub alpha_rule: AlphaRule,
    /// Solve instances one after another.
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PathsArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub source: usize,
    #[arg(long)]
    pub target: usize,
    #[arg(long, default_value_t = 10_000)]
    pub limit: usize,
    /// Scenario file; with --set every path gets its worst-case value.
    #[arg(long, requires = "set")]
    pub scenarios: Option<PathBuf>,
    #[arg(long, requires = "scenarios")]
    pub set: Option<UncertaintySpec>,
    #[arg(long, default_value = "minutes")]
    pub unit: Unit,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GengridArgs {
    /// Grid side.
    #[arg(long)]
    pub size: usize,
    /// Number of scenarios.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value = "right-down")]
    pub orientation: Orientation,
    /// Timestamped scenarios with a shared congestion factor instead of
    /// independent integers in 1..=100.
    #[arg(long)]
    pub correlated: bool,
    /// Directory receiving graph.json and scenarios.csv.
    #[arg(long)]
    pub dir: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

const DEFAULT_SEED: u64 = 42;

/// Parses `args` and runs the command; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Stats(a) => stats(a),
        Command::Solve(a) => solve(a),
        Command::Experiment(a) => experiment(a),
        Command::Gridbench(a) => gridbench(a),
        Command::Paths(a) => paths(a),
        Command::Gengrid(a) => gengrid(a),
    }
}

fn output(out: Option<&FsPath>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(out: Option<&FsPath>, value: &impl Serialize) -> Result<()> {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let (_, scenarios) = a.data.load()?;
    let s = compute_stats(&scenarios, false)?;
    let out = a.common.out.as_deref();
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(output(out)?);
            w.write_record(["arc", "mean", "lower", "upper", "variance"])?;
            for e in 0..s.arc_count() {
                w.write_record([
                    e.to_string(),
                    s.mean[e].to_string(),
                    s.lower[e].to_string(),
                    s.upper[e].to_string(),
                    s.variance[e].to_string(),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let arcs: Vec<_> = (0..s.arc_count())
                .map(|e| {
                    json!({
                        "arc": e,
                        "mean": s.mean[e],
                        "lower": s.lower[e],
                        "upper": s.upper[e],
                        "variance": s.variance[e],
                    })
                })
                .collect();
            write_json(out, &json!({ "scenarios": scenarios.scenario_count(), "arcs": arcs }))?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SolveOutput {
    path: Vec<usize>,
    arcs: Vec<usize>,
    set: String,
    algorithm: String,
    robust_value: f64,
    sp_calls: usize,
    nodes_explored: usize,
    runtime_seconds: f64,
}

fn solve(a: SolveArgs) -> Result<()> {
    let spec = a.set;
    let (network, scenarios) = a.data.load()?;
    let full = matches!(spec, UncertaintySpec::Ellipsoid { diagonal_only: false, .. });
    let stats = compute_stats(&scenarios, full)?;
    let model = UncertaintyModel::new(&scenarios, &stats)?;
    let mut options = SolveOptions {
        algorithm: a.algorithm,
        ..SolveOptions::default()
    };
    options.bb.alpha_rule = a.alpha_rule;
    if let Some(max_nodes) = a.max_nodes {
        options.minmax = MinMaxLimits { max_nodes };
    }
    let start = Instant::now();
    let mut sol = solve_robust(&network.graph, &model, &spec, a.source, a.target, &options)?;
    sol.runtime_seconds = start.elapsed().as_secs_f64();
    let result = SolveOutput {
        path: sol.path.nodes().to_vec(),
        arcs: sol.path.arcs().to_vec(),
        set: spec.to_string(),
        algorithm: algorithm_name(a.algorithm).to_string(),
        robust_value: sol.robust_value,
        sp_calls: sol.sp_calls,
        nodes_explored: sol.nodes_explored,
        runtime_seconds: sol.runtime_seconds,
    };
    let out = a.common.out.as_deref();
    match a.common.format.unwrap_or(Format::Json) {
        Format::Json => write_json(out, &result)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(output(out)?);
            w.write_record(["path", "robust_value", "sp_calls", "nodes_explored", "runtime_seconds"])?;
            let nodes: Vec<String> = result.path.iter().map(|v| v.to_string()).collect();
            w.write_record([
                nodes.join(" "),
                result.robust_value.to_string(),
                result.sp_calls.to_string(),
                result.nodes_explored.to_string(),
                result.runtime_seconds.to_string(),
            ])?;
            w.flush()?;
        }
    }
    Ok(())
}

fn algorithm_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Auto => "auto",
        Algorithm::Naive => "naive",
        Algorithm::Bb => "bb",
        Algorithm::MinMax => "minmax",
        Algorithm::BruteForce => "bruteforce",
    }
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let mut config = ExperimentConfig::from_file(&a.config)?;
    if let Some(seed) = a.common.seed {
        config.seed = seed;
    }
    let report = run_experiment(&config)?;
    let out = a.common.out.as_deref();
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => write_records_csv(output(out)?, &report.records)?,
        Format::Json => write_json(
            out,
            &json!({
                "pairs": report.pairs,
                "in_sample_scenarios": report.in_sample.scenario_count(),
                "out_sample_scenarios": report.out_sample.scenario_count(),
                "records": report.records,
            }),
        )?,
    }
    let failed: usize = report.outcomes.iter().filter(|o| o.result.is_err()).count();
    if failed > 0 {
        eprintln!("warning: {failed} method/pair solves failed; aggregates cover completed pairs");
    }
    Ok(())
}

fn gridbench(a: GridbenchArgs) -> Result<()> {
    let mut config = BenchConfig {
        sizes: a.sizes,
        instances: a.instances,
        samples: a.samples,
        seed: a.common.seed.unwrap_or(DEFAULT_SEED),
        algorithms: a.algorithms,
        orientation: a.orientation,
        lambda: a.lambda,
        parallel: !a.sequential,
        ..BenchConfig::default()
    };
    config.bb.alpha_rule = a.alpha_rule;
    let report = run_grid_benchmark(&config)?;
    if report.value_mismatches > 0 {
        eprintln!("warning: algorithms disagreed on {} instances", report.value_mismatches);
    }
    let out = a.common.out.as_deref();
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => write_bench_csv(output(out)?, &report),
        Format::Json => write_json(out, &report),
    }
}

fn paths(a: PathsArgs) -> Result<()> {
    let network = read_network(&a.graph)?;
    let list = enumerate_simple_paths(&network.graph, a.source, a.target, a.limit)?;
    let values: Option<Vec<f64>> = match (&a.scenarios, &a.set) {
        (Some(file), Some(spec)) => {
            let spec = *spec;
            let scenarios = read_scenarios(file, &network, a.unit, &CleaningRules::default())?;
            let full = matches!(spec, UncertaintySpec::Ellipsoid { diagonal_only: false, .. });
            let stats = compute_stats(&scenarios, full)?;
            let model = UncertaintyModel::new(&scenarios, &stats)?;
            model.validate(&spec)?;
            Some(list.iter().map(|p| model.worst_case(&spec, p)).collect::<Result<_, _>>()?)
        }
        _ => None,
    };
    let out = a.common.out.as_deref();
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(output(out)?);
            let mut header = vec!["index", "nodes"];
            if values.is_some() {
                header.push("worst_case");
            }
            w.write_record(&header)?;
            for (i, p) in list.iter().enumerate() {
                let nodes: Vec<String> = p.nodes().iter().map(|v| v.to_string()).collect();
                let mut row = vec![i.to_string(), nodes.join(" ")];
                if let Some(v) = &values {
                    row.push(v[i].to_string());
                }
                w.write_record(&row)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let items: Vec<_> = list
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let mut item = json!({ "index": i, "nodes": p.nodes() });
                    if let Some(v) = &values {
                        item["worst_case"] = json!(v[i]);
                    }
                    item
                })
                .collect();
            write_json(out, &items)?;
        }
    }
    Ok(())
}

fn gengrid(a: GengridArgs) -> Result<()> {
    let seed = a.common.seed.unwrap_or(DEFAULT_SEED);
    let (graph, scenarios) = if a.correlated {
        correlated_grid_dataset(a.size, a.samples, seed, a.orientation, &CorrelatedNoise::default())?
    } else {
        let inst = generate_grid_instance(a.size, a.samples, seed, a.orientation)?;
        (inst.graph, inst.scenarios)
    };
    std::fs::create_dir_all(&a.dir)?;
    let graph_path = a.dir.join("graph.json");
    let scenario_path = a.dir.join("scenarios.csv");
    write_network(&graph_path, &graph, None)?;
    write_scenarios(&scenario_path, &scenarios)?;
    let summary = json!({
        "graph": graph_path,
        "scenarios": scenario_path,
        "nodes": graph.node_count(),
        "arcs": graph.arc_count(),
        "scenario_count": scenarios.scenario_count(),
        "seed": seed,
    });
    let out = a.common.out.as_deref();
    match a.common.format.unwrap_or(Format::Json) {
        Format::Json => write_json(out, &summary),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(output(out)?);
            w.write_record(["graph", "scenarios", "nodes", "arcs", "scenario_count", "seed"])?;
            w.write_record([
                graph_path.display().to_string(),
                scenario_path.display().to_string(),
                graph.node_count().to_string(),
                graph.arc_count().to_string(),
                scenarios.scenario_count().to_string(),
                seed.to_string(),
            ])?;
            w.flush()?;
            Ok(())
        }
    }
}
