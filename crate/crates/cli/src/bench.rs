//! Shortest-path counts and timings of the ellipsoid solvers on random grids.

use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::Serialize;

use robust_paths_core::grid::{generate_grid_instance, Orientation};
use robust_paths_core::scenario::compute_stats;
use robust_paths_core::solvers::{
    ellipsoid_value, solve_bruteforce, solve_ellipsoid_bb, solve_ellipsoid_naive, AlphaRule,
    BbOptions, RobustSolution,
};
use robust_paths_core::CostVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchAlgorithm {
    Naive,
    Bb,
    BruteForce,
}

impl BenchAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Naive => "naive",
            Self::Bb => "bb",
            Self::BruteForce => "bruteforce",
        }
    }
}

impl FromStr for BenchAlgorithm {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "naive" => Self::Naive,
            "bb" => Self::Bb,
            "bruteforce" => Self::BruteForce,
            _ => bail!("unknown benchmark algorithm `{s}`"),
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub instances: usize,
    pub samples: usize,
    pub seed: u64,
    pub algorithms: Vec<BenchAlgorithm>,
    pub orientation: Orientation,
    /// Size of the ellipsoid: the spread vector is `lambda` times the variances.
    pub lambda: f64,
    pub bb: BbOptions,
    pub path_limit: usize,
    /// Solve instances on the rayon pool instead of one after another.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![5, 10, 20],
            instances: 100,
            samples: 50,
            seed: 42,
            algorithms: vec![BenchAlgorithm::Bb, BenchAlgorithm::Naive],
            orientation: Orientation::RightDown,
            lambda: 1.0,
            bb: BbOptions::default(),
            path_limit: 100_000,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub size: usize,
    pub algorithm: BenchAlgorithm,
    pub instances: usize,
    pub mean_sp_calls: f64,
    pub mean_runtime_s: f64,
    pub max_runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Instances on which the algorithms disagreed on the robust value
    /// (beyond 1e-9 relative).
    pub value_mismatches: usize,
}

impl BenchReport {
    pub fn row(&self, size: usize, algorithm: BenchAlgorithm) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.size == size && r.algorithm == algorithm)
    }
}

/// Seed of instance `index` of side `k`; distinct per (seed, k, index).
pub fn instance_seed(seed: u64, k: usize, index: usize) -> u64 {
    // splitmix64 finalizer over the packed triple
    let mut z = seed ^ ((k as u64) << 40) ^ index as u64;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct Run {
    sp_calls: usize,
    seconds: f64,
    value: f64,
}

fn solve_instance(config: &BenchConfig, k: usize, index: usize) -> Result<Vec<Run>> {
    let inst = generate_grid_instance(
        k,
        config.samples,
        instance_seed(config.seed, k, index),
        config.orientation,
    )?;
    let stats = compute_stats(&inst.scenarios, false)?;
    let spread = CostVector::new(
        stats
            .variance
            .as_slice()
            .iter()
            .map(|v| config.lambda * v)
            .collect(),
    )?;
    let (g, s, t) = (&inst.graph, inst.source, inst.target);
    let mut runs = Vec::with_capacity(config.algorithms.len());
    for &algorithm in &config.algorithms {
        let start = Instant::now();
        let sol: RobustSolution = match algorithm {
            BenchAlgorithm::Naive => solve_ellipsoid_naive(g, &stats.mean, &spread, s, t)?,
            BenchAlgorithm::Bb => solve_ellipsoid_bb(g, &stats.mean, &spread, s, t, &config.bb)?,
            BenchAlgorithm::BruteForce => solve_bruteforce(
                g,
                |p| Ok(ellipsoid_value(p, stats.mean.as_slice(), spread.as_slice())),
                s,
                t,
                config.path_limit,
            )?,
        };
        runs.push(Run {
            sp_calls: sol.sp_calls,
            seconds: start.elapsed().as_secs_f64(),
            value: sol.robust_value,
        });
    }
    Ok(runs)
}

pub fn run_grid_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    if config.algorithms.is_empty() {
        bail!("no algorithm selected");
    }
    let mut rows = Vec::new();
    let mut mismatches = 0;
    for &k in &config.sizes {
        let runs: Vec<Vec<Run>> = if config.parallel {
            (0..config.instances)
                .into_par_iter()
                .map(|i| solve_instance(config, k, i))
                .collect::<Result<_>>()?
        } else {
            (0..config.instances)
                .map(|i| solve_instance(config, k, i))
                .collect::<Result<_>>()?
        };
        for per in &runs {
            let v0 = per[0].value;
            if per.iter().any(|r| (r.value - v0).abs() > 1e-9 * v0.abs().max(1.0)) {
                mismatches += 1;
            }
        }
        for (a, &algorithm) in config.algorithms.iter().enumerate() {
            let n = runs.len().max(1) as f64;
            rows.push(BenchRow {
                size: k,
                algorithm,
                instances: runs.len(),
                mean_sp_calls: runs.iter().map(|r| r[a].sp_calls as f64).sum::<f64>() / n,
                mean_runtime_s: runs.iter().map(|r| r[a].seconds).sum::<f64>() / n,
                max_runtime_s: runs.iter().map(|r| r[a].seconds).fold(0.0, f64::max),
            });
        }
    }
    Ok(BenchReport {
        rows,
        value_mismatches: mismatches,
    })
}

pub const CSV_HEADER: [&str; 6] = [
    "size",
    "algorithm",
    "instances",
    "mean_sp_calls",
    "mean_runtime_s",
    "max_runtime_s",
];

pub fn write_bench_csv<W: Write>(out: W, report: &BenchReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.size.to_string(),
            r.algorithm.name().to_string(),
            r.instances.to_string(),
            r.mean_sp_calls.to_string(),
            r.mean_runtime_s.to_string(),
            r.max_runtime_s.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `AlphaRule` from its command-line name.
pub fn parse_alpha_rule(s: &str) -> Result<AlphaRule> {
    match s {
        "tangent" => Ok(AlphaRule::Tangent),
        "reciprocal" => Ok(AlphaRule::Reciprocal),
        _ => bail!("unknown alpha rule `{s}` (expected tangent or reciprocal)"),
    }
}
