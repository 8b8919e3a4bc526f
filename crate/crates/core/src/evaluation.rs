//! Out-of-sample evaluation protocol: random origin–destination pairs, the
//! method/parameter grid and the three performance measures.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Path};
use crate::scenario::ScenarioMatrix;
use crate::sets::UncertaintySpec;

/// Performance of one path over a scenario sample (minutes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub average: f64,
    pub worst: f64,
    /// Mean of the `⌈β·N⌉` largest path costs.
    pub cvar: f64,
    pub scenario_count: usize,
}

pub const DEFAULT_CVAR_BETA: f64 = 0.05;

/// Number of scenarios in the CVaR tail, `⌈β·N⌉` (at least one).
pub fn tail_count(beta: f64, n: usize) -> usize {
    let raw = beta * n as f64;
    (libm::ceil(raw - 1e-9 * raw.max(1.0)) as usize).clamp(1, n)
}

pub fn evaluate_path(path: &Path, scenarios: &ScenarioMatrix, beta: f64) -> Result<Metrics> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter("beta must lie in (0, 1]"));
    }
    let n = scenarios.scenario_count();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut costs = scenarios.path_costs(path);
    costs.sort_by(|a, b| b.total_cmp(a));
    let average = costs.iter().sum::<f64>() / n as f64;
    let worst = costs[0];
    let k = tail_count(beta, n);
    let tail = costs[..k].iter().sum::<f64>() / k as f64;
    Ok(Metrics {
        average,
        worst,
        // the ordering average ≤ cvar ≤ worst holds exactly; rounding must not break it
        cvar: tail.clamp(average.min(worst), worst),
        scenario_count: n,
    })
}

/// `count` origin–destination pairs drawn uniformly over the nodes with
/// `s ≠ t`; pairs without an `s`–`t` path are redrawn.
pub fn generate_pairs(graph: &Graph, count: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    let nodes = graph.node_count();
    if nodes < 2 {
        return Err(Error::InvalidParameter("need at least two nodes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reach: Vec<Option<Vec<bool>>> = alloc::vec![None; nodes];
    let mut pairs = Vec::with_capacity(count);
    let max_draws = count.saturating_mul(100).max(100);
    let mut draws = 0;
    while pairs.len() < count {
        if draws == max_draws {
            return Err(Error::InsufficientConnectivity);
        }
        draws += 1;
        let s = rng.gen_range(0..nodes);
        let t = rng.gen_range(0..nodes);
        if s == t {
            continue;
        }
        let reachable = reach[s].get_or_insert_with(|| {
            graph.reachable_from(s).expect("node drawn in range")
        });
        if reachable[t] {
            pairs.push((s, t));
        }
    }
    Ok(pairs)
}

/// A solution method of the trade-off study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Shortest path under the mean costs.
    Average,
    Robust(UncertaintySpec),
}

impl Method {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Average => "average",
            Self::Robust(spec) => spec.kind_name(),
        }
    }

    pub fn parameter(&self) -> f64 {
        match self {
            Self::Average => 0.0,
            Self::Robust(spec) => spec.parameter(),
        }
    }

    pub fn from_kind(kind: &str, param: f64) -> Result<Self> {
        if kind == "average" {
            Ok(Self::Average)
        } else {
            UncertaintySpec::from_kind(kind, param).map(Self::Robust)
        }
    }
}

/// Default parameter values of a set family (20 each).
pub fn default_parameters(kind: &str) -> Option<Vec<f64>> {
    let values = match kind {
        "convex-hull" | "interval" => (1..=20).map(|i| i as f64 / 20.0).collect(),
        "ellipsoid" | "ellipsoid-full" => (1..=20).map(|i| i as f64 / 2.0).collect(),
        "budgeted" => (1..=20).map(|i| i as f64).collect(),
        "permutohull" => (0..20).map(|i| (2 * i + 1) as f64).collect(),
        "sym-permutohull" => (1..=20).map(|i| i as f64).collect(),
        "average" => alloc::vec![0.0],
        _ => return None,
    };
    Some(values)
}

/// The six families over their default grids plus the average case.
pub fn default_method_grid() -> Vec<Method> {
    let mut methods = Vec::with_capacity(121);
    for kind in [
        "convex-hull",
        "interval",
        "ellipsoid",
        "budgeted",
        "permutohull",
        "sym-permutohull",
    ] {
        for p in default_parameters(kind).expect("known kind") {
            methods.push(Method::from_kind(kind, p).expect("valid default parameter"));
        }
    }
    methods.push(Method::Average);
    methods
}
