//! Exact robust shortest-path solvers.

mod ellipsoid;
mod minmax;
mod reductions;

pub use ellipsoid::{
    ellipsoid_value, solve_ellipsoid_bb, solve_ellipsoid_bb_traced, solve_ellipsoid_naive,
    AlphaRule, BbEvent, BbOptions, BicriteriaPoint, Cut,
};
pub use minmax::{solve_bruteforce, solve_scenario_minmax, MinMaxLimits};
pub use reductions::{solve_average, solve_budgeted, solve_interval};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{CostVector, Graph, Path};
use crate::sets::{UncertaintyModel, UncertaintySpec};

/// A path together with its robust objective value and solver statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustSolution {
    pub path: Path,
    /// Worst-case cost of `path` over the uncertainty set, in minutes.
    pub robust_value: f64,
    pub sp_calls: usize,
    /// Branch-and-bound nodes (min-max) or paths enumerated (brute force).
    pub nodes_explored: usize,
    /// Distinct bicriteria points kept by the ellipsoid solvers.
    pub extreme_points: usize,
    /// Wall-clock time; left at zero here and filled in by callers that time the solve.
    pub runtime_seconds: f64,
}

impl RobustSolution {
    pub(crate) fn new(path: Path, robust_value: f64, sp_calls: usize) -> Self {
        Self {
            path,
            robust_value,
            sp_calls,
            nodes_explored: 0,
            extreme_points: 0,
            runtime_seconds: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    /// Polynomial reduction where one exists, branch-and-bound otherwise.
    #[default]
    Auto,
    Naive,
    Bb,
    MinMax,
    BruteForce,
}

impl core::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => Self::Auto,
            "naive" => Self::Naive,
            "bb" => Self::Bb,
            "minmax" => Self::MinMax,
            "bruteforce" => Self::BruteForce,
            _ => return Err(Error::InvalidParameter("unknown algorithm")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub algorithm: Algorithm,
    pub bb: BbOptions,
    pub minmax: MinMaxLimits,
    pub path_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Auto,
            bb: BbOptions::default(),
            minmax: MinMaxLimits::default(),
            path_limit: 100_000,
        }
    }
}

/// `λ·d` for the axis-parallel ellipsoid of size `λ`.
pub fn scaled_variance(model: &UncertaintyModel<'_>, lambda: f64) -> Result<CostVector> {
    CostVector::new(
        model
            .stats
            .variance
            .as_slice()
            .iter()
            .map(|v| lambda * v)
            .collect::<Vec<_>>(),
    )
}

/// Solves `min_x max_{c∈U} cᵀx` for the set described by `spec`.
///
/// `Auto` uses the shortest-path reductions for interval and budgeted sets,
/// branch-and-bound for the axis-parallel ellipsoid and the min-max search for
/// the scenario-based sets. The full-covariance ellipsoid is only supported by
/// brute force.
pub fn solve_robust(
    graph: &Graph,
    model: &UncertaintyModel<'_>,
    spec: &UncertaintySpec,
    source: usize,
    target: usize,
    options: &SolveOptions,
) -> Result<RobustSolution> {
    model.validate(spec)?;
    if model.stats.arc_count() != graph.arc_count() {
        return Err(Error::DimensionMismatch {
            expected: graph.arc_count(),
            found: model.stats.arc_count(),
        });
    }
    let oracle = |p: &Path| model.worst_case(spec, p);
    match (options.algorithm, *spec) {
        (Algorithm::BruteForce, _) => {
            solve_bruteforce(graph, oracle, source, target, options.path_limit)
        }
        (Algorithm::Auto, UncertaintySpec::Interval { lambda }) => {
            solve_interval(graph, model.stats, lambda, source, target)
        }
        (Algorithm::Auto, UncertaintySpec::Budgeted { gamma }) => {
            solve_budgeted(graph, model.stats, gamma, source, target)
        }
        (
            Algorithm::Auto | Algorithm::Bb | Algorithm::Naive,
            UncertaintySpec::Ellipsoid {
                lambda,
                diagonal_only: true,
            },
        ) => {
            let spread = scaled_variance(model, lambda)?;
            if options.algorithm == Algorithm::Naive {
                solve_ellipsoid_naive(graph, &model.stats.mean, &spread, source, target)
            } else {
                solve_ellipsoid_bb(graph, &model.stats.mean, &spread, source, target, &options.bb)
            }
        }
        (Algorithm::Naive | Algorithm::Bb, _) => Err(Error::InvalidParameter(
            "naive and bb solve the axis-parallel ellipsoid only",
        )),
        (
            _,
            UncertaintySpec::Ellipsoid {
                diagonal_only: false,
                ..
            },
        ) => Err(Error::InvalidParameter(
            "the full-covariance ellipsoid is only supported by bruteforce",
        )),
        (Algorithm::Auto | Algorithm::MinMax, _) => {
            let member = model.member_costs(spec)?;
            solve_scenario_minmax(
                graph,
                &member,
                oracle_monotone(spec),
                oracle,
                source,
                target,
                &options.minmax,
            )
        }
    }
}

/// Whether the worst-case value of a path can only grow when arcs are
/// appended, which lets the min-max search bound prefixes by their own value.
pub fn oracle_monotone(spec: &UncertaintySpec) -> bool {
    match *spec {
        // members (1 − λ)ĉ + λcⁱ stay nonnegative
        UncertaintySpec::ConvexHull { lambda } => lambda <= 1.0,
        UncertaintySpec::Interval { .. }
        | UncertaintySpec::Budgeted { .. }
        | UncertaintySpec::Permutohull { .. }
        | UncertaintySpec::SymPermutohull { .. } => true,
        UncertaintySpec::Ellipsoid { diagonal_only, .. } => diagonal_only,
    }
}
