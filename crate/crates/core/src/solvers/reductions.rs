//! Sets whose robust counterpart reduces to ordinary shortest paths.

use alloc::vec::Vec;

use super::RobustSolution;
use crate::error::{Error, Result};
use crate::graph::{shortest_path, CostVector, Graph};
use crate::scenario::ScenarioStats;
use crate::sets::{interval_upper_costs, worst_case_budgeted};

/// Shortest path under the mean costs.
pub fn solve_average(graph: &Graph, mean: &CostVector, source: usize, target: usize) -> Result<RobustSolution> {
    let (path, _) = shortest_path(graph, mean, source, target)?;
    let robust_value = path.cost(mean.as_slice());
    Ok(RobustSolution::new(path, robust_value, 1))
}

/// Interval set: one shortest path under the upper endpoints `ĉ + λ(c̄ − ĉ)`.
pub fn solve_interval(
    graph: &Graph,
    stats: &ScenarioStats,
    lambda: f64,
    source: usize,
    target: usize,
) -> Result<RobustSolution> {
    let upper = interval_upper_costs(stats, lambda)?;
    let (path, _) = shortest_path(graph, &upper, source, target)?;
    let robust_value = path.cost(upper.as_slice());
    Ok(RobustSolution::new(path, robust_value, 1))
}

/// Budgeted set, by enumerating the dual threshold `θ` over `{0} ∪ {c̄_e − ĉ_e}`:
///
/// `min_θ Γθ + SP(ĉ_e + max(c̄_e − ĉ_e − θ, 0))`.
pub fn solve_budgeted(
    graph: &Graph,
    stats: &ScenarioStats,
    gamma: f64,
    source: usize,
    target: usize,
) -> Result<RobustSolution> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidParameter("gamma must be finite and >= 0"));
    }
    if gamma == 0.0 {
        return solve_average(graph, &stats.mean, source, target);
    }
    let mean = stats.mean.as_slice();
    let deviation = stats.deviation();
    let mut thresholds: Vec<f64> = deviation.clone();
    thresholds.push(0.0);
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();

    let mut best = None;
    let mut calls = 0;
    let mut costs = Vec::with_capacity(mean.len());
    for theta in thresholds {
        costs.clear();
        costs.extend(
            mean.iter()
                .zip(&deviation)
                .map(|(m, d)| m + (d - theta).max(0.0)),
        );
        let (path, value) = shortest_path(graph, &CostVector::new(costs.clone())?, source, target)?;
        calls += 1;
        let total = gamma * theta + value;
        if best.as_ref().is_none_or(|(v, _)| total < *v) {
            best = Some((total, path));
        }
    }
    let (_, path) = best.expect("at least one threshold");
    let robust_value = worst_case_budgeted(stats, gamma, &path)?;
    Ok(RobustSolution::new(path, robust_value, calls))
}
