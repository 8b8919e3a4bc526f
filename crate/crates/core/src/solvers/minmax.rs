use alloc::vec;
use alloc::vec::Vec;

use super::RobustSolution;
use crate::error::{Error, Result};
use crate::graph::{distances_to, enumerate_simple_paths, CostVector, Graph, Path};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinMaxLimits {
    pub max_nodes: usize,
}

impl Default for MinMaxLimits {
    fn default() -> Self {
        Self { max_nodes: 2_000_000 }
    }
}

/// Exact `min_x max_{c∈U} cᵀx` by depth-first branch-and-bound over path
/// prefixes.
///
/// `member` must be a cost vector contained in the set; its path cost is a
/// lower bound on the worst case, and the completion bound uses shortest
/// distances to `target` under it. When `monotone` is set the oracle value of
/// a prefix is also used as a bound, which is valid whenever every cost
/// vector in the set is nonnegative.
pub fn solve_scenario_minmax(
    graph: &Graph,
    member: &CostVector,
    monotone: bool,
    mut oracle: impl FnMut(&Path) -> Result<f64>,
    source: usize,
    target: usize,
    limits: &MinMaxLimits,
) -> Result<RobustSolution> {
    graph.check_node(source)?;
    if source == target {
        return Err(Error::InvalidParameter("source and target must differ"));
    }
    let (to_target, next) = distances_to(graph, member, target)?;
    if !to_target[source].is_finite() {
        return Err(Error::NoPath { from: source, to: target });
    }
    let mut arcs = Vec::new();
    let mut v = source;
    while v != target {
        arcs.push(next[v]);
        v = graph.arc(next[v]).head;
    }
    let start = Path::from_arcs(graph, arcs)?;
    let value = oracle(&start)?;

    let mut search = Search {
        graph,
        member: member.as_slice(),
        to_target: &to_target,
        monotone,
        target,
        limits,
        best: (start, value),
        nodes: 0,
        prefix: Vec::new(),
        on_path: vec![false; graph.node_count()],
    };
    search.on_path[source] = true;
    search.expand(source, 0.0, &mut oracle)?;
    let nodes = search.nodes;
    let (path, value) = search.best;
    let mut sol = RobustSolution::new(path, value, 1);
    sol.nodes_explored = nodes;
    Ok(sol)
}

struct Search<'a> {
    graph: &'a Graph,
    member: &'a [f64],
    to_target: &'a [f64],
    monotone: bool,
    target: usize,
    limits: &'a MinMaxLimits,
    best: (Path, f64),
    nodes: usize,
    prefix: Vec<usize>,
    on_path: Vec<bool>,
}

impl Search<'_> {
    fn expand(
        &mut self,
        node: usize,
        prefix_cost: f64,
        oracle: &mut impl FnMut(&Path) -> Result<f64>,
    ) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(Error::NodeBudgetExceeded(self.limits.max_nodes));
        }
        let mut children: Vec<(f64, usize)> = Vec::new();
        for &a in self.graph.outgoing(node) {
            let head = self.graph.arc(a).head;
            if self.on_path[head] || !self.to_target[head].is_finite() {
                continue;
            }
            let bound = prefix_cost + self.member[a] + self.to_target[head];
            if bound >= self.best.1 {
                continue;
            }
            if head == self.target {
                let path = self.extended(a)?;
                let value = oracle(&path)?;
                if value < self.best.1 {
                    self.best = (path, value);
                }
                continue;
            }
            let bound = if self.monotone {
                bound.max(oracle(&self.extended(a)?)?)
            } else {
                bound
            };
            if bound < self.best.1 {
                children.push((bound, a));
            }
        }
        children.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for (bound, a) in children {
            if bound >= self.best.1 {
                continue;
            }
            let head = self.graph.arc(a).head;
            self.prefix.push(a);
            self.on_path[head] = true;
            let result = self.expand(head, prefix_cost + self.member[a], oracle);
            self.on_path[head] = false;
            self.prefix.pop();
            result?;
        }
        Ok(())
    }

    fn extended(&self, arc: usize) -> Result<Path> {
        let mut arcs = self.prefix.clone();
        arcs.push(arc);
        Path::from_arcs(self.graph, arcs)
    }
}

/// Reference solver: evaluates `oracle` on every simple path and keeps the
/// first minimizer in enumeration order.
pub fn solve_bruteforce(
    graph: &Graph,
    mut oracle: impl FnMut(&Path) -> Result<f64>,
    source: usize,
    target: usize,
    path_limit: usize,
) -> Result<RobustSolution> {
    let paths = enumerate_simple_paths(graph, source, target, path_limit)?;
    let count = paths.len();
    let mut best: Option<(Path, f64)> = None;
    for path in paths {
        let value = oracle(&path)?;
        if best.as_ref().is_none_or(|(_, v)| value < *v) {
            best = Some((path, value));
        }
    }
    let (path, value) = best.ok_or(Error::NoPath { from: source, to: target })?;
    let mut sol = RobustSolution::new(path, value, 0);
    sol.nodes_explored = count;
    Ok(sol)
}
