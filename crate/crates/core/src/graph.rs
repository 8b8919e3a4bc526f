//! Directed network model and the shortest-path primitives the solvers are
//! built on.
//!
//! Labels are compared exactly. When two relaxations give the same label the
//! arc with the lower id wins, so results are reproducible across runs.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
}

/// Directed graph with dense arc ids `0..arc_count()`.
///
/// Parallel arcs are allowed, self-loops are not.
#[derive(Debug, Clone)]
pub struct Graph {
    node_count: usize,
    arcs: Vec<Arc>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from `(tail, head)` pairs; the position in `arcs` is the arc id.
    pub fn new(node_count: usize, arcs: Vec<(usize, usize)>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node"));
        }
        let mut outgoing = vec![Vec::new(); node_count];
        let mut incoming = vec![Vec::new(); node_count];
        let mut stored = Vec::with_capacity(arcs.len());
        for (id, (tail, head)) in arcs.into_iter().enumerate() {
            if tail >= node_count {
                return Err(Error::InvalidNode(tail));
            }
            if head >= node_count {
                return Err(Error::InvalidNode(head));
            }
            if tail == head {
                return Err(Error::InvalidGraph("self-loops are not allowed"));
            }
            outgoing[tail].push(id);
            incoming[head].push(id);
            stored.push(Arc { tail, head });
        }
        Ok(Self {
            node_count,
            arcs: stored,
            outgoing,
            incoming,
        })
    }

    /// Builds a graph from arcs that carry explicit ids, which must be a
    /// permutation of `0..arcs.len()`.
    pub fn from_indexed_arcs(node_count: usize, arcs: &[(usize, usize, usize)]) -> Result<Self> {
        let mut slots: Vec<Option<(usize, usize)>> = vec![None; arcs.len()];
        for &(id, tail, head) in arcs {
            match slots.get_mut(id) {
                Some(slot @ None) => *slot = Some((tail, head)),
                Some(Some(_)) => return Err(Error::InvalidGraph("duplicate arc id")),
                None => return Err(Error::InvalidGraph("arc ids are not dense")),
            }
        }
        let ordered = slots.into_iter().map(|s| s.expect("dense ids")).collect();
        Self::new(node_count, ordered)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc(&self, id: usize) -> Arc {
        self.arcs[id]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Outgoing arc ids of `node`, in increasing id order.
    pub fn outgoing(&self, node: usize) -> &[usize] {
        &self.outgoing[node]
    }

    pub fn incoming(&self, node: usize) -> &[usize] {
        &self.incoming[node]
    }

    pub(crate) fn check_node(&self, node: usize) -> Result<()> {
        if node < self.node_count {
            Ok(())
        } else {
            Err(Error::InvalidNode(node))
        }
    }

    /// Nodes reachable from `source` (including itself).
    pub fn reachable_from(&self, source: usize) -> Result<Vec<bool>> {
        self.check_node(source)?;
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![source];
        seen[source] = true;
        while let Some(u) = stack.pop() {
            for &a in &self.outgoing[u] {
                let v = self.arcs[a].head;
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        Ok(seen)
    }
}

/// Per-arc nonnegative finite costs (minutes of travel time).
#[derive(Debug, Clone, PartialEq)]
pub struct CostVector(Vec<f64>);

impl CostVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidCost { index });
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn check_len(&self, graph: &Graph) -> Result<()> {
        check_dimension(graph.arc_count(), self.len())
    }
}

impl core::ops::Index<usize> for CostVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

pub(crate) fn check_dimension(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// A simple directed path given by its arc sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    arcs: Vec<usize>,
    nodes: Vec<usize>,
}

impl Path {
    /// Validates incidence and simplicity of `arcs` in `graph`.
    pub fn from_arcs(graph: &Graph, arcs: Vec<usize>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::InvalidGraph("a path needs at least one arc"));
        }
        let mut nodes = Vec::with_capacity(arcs.len() + 1);
        let mut on_path = vec![false; graph.node_count()];
        for (k, &a) in arcs.iter().enumerate() {
            if a >= graph.arc_count() {
                return Err(Error::InvalidGraph("arc id out of range"));
            }
            let arc = graph.arc(a);
            if k == 0 {
                nodes.push(arc.tail);
                on_path[arc.tail] = true;
            } else if nodes[k] != arc.tail {
                return Err(Error::InvalidGraph("consecutive arcs are not incident"));
            }
            if on_path[arc.head] {
                return Err(Error::InvalidGraph("path repeats a node"));
            }
            on_path[arc.head] = true;
            nodes.push(arc.head);
        }
        Ok(Self { arcs, nodes })
    }

    pub fn arcs(&self) -> &[usize] {
        &self.arcs
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn source(&self) -> usize {
        self.nodes[0]
    }

    pub fn target(&self) -> usize {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// `cᵀx` for the path's incidence vector `x`, summed in arc order.
    pub fn cost(&self, costs: &[f64]) -> f64 {
        self.arcs.iter().map(|&a| costs[a]).sum()
    }

    /// 0/1 incidence vector over all arcs.
    pub fn incidence(&self, arc_count: usize) -> Vec<u8> {
        let mut x = vec![0u8; arc_count];
        for &a in &self.arcs {
            x[a] = 1;
        }
        x
    }
}

/// A shortest-path label. Comparison must be a total order on the values that
/// occur (finite costs only).
pub(crate) trait Label: Copy {
    const ZERO: Self;
    fn add(self, other: Self) -> Self;
    fn compare(&self, other: &Self) -> Ordering;
}

impl Label for f64 {
    const ZERO: Self = 0.0;

    fn add(self, other: Self) -> Self {
        self + other
    }

    fn compare(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
}

/// Pair label ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Lex(pub f64, pub f64);

impl Label for Lex {
    const ZERO: Self = Lex(0.0, 0.0);

    fn add(self, other: Self) -> Self {
        Lex(self.0 + other.0, self.1 + other.1)
    }

    fn compare(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.total_cmp(&other.1))
    }
}

struct HeapEntry<L> {
    label: L,
    node: usize,
}

impl<L: Label> PartialEq for HeapEntry<L> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<L: Label> Eq for HeapEntry<L> {}

impl<L: Label> PartialOrd for HeapEntry<L> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<L: Label> Ord for HeapEntry<L> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .label
            .compare(&self.label)
            .then(other.node.cmp(&self.node))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Backward,
}

/// Label-setting search from `root`. Returns per-node labels and the tree arc
/// that produced them. Stops early once `stop_at` is settled.
pub(crate) fn label_setting<L: Label>(
    graph: &Graph,
    root: usize,
    stop_at: Option<usize>,
    direction: Direction,
    arc_label: impl Fn(usize) -> L,
) -> (Vec<Option<L>>, Vec<usize>) {
    let n = graph.node_count();
    let mut label: Vec<Option<L>> = vec![None; n];
    let mut tree_arc = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    label[root] = Some(L::ZERO);
    heap.push(HeapEntry {
        label: L::ZERO,
        node: root,
    });
    while let Some(HeapEntry { label: du, node: u }) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if stop_at == Some(u) {
            break;
        }
        let arcs = match direction {
            Direction::Forward => graph.outgoing(u),
            Direction::Backward => graph.incoming(u),
        };
        for &a in arcs {
            let arc = graph.arc(a);
            let v = match direction {
                Direction::Forward => arc.head,
                Direction::Backward => arc.tail,
            };
            if settled[v] {
                continue;
            }
            let candidate = du.add(arc_label(a));
            let better = match &label[v] {
                None => true,
                Some(dv) => match candidate.compare(dv) {
                    Ordering::Less => true,
                    Ordering::Equal => a < tree_arc[v],
                    Ordering::Greater => false,
                },
            };
            if better {
                let improved = label[v].is_none_or(|dv| candidate.compare(&dv) == Ordering::Less);
                label[v] = Some(candidate);
                tree_arc[v] = a;
                if improved {
                    heap.push(HeapEntry {
                        label: candidate,
                        node: v,
                    });
                }
            }
        }
    }
    (label, tree_arc)
}

fn trace_back(graph: &Graph, tree_arc: &[usize], source: usize, target: usize) -> Vec<usize> {
    let mut arcs = Vec::new();
    let mut v = target;
    while v != source {
        let a = tree_arc[v];
        arcs.push(a);
        v = graph.arc(a).tail;
    }
    arcs.reverse();
    arcs
}

fn search<L: Label>(
    graph: &Graph,
    source: usize,
    target: usize,
    arc_label: impl Fn(usize) -> L,
) -> Result<(Path, L)> {
    graph.check_node(source)?;
    graph.check_node(target)?;
    if source == target {
        return Err(Error::InvalidParameter("source and target must differ"));
    }
    let (label, tree_arc) =
        label_setting(graph, source, Some(target), Direction::Forward, arc_label);
    let total = label[target].ok_or(Error::NoPath { from: source, to: target })?;
    let arcs = trace_back(graph, &tree_arc, source, target);
    Ok((Path::from_arcs(graph, arcs)?, total))
}

/// Minimum-cost simple `source`–`target` path and its cost.
pub fn shortest_path(
    graph: &Graph,
    costs: &CostVector,
    source: usize,
    target: usize,
) -> Result<(Path, f64)> {
    costs.check_len(graph)?;
    let c = costs.as_slice();
    search(graph, source, target, |a| c[a])
}

/// Path minimizing `(primary·x, secondary·x)` in lexicographic order.
pub fn lexicographic_shortest_path(
    graph: &Graph,
    primary: &CostVector,
    secondary: &CostVector,
    source: usize,
    target: usize,
) -> Result<(Path, (f64, f64))> {
    primary.check_len(graph)?;
    secondary.check_len(graph)?;
    let (p, s) = (primary.as_slice(), secondary.as_slice());
    let (path, Lex(c1, c2)) = search(graph, source, target, |a| Lex(p[a], s[a]))?;
    Ok((path, (c1, c2)))
}

/// Shortest distance from every node to `target` together with the first arc
/// of a shortest continuation (`usize::MAX` when none exists).
pub fn distances_to(graph: &Graph, costs: &CostVector, target: usize) -> Result<(Vec<f64>, Vec<usize>)> {
    costs.check_len(graph)?;
    graph.check_node(target)?;
    let c = costs.as_slice();
    let (label, next_arc) = label_setting(graph, target, None, Direction::Backward, |a| c[a]);
    let dist = label.into_iter().map(|l| l.unwrap_or(f64::INFINITY)).collect();
    Ok((dist, next_arc))
}

/// All simple `source`–`target` paths in depth-first order (outgoing arcs in
/// id order). Fails once more than `limit` paths are found.
pub fn enumerate_simple_paths(
    graph: &Graph,
    source: usize,
    target: usize,
    limit: usize,
) -> Result<Vec<Path>> {
    graph.check_node(source)?;
    graph.check_node(target)?;
    if limit == 0 {
        return Err(Error::InvalidParameter("path limit must be positive"));
    }
    if source == target {
        return Err(Error::InvalidParameter("source and target must differ"));
    }
    let mut found = Vec::new();
    let mut on_path = vec![false; graph.node_count()];
    let mut prefix: Vec<usize> = Vec::new();
    // (node, index into its outgoing list)
    let mut stack = vec![(source, 0usize)];
    on_path[source] = true;
    while let Some(top) = stack.last_mut() {
        let (u, next) = *top;
        let out = graph.outgoing(u);
        if next == out.len() {
            stack.pop();
            on_path[u] = false;
            prefix.pop();
            continue;
        }
        top.1 += 1;
        let a = out[next];
        let v = graph.arc(a).head;
        if on_path[v] {
            continue;
        }
        if v == target {
            if found.len() == limit {
                return Err(Error::LimitExceeded(limit));
            }
            let mut arcs = prefix.clone();
            arcs.push(a);
            found.push(Path {
                nodes: path_nodes(graph, &arcs),
                arcs,
            });
            continue;
        }
        on_path[v] = true;
        prefix.push(a);
        stack.push((v, 0));
    }
    Ok(found)
}

fn path_nodes(graph: &Graph, arcs: &[usize]) -> Vec<usize> {
    let mut nodes = Vec::with_capacity(arcs.len() + 1);
    nodes.push(graph.arc(arcs[0]).tail);
    nodes.extend(arcs.iter().map(|&a| graph.arc(a).head));
    nodes
}
