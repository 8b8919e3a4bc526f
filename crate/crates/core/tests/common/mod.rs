#![allow(dead_code)]

use robust_paths_core::graph::{Graph, Path};
use robust_paths_core::scenario::ScenarioMatrix;

/// Every permutation of `0..n`, generated by recursive swapping.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            go(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    let mut out = Vec::new();
    go(0, &mut (0..n).collect(), &mut out);
    out
}

/// Path cost computed arc by arc from the raw matrix row.
pub fn row_cost(m: &ScenarioMatrix, i: usize, path: &Path) -> f64 {
    path.arcs().iter().map(|&a| m.row(i)[a]).sum()
}

/// Random DAG on nodes `0..n`, arcs only from lower to higher ids.
pub fn random_dag(n: usize, picks: &[(usize, usize)]) -> Graph {
    let arcs: Vec<(usize, usize)> = picks
        .iter()
        .filter_map(|&(a, b)| {
            let (a, b) = (a % n, b % n);
            (a < b).then_some((a, b))
        })
        .collect();
    Graph::new(n, arcs).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
