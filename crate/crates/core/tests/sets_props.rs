mod common;

use common::{permutations, rel_close, row_cost};
use proptest::prelude::*;
use robust_paths_core::graph::{enumerate_simple_paths, Graph, Path};
use robust_paths_core::grid::{grid_graph, Orientation};
use robust_paths_core::scenario::{compute_stats, in_sample_size, split_sample, ScenarioMatrix};
use robust_paths_core::sets::{
    q_column, q_tilde_column, q_tilde_columns, worst_case_budgeted, worst_case_convex_hull,
    worst_case_ellipsoid, worst_case_interval, worst_case_permutohull,
};
use robust_paths_core::{UncertaintyModel, UncertaintySpec};

fn chain(len: usize) -> (Graph, Path) {
    let g = Graph::new(len + 1, (0..len).map(|v| (v, v + 1)).collect()).unwrap();
    let p = Path::from_arcs(&g, (0..len).collect()).unwrap();
    (g, p)
}

fn matrix(arcs: usize, max_rows: usize) -> impl Strategy<Value = ScenarioMatrix> {
    (1..=max_rows).prop_flat_map(move |rows| {
        prop::collection::vec(prop::collection::vec(1u32..100, arcs), rows).prop_map(|rows| {
            let rows: Vec<Vec<f64>> =
                rows.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect();
            ScenarioMatrix::from_rows(&rows, None).unwrap()
        })
    })
}

/// `max_σ Σ_i q_i c^{σ(i)}·x` over every permutation. Costs sharing a weight
/// are added before multiplying, so with integer data every permutation
/// reaching the maximum yields the same float.
fn permutohull_by_permutations(m: &ScenarioMatrix, q: &[f64], path: &Path) -> f64 {
    let costs: Vec<f64> = (0..m.scenario_count()).map(|i| row_cost(m, i, path)).collect();
    let mut levels: Vec<f64> = q.to_vec();
    levels.dedup();
    permutations(costs.len())
        .iter()
        .map(|perm| {
            levels
                .iter()
                .map(|&w| {
                    let group: f64 = perm
                        .iter()
                        .zip(q)
                        .filter(|(_, &qi)| qi == w)
                        .map(|(&i, _)| costs[i])
                        .sum();
                    w * group
                })
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Vertices of `{δ ∈ [0,1]^n : Σδ ≤ Γ}`: `⌊Γ⌋` ones plus one entry `Γ − ⌊Γ⌋`
/// (or fewer ones); the LP maximum is attained at one of them.
fn budgeted_by_vertices(mean: &[f64], dev: &[f64], gamma: f64) -> f64 {
    let n = mean.len();
    let whole = gamma.floor() as usize;
    let frac = gamma - gamma.floor();
    let base: f64 = mean.iter().sum();
    let mut best = base;
    for mask in 0u32..(1 << n) {
        let ones = mask.count_ones() as usize;
        if ones > whole {
            continue;
        }
        let full: f64 = (0..n).filter(|e| mask >> e & 1 == 1).map(|e| dev[e]).sum();
        best = best.max(base + full);
        if ones == whole {
            for e in (0..n).filter(|e| mask >> e & 1 == 0) {
                best = best.max(base + full + frac * dev[e]);
            }
        }
    }
    best
}

proptest! {
    #[test]
    fn permutohull_equals_permutation_maximum(m in matrix(4, 6), col in 1usize..7, len in 1usize..5) {
        let n = m.scenario_count();
        let (_, full) = chain(4);
        let path = Path::from_arcs(&chain(4).0, full.arcs()[..len].to_vec()).unwrap();
        let j = (col - 1) % n + 1;
        let q = q_column(n, j).unwrap();
        prop_assert_eq!(
            worst_case_permutohull(&m, &q, &path).unwrap(),
            permutohull_by_permutations(&m, q.as_slice(), &path)
        );
        let jt = (col - 1) % q_tilde_columns(n) + 1;
        let qt = q_tilde_column(n, jt).unwrap();
        prop_assert_eq!(
            worst_case_permutohull(&m, &qt, &path).unwrap(),
            permutohull_by_permutations(&m, qt.as_slice(), &path)
        );
    }

    #[test]
    fn budgeted_equals_vertex_enumeration(m in matrix(6, 8), gamma in 0.0f64..7.0) {
        let (_, path) = chain(6);
        let s = compute_stats(&m, false).unwrap();
        let dev: Vec<f64> = (0..6).map(|e| s.upper[e] - s.mean[e]).collect();
        let got = worst_case_budgeted(&s, gamma, &path).unwrap();
        let want = budgeted_by_vertices(s.mean.as_slice(), &dev, gamma);
        prop_assert!(rel_close(got, want, 1e-12), "{} vs {}", got, want);
    }

    #[test]
    fn oracles_grow_with_their_parameter(m in matrix(5, 10), a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (_, path) = chain(5);
        let s = compute_stats(&m, true).unwrap();
        let model = UncertaintyModel::new(&m, &s).unwrap();
        for kind in ["convex-hull", "interval", "ellipsoid", "ellipsoid-full", "budgeted"] {
            let x = model.worst_case(&UncertaintySpec::from_kind(kind, lo).unwrap(), &path).unwrap();
            let y = model.worst_case(&UncertaintySpec::from_kind(kind, hi).unwrap(), &path).unwrap();
            prop_assert!(x <= y, "{}: {} > {}", kind, x, y);
        }
    }

    #[test]
    fn zero_scaling_is_the_mean_cost(m in matrix(5, 10)) {
        let (_, path) = chain(5);
        let s = compute_stats(&m, true).unwrap();
        let nominal = path.cost(s.mean.as_slice());
        prop_assert_eq!(worst_case_interval(&s, 0.0, &path).unwrap(), nominal);
        prop_assert_eq!(worst_case_convex_hull(&m, &s.mean, 0.0, &path).unwrap(), nominal);
        prop_assert_eq!(worst_case_ellipsoid(&s, 0.0, &path, true).unwrap(), nominal);
        prop_assert_eq!(worst_case_ellipsoid(&s, 0.0, &path, false).unwrap(), nominal);
        prop_assert_eq!(worst_case_budgeted(&s, 0.0, &path).unwrap(), nominal);
    }

    #[test]
    fn hull_lies_inside_the_box(m in matrix(5, 10), lambda in 0.0f64..3.0) {
        let (_, path) = chain(5);
        let s = compute_stats(&m, false).unwrap();
        let hull = worst_case_convex_hull(&m, &s.mean, lambda, &path).unwrap();
        let bx = worst_case_interval(&s, lambda, &path).unwrap();
        prop_assert!(hull <= bx + 1e-9 * bx);
        // the hull at λ = 1 contains every observation and is the largest path cost
        let top = (0..m.scenario_count()).map(|i| row_cost(&m, i, &path)).fold(0.0, f64::max);
        prop_assert!(rel_close(worst_case_convex_hull(&m, &s.mean, 1.0, &path).unwrap(), top, 1e-12));
    }

    #[test]
    fn permutohull_first_column_is_worst_and_last_is_mean(m in matrix(4, 8)) {
        let (_, path) = chain(4);
        let n = m.scenario_count();
        let costs: Vec<f64> = (0..n).map(|i| row_cost(&m, i, &path)).collect();
        let top = costs.iter().cloned().fold(0.0, f64::max);
        let avg = costs.iter().sum::<f64>() / n as f64;
        prop_assert_eq!(worst_case_permutohull(&m, &q_column(n, 1).unwrap(), &path).unwrap(), top);
        let last = worst_case_permutohull(&m, &q_column(n, n).unwrap(), &path).unwrap();
        prop_assert!(rel_close(last, avg, 1e-12));
        let sym = worst_case_permutohull(&m, &q_tilde_column(n, 1).unwrap(), &path).unwrap();
        prop_assert!(rel_close(sym, avg, 1e-12));
    }

    #[test]
    fn stats_are_consistent(m in matrix(4, 12)) {
        let s = compute_stats(&m, true).unwrap();
        let cov = s.covariance.as_ref().unwrap();
        let n = m.scenario_count() as f64;
        for e in 0..4 {
            prop_assert!(s.lower[e] <= s.mean[e] && s.mean[e] <= s.upper[e]);
            prop_assert!(s.variance[e] >= 0.0);
            prop_assert_eq!(cov.get(e, e), s.variance[e]);
            let mean = m.rows().map(|r| r[e]).sum::<f64>() / n;
            prop_assert!(rel_close(s.mean[e], mean, 1e-12));
            for f in 0..4 {
                prop_assert_eq!(cov.get(e, f), cov.get(f, e));
            }
        }
        // positive semidefinite: vᵀΣv equals the sample variance of v·c
        for v in [[1.0, -1.0, 0.5, 2.0], [0.3, 0.0, -2.0, 1.0]] {
            let proj: Vec<f64> = m.rows().map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
            let pm = proj.iter().sum::<f64>() / n;
            let pv = proj.iter().map(|p| (p - pm) * (p - pm)).sum::<f64>() / n;
            let q = cov.quadratic_form(&v);
            prop_assert!(q >= -1e-9);
            prop_assert!((q - pv).abs() <= 1e-8 * pv.max(1.0));
        }
    }

    #[test]
    fn split_is_a_partition(rows in 1usize..60, fraction in 0.05f64..1.0, seed in any::<u64>()) {
        let data: Vec<Vec<f64>> = (0..rows).map(|i| vec![i as f64 + 1.0]).collect();
        let m = ScenarioMatrix::from_rows(&data, None).unwrap();
        let (a, b) = split_sample(&m, fraction, seed).unwrap();
        prop_assert_eq!(a.scenario_count(), in_sample_size(rows, fraction));
        prop_assert_eq!(a.scenario_count(), (fraction * rows as f64 + 1e-9).floor() as usize);
        let mut ids: Vec<f64> = a.rows().chain(b.rows()).map(|r| r[0]).collect();
        ids.sort_by(f64::total_cmp);
        prop_assert_eq!(ids, (1..=rows).map(|i| i as f64).collect::<Vec<_>>());
        let (a2, _) = split_sample(&m, fraction, seed).unwrap();
        prop_assert_eq!(a, a2);
    }
}

#[test]
fn permutohull_on_every_size_up_to_six() {
    // exhaustive check over all columns for N = 1..=6 on a grid path
    let g = grid_graph(3, Orientation::RightDown).unwrap();
    let path = enumerate_simple_paths(&g, 0, 8, 100).unwrap().remove(3);
    for n in 1..=6 {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..g.arc_count()).map(|e| ((i * 7 + e * 13) % 23 + 1) as f64).collect())
            .collect();
        let m = ScenarioMatrix::from_rows(&rows, None).unwrap();
        for j in 1..=n {
            let q = q_column(n, j).unwrap();
            assert_eq!(
                worst_case_permutohull(&m, &q, &path).unwrap(),
                permutohull_by_permutations(&m, q.as_slice(), &path)
            );
        }
    }
}

#[test]
fn split_of_271_keeps_203() {
    let data: Vec<Vec<f64>> = (0..271).map(|i| vec![i as f64 + 1.0]).collect();
    let m = ScenarioMatrix::from_rows(&data, None).unwrap();
    let (a, b) = split_sample(&m, 0.75, 1).unwrap();
    assert_eq!((a.scenario_count(), b.scenario_count()), (203, 68));
}
