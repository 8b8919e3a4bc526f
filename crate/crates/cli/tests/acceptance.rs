//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero if any fails.

use std::path::Path as FsPath;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robust_paths::bench::{run_grid_benchmark, BenchAlgorithm, BenchConfig};
use robust_paths::experiment::{run_experiment, write_records_csv, ExperimentConfig, CSV_HEADER};
use robust_paths::io::{write_network, write_scenarios};
use robust_paths_core::evaluation::{default_method_grid, evaluate_path, Method};
use robust_paths_core::graph::{enumerate_simple_paths, Path};
use robust_paths_core::grid::{
    correlated_grid_dataset, generate_grid_instance, grid_graph, CorrelatedNoise, Orientation,
};
use robust_paths_core::scenario::{compute_stats, split_sample, ScenarioMatrix};
use robust_paths_core::sets::{q_column, q_tilde_column, q_tilde_columns, worst_case_ellipsoid, worst_case_permutohull};
use robust_paths_core::solvers::{
    solve_average, solve_budgeted, solve_ellipsoid_bb, solve_ellipsoid_naive, solve_scenario_minmax,
    BbOptions, MinMaxLimits,
};
use robust_paths_core::{UncertaintyModel, UncertaintySpec};

type Outcome = Result<String, String>;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Minimum of `f` over every simple corner-to-corner path.
fn brute_min(paths: &[Path], f: impl Fn(&Path) -> f64) -> f64 {
    paths.iter().map(f).fold(f64::INFINITY, f64::min)
}

fn ellipsoid_exactness() -> Outcome {
    let mut worst_gap: f64 = 0.0;
    for seed in 0..200u64 {
        let inst = generate_grid_instance(4, 50, seed, Orientation::RightDown).unwrap();
        let s = compute_stats(&inst.scenarios, false).unwrap();
        let paths = enumerate_simple_paths(&inst.graph, inst.source, inst.target, 100).unwrap();
        if paths.len() != 20 {
            return Err(format!("instance {seed} has {} paths", paths.len()));
        }
        let want = brute_min(&paths, |p| {
            let m: f64 = p.arcs().iter().map(|&a| s.mean[a]).sum();
            let v: f64 = p.arcs().iter().map(|&a| s.variance[a]).sum();
            m + v.sqrt()
        });
        let bb = solve_ellipsoid_bb(&inst.graph, &s.mean, &s.variance, inst.source, inst.target, &BbOptions::default())
            .map_err(|e| e.to_string())?;
        let naive = solve_ellipsoid_naive(&inst.graph, &s.mean, &s.variance, inst.source, inst.target)
            .map_err(|e| e.to_string())?;
        for got in [bb.robust_value, naive.robust_value] {
            worst_gap = worst_gap.max((got - want).abs() / want);
            if !rel_close(got, want, 1e-9) {
                return Err(format!("instance {seed}: {got} vs brute force {want}"));
            }
        }
    }
    Ok(format!("200 instances, max relative gap {worst_gap:.1e}"))
}

fn grid_sp_calls() -> Outcome {
    let config = BenchConfig {
        sizes: vec![5, 20, 50],
        instances: 100,
        samples: 50,
        seed: 2024,
        algorithms: vec![BenchAlgorithm::Bb],
        ..BenchConfig::default()
    };
    let report = run_grid_benchmark(&config).map_err(|e| e.to_string())?;
    let mean = |k| report.row(k, BenchAlgorithm::Bb).unwrap().mean_sp_calls;
    let (m5, m20, m50) = (mean(5), mean(20), mean(50));
    check(
        (2.5..=5.5).contains(&m5) && (3.0..=6.5).contains(&m20) && m50 < 8.0,
        format!("mean sp_calls 5x5 {m5:.3} (reference 3.625), 20x20 {m20:.3} (reference 4.251), 50x50 {m50:.3} (reference 4.778)"),
    )
}

fn budgeted_exactness() -> Outcome {
    for seed in 0..200u64 {
        let inst = generate_grid_instance(4, 20, 10_000 + seed, Orientation::RightDown).unwrap();
        let s = compute_stats(&inst.scenarios, false).unwrap();
        let paths = enumerate_simple_paths(&inst.graph, inst.source, inst.target, 100).unwrap();
        for gamma in [0.0, 1.0, 2.5, 5.0] {
            let sol = solve_budgeted(&inst.graph, &s, gamma, inst.source, inst.target).map_err(|e| e.to_string())?;
            let want = brute_min(&paths, |p| {
                let mut dev: Vec<f64> = p.arcs().iter().map(|&a| s.upper[a] - s.mean[a]).collect();
                dev.sort_by(|a, b| b.total_cmp(a));
                let whole = gamma.floor() as usize;
                let nominal: f64 = p.arcs().iter().map(|&a| s.mean[a]).sum();
                nominal
                    + dev.iter().take(whole).sum::<f64>()
                    + dev.get(whole).map_or(0.0, |d| (gamma - gamma.floor()) * d)
            });
            if !rel_close(sol.robust_value, want, 1e-9) {
                return Err(format!("instance {seed}, gamma {gamma}: {} vs {want}", sol.robust_value));
            }
            if gamma == 0.0 {
                let avg = solve_average(&inst.graph, &s.mean, inst.source, inst.target).unwrap();
                if avg.robust_value != sol.robust_value || avg.path != sol.path {
                    return Err(format!("instance {seed}: gamma 0 differs from the average solution"));
                }
            }
        }
    }
    Ok("200 instances x 4 budgets".into())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn permutohull_oracle() -> Outcome {
    let g = grid_graph(3, Orientation::RightDown).unwrap();
    let paths = enumerate_simple_paths(&g, 0, 8, 100).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checks = 0;
    for draw in 0..100 {
        for n in 1..=6usize {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..g.arc_count()).map(|_| f64::from(rng.gen_range(1u32..=100))).collect())
                .collect();
            let m = ScenarioMatrix::from_rows(&rows, None).unwrap();
            let path = &paths[draw % paths.len()];
            let costs: Vec<f64> = (0..n).map(|i| path.arcs().iter().map(|&a| rows[i][a]).sum()).collect();
            let mut columns: Vec<Vec<f64>> = (1..=n).map(|j| q_column(n, j).unwrap().as_slice().to_vec()).collect();
            columns.extend((1..=q_tilde_columns(n)).map(|j| q_tilde_column(n, j).unwrap().as_slice().to_vec()));
            for q in columns {
                let w = robust_paths_core::sets::WeightColumn::new(q.clone()).unwrap();
                let got = worst_case_permutohull(&m, &w, path).unwrap();
                let mut levels = q.clone();
                levels.dedup();
                let want = permutations(n)
                    .iter()
                    .map(|perm| {
                        levels
                            .iter()
                            .map(|&lv| {
                                lv * perm.iter().zip(&q).filter(|(_, &qi)| qi == lv).map(|(&i, _)| costs[i]).sum::<f64>()
                            })
                            .sum::<f64>()
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                if got != want {
                    return Err(format!("draw {draw}, N={n}: {got} vs {want}"));
                }
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} column evaluations, exact"))
}

fn minmax_exactness() -> Outcome {
    for seed in 0..100u64 {
        let inst = generate_grid_instance(4, 5, 20_000 + seed, Orientation::RightDown).unwrap();
        let s = compute_stats(&inst.scenarios, false).unwrap();
        let paths = enumerate_simple_paths(&inst.graph, inst.source, inst.target, 100).unwrap();
        let want = brute_min(&paths, |p| {
            (0..5)
                .map(|i| p.arcs().iter().map(|&a| inst.scenarios.row(i)[a]).sum::<f64>())
                .fold(0.0, f64::max)
        });
        let model = UncertaintyModel::new(&inst.scenarios, &s).unwrap();
        let spec = UncertaintySpec::ConvexHull { lambda: 1.0 };
        let sol = solve_scenario_minmax(
            &inst.graph,
            &s.mean,
            true,
            |p| model.worst_case(&spec, p),
            inst.source,
            inst.target,
            &MinMaxLimits::default(),
        )
        .map_err(|e| e.to_string())?;
        if !rel_close(sol.robust_value, want, 1e-9) {
            return Err(format!("instance {seed}: {} vs {want}", sol.robust_value));
        }
    }
    Ok("100 instances".into())
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut evaluations = 0;
    for i in 0..50u64 {
        let inst = generate_grid_instance(4, 24, 30_000 + i, Orientation::RightDown).unwrap();
        let s = compute_stats(&inst.scenarios, true).unwrap();
        let model = UncertaintyModel::new(&inst.scenarios, &s).unwrap();
        let paths = enumerate_simple_paths(&inst.graph, inst.source, inst.target, 100).unwrap();
        let path = &paths[rng.gen_range(0..paths.len())];
        let nominal = path.cost(s.mean.as_slice());
        for kind in ["convex-hull", "interval", "ellipsoid", "ellipsoid-full", "budgeted"] {
            let mut last = f64::NEG_INFINITY;
            for step in 0..20 {
                let param = step as f64 * 0.5;
                let v = model.worst_case(&UncertaintySpec::from_kind(kind, param).unwrap(), path).unwrap();
                if step == 0 && v != nominal {
                    return Err(format!("{kind} at zero: {v} vs {nominal}"));
                }
                if v < last {
                    return Err(format!("{kind} decreases at {param}: {v} < {last}"));
                }
                last = v;
                evaluations += 1;
            }
        }
        // permutohull: the mean is the last column of Q_N and the first of Q̃;
        // moving toward column 1 of Q_N grows the value
        for (kind, cols) in [("permutohull", (1..=20).rev().collect::<Vec<_>>()), ("sym-permutohull", (1..=13).collect())] {
            let mut last = f64::NEG_INFINITY;
            for c in cols {
                let v = model.worst_case(&UncertaintySpec::from_kind(kind, c as f64).unwrap(), path).unwrap();
                if v < last - 1e-12 * v.abs() {
                    return Err(format!("{kind} column {c} decreases"));
                }
                last = v;
                evaluations += 1;
            }
        }
        let n = inst.scenarios.scenario_count();
        let ph_mean = worst_case_permutohull(&inst.scenarios, &q_column(n, n).unwrap(), path).unwrap();
        let sph_mean = worst_case_permutohull(&inst.scenarios, &q_tilde_column(n, 1).unwrap(), path).unwrap();
        if !rel_close(ph_mean, nominal, 1e-12) || !rel_close(sph_mean, nominal, 1e-12) {
            return Err(format!("permutohull mean columns {ph_mean}/{sph_mean} vs {nominal}"));
        }
    }
    Ok(format!("50 paths, {evaluations} evaluations"))
}

fn protocol() -> Outcome {
    let rows: Vec<Vec<f64>> = (0..271).map(|i| vec![f64::from(i) + 1.0]).collect();
    let m = ScenarioMatrix::from_rows(&rows, None).unwrap();
    let (a, _) = split_sample(&m, 0.75, 7).unwrap();
    let grid = default_method_grid().len();
    let g = grid_graph(2, Orientation::RightDown).unwrap();
    let path = enumerate_simple_paths(&g, 0, 3, 10).unwrap().remove(0);
    let scen: Vec<Vec<f64>> = (0..20).map(|i| vec![f64::from((i * 7) % 20 + 1); 4]).collect();
    let metrics = evaluate_path(&path, &ScenarioMatrix::from_rows(&scen, None).unwrap(), 0.05).unwrap();
    check(
        a.scenario_count() == 203 && grid == 121 && metrics.cvar == metrics.worst,
        format!(
            "split 271 -> {}, default grid {} combinations, N=20 cvar {} / worst {}",
            a.scenario_count(),
            grid,
            metrics.cvar,
            metrics.worst
        ),
    )
}

fn synthetic_pipeline(dir: &FsPath) -> Outcome {
    let (graph, scenarios) =
        correlated_grid_dataset(10, 96, 8, Orientation::RightDown, &CorrelatedNoise::default()).unwrap();
    write_network(&dir.join("graph.json"), &graph, None).map_err(|e| e.to_string())?;
    write_scenarios(&dir.join("scenarios.csv"), &scenarios).map_err(|e| e.to_string())?;
    std::fs::write(
        dir.join("config.json"),
        r#"{"graph": "graph.json", "scenarios": "scenarios.csv", "unit": "minutes", "seed": 8,
            "pairs": 20, "split_fraction": 0.75, "cvar_beta": 0.05}"#,
    )
    .unwrap();
    let config = ExperimentConfig::from_file(&dir.join("config.json")).map_err(|e| e.to_string())?;
    let report = run_experiment(&config).map_err(|e| format!("{e:#}"))?;

    // well-formed CSV: exact header, one in and one out row per method
    let mut buf = Vec::new();
    write_records_csv(&mut buf, &report.records).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    if header != CSV_HEADER || rows.len() != 2 * report.methods.len() || report.methods.len() != 121 {
        return Err(format!("CSV shape: header {header:?}, {} rows", rows.len()));
    }
    for r in &rows {
        for cell in [3, 4, 5, 6] {
            if r[cell].parse::<f64>().is_err() {
                return Err(format!("malformed row {r:?}"));
            }
        }
    }

    // in-sample min-max optimality of the hull at λ = 1
    let hull = report
        .methods
        .iter()
        .position(|m| *m == Method::Robust(UncertaintySpec::ConvexHull { lambda: 1.0 }))
        .unwrap();
    let mut completed = 0;
    for p in 0..report.pairs.len() {
        let Ok(h) = &report.outcome(hull, p).result else { continue };
        completed += 1;
        for m in 0..report.methods.len() {
            if let Ok(o) = &report.outcome(m, p).result {
                if h.in_sample.worst > o.in_sample.worst * (1.0 + 1e-9) {
                    return Err(format!("pair {p}: hull worst {} > {} of method {m}", h.in_sample.worst, o.in_sample.worst));
                }
            }
        }
    }

    // diagonal versus full covariance on the paths returned for the diagonal ellipsoid
    let full = compute_stats(&report.in_sample, true).unwrap();
    let mut gaps = Vec::new();
    for (m, method) in report.methods.iter().enumerate() {
        let Method::Robust(UncertaintySpec::Ellipsoid { lambda, diagonal_only: true }) = *method else {
            continue;
        };
        for p in 0..report.pairs.len() {
            if let Ok(o) = &report.outcome(m, p).result {
                let d = worst_case_ellipsoid(&full, lambda, &o.path, true).unwrap();
                let f = worst_case_ellipsoid(&full, lambda, &o.path, false).unwrap();
                gaps.push((f - d).abs() / d);
            }
        }
    }
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let failed = report.outcomes.iter().filter(|o| o.result.is_err()).count();
    check(
        completed > 0 && mean_gap < 0.05,
        format!(
            "{} records, hull optimal on {completed}/{} pairs, {failed} failed solves, diagonal vs full mean gap {:.3}%",
            rows.len(),
            report.pairs.len(),
            100.0 * mean_gap
        ),
    )
}

fn main() {
    let dir = std::env::temp_dir().join(format!("robust-paths-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 ellipsoid bb/naive vs brute force (4x4)", Box::new(ellipsoid_exactness)),
        ("2 grid shortest-path counts", Box::new(grid_sp_calls)),
        ("3 budgeted vs brute force", Box::new(budgeted_exactness)),
        ("4 permutohull vs N! permutations", Box::new(permutohull_oracle)),
        ("5 scenario min-max vs brute force", Box::new(minmax_exactness)),
        ("6 monotonicity and zero scaling", Box::new(monotonicity)),
        ("7 protocol fidelity", Box::new(protocol)),
        ("8 synthetic correlated pipeline", Box::new({
            let dir = dir.clone();
            move || synthetic_pipeline(&dir)
        })),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.2}s]");
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
