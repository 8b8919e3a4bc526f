//! Seeded random grid instances.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scenario::ScenarioMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Arcs point right and down only; the graph is acyclic.
    #[default]
    RightDown,
    /// Every grid edge in both directions.
    Bidirected,
}

impl core::str::FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right-down" => Ok(Self::RightDown),
            "bidirected" => Ok(Self::Bidirected),
            _ => Err(Error::InvalidParameter("orientation must be right-down or bidirected")),
        }
    }
}

/// `k × k` grid with nodes numbered row-major. For every node the right arc
/// comes before the down arc; bidirected grids append the reverse arc after
/// each forward one.
pub fn grid_graph(k: usize, orientation: Orientation) -> Result<Graph> {
    if k < 2 {
        return Err(Error::InvalidParameter("grid side must be at least 2"));
    }
    let mut arcs = Vec::new();
    for r in 0..k {
        for c in 0..k {
            let v = r * k + c;
            let mut add = |w: usize| {
                arcs.push((v, w));
                if orientation == Orientation::Bidirected {
                    arcs.push((w, v));
                }
            };
            if c + 1 < k {
                add(v + 1);
            }
            if r + 1 < k {
                add(v + k);
            }
        }
    }
    Graph::new(k * k, arcs)
}

/// Grid graph with `samples` integer scenarios per arc drawn uniformly from
/// `{1, …, 100}`, routed from the upper-left to the lower-right corner.
#[derive(Debug, Clone)]
pub struct GridInstance {
    pub side: usize,
    pub graph: Graph,
    pub scenarios: ScenarioMatrix,
    pub seed: u64,
    pub source: usize,
    pub target: usize,
}

pub fn generate_grid_instance(
    k: usize,
    samples: usize,
    seed: u64,
    orientation: Orientation,
) -> Result<GridInstance> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample"));
    }
    let graph = grid_graph(k, orientation)?;
    let n = graph.arc_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = alloc::vec![0.0; samples * n];
    // per arc, all of its samples
    for arc in 0..n {
        for i in 0..samples {
            values[i * n + arc] = f64::from(rng.gen_range(1u32..=100));
        }
    }
    let scenarios = ScenarioMatrix::new(n, values, None)?;
    Ok(GridInstance {
        side: k,
        graph,
        scenarios,
        seed,
        source: 0,
        target: k * k - 1,
    })
}

/// Parameters of [`correlated_grid_dataset`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatedNoise {
    /// Base travel times are uniform in `[min_base, max_base]` minutes.
    pub min_base: f64,
    pub max_base: f64,
    /// Amplitude of the congestion factor shared by all arcs of a scenario.
    pub shared: f64,
    /// Amplitude of the independent per-arc factor.
    pub independent: f64,
    /// Seconds between consecutive scenarios.
    pub interval_seconds: i64,
    /// Timestamp of the first scenario.
    pub start: i64,
}

impl Default for CorrelatedNoise {
    fn default() -> Self {
        Self {
            min_base: 1.0,
            max_base: 10.0,
            shared: 0.05,
            independent: 0.3,
            interval_seconds: 900,
            // 2017-03-28T00:00
            start: 17_253 * 86_400,
        }
    }
}

/// Grid graph plus timestamped scenarios
/// `cⁱ_e = b_e (1 + shared·gᵢ + independent·u_{ie})` with `gᵢ`, `u_{ie}`
/// uniform in `[−1, 1]`, so arcs are positively correlated through `gᵢ`.
pub fn correlated_grid_dataset(
    k: usize,
    scenarios: usize,
    seed: u64,
    orientation: Orientation,
    noise: &CorrelatedNoise,
) -> Result<(Graph, ScenarioMatrix)> {
    if !(noise.shared >= 0.0 && noise.independent >= 0.0 && noise.shared + noise.independent < 1.0) {
        return Err(Error::InvalidParameter("noise amplitudes must sum to less than one"));
    }
    if !(noise.min_base > 0.0 && noise.min_base <= noise.max_base) {
        return Err(Error::InvalidParameter("invalid base time range"));
    }
    let graph = grid_graph(k, orientation)?;
    let n = graph.arc_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(noise.min_base..=noise.max_base))
        .collect();
    let mut values = Vec::with_capacity(scenarios * n);
    for _ in 0..scenarios {
        let g: f64 = rng.gen_range(-1.0..=1.0);
        for b in &base {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            values.push(b * (1.0 + noise.shared * g + noise.independent * u));
        }
    }
    let timestamps = (0..scenarios as i64)
        .map(|i| noise.start + i * noise.interval_seconds)
        .collect();
    let matrix = ScenarioMatrix::new(n, values, Some(timestamps))?;
    Ok((graph, matrix))
}
