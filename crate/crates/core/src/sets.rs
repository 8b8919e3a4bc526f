//! The six data-driven uncertainty-set families and exact worst-case
//! evaluation `max_{c∈U} cᵀx` of a fixed path under each of them.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{check_dimension, CostVector, Path};
use crate::scenario::{ScenarioMatrix, ScenarioStats};

/// One uncertainty-set family together with its scaling parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UncertaintySpec {
    /// Scaled convex hull of the observations, `ĉ + λ(cⁱ − ĉ)`.
    ConvexHull { lambda: f64 },
    /// Box `[ĉ + λ(c̲ − ĉ), ĉ + λ(c̄ − ĉ)]`.
    Interval { lambda: f64 },
    /// `{c : (c − ĉ)ᵀΣ⁻¹(c − ĉ) ≤ λ}`; `diagonal_only` drops the off-diagonal covariances.
    Ellipsoid { lambda: f64, diagonal_only: bool },
    /// At most `gamma` (fractional) arcs at their upper bound.
    Budgeted { gamma: f64 },
    /// Permutohull generated by column `column` of `Q_N` (CVaR at level `column/N`).
    Permutohull { column: usize },
    /// Symmetric permutohull generated by column `column` of `Q̃`.
    SymPermutohull { column: usize },
}

impl UncertaintySpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::ConvexHull { .. } => "convex-hull",
            Self::Interval { .. } => "interval",
            Self::Ellipsoid { diagonal_only: true, .. } => "ellipsoid",
            Self::Ellipsoid { diagonal_only: false, .. } => "ellipsoid-full",
            Self::Budgeted { .. } => "budgeted",
            Self::Permutohull { .. } => "permutohull",
            Self::SymPermutohull { .. } => "sym-permutohull",
        }
    }

    /// Scaling parameter as a real number (column indices are converted).
    pub fn parameter(&self) -> f64 {
        match *self {
            Self::ConvexHull { lambda } | Self::Interval { lambda } | Self::Ellipsoid { lambda, .. } => {
                lambda
            }
            Self::Budgeted { gamma } => gamma,
            Self::Permutohull { column } | Self::SymPermutohull { column } => column as f64,
        }
    }

    /// Builds a spec from a kind name and a numeric parameter.
    pub fn from_kind(kind: &str, param: f64) -> Result<Self> {
        let real = |what: &'static str| {
            if param.is_finite() && param >= 0.0 {
                Ok(param)
            } else {
                Err(Error::InvalidParameter(what))
            }
        };
        let column = || {
            if param >= 1.0 && libm::trunc(param) == param && param <= usize::MAX as f64 {
                Ok(param as usize)
            } else {
                Err(Error::InvalidParameter("column index must be a positive integer"))
            }
        };
        Ok(match kind {
            "convex-hull" | "hull" | "ch" => Self::ConvexHull {
                lambda: real("lambda must be finite and >= 0")?,
            },
            "interval" | "i" => Self::Interval {
                lambda: real("lambda must be finite and >= 0")?,
            },
            "ellipsoid" | "e" => Self::Ellipsoid {
                lambda: real("lambda must be finite and >= 0")?,
                diagonal_only: true,
            },
            "ellipsoid-full" => Self::Ellipsoid {
                lambda: real("lambda must be finite and >= 0")?,
                diagonal_only: false,
            },
            "budgeted" | "b" => Self::Budgeted {
                gamma: real("gamma must be finite and >= 0")?,
            },
            "permutohull" | "ph" => Self::Permutohull { column: column()? },
            "sym-permutohull" | "sph" => Self::SymPermutohull { column: column()? },
            other => return Err(Error::ParseSpec(other.to_string())),
        })
    }
}

impl FromStr for UncertaintySpec {
    type Err = Error;

    /// Parses `kind:param`, e.g. `ellipsoid:3.0` or `permutohull:7`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, param) = s
            .split_once(':')
            .ok_or_else(|| Error::ParseSpec(s.to_string()))?;
        let param: f64 = param
            .trim()
            .parse()
            .map_err(|_| Error::ParseSpec(s.to_string()))?;
        Self::from_kind(kind.trim(), param)
    }
}

impl fmt::Display for UncertaintySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Permutohull { column } | Self::SymPermutohull { column } => {
                write!(f, "{}:{}", self.kind_name(), column)
            }
            _ => write!(f, "{}:{}", self.kind_name(), self.parameter()),
        }
    }
}

/// Nonincreasing nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightColumn(Vec<f64>);

impl WeightColumn {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("weight column is empty"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter("weights must be finite and nonnegative"));
        }
        if weights.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("weights must be nonincreasing"));
        }
        let total: f64 = weights.iter().sum();
        if libm::fabs(total - 1.0) > 1e-9 {
            return Err(Error::InvalidParameter("weights must sum to one"));
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Column `j` of `Q_N`: `1/j` in the first `j` entries, zero below.
pub fn q_column(n: usize, j: usize) -> Result<WeightColumn> {
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange { index: j, max: n });
    }
    let w = 1.0 / j as f64;
    let mut q = vec![0.0; n];
    q[..j].iter_mut().for_each(|x| *x = w);
    Ok(WeightColumn(q))
}

/// Largest valid column index of `Q̃` for `n` scenarios.
pub fn q_tilde_columns(n: usize) -> usize {
    n / 2 + 1
}

/// Column `j` of `Q̃`: `2/N` in the first `j−1` entries, `0` in the last
/// `j−1` entries and `1/N` in between.
pub fn q_tilde_column(n: usize, j: usize) -> Result<WeightColumn> {
    let max = q_tilde_columns(n);
    if n == 0 || j == 0 || j > max {
        return Err(Error::IndexOutOfRange { index: j, max });
    }
    let inv = 1.0 / n as f64;
    let edge = j - 1;
    let q = (0..n)
        .map(|row| {
            if row < edge {
                2.0 * inv
            } else if row >= n - edge {
                0.0
            } else {
                inv
            }
        })
        .collect();
    Ok(WeightColumn(q))
}

/// Interval set: `(ĉ + λ(c̄ − ĉ))·x`.
pub fn worst_case_interval(stats: &ScenarioStats, lambda: f64, path: &Path) -> Result<f64> {
    Ok(path.cost(interval_upper_costs(stats, lambda)?.as_slice()))
}

/// Upper endpoints `ĉ + λ(c̄ − ĉ)` of the interval set.
pub fn interval_upper_costs(stats: &ScenarioStats, lambda: f64) -> Result<CostVector> {
    check_scale(lambda)?;
    CostVector::new(
        stats
            .mean
            .as_slice()
            .iter()
            .zip(stats.upper.as_slice())
            .map(|(m, u)| m + lambda * (u - m))
            .collect(),
    )
}

/// Scaled convex hull: `max_i (ĉ + λ(cⁱ − ĉ))·x`.
pub fn worst_case_convex_hull(
    scenarios: &ScenarioMatrix,
    mean: &CostVector,
    lambda: f64,
    path: &Path,
) -> Result<f64> {
    check_scale(lambda)?;
    check_dimension(scenarios.arc_count(), mean.len())?;
    if scenarios.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let base = path.cost(mean.as_slice());
    Ok(scenarios
        .rows()
        .map(|row| base + lambda * (path.cost(row) - base))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Ellipsoid: `ĉ·x + sqrt(λ·xᵀΣx)`; with `diagonal_only` the quadratic form
/// is `Σ_e λ·d_e x_e`.
pub fn worst_case_ellipsoid(
    stats: &ScenarioStats,
    lambda: f64,
    path: &Path,
    diagonal_only: bool,
) -> Result<f64> {
    check_scale(lambda)?;
    let spread = if diagonal_only {
        path.arcs()
            .iter()
            .map(|&a| lambda * stats.variance[a])
            .sum::<f64>()
    } else {
        let cov = stats.covariance.as_ref().ok_or(Error::MissingCovariance)?;
        lambda * cov.path_form(path)
    };
    Ok(path.cost(stats.mean.as_slice()) + libm::sqrt(spread.max(0.0)))
}

/// Budgeted set: `ĉ·x` plus the `⌊Γ⌋` largest deviations on the path plus
/// the fractional part of `Γ` times the next one.
pub fn worst_case_budgeted(stats: &ScenarioStats, gamma: f64, path: &Path) -> Result<f64> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidParameter("gamma must be finite and >= 0"));
    }
    let mut devs: Vec<f64> = path
        .arcs()
        .iter()
        .map(|&a| (stats.upper[a] - stats.mean[a]).max(0.0))
        .collect();
    devs.sort_by(|a, b| b.total_cmp(a));
    let whole = libm::floor(gamma);
    let mut extra = 0.0;
    for (k, dev) in devs.iter().enumerate() {
        let k = k as f64;
        if k < whole {
            extra += dev;
        } else {
            extra += (gamma - whole) * dev;
            break;
        }
    }
    Ok(path.cost(stats.mean.as_slice()) + extra)
}

/// Permutohull (and symmetric permutohull): sorted scenario path costs
/// weighted by `q`.
pub fn worst_case_permutohull(scenarios: &ScenarioMatrix, q: &WeightColumn, path: &Path) -> Result<f64> {
    check_dimension(scenarios.scenario_count(), q.len())?;
    let mut costs = scenarios.path_costs(path);
    costs.sort_by(|a, b| b.total_cmp(a));
    Ok(level_weighted_sum(&costs, q.as_slice()))
}

/// `Σ qᵢ cᵢ` evaluated as `Σ_w w·(Σ_{qᵢ = w} cᵢ)` over runs of equal weights,
/// so ties between scenario costs never change the rounding.
fn level_weighted_sum(costs: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut run = 0.0;
    for (i, (c, &w)) in costs.iter().zip(q).enumerate() {
        run += c;
        if q.get(i + 1) != Some(&w) {
            total += w * run;
            run = 0.0;
        }
    }
    total
}

fn check_scale(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter("lambda must be finite and >= 0"))
    }
}

/// Raw data plus derived statistics; evaluates any [`UncertaintySpec`].
#[derive(Debug, Clone, Copy)]
pub struct UncertaintyModel<'a> {
    pub scenarios: &'a ScenarioMatrix,
    pub stats: &'a ScenarioStats,
}

impl<'a> UncertaintyModel<'a> {
    pub fn new(scenarios: &'a ScenarioMatrix, stats: &'a ScenarioStats) -> Result<Self> {
        check_dimension(scenarios.arc_count(), stats.arc_count())?;
        Ok(Self { scenarios, stats })
    }

    /// Checks the parameter against the kind's domain for this data.
    pub fn validate(&self, spec: &UncertaintySpec) -> Result<()> {
        let n = self.scenarios.scenario_count();
        match *spec {
            UncertaintySpec::Permutohull { column } => q_column(n, column).map(drop),
            UncertaintySpec::SymPermutohull { column } => q_tilde_column(n, column).map(drop),
            UncertaintySpec::Ellipsoid {
                diagonal_only: false,
                ..
            } if self.stats.covariance.is_none() => Err(Error::MissingCovariance),
            _ => Ok(()),
        }
    }

    /// Weight column for the permutohull kinds.
    pub fn weights(&self, spec: &UncertaintySpec) -> Result<Option<WeightColumn>> {
        let n = self.scenarios.scenario_count();
        match *spec {
            UncertaintySpec::Permutohull { column } => q_column(n, column).map(Some),
            UncertaintySpec::SymPermutohull { column } => q_tilde_column(n, column).map(Some),
            _ => Ok(None),
        }
    }

    pub fn worst_case(&self, spec: &UncertaintySpec, path: &Path) -> Result<f64> {
        match *spec {
            UncertaintySpec::ConvexHull { lambda } => {
                worst_case_convex_hull(self.scenarios, &self.stats.mean, lambda, path)
            }
            UncertaintySpec::Interval { lambda } => worst_case_interval(self.stats, lambda, path),
            UncertaintySpec::Ellipsoid {
                lambda,
                diagonal_only,
            } => worst_case_ellipsoid(self.stats, lambda, path, diagonal_only),
            UncertaintySpec::Budgeted { gamma } => worst_case_budgeted(self.stats, gamma, path),
            UncertaintySpec::Permutohull { .. } | UncertaintySpec::SymPermutohull { .. } => {
                let q = self.weights(spec)?.expect("permutohull kinds carry weights");
                worst_case_permutohull(self.scenarios, &q, path)
            }
        }
    }

    /// A cost vector contained in the set; its path cost is a lower bound
    /// on the worst case of every path.
    pub fn member_costs(&self, spec: &UncertaintySpec) -> Result<CostVector> {
        match spec {
            UncertaintySpec::Permutohull { .. } | UncertaintySpec::SymPermutohull { .. } => {
                let q = self.weights(spec)?.expect("permutohull kinds carry weights");
                // heavy weights on scenarios with large total time
                let mut order: Vec<usize> = (0..self.scenarios.scenario_count()).collect();
                let totals: Vec<f64> = self.scenarios.rows().map(|r| r.iter().sum()).collect();
                order.sort_by(|&a, &b| totals[b].total_cmp(&totals[a]).then(a.cmp(&b)));
                let mut c = vec![0.0; self.scenarios.arc_count()];
                for (&i, w) in order.iter().zip(q.as_slice()) {
                    if *w == 0.0 {
                        continue;
                    }
                    for (ce, v) in c.iter_mut().zip(self.scenarios.row(i)) {
                        *ce += w * v;
                    }
                }
                CostVector::new(c)
            }
            _ => Ok(self.stats.mean.clone()),
        }
    }
}

/// Accepted kind names for `kind:param` strings.
pub const KIND_NAMES: &str =
    "convex-hull, interval, ellipsoid, ellipsoid-full, budgeted, permutohull, sym-permutohull";
