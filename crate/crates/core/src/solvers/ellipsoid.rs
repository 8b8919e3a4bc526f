//! Robust shortest paths under an axis-parallel ellipsoid.
//!
//! The robust objective `ĉᵀx + sqrt(dᵀx)` is minimized over the efficient
//! extreme solutions of the bicriteria problem `min (ĉᵀx, dᵀx)`. Every point
//! is handled through its image `z = (ĉᵀx, dᵀx)` in objective space.
//!
//! [`solve_ellipsoid_naive`] enumerates the extreme solutions by recursive
//! weighted-sum splitting. [`solve_ellipsoid_bb`] only explores the part of
//! the unexplored triangles that lies under the parabola
//! `z₂ = (OBJ − z₁)²`, i.e. where a better robust value is still possible.

use alloc::vec;
use alloc::vec::Vec;

use super::RobustSolution;
use crate::error::{Error, Result};
use crate::graph::{lexicographic_shortest_path, shortest_path, CostVector, Graph, Path};

/// Image of a path in objective space: `(ĉᵀx, dᵀx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicriteriaPoint {
    pub mean: f64,
    pub spread: f64,
}

impl BicriteriaPoint {
    pub fn robust_value(&self) -> f64 {
        self.mean + libm::sqrt(self.spread)
    }

    pub fn weighted(&self, alpha: f64) -> f64 {
        alpha * self.mean + (1.0 - alpha) * self.spread
    }
}

/// Robust objective `ĉᵀx + sqrt(dᵀx)` of a path.
pub fn ellipsoid_value(path: &Path, mean: &[f64], spread: &[f64]) -> f64 {
    point_of(path, mean, spread).robust_value()
}

fn point_of(path: &Path, mean: &[f64], spread: &[f64]) -> BicriteriaPoint {
    BicriteriaPoint {
        mean: path.cost(mean),
        spread: path.cost(spread),
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    path: Path,
    point: BicriteriaPoint,
}

struct Oracle<'a> {
    graph: &'a Graph,
    mean: &'a CostVector,
    spread: &'a CostVector,
    source: usize,
    target: usize,
    calls: usize,
}

impl<'a> Oracle<'a> {
    fn new(
        graph: &'a Graph,
        mean: &'a CostVector,
        spread: &'a CostVector,
        source: usize,
        target: usize,
    ) -> Result<Self> {
        if mean.len() != graph.arc_count() || spread.len() != graph.arc_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.arc_count(),
                found: if mean.len() != graph.arc_count() {
                    mean.len()
                } else {
                    spread.len()
                },
            });
        }
        Ok(Self {
            graph,
            mean,
            spread,
            source,
            target,
            calls: 0,
        })
    }

    fn candidate(&self, path: Path) -> Candidate {
        let point = point_of(&path, self.mean.as_slice(), self.spread.as_slice());
        Candidate { path, point }
    }

    /// `x_l` (mean first) or `x_r` (spread first).
    fn lexmin(&mut self, mean_first: bool) -> Result<Candidate> {
        let (primary, secondary) = if mean_first {
            (self.mean, self.spread)
        } else {
            (self.spread, self.mean)
        };
        self.calls += 1;
        let (path, _) =
            lexicographic_shortest_path(self.graph, primary, secondary, self.source, self.target)?;
        Ok(self.candidate(path))
    }

    /// Weighted-sum minimizer for `α ĉ + (1 − α) d` and its optimal value.
    fn weighted(&mut self, alpha: f64) -> Result<(Candidate, f64)> {
        let costs: Vec<f64> = self
            .mean
            .as_slice()
            .iter()
            .zip(self.spread.as_slice())
            .map(|(c, d)| alpha * c + (1.0 - alpha) * d)
            .collect();
        let costs = CostVector::new(costs).map_err(|_| Error::NonFiniteCosts)?;
        self.calls += 1;
        let (path, value) = shortest_path(self.graph, &costs, self.source, self.target)?;
        Ok((self.candidate(path), value))
    }
}

fn best_of(candidates: &[Candidate]) -> &Candidate {
    let mut best = &candidates[0];
    for c in &candidates[1..] {
        if c.point.robust_value() < best.point.robust_value() {
            best = c;
        }
    }
    best
}

/// `true` when `p` lies strictly left-above `q` in objective space.
fn strictly_ordered(p: &BicriteriaPoint, q: &BicriteriaPoint) -> bool {
    p.mean < q.mean && p.spread > q.spread
}

/// Weight at which `left` and `right` have equal weighted cost.
fn equalizing_alpha(left: &BicriteriaPoint, right: &BicriteriaPoint) -> f64 {
    let dz2 = left.spread - right.spread;
    let dz1 = right.mean - left.mean;
    dz2 / (dz1 + dz2)
}

/// Naive algorithm: collect the extreme solutions between the two
/// lexicographic minima by recursive splitting and keep the best one.
///
/// `spread` is the per-arc variance already scaled by the ellipsoid size.
pub fn solve_ellipsoid_naive(
    graph: &Graph,
    mean: &CostVector,
    spread: &CostVector,
    source: usize,
    target: usize,
) -> Result<RobustSolution> {
    let mut oracle = Oracle::new(graph, mean, spread, source, target)?;
    let left = oracle.lexmin(true)?;
    let right = oracle.lexmin(false)?;
    let mut found = vec![left, right];
    let mut pending = vec![(0usize, 1usize)];
    while let Some((i, j)) = pending.pop() {
        let (p, q) = (found[i].point, found[j].point);
        if !strictly_ordered(&p, &q) {
            continue;
        }
        let alpha = equalizing_alpha(&p, &q);
        let (candidate, _) = oracle.weighted(alpha)?;
        let level = p.weighted(alpha).min(q.weighted(alpha));
        if candidate.point.weighted(alpha) < level - improvement_margin(level, 1e-12) {
            let k = found.len();
            let inside = strictly_ordered(&p, &candidate.point)
                && strictly_ordered(&candidate.point, &q);
            found.push(candidate);
            if inside {
                pending.push((k, j));
                pending.push((i, k));
            }
        }
    }
    let best = best_of(&found).clone();
    let mut sol = RobustSolution::new(best.path, best.point.robust_value(), oracle.calls);
    sol.extreme_points = found.len();
    Ok(sol)
}

/// How the search direction is derived from the parabola at the midpoint `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaRule {
    /// `α = 2(OBJ − m) / (1 + 2(OBJ − m))`: the weighted-sum level line is
    /// tangent to `z₂ = (OBJ − z₁)²` at `z₁ = m`.
    #[default]
    Tangent,
    /// `α = 1 / (1 + 2(OBJ − m))`, which weights the mean by the reciprocal
    /// slope instead.
    Reciprocal,
}

impl AlphaRule {
    pub fn alpha(self, obj: f64, m: f64) -> f64 {
        let slope = 2.0 * (obj - m).max(0.0);
        let alpha = match self {
            Self::Tangent => slope / (1.0 + slope),
            Self::Reciprocal => 1.0 / (1.0 + slope),
        };
        alpha.clamp(1e-12, 1.0 - 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbOptions {
    /// Relative margin a solution must beat the incumbent by.
    pub eps_improve: f64,
    /// Relative width below which an interval is discarded.
    pub eps_width: f64,
    pub alpha_rule: AlphaRule,
    /// Abort with [`Error::NodeBudgetExceeded`] after this many shortest paths.
    pub max_sp_calls: usize,
}

impl Default for BbOptions {
    fn default() -> Self {
        Self {
            eps_improve: 1e-9,
            eps_width: 1e-9,
            alpha_rule: AlphaRule::Tangent,
            max_sp_calls: 100_000,
        }
    }
}

/// Valid inequality `α z₁ + (1 − α) z₂ ≥ value` for every feasible point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cut {
    pub alpha: f64,
    pub value: f64,
}

/// Unexplored triangle between two consecutive known extreme points,
/// restricted to the first-axis range `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
struct SearchInterval {
    left: usize,
    right: usize,
    lo: f64,
    hi: f64,
    /// Use the tangent direction regardless of the configured rule.
    tangent: bool,
}

fn improvement_margin(value: f64, eps: f64) -> f64 {
    eps * libm::fabs(value).max(1.0)
}

/// Sub-ranges of `[lo, hi]` at which the triangle spanned by `left`/`right`
/// meets the improving region `z₂ < (obj − z₁)²` above every cut.
fn improving_projection(
    left: &BicriteriaPoint,
    right: &BicriteriaPoint,
    lo: f64,
    hi: f64,
    obj: f64,
    cuts: &[Cut],
) -> Vec<(f64, f64)> {
    let mut lo = lo.max(left.mean);
    // the floor z₂ ≥ right.spread meets the parabola at obj − sqrt(right.spread)
    let mut hi = hi.min(right.mean).min(obj - libm::sqrt(right.spread));
    if !(lo <= hi) {
        return Vec::new();
    }
    let slope = (right.spread - left.spread) / (right.mean - left.mean);
    // cut floor must not exceed the segment: k·z₁ + c₀ ≤ 0
    for cut in cuts {
        let ratio = cut.alpha / (1.0 - cut.alpha);
        let k = -ratio - slope;
        let c0 = cut.value / (1.0 - cut.alpha) - left.spread + slope * left.mean;
        if k > 0.0 {
            hi = hi.min(-c0 / k);
        } else if k < 0.0 {
            lo = lo.max(-c0 / k);
        } else if c0 > 0.0 {
            return Vec::new();
        }
        if !(lo <= hi) {
            return Vec::new();
        }
    }
    let mut pieces = vec![(lo, hi)];
    // remove [r₁, r₂] where the cut floor reaches the parabola
    for cut in cuts {
        let ratio = cut.alpha / (1.0 - cut.alpha);
        let b = ratio - 2.0 * obj;
        let c = obj * obj - cut.value / (1.0 - cut.alpha);
        let Some((r1, r2)) = quadratic_roots(b, c) else {
            continue;
        };
        let mut next = Vec::with_capacity(pieces.len() + 1);
        for (a, z) in pieces {
            if r2 < a || r1 > z {
                next.push((a, z));
                continue;
            }
            if a < r1 {
                next.push((a, r1));
            }
            if r2 < z {
                next.push((r2, z));
            }
        }
        pieces = next;
        if pieces.is_empty() {
            break;
        }
    }
    pieces
}

/// Real roots of `z² + b z + c`, ascending.
fn quadratic_roots(b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * c;
    if !(disc >= 0.0) {
        return None;
    }
    let sq = libm::sqrt(disc);
    // avoid cancellation
    let q = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
    if q == 0.0 {
        return Some((0.0, 0.0));
    }
    let (x1, x2) = (q, c / q);
    Some(if x1 <= x2 { (x1, x2) } else { (x2, x1) })
}

/// Branch-and-bound over the first objective axis.
///
/// Starting from the two lexicographic minima, each step takes an interval of
/// the first axis where an improving extreme point may still exist, solves one
/// weighted shortest path in the direction given by the parabola at the
/// interval midpoint, records the resulting valid cut and either splits the
/// triangle at the new extreme point or shrinks the interval. The incumbent is
/// optimal once no interval is left.
pub fn solve_ellipsoid_bb(
    graph: &Graph,
    mean: &CostVector,
    spread: &CostVector,
    source: usize,
    target: usize,
    options: &BbOptions,
) -> Result<RobustSolution> {
    solve_ellipsoid_bb_traced(graph, mean, spread, source, target, options, |_| {})
}

/// Event reported by [`solve_ellipsoid_bb_traced`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BbEvent {
    /// A cut was recorded after solving the weighted problem in direction `alpha`.
    Cut(Cut),
    /// A new extreme point split the triangle spanned by `left` and `right`.
    Split {
        left: BicriteriaPoint,
        right: BicriteriaPoint,
        new: BicriteriaPoint,
    },
}

/// [`solve_ellipsoid_bb`] with a callback observing cuts and splits.
pub fn solve_ellipsoid_bb_traced(
    graph: &Graph,
    mean: &CostVector,
    spread: &CostVector,
    source: usize,
    target: usize,
    options: &BbOptions,
    mut trace: impl FnMut(BbEvent),
) -> Result<RobustSolution> {
    let mut oracle = Oracle::new(graph, mean, spread, source, target)?;
    let mut known = vec![oracle.lexmin(true)?, oracle.lexmin(false)?];
    let mut incumbent = if known[1].point.robust_value() < known[0].point.robust_value() {
        1
    } else {
        0
    };
    let mut cuts: Vec<Cut> = Vec::new();
    let mut queue = Vec::new();
    if strictly_ordered(&known[0].point, &known[1].point) {
        queue.push(SearchInterval {
            left: 0,
            right: 1,
            lo: known[0].point.mean,
            hi: known[1].point.mean,
            tangent: false,
        });
    }
    let width_floor = |p: &BicriteriaPoint, q: &BicriteriaPoint| {
        options.eps_width * libm::fabs(p.mean).max(libm::fabs(q.mean)).max(1.0)
    };

    while let Some(item) = queue.pop() {
        let (left, right) = (known[item.left].point, known[item.right].point);
        let best = known[incumbent].point.robust_value();
        // only improvements beyond the margin are of interest
        let obj = best - improvement_margin(best, options.eps_improve);
        let floor = width_floor(&left, &right);
        let pieces = improving_projection(&left, &right, item.lo, item.hi, obj, &cuts);
        let pieces: Vec<_> = pieces.into_iter().filter(|(a, b)| b - a >= floor).collect();
        match pieces.len() {
            0 => continue,
            1 => {}
            _ => {
                queue.extend(pieces.iter().map(|&(lo, hi)| SearchInterval { lo, hi, ..item }));
                continue;
            }
        }
        let (lo, hi) = pieces[0];
        if oracle.calls >= options.max_sp_calls {
            return Err(Error::NodeBudgetExceeded(options.max_sp_calls));
        }
        let mid = 0.5 * (lo + hi);
        let rule = if item.tangent {
            AlphaRule::Tangent
        } else {
            options.alpha_rule
        };
        let alpha = rule.alpha(obj, mid);
        let (candidate, label) = oracle.weighted(alpha)?;
        let value = label.min(candidate.point.weighted(alpha));
        let cut = Cut {
            alpha,
            value: value - improvement_margin(value, 1e-12),
        };
        cuts.push(cut);
        trace(BbEvent::Cut(cut));

        let new = candidate.point;
        if new.robust_value() < known[incumbent].point.robust_value() {
            incumbent = known.len();
        }
        let below_segment = {
            let t = (new.mean - left.mean) / (right.mean - left.mean);
            let chord = left.spread + t * (right.spread - left.spread);
            new.spread < chord - improvement_margin(chord, 1e-12)
        };
        if strictly_ordered(&left, &new) && strictly_ordered(&new, &right) && below_segment {
            trace(BbEvent::Split { left, right, new });
            let k = known.len();
            known.push(candidate);
            if lo <= new.mean {
                queue.push(SearchInterval {
                    left: item.left,
                    right: k,
                    lo,
                    hi: new.mean,
                    tangent: false,
                });
            }
            if new.mean <= hi {
                queue.push(SearchInterval {
                    left: k,
                    right: item.right,
                    lo: new.mean,
                    hi,
                    tangent: false,
                });
            }
            continue;
        }
        if incumbent == known.len() {
            known.push(candidate);
        }
        let best = known[incumbent].point.robust_value();
        let obj = best - improvement_margin(best, options.eps_improve);
        let rest = improving_projection(&left, &right, lo, hi, obj, &cuts);
        let remaining: f64 = rest.iter().map(|(a, b)| b - a).sum();
        if remaining <= (hi - lo) - floor {
            let item = SearchInterval { tangent: false, ..item };
            queue.extend(rest.into_iter().map(|(lo, hi)| SearchInterval { lo, hi, ..item }));
        } else if rule != AlphaRule::Tangent {
            // the tangent cut at `mid` either excludes `mid` or improves OBJ
            queue.push(SearchInterval { lo, hi, tangent: true, ..item });
        } else {
            // no progress even then (rounding): bisect
            queue.push(SearchInterval { lo, hi: mid, ..item });
            queue.push(SearchInterval { lo: mid, hi, ..item });
        }
    }
    let best = &known[incumbent];
    let mut sol = RobustSolution::new(best.path.clone(), best.point.robust_value(), oracle.calls);
    sol.extreme_points = known.len();
    Ok(sol)
}
