//! Raw observations, the cleaning rules applied to speed records and the
//! statistics every uncertainty set is built from.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{CostVector, Path};

const SECONDS_PER_DAY: i64 = 86_400;

/// Speed observations in mph, one row per timestamp and one column per arc.
/// `None` marks a missing record.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedRecordTable {
    timestamps: Vec<i64>,
    speeds: Vec<Vec<Option<f64>>>,
    arc_count: usize,
}

impl SpeedRecordTable {
    /// `timestamps` are wall-clock seconds since 1970-01-01T00:00 (no zone).
    pub fn new(timestamps: Vec<i64>, speeds: Vec<Vec<Option<f64>>>) -> Result<Self> {
        if timestamps.is_empty() {
            return Err(Error::EmptyTable);
        }
        check_len(timestamps.len(), speeds.len())?;
        if timestamps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnorderedTimestamps);
        }
        let arc_count = speeds[0].len();
        for row in &speeds {
            check_len(arc_count, row.len())?;
            if row.iter().flatten().any(|s| !s.is_finite() || *s < 0.0) {
                return Err(Error::InvalidParameter("speeds must be finite and nonnegative"));
            }
        }
        Ok(Self {
            timestamps,
            speeds,
            arc_count,
        })
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.speeds
    }

    pub fn arc_count(&self) -> usize {
        self.arc_count
    }

    pub fn is_complete(&self) -> bool {
        self.speeds.iter().all(|r| r.iter().all(Option::is_some))
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    crate::graph::check_dimension(expected, found)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleaningRules {
    pub min_speed_mph: f64,
    pub default_speed_mph: f64,
    /// Fill interior gaps linearly in time; when off, the nearest record is used.
    pub interpolate: bool,
}

impl Default for CleaningRules {
    fn default() -> Self {
        Self {
            min_speed_mph: 3.0,
            default_speed_mph: 20.0,
            interpolate: true,
        }
    }
}

/// Fills every missing record and clamps low speeds.
///
/// Interior gaps are interpolated linearly in time, leading and trailing gaps
/// copy the nearest record, and arcs without any record get the default speed.
pub fn clean_speed_records(table: &SpeedRecordTable, rules: &CleaningRules) -> SpeedRecordTable {
    let rows = table.speeds.len();
    let times = &table.timestamps;
    let mut out = vec![vec![None; table.arc_count]; rows];
    let mut recorded: Vec<(usize, f64)> = Vec::new();
    for arc in 0..table.arc_count {
        recorded.clear();
        recorded.extend(
            (0..rows).filter_map(|r| table.speeds[r][arc].map(|s| (r, s.max(rules.min_speed_mph)))),
        );
        if recorded.is_empty() {
            for row in out.iter_mut() {
                row[arc] = Some(rules.default_speed_mph.max(rules.min_speed_mph));
            }
            continue;
        }
        let mut k = 0;
        for (r, row) in out.iter_mut().enumerate() {
            while k + 1 < recorded.len() && recorded[k + 1].0 <= r {
                k += 1;
            }
            let (r0, s0) = recorded[k];
            let value = if r <= r0 || k + 1 == recorded.len() {
                // at a record, before the first one, or after the last one
                s0
            } else {
                let (r1, s1) = recorded[k + 1];
                let (t0, t1, t) = (times[r0] as f64, times[r1] as f64, times[r] as f64);
                if rules.interpolate {
                    s0 + (s1 - s0) * (t - t0) / (t1 - t0)
                } else if t - t0 <= t1 - t {
                    s0
                } else {
                    s1
                }
            };
            row[arc] = Some(value);
        }
    }
    SpeedRecordTable {
        timestamps: table.timestamps.clone(),
        speeds: out,
        arc_count: table.arc_count,
    }
}

/// Converts complete speeds (mph) into travel times (minutes) using arc lengths in miles.
pub fn to_travel_times(speeds: &SpeedRecordTable, lengths_miles: &[f64]) -> Result<ScenarioMatrix> {
    check_len(speeds.arc_count, lengths_miles.len())?;
    if lengths_miles.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::InvalidParameter("arc lengths must be positive"));
    }
    let mut values = Vec::with_capacity(speeds.speeds.len() * speeds.arc_count);
    for row in &speeds.speeds {
        for (s, len) in row.iter().zip(lengths_miles) {
            let s = s.ok_or(Error::IncompleteSpeeds)?;
            values.push(60.0 * len / s);
        }
    }
    ScenarioMatrix::new(speeds.arc_count, values, Some(speeds.timestamps.clone()))
}

/// `N` scenarios × `n` arcs of travel times in minutes, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMatrix {
    arc_count: usize,
    values: Vec<f64>,
    timestamps: Option<Vec<i64>>,
}

impl ScenarioMatrix {
    pub fn new(arc_count: usize, values: Vec<f64>, timestamps: Option<Vec<i64>>) -> Result<Self> {
        if arc_count == 0 {
            return Err(Error::InvalidParameter("scenario matrix needs at least one arc"));
        }
        if !values.len().is_multiple_of(arc_count) {
            return Err(Error::DimensionMismatch {
                expected: arc_count,
                found: values.len() % arc_count,
            });
        }
        if let Some(index) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidCost { index: index % arc_count });
        }
        if let Some(ts) = &timestamps {
            check_len(values.len() / arc_count, ts.len())?;
        }
        Ok(Self {
            arc_count,
            values,
            timestamps,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], timestamps: Option<Vec<i64>>) -> Result<Self> {
        let arc_count = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * arc_count);
        for row in rows {
            check_len(arc_count, row.len())?;
            values.extend_from_slice(row);
        }
        Self::new(arc_count, values, timestamps)
    }

    pub fn scenario_count(&self) -> usize {
        self.values.len() / self.arc_count
    }

    pub fn arc_count(&self) -> usize {
        self.arc_count
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.arc_count..(i + 1) * self.arc_count]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.arc_count)
    }

    pub fn timestamps(&self) -> Option<&[i64]> {
        self.timestamps.as_deref()
    }

    /// `cⁱ·x` for every scenario `i`.
    pub fn path_costs(&self, path: &Path) -> Vec<f64> {
        self.rows().map(|row| path.cost(row)).collect()
    }

    /// Keeps the rows at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.arc_count);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self {
            arc_count: self.arc_count,
            values,
            timestamps: self
                .timestamps
                .as_ref()
                .map(|ts| indices.iter().map(|&i| ts[i]).collect()),
        }
    }
}

/// Day-of-week and time-of-day filter. Times are minutes after midnight; the
/// range is half-open and wraps past midnight when `start > end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    /// Monday first.
    pub days: [bool; 7],
    pub start_minute: u32,
    pub end_minute: u32,
}

impl TimeWindow {
    pub const ALL_DAYS: [bool; 7] = [true; 7];
    pub const WEEKDAYS: [bool; 7] = [true, true, true, true, true, false, false];
    pub const WEEKENDS: [bool; 7] = [false, false, false, false, false, true, true];

    pub fn all() -> Self {
        Self {
            days: Self::ALL_DAYS,
            start_minute: 0,
            end_minute: 24 * 60,
        }
    }

    pub fn contains(&self, timestamp: i64) -> bool {
        let day = timestamp.div_euclid(SECONDS_PER_DAY);
        // 1970-01-01 was a Thursday
        let weekday = (day + 3).rem_euclid(7) as usize;
        let minute = (timestamp.rem_euclid(SECONDS_PER_DAY) / 60) as u32;
        let in_time = if self.start_minute <= self.end_minute {
            (self.start_minute..self.end_minute).contains(&minute)
        } else {
            minute >= self.start_minute || minute < self.end_minute
        };
        self.days[weekday] && in_time
    }
}

pub fn filter_scenarios(matrix: &ScenarioMatrix, window: &TimeWindow) -> Result<ScenarioMatrix> {
    let ts = matrix.timestamps().ok_or(Error::NoTimestamps)?;
    let keep: Vec<usize> = (0..ts.len()).filter(|&i| window.contains(ts[i])).collect();
    Ok(matrix.select(&keep))
}

/// Dense symmetric covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    dim: usize,
    values: Vec<f64>,
}

impl Covariance {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    /// `vᵀΣv`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let mut total = 0.0;
        for (i, vi) in v.iter().enumerate() {
            if *vi == 0.0 {
                continue;
            }
            let row = &self.values[i * self.dim..(i + 1) * self.dim];
            total += vi * row.iter().zip(v).map(|(s, vj)| s * vj).sum::<f64>();
        }
        total
    }

    /// `xᵀΣx` for the incidence vector of `path`.
    pub fn path_form(&self, path: &Path) -> f64 {
        let arcs = path.arcs();
        let mut total = 0.0;
        for &e in arcs {
            let row = &self.values[e * self.dim..(e + 1) * self.dim];
            total += arcs.iter().map(|&f| row[f]).sum::<f64>();
        }
        total
    }
}

/// Mean, componentwise range and (co)variance of a scenario matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioStats {
    pub mean: CostVector,
    pub lower: CostVector,
    pub upper: CostVector,
    /// Population variances, the diagonal of the covariance.
    pub variance: CostVector,
    pub covariance: Option<Covariance>,
}

impl ScenarioStats {
    pub fn arc_count(&self) -> usize {
        self.mean.len()
    }

    /// Per-arc deviation `c̄ − ĉ`.
    pub fn deviation(&self) -> Vec<f64> {
        self.upper
            .as_slice()
            .iter()
            .zip(self.mean.as_slice())
            .map(|(u, m)| (u - m).max(0.0))
            .collect()
    }
}

/// Maximum-likelihood statistics (population covariance, divisor `N`).
pub fn compute_stats(matrix: &ScenarioMatrix, full_covariance: bool) -> Result<ScenarioStats> {
    let count = matrix.scenario_count();
    if count == 0 {
        return Err(Error::EmptyMatrix);
    }
    let n = matrix.arc_count();
    let inv = 1.0 / count as f64;
    let mut sum = vec![0.0; n];
    let mut lower = vec![f64::INFINITY; n];
    let mut upper = vec![f64::NEG_INFINITY; n];
    for row in matrix.rows() {
        for e in 0..n {
            sum[e] += row[e];
            lower[e] = lower[e].min(row[e]);
            upper[e] = upper[e].max(row[e]);
        }
    }
    let mean: Vec<f64> = (0..n)
        .map(|e| (sum[e] * inv).clamp(lower[e], upper[e]))
        .collect();

    let mut variance = vec![0.0; n];
    let mut covariance = full_covariance.then(|| vec![0.0; n * n]);
    let mut centered = vec![0.0; n];
    for row in matrix.rows() {
        for e in 0..n {
            centered[e] = row[e] - mean[e];
            variance[e] += centered[e] * centered[e];
        }
        if let Some(cov) = covariance.as_mut() {
            for e in 0..n {
                let ce = centered[e];
                // upper triangle incl. diagonal, mirrored below
                for f in e..n {
                    cov[e * n + f] += ce * centered[f];
                }
            }
        }
    }
    for v in variance.iter_mut() {
        *v *= inv;
    }
    let covariance = covariance.map(|mut cov| {
        for e in 0..n {
            for f in e..n {
                let v = cov[e * n + f] * inv;
                cov[e * n + f] = v;
                cov[f * n + e] = v;
            }
        }
        Covariance { dim: n, values: cov }
    });
    Ok(ScenarioStats {
        mean: CostVector::new(mean)?,
        lower: CostVector::new(lower)?,
        upper: CostVector::new(upper)?,
        variance: CostVector::new(variance)?,
        covariance,
    })
}

/// Splits rows into an in-sample part of `floor(fraction·N)` rows drawn
/// uniformly without replacement and the remaining out-sample part. Both
/// parts keep the original row order.
pub fn split_sample(
    matrix: &ScenarioMatrix,
    fraction: f64,
    seed: u64,
) -> Result<(ScenarioMatrix, ScenarioMatrix)> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter("split fraction must lie in (0, 1]"));
    }
    let total = matrix.scenario_count();
    if total == 0 {
        return Err(Error::EmptyMatrix);
    }
    let take = in_sample_size(total, fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = rand::seq::index::sample(&mut rng, total, take).into_vec();
    chosen.sort_unstable();
    let mut is_in = vec![false; total];
    for &i in &chosen {
        is_in[i] = true;
    }
    let rest: Vec<usize> = (0..total).filter(|&i| !is_in[i]).collect();
    Ok((matrix.select(&chosen), matrix.select(&rest)))
}

/// `floor(fraction·N)`, robust against products like `0.29·100 = 28.999…`.
pub fn in_sample_size(total: usize, fraction: f64) -> usize {
    let raw = fraction * total as f64;
    (libm::floor(raw + 1e-9 * raw.max(1.0)) as usize).min(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: Vec<Vec<Option<f64>>>) -> SpeedRecordTable {
        let ts = (0..rows.len() as i64).map(|i| i * 900).collect();
        SpeedRecordTable::new(ts, rows).unwrap()
    }

    fn speeds_of(t: &SpeedRecordTable, arc: usize) -> Vec<f64> {
        t.rows().iter().map(|r| r[arc].unwrap()).collect()
    }

    #[test]
    fn cleaning_rules() {
        let raw = table(vec![
            vec![Some(2.0), None, Some(30.0), None],
            vec![Some(10.0), None, None, Some(12.0)],
            vec![None, None, Some(50.0), None],
        ]);
        let clean = clean_speed_records(&raw, &CleaningRules::default());
        assert!(clean.is_complete());
        assert_eq!(speeds_of(&clean, 0), vec![3.0, 10.0, 10.0]);
        assert_eq!(speeds_of(&clean, 1), vec![20.0; 3]);
        assert_eq!(speeds_of(&clean, 2), vec![30.0, 40.0, 50.0]);
        assert_eq!(speeds_of(&clean, 3), vec![12.0; 3]);
    }

    #[test]
    fn interpolation_follows_time_not_rows() {
        let raw = SpeedRecordTable::new(
            vec![0, 100, 400],
            vec![vec![Some(10.0)], vec![None], vec![Some(50.0)]],
        )
        .unwrap();
        let clean = clean_speed_records(&raw, &CleaningRules::default());
        assert_eq!(speeds_of(&clean, 0), vec![10.0, 20.0, 50.0]);
        let rules = CleaningRules {
            interpolate: false,
            ..CleaningRules::default()
        };
        let nearest = clean_speed_records(&raw, &rules);
        assert_eq!(speeds_of(&nearest, 0), vec![10.0, 10.0, 50.0]);
    }

    #[test]
    fn table_validation() {
        assert_eq!(
            SpeedRecordTable::new(vec![], vec![]).unwrap_err(),
            Error::EmptyTable
        );
        assert_eq!(
            SpeedRecordTable::new(vec![5, 5], vec![vec![None], vec![None]]).unwrap_err(),
            Error::UnorderedTimestamps
        );
    }

    #[test]
    fn travel_times() {
        let t = table(vec![vec![Some(20.0), Some(3.0)]]);
        let m = to_travel_times(&t, &[1.0, 2.0]).unwrap();
        assert_eq!(m.row(0), &[3.0, 40.0]);
        let t = table(vec![vec![Some(40.0), Some(6.0)]]);
        assert_eq!(to_travel_times(&t, &[1.0, 2.0]).unwrap().row(0), &[1.5, 20.0]);
        let missing = table(vec![vec![None, Some(3.0)]]);
        assert_eq!(
            to_travel_times(&missing, &[1.0, 2.0]).unwrap_err(),
            Error::IncompleteSpeeds
        );
    }

    #[test]
    fn stats_two_point() {
        let m = ScenarioMatrix::from_rows(&[vec![0.5, 2.0], vec![2.0, 0.5]], None).unwrap();
        let s = compute_stats(&m, true).unwrap();
        assert_eq!(s.mean.as_slice(), &[1.25, 1.25]);
        assert_eq!(s.variance.as_slice(), &[0.5625, 0.5625]);
        let cov = s.covariance.unwrap();
        assert_eq!(cov.get(0, 1), -0.5625);
        assert_eq!(cov.get(1, 0), -0.5625);
    }

    #[test]
    fn stats_single_observation() {
        let m = ScenarioMatrix::from_rows(&[vec![3.0, 4.0]], None).unwrap();
        let s = compute_stats(&m, false).unwrap();
        assert_eq!(s.mean, s.lower);
        assert_eq!(s.mean, s.upper);
        assert_eq!(s.variance.as_slice(), &[0.0, 0.0]);
        assert!(s.covariance.is_none());
    }

    #[test]
    fn scenario_values_must_be_positive() {
        assert!(ScenarioMatrix::from_rows(&[vec![0.0, 2.0]], None).is_err());
        assert!(ScenarioMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]], None).is_err());
    }

    #[test]
    fn weekday_and_time_of_day() {
        // 2017-03-28 (Tuesday) 08:15
        let tue_0815 = 17_253 * SECONDS_PER_DAY + 8 * 3600 + 15 * 60;
        let mornings = TimeWindow {
            days: TimeWindow::WEEKDAYS,
            start_minute: 8 * 60,
            end_minute: 10 * 60,
        };
        assert!(mornings.contains(tue_0815));
        assert!(!mornings.contains(tue_0815 + 105 * 60)); // 10:00 excluded
        assert!(!mornings.contains(tue_0815 + 4 * SECONDS_PER_DAY)); // Saturday
        let night = TimeWindow {
            days: TimeWindow::ALL_DAYS,
            start_minute: 22 * 60,
            end_minute: 2 * 60,
        };
        assert!(night.contains(23 * 3600));
        assert!(night.contains(3600));
        assert!(!night.contains(12 * 3600));
    }

    #[test]
    fn filter_requires_timestamps() {
        let m = ScenarioMatrix::from_rows(&[vec![1.0]], None).unwrap();
        assert_eq!(
            filter_scenarios(&m, &TimeWindow::all()).unwrap_err(),
            Error::NoTimestamps
        );
        let m = ScenarioMatrix::from_rows(&[vec![1.0], vec![2.0]], Some(vec![0, 60])).unwrap();
        assert_eq!(filter_scenarios(&m, &TimeWindow::all()).unwrap(), m);
    }

    #[test]
    fn split_sizes() {
        assert_eq!(in_sample_size(271, 0.75), 203);
        assert_eq!(in_sample_size(100, 0.29), 29);
        let rows: Vec<Vec<f64>> = (1..=10).map(|i| vec![i as f64]).collect();
        let m = ScenarioMatrix::from_rows(&rows, None).unwrap();
        let (a, b) = split_sample(&m, 1.0, 3).unwrap();
        assert_eq!(a, m);
        assert_eq!(b.scenario_count(), 0);
        assert_eq!(split_sample(&m, 0.5, 9).unwrap(), split_sample(&m, 0.5, 9).unwrap());
        assert!(split_sample(&m, 0.0, 1).is_err());
    }
}
