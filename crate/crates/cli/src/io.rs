//! Graph JSON and scenario CSV files.
//!
//! A graph file is `{"nodes": n, "arcs": [{"id", "tail", "head", "length_miles"?}]}`.
//! A scenario file has an optional `timestamp` column followed by one column
//! `arc_<id>` per arc; cells are travel times in minutes or speeds in mph.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use robust_paths_core::scenario::{
    clean_speed_records, to_travel_times, CleaningRules, ScenarioMatrix, SpeedRecordTable, TimeWindow,
};
use robust_paths_core::Graph;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: usize,
    pub arcs: Vec<ArcRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArcRecord {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_miles: Option<f64>,
}

/// A graph plus per-arc lengths when every arc has one.
#[derive(Debug, Clone)]
pub struct Network {
    pub graph: Graph,
    pub lengths_miles: Option<Vec<f64>>,
}

impl GraphFile {
    pub fn from_graph(graph: &Graph, lengths_miles: Option<&[f64]>) -> Self {
        let arcs = graph
            .arcs()
            .iter()
            .enumerate()
            .map(|(id, a)| ArcRecord {
                id,
                tail: a.tail,
                head: a.head,
                length_miles: lengths_miles.map(|l| l[id]),
            })
            .collect();
        Self {
            nodes: graph.node_count(),
            arcs,
        }
    }

    pub fn into_network(self) -> Result<Network> {
        let indexed: Vec<(usize, usize, usize)> =
            self.arcs.iter().map(|a| (a.id, a.tail, a.head)).collect();
        let graph = Graph::from_indexed_arcs(self.nodes, &indexed)?;
        let mut lengths = vec![None; self.arcs.len()];
        for a in &self.arcs {
            lengths[a.id] = a.length_miles;
        }
        let lengths_miles = lengths.into_iter().collect::<Option<Vec<f64>>>();
        Ok(Network {
            graph,
            lengths_miles,
        })
    }
}

pub fn read_network(path: &Path) -> Result<Network> {
    let file = File::open(path).with_context(|| format!("opening graph {}", path.display()))?;
    let parsed: GraphFile = serde_json::from_reader(BufReader::new(file))
        .with_context(|| format!("parsing graph {}", path.display()))?;
    parsed.into_network()
}

pub fn write_network(path: &Path, graph: &Graph, lengths_miles: Option<&[f64]>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &GraphFile::from_graph(graph, lengths_miles))?;
    writeln!(w)?;
    Ok(())
}

/// Unit of the cells of a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Minutes,
    /// Speeds; converted with the graph's arc lengths after cleaning.
    Mph,
}

impl FromStr for Unit {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minutes" => Ok(Self::Minutes),
            "mph" => Ok(Self::Mph),
            _ => bail!("unknown unit `{s}` (expected minutes or mph)"),
        }
    }
}

/// Seconds since the epoch of a wall-clock timestamp. Offsets are honored
/// when present; naive timestamps are taken as they are.
pub fn parse_timestamp(s: &str) -> Result<i64> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.naive_local().and_utc().timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t.and_utc().timestamp());
        }
    }
    bail!("cannot parse timestamp `{s}`")
}

pub fn format_timestamp(t: i64) -> String {
    DateTime::from_timestamp(t, 0)
        .map(|d| d.format("%Y-%m-%dT%H:%M:%S").to_string())
        .unwrap_or_else(|| t.to_string())
}

/// Reads a scenario file for `network`. Speeds (`Unit::Mph`) may have empty
/// cells; they are cleaned with `rules` and converted to minutes.
pub fn read_scenarios(
    path: &Path,
    network: &Network,
    unit: Unit,
    rules: &CleaningRules,
) -> Result<ScenarioMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening scenarios {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let arc_count = network.graph.arc_count();
    let mut ts_column = None;
    let mut column_arc = vec![None; headers.len()];
    let mut seen = vec![false; arc_count];
    for (i, name) in headers.iter().enumerate() {
        if name == "timestamp" {
            ts_column = Some(i);
            continue;
        }
        let id: usize = name
            .strip_prefix("arc_")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| anyhow!("unexpected column `{name}`"))?;
        if id >= arc_count || seen[id] {
            bail!("column `{name}` does not match a distinct arc of the graph");
        }
        seen[id] = true;
        column_arc[i] = Some(id);
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        bail!("no column for arc_{missing}");
    }

    let mut timestamps = Vec::new();
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let mut row = vec![None; arc_count];
        for (i, cell) in record.iter().enumerate() {
            if Some(i) == ts_column {
                timestamps.push(parse_timestamp(cell)?);
            } else if let Some(arc) = column_arc.get(i).copied().flatten() {
                if !cell.is_empty() {
                    let v: f64 = cell
                        .parse()
                        .with_context(|| format!("row {}: bad value `{cell}`", line + 1))?;
                    row[arc] = Some(v);
                }
            }
        }
        rows.push(row);
    }
    let has_ts = ts_column.is_some();

    match unit {
        Unit::Minutes => {
            let mut values = Vec::with_capacity(rows.len() * arc_count);
            for (line, row) in rows.iter().enumerate() {
                for (arc, v) in row.iter().enumerate() {
                    values.push(v.ok_or_else(|| {
                        anyhow!("row {}: missing travel time for arc_{arc}", line + 1)
                    })?);
                }
            }
            Ok(ScenarioMatrix::new(arc_count, values, has_ts.then_some(timestamps))?)
        }
        Unit::Mph => {
            let lengths = network
                .lengths_miles
                .as_deref()
                .ok_or_else(|| anyhow!("speeds need length_miles on every arc of the graph"))?;
            // rows without timestamps are spaced evenly
            let ts = if has_ts {
                timestamps
            } else {
                (0..rows.len() as i64).collect()
            };
            let table = SpeedRecordTable::new(ts, rows)?;
            let clean = clean_speed_records(&table, rules);
            let matrix = to_travel_times(&clean, lengths)?;
            if has_ts {
                Ok(matrix)
            } else {
                let values: Vec<f64> = matrix.rows().flatten().copied().collect();
                Ok(ScenarioMatrix::new(arc_count, values, None)?)
            }
        }
    }
}

pub fn write_scenarios(path: &Path, matrix: &ScenarioMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let ts = matrix.timestamps();
    let mut header: Vec<String> = Vec::new();
    if ts.is_some() {
        header.push("timestamp".into());
    }
    header.extend((0..matrix.arc_count()).map(|a| format!("arc_{a}")));
    w.write_record(&header)?;
    for (i, row) in matrix.rows().enumerate() {
        let mut cells: Vec<String> = Vec::with_capacity(row.len() + 1);
        if let Some(ts) = ts {
            cells.push(format_timestamp(ts[i]));
        }
        cells.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&cells)?;
    }
    w.flush()?;
    Ok(())
}

/// Time-window filter as written in configuration files, e.g.
/// `{"days": "weekdays", "start": "07:00", "end": "09:00"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    #[serde(default = "all_days")]
    pub days: DaySet,
    #[serde(default = "midnight")]
    pub start: String,
    #[serde(default = "midnight")]
    pub end: String,
}

fn all_days() -> DaySet {
    DaySet::Named("all".into())
}

fn midnight() -> String {
    "00:00".into()
}

/// `"all"`, `"weekdays"`, `"weekends"` or a list such as `["mon", "fri"]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DaySet {
    Named(String),
    List(Vec<String>),
}

impl WindowSpec {
    pub fn to_window(&self) -> Result<TimeWindow> {
        let days = match &self.days {
            DaySet::Named(name) => match name.as_str() {
                "all" => TimeWindow::ALL_DAYS,
                "weekdays" => TimeWindow::WEEKDAYS,
                "weekends" => TimeWindow::WEEKENDS,
                single => day_list(&[single.to_string()])?,
            },
            DaySet::List(list) => day_list(list)?,
        };
        let start_minute = parse_clock(&self.start)?;
        let mut end_minute = parse_clock(&self.end)?;
        // "00:00" to "00:00" means the whole day
        if start_minute == 0 && end_minute == 0 {
            end_minute = 24 * 60;
        }
        Ok(TimeWindow {
            days,
            start_minute,
            end_minute,
        })
    }
}

fn day_list(names: &[String]) -> Result<[bool; 7]> {
    const NAMES: [&str; 7] = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"];
    let mut days = [false; 7];
    for name in names {
        let key = name.to_ascii_lowercase();
        let i = NAMES
            .iter()
            .position(|n| key.starts_with(n))
            .ok_or_else(|| anyhow!("unknown day `{name}`"))?;
        days[i] = true;
    }
    Ok(days)
}

/// `HH:MM` to minutes after midnight; `24:00` is allowed as an end.
pub fn parse_clock(s: &str) -> Result<u32> {
    let (h, m) = s
        .trim()
        .split_once(':')
        .ok_or_else(|| anyhow!("expected HH:MM, got `{s}`"))?;
    let (h, m): (u32, u32) = (h.parse()?, m.parse()?);
    if m >= 60 || h > 24 || (h == 24 && m > 0) {
        bail!("time `{s}` out of range");
    }
    Ok(h * 60 + m)
}
