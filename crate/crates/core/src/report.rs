//! Scenario runs, metric rows and their CSV/JSON output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orbital::{snapshot_series, GroundStation, OrbitError, SatelliteSnapshot, TimeGrid};
use crate::routing::{route, RouteMetric};
use crate::tle::TleRecord;
use crate::topology::{count_persistent_links, run_algorithm, Algorithm, TopologyConfig, TopologyError, TopologyRun};

pub use crate::walker::{synthetic_walker, WalkerParams};

/// Column order of the metrics CSV.
pub const CSV_HEADER: &str =
    "scenario,algorithm,slot,sat_count,isl_hops,latency_ms_with_gs,latency_ms_isl_only,mean_capacity_bps,persistent_links";

/// Scenario name used on whole-constellation churn rows.
pub const CHURN_SCENARIO: &str = "all";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("scenario {0}: source and destination are the same place")]
    SameStation(String),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("CSV output: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON output: {0}")]
    Json(#[from] serde_json::Error),
}

/// A source/destination ground-station pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub source: GroundStation,
    pub destination: GroundStation,
}

impl Scenario {
    pub fn new(name: impl Into<String>, source: GroundStation, destination: GroundStation) -> Result<Self, ReportError> {
        let s = Self { name: name.into(), source, destination };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        self.source.validate()?;
        self.destination.validate()?;
        let same = self.source.latitude == self.destination.latitude
            && self.source.longitude == self.destination.longitude
            && self.source.altitude == self.destination.altitude;
        if same {
            return Err(ReportError::SameStation(self.name.clone()));
        }
        Ok(())
    }
}

fn station(name: &str, lat: f64, lon: f64) -> GroundStation {
    GroundStation { name: name.into(), latitude: lat, longitude: lon, altitude: 0.0 }
}

/// The five built-in city pairs S1–S5.
pub fn reference_scenarios() -> Vec<Scenario> {
    let sydney = station("Sydney", -33.865143, 151.2099);
    let darwin = station("Darwin", -12.46, 130.84);
    let miami = station("Miami", 25.761681, -80.191788);
    let calgary = station("Calgary", 51.049999, -114.066666);
    let new_york = station("New York", 40.73061, -73.935242);
    let san_francisco = station("San Francisco", 37.773972, -122.431297);
    let phnom_penh = station("Phnom Penh", 11.562108, 104.888535);
    let kathmandu = station("Kathmandu", 27.700769, 85.30014);
    let pair = |name: &str, a: &GroundStation, b: &GroundStation| Scenario {
        name: name.into(),
        source: a.clone(),
        destination: b.clone(),
    };
    vec![
        pair("S1", &sydney, &darwin),
        pair("S2", &miami, &calgary),
        pair("S3", &new_york, &miami),
        pair("S4", &new_york, &san_francisco),
        pair("S5", &phnom_penh, &kathmandu),
    ]
}

/// One output row. Route rows leave `persistent_links` empty; churn rows
/// (scenario [`CHURN_SCENARIO`]) carry only `persistent_links`. A route row
/// whose attach or path search failed has every metric empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scenario: String,
    pub algorithm: String,
    pub slot: usize,
    pub sat_count: Option<usize>,
    pub isl_hops: Option<usize>,
    pub latency_ms_with_gs: Option<f64>,
    pub latency_ms_isl_only: Option<f64>,
    pub mean_capacity_bps: Option<f64>,
    pub persistent_links: Option<usize>,
}

impl MetricsRow {
    fn empty(scenario: &str, algorithm: Algorithm, slot: usize) -> Self {
        Self {
            scenario: scenario.into(),
            algorithm: algorithm.name().into(),
            slot,
            sat_count: None,
            isl_hops: None,
            latency_ms_with_gs: None,
            latency_ms_isl_only: None,
            mean_capacity_bps: None,
            persistent_links: None,
        }
    }

    pub fn is_churn(&self) -> bool {
        self.scenario == CHURN_SCENARIO
    }

    /// A route row with no metrics: attach or routing failed.
    pub fn is_failure(&self) -> bool {
        !self.is_churn() && self.sat_count.is_none()
    }
}

/// Route rows for every slot and scenario of one algorithm run, followed by
/// its churn rows for slots `1..`.
pub fn metrics_for_run(
    run: &TopologyRun,
    snapshots: &[SatelliteSnapshot],
    scenarios: &[Scenario],
    cfg: &TopologyConfig,
    metric: RouteMetric,
) -> Vec<MetricsRow> {
    let alg = run.algorithm;
    let mut rows: Vec<MetricsRow> = run
        .topologies
        .par_iter()
        .zip(snapshots.par_iter())
        .flat_map_iter(|(topology, snap)| {
            scenarios.iter().map(move |sc| {
                let mut row = MetricsRow::empty(&sc.name, alg, snap.slot);
                match route(&sc.source, &sc.destination, snap, topology, &cfg.visibility, &cfg.radio, metric) {
                    Ok(r) => {
                        row.sat_count = Some(r.satellite_count());
                        row.isl_hops = Some(r.isl_hops);
                        row.latency_ms_with_gs = Some(r.latency_with_gs * 1e3);
                        row.latency_ms_isl_only = Some(r.latency_isl_only * 1e3);
                        row.mean_capacity_bps = Some(r.mean_link_capacity);
                    }
                    Err(e) => log::debug!("{} {} slot {}: {e}", sc.name, alg, snap.slot),
                }
                row
            })
        })
        .collect();
    for (k, count) in count_persistent_links(&run.topologies).into_iter().enumerate() {
        let mut row = MetricsRow::empty(CHURN_SCENARIO, alg, run.topologies[k + 1].slot);
        row.persistent_links = Some(count);
        rows.push(row);
    }
    rows
}

/// Propagates the records over the grid, runs each algorithm once and
/// collects route and churn rows, algorithm by algorithm.
pub fn run_experiment(
    records: &[TleRecord],
    grid: &TimeGrid,
    scenarios: &[Scenario],
    algorithms: &[Algorithm],
    cfg: &TopologyConfig,
    metric: RouteMetric,
) -> Result<Vec<MetricsRow>, ReportError> {
    for sc in scenarios {
        sc.validate()?;
    }
    let snapshots = snapshot_series(records, grid)?;
    let mut rows = Vec::new();
    for &alg in algorithms {
        let run = run_algorithm(alg, &snapshots, records, cfg)?;
        let block = metrics_for_run(&run, &snapshots, scenarios, cfg, metric);
        let failed = block.iter().filter(|r| r.is_failure()).count();
        if failed > 0 {
            log::warn!("{alg}: {failed} route rows without a route");
        }
        rows.extend(block);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown output format {other:?} (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
}

impl Destination {
    fn label(&self) -> String {
        match self {
            Destination::Stdout => "standard output".into(),
            Destination::File(p) => p.display().to_string(),
        }
    }

    /// Opens the destination, runs `f` on it and flushes.
    pub fn write_with<F>(&self, f: F) -> Result<(), ReportError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), ReportError>,
    {
        let io_err = |source| ReportError::Io { path: self.label(), source };
        match self {
            Destination::Stdout => {
                let stdout = io::stdout();
                let mut w = BufWriter::new(stdout.lock());
                f(&mut w)?;
                w.flush().map_err(io_err)
            }
            Destination::File(p) => {
                let mut w = BufWriter::new(File::create(p).map_err(io_err)?);
                f(&mut w)?;
                w.flush().map_err(io_err)
            }
        }
    }
}

/// Writes rows as CSV (fixed header, written even for no rows) or as a JSON
/// array of objects with the same keys.
pub fn write_rows(rows: &[MetricsRow], format: Format, w: &mut dyn Write) -> Result<(), ReportError> {
    match format {
        Format::Csv => {
            let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
            out.write_record(CSV_HEADER.split(','))?;
            for row in rows {
                out.serialize(row)?;
            }
            out.flush().map_err(|source| ReportError::Io { path: "CSV output".into(), source })?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, rows)?;
            writeln!(w).map_err(|source| ReportError::Io { path: "JSON output".into(), source })?;
        }
    }
    Ok(())
}

pub fn emit(rows: &[MetricsRow], format: Format, dest: &Destination) -> Result<(), ReportError> {
    dest.write_with(|w| write_rows(rows, format, w))
}

/// One row per link per slot: `algorithm,slot,a,b,cost`.
pub fn write_edge_list(runs: &[TopologyRun], w: &mut dyn Write) -> Result<(), ReportError> {
    #[derive(Serialize)]
    struct Edge<'a> {
        algorithm: &'a str,
        slot: usize,
        a: u32,
        b: u32,
        cost: f64,
    }
    let mut out = csv::Writer::from_writer(w);
    let mut any = false;
    for run in runs {
        for t in &run.topologies {
            for l in t.links() {
                any = true;
                out.serialize(Edge { algorithm: run.algorithm.name(), slot: t.slot, a: l.a, b: l.b, cost: l.cost })?;
            }
        }
    }
    if !any {
        out.write_record(["algorithm", "slot", "a", "b", "cost"])?;
    }
    out.flush().map_err(|source| ReportError::Io { path: "edge list".into(), source })?;
    Ok(())
}
