//! Per-slot inter-satellite topologies.
//!
//! Every algorithm here produces a series of [`TopologySnapshot`]s in which
//! each satellite has at most `U` links, links are undirected, and every link
//! clears the atmosphere shell and the range limit at that slot.
//!
//! * [`dotd_run`] scores candidate links by their normalised capacity, latency
//!   and persistence plus the peer's accumulated score from the previous slot,
//!   then greedily keeps the best-scoring links.
//! * [`greedy_run`] uses the same link cost without score accumulation.
//! * [`plus_grid_run`] links two in-plane and two adjacent-plane neighbours.

mod dteg;
mod plus_grid;
mod score;
mod select;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{isl_distance, isl_visible, triangle_altitude, VisibilityConfig};
use crate::link_budget::{isl_capacity, isl_latency, LinkError, RadioConfig};
use crate::orbital::SatelliteSnapshot;
use crate::tle::TleRecord;

pub use dteg::{build_dteg, Dteg, DtegLink};
pub use plus_grid::{cluster_planes, OrbitalPlane, PlaneModel};
pub use score::{
    link_cost, normalize, score, update_scores, Normalized, RunningMax, ScoreTable, Weights,
};
pub use select::{select_links, Candidate};

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("weights w1={w1}, w2={w2} violate w1, w2 in [0, 1] and w1 + w2 <= 1")]
    Weights { w1: f64, w2: f64 },
    #[error("cannot normalise before any visible pair has been seen")]
    Normalization,
    #[error("link budget: {0}")]
    Link(#[from] LinkError),
    #[error("at least one snapshot is required")]
    NoSnapshots,
    #[error("{0} orbital records supplied for {1} satellites")]
    RecordCount(usize, usize),
    #[error("maximum link count must be at least 1")]
    MaxLinks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Dotd,
    Greedy,
    #[serde(rename = "plusgrid")]
    PlusGrid,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Dotd, Algorithm::Greedy, Algorithm::PlusGrid];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dotd => "dotd",
            Algorithm::Greedy => "greedy",
            Algorithm::PlusGrid => "plusgrid",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dotd" => Ok(Algorithm::Dotd),
            "greedy" => Ok(Algorithm::Greedy),
            "plusgrid" | "+grid" | "plus-grid" => Ok(Algorithm::PlusGrid),
            other => Err(format!("unknown algorithm {other:?} (expected dotd, greedy or plusgrid)")),
        }
    }
}

/// Order in which candidate links are offered to the degree check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionOrder {
    /// One global list sorted by score, ties by pair index.
    #[default]
    Global,
    /// Satellite by satellite in index order, each taking its best peers.
    PerSatellite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopologyConfig {
    #[serde(flatten)]
    pub weights: Weights,
    /// `U`, the number of ISL terminals per satellite.
    pub max_links: usize,
    pub selection_order: SelectionOrder,
    /// Slots after which accumulated scores restart from zero.
    pub score_window: Option<usize>,
    /// Plane clustering tolerances for +Grid, degrees.
    pub plane_raan_tolerance: f64,
    pub plane_inclination_tolerance: f64,
    #[serde(skip)]
    pub visibility: VisibilityConfig,
    #[serde(skip)]
    pub radio: RadioConfig,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            weights: Weights::default(),
            max_links: 4,
            selection_order: SelectionOrder::Global,
            score_window: None,
            plane_raan_tolerance: 2.0,
            plane_inclination_tolerance: 1.0,
            visibility: VisibilityConfig::default(),
            radio: RadioConfig::default(),
        }
    }
}

/// Metrics and scores of one satellite pair at one slot.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LinkAssessment {
    /// Lower satellite index.
    pub i: u32,
    /// Higher satellite index.
    pub j: u32,
    pub slot: usize,
    pub distance: f64,
    pub visible: bool,
    /// bit/s
    pub capacity: f64,
    /// seconds
    pub latency: f64,
    pub norm_capacity: f64,
    pub norm_latency: f64,
    pub norm_churn: f64,
    /// Link cost `A`.
    pub cost: f64,
    /// Score seen from `i` towards `j`.
    pub score_ij: f64,
    /// Score seen from `j` towards `i`.
    pub score_ji: f64,
}

/// Raw distance, capacity and latency for every visible pair `i < j`, in
/// ascending pair order. Invisible pairs are omitted.
pub fn assess_slot(
    snapshot: &SatelliteSnapshot,
    vis: &VisibilityConfig,
    radio: &RadioConfig,
) -> Result<Vec<LinkAssessment>, LinkError> {
    let n = snapshot.len();
    let per_row: Vec<Vec<LinkAssessment>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let pi = snapshot.positions[i];
            let ri = snapshot.radii[i];
            let mut row = Vec::new();
            for j in i + 1..n {
                let d = isl_distance(pi, snapshot.positions[j]);
                if !isl_visible(ri, snapshot.radii[j], d, vis) {
                    continue;
                }
                row.push(LinkAssessment {
                    i: i as u32,
                    j: j as u32,
                    slot: snapshot.slot,
                    distance: d,
                    visible: true,
                    capacity: isl_capacity(d, radio)?,
                    latency: isl_latency(d),
                    ..LinkAssessment::default()
                });
            }
            Ok(row)
        })
        .collect::<Result<_, LinkError>>()?;
    Ok(per_row.into_iter().flatten().collect())
}

/// An undirected link `a < b` with the cost `A` it was selected at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub a: u32,
    pub b: u32,
    pub cost: f64,
}

/// Symmetric adjacency for one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySnapshot {
    pub slot: usize,
    neighbors: Vec<Vec<u32>>,
    links: Vec<Link>,
}

impl TopologySnapshot {
    pub fn empty(slot: usize, satellites: usize) -> Self {
        Self { slot, neighbors: vec![Vec::new(); satellites], links: Vec::new() }
    }

    /// Builds a snapshot from undirected links. Endpoints are reordered so
    /// that `a < b`; duplicate and self links are dropped.
    pub fn from_links(slot: usize, satellites: usize, links: Vec<Link>) -> Self {
        let mut links: Vec<Link> = links
            .into_iter()
            .filter(|l| l.a != l.b)
            .map(|l| if l.a < l.b { l } else { Link { a: l.b, b: l.a, cost: l.cost } })
            .collect();
        links.sort_by_key(|l| (l.a, l.b));
        links.dedup_by_key(|l| (l.a, l.b));
        let mut neighbors = vec![Vec::new(); satellites];
        for l in &links {
            neighbors[l.a as usize].push(l.b);
            neighbors[l.b as usize].push(l.a);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        Self { slot, neighbors, links }
    }

    pub fn satellite_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn has_link(&self, i: usize, j: usize) -> bool {
        self.neighbors
            .get(i)
            .is_some_and(|n| n.binary_search(&(j as u32)).is_ok())
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn link_cost(&self, i: usize, j: usize) -> Option<f64> {
        let key = if i < j { (i as u32, j as u32) } else { (j as u32, i as u32) };
        self.links
            .binary_search_by_key(&key, |l| (l.a, l.b))
            .ok()
            .map(|k| self.links[k].cost)
    }
}

/// A violated topology constraint.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintViolation {
    #[error("slot {slot}: satellite {sat} has {degree} links (limit {limit})")]
    Degree { slot: usize, sat: usize, degree: usize, limit: usize },
    #[error("slot {slot}: link {a}-{b} is not duplex")]
    Asymmetric { slot: usize, a: usize, b: usize },
    #[error("slot {slot}: link {a}-{b} passes {altitude:.1} km from the geocentre")]
    Blocked { slot: usize, a: usize, b: usize, altitude: f64 },
    #[error("slot {slot}: link {a}-{b} spans {distance:.1} km")]
    Range { slot: usize, a: usize, b: usize, distance: f64 },
}

/// Checks degree, duplex, line-of-sight and range constraints on a topology.
pub fn check_constraints(
    topology: &TopologySnapshot,
    snapshot: &SatelliteSnapshot,
    max_links: usize,
    vis: &VisibilityConfig,
) -> Vec<ConstraintViolation> {
    let slot = topology.slot;
    let mut out = Vec::new();
    for i in 0..topology.satellite_count() {
        if topology.degree(i) > max_links {
            out.push(ConstraintViolation::Degree {
                slot,
                sat: i,
                degree: topology.degree(i),
                limit: max_links,
            });
        }
        for &j in topology.neighbors(i) {
            let j = j as usize;
            if !topology.has_link(j, i) {
                out.push(ConstraintViolation::Asymmetric { slot, a: i, b: j });
            }
            if i < j {
                let d = isl_distance(snapshot.positions[i], snapshot.positions[j]);
                let alt = triangle_altitude(snapshot.radii[i], snapshot.radii[j], d);
                if alt <= vis.blocking_radius() {
                    out.push(ConstraintViolation::Blocked { slot, a: i, b: j, altitude: alt });
                }
                if d >= vis.max_range {
                    out.push(ConstraintViolation::Range { slot, a: i, b: j, distance: d });
                }
            }
        }
    }
    out
}

/// Topologies for every slot plus the state the algorithm carried between them.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyRun {
    pub algorithm: Algorithm,
    pub topologies: Vec<TopologySnapshot>,
    /// Running maxima after each slot.
    pub maxes: Vec<RunningMax>,
    /// `scores[0]` is the initial all-zero table; `scores[k]` follows slot `k - 1`.
    pub scores: Vec<ScoreTable>,
    /// Scored assessments of every slot, kept only when requested.
    pub assessments: Option<Vec<Vec<LinkAssessment>>>,
}

/// Scores one slot's visible pairs in place and returns the selection candidates.
fn score_pairs(
    pairs: &mut [LinkAssessment],
    maxes: &RunningMax,
    previous: Option<&TopologySnapshot>,
    peer_scores: &ScoreTable,
    cfg: &TopologyConfig,
) -> Result<Vec<Candidate>, TopologyError> {
    let mut out = Vec::with_capacity(pairs.len());
    for p in pairs.iter_mut() {
        let (i, j) = (p.i as usize, p.j as usize);
        let linked = previous.is_some_and(|t| t.has_link(i, j));
        let n = normalize(p.capacity, p.latency, linked, maxes, cfg.max_links)?;
        let cost = link_cost(&n, &cfg.weights);
        p.norm_capacity = n.capacity;
        p.norm_latency = n.latency;
        p.norm_churn = n.churn;
        p.cost = cost;
        p.score_ij = score(cost, peer_scores.get(j), p.visible);
        p.score_ji = score(cost, peer_scores.get(i), p.visible);
        out.push(Candidate { i: p.i, j: p.j, score_ij: p.score_ij, score_ji: p.score_ji, cost });
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum Strategy<'a> {
    Scored { accumulate: bool },
    Grid(&'a PlaneModel),
}

fn run_pipeline(
    snapshots: &[SatelliteSnapshot],
    cfg: &TopologyConfig,
    algorithm: Algorithm,
    strategy: Strategy<'_>,
    keep_assessments: bool,
) -> Result<TopologyRun, TopologyError> {
    let first = snapshots.first().ok_or(TopologyError::NoSnapshots)?;
    if cfg.max_links == 0 {
        return Err(TopologyError::MaxLinks);
    }
    let n = first.len();
    let mut maxes = RunningMax::default();
    let mut scores = vec![ScoreTable::zeros(n)];
    let mut topologies: Vec<TopologySnapshot> = Vec::with_capacity(snapshots.len());
    let mut max_history = Vec::with_capacity(snapshots.len());
    let mut kept = keep_assessments.then(Vec::new);

    for (k, snapshot) in snapshots.iter().enumerate() {
        let mut pairs = assess_slot(snapshot, &cfg.visibility, &cfg.radio)?;
        maxes = maxes.update(&pairs);
        max_history.push(maxes);

        let restart = cfg.score_window.is_some_and(|w| w > 0 && k > 0 && k % w == 0);
        let prev_scores = if restart { ScoreTable::zeros(n) } else { scores.last().cloned().unwrap() };

        let topology = if pairs.is_empty() {
            TopologySnapshot::empty(snapshot.slot, n)
        } else {
            let candidates = score_pairs(&mut pairs, &maxes, topologies.last(), &prev_scores, cfg)?;
            match strategy {
                Strategy::Scored { accumulate: true } => {
                    select_links(&candidates, n, cfg.max_links, cfg.selection_order, snapshot.slot)
                }
                Strategy::Scored { accumulate: false } => {
                    // Scores never accumulate, so each pair is ranked by its cost alone.
                    let plain: Vec<Candidate> = candidates
                        .iter()
                        .map(|c| Candidate { score_ij: c.cost, score_ji: c.cost, ..*c })
                        .collect();
                    select_links(&plain, n, cfg.max_links, cfg.selection_order, snapshot.slot)
                }
                Strategy::Grid(planes) => {
                    planes.select(snapshot, &candidates, cfg.max_links)
                }
            }
        };

        let next_scores = match strategy {
            Strategy::Scored { accumulate: true } => update_scores(&prev_scores, &topology, cfg.max_links),
            _ => ScoreTable { step: prev_scores.step + 1, scores: vec![0.0; n] },
        };
        scores.push(next_scores);
        topologies.push(topology);
        if let Some(store) = kept.as_mut() {
            store.push(pairs);
        }
    }

    Ok(TopologyRun { algorithm, topologies, maxes: max_history, scores, assessments: kept })
}

/// Score-propagating topology design over a series of snapshots.
pub fn dotd_run(snapshots: &[SatelliteSnapshot], cfg: &TopologyConfig) -> Result<TopologyRun, TopologyError> {
    run_pipeline(snapshots, cfg, Algorithm::Dotd, Strategy::Scored { accumulate: true }, false)
}

/// Like [`dotd_run`] but also returns the scored pair assessments of every slot.
pub fn dotd_run_traced(
    snapshots: &[SatelliteSnapshot],
    cfg: &TopologyConfig,
) -> Result<TopologyRun, TopologyError> {
    run_pipeline(snapshots, cfg, Algorithm::Dotd, Strategy::Scored { accumulate: true }, true)
}

/// Per-slot greedy selection on link cost alone.
pub fn greedy_run(snapshots: &[SatelliteSnapshot], cfg: &TopologyConfig) -> Result<TopologyRun, TopologyError> {
    run_pipeline(snapshots, cfg, Algorithm::Greedy, Strategy::Scored { accumulate: false }, false)
}

/// Two in-plane plus two adjacent-plane neighbours per satellite.
pub fn plus_grid_run(
    snapshots: &[SatelliteSnapshot],
    records: &[TleRecord],
    cfg: &TopologyConfig,
) -> Result<TopologyRun, TopologyError> {
    let n = snapshots.first().map_or(0, |s| s.len());
    if records.len() != n {
        return Err(TopologyError::RecordCount(records.len(), n));
    }
    let planes = cluster_planes(records, cfg.plane_raan_tolerance, cfg.plane_inclination_tolerance);
    run_pipeline(snapshots, cfg, Algorithm::PlusGrid, Strategy::Grid(&planes), false)
}

/// Runs one of the three algorithms.
pub fn run_algorithm(
    algorithm: Algorithm,
    snapshots: &[SatelliteSnapshot],
    records: &[TleRecord],
    cfg: &TopologyConfig,
) -> Result<TopologyRun, TopologyError> {
    match algorithm {
        Algorithm::Dotd => dotd_run(snapshots, cfg),
        Algorithm::Greedy => greedy_run(snapshots, cfg),
        Algorithm::PlusGrid => plus_grid_run(snapshots, records, cfg),
    }
}

/// Links present in both slot `t - 1` and slot `t`, for every `t >= 1`.
pub fn count_persistent_links(topologies: &[TopologySnapshot]) -> Vec<usize> {
    topologies
        .windows(2)
        .map(|w| w[1].links().iter().filter(|l| w[0].has_link(l.a as usize, l.b as usize)).count())
        .collect()
}
