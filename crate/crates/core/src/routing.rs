//! Ground-station attachment and shortest-path routing over a topology.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{elevation_angle, slant_range, VisibilityConfig};
use crate::link_budget::{gs_link_quality, isl_capacity, isl_latency, propagation_delay, RadioConfig};
use crate::orbital::{ground_station_eci, GroundStation, SatelliteSnapshot};
use crate::topology::TopologySnapshot;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RouteError {
    #[error("ground station {station} sees no satellite at slot {slot}")]
    NoVisibleSatellite { station: String, slot: usize },
    #[error("no path between satellites {from} and {to} at slot {slot}")]
    NoRoute { from: usize, to: usize, slot: usize },
}

/// Edge weight used by the path search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteMetric {
    /// Propagation delay of each link.
    #[default]
    Latency,
    /// `1 - A` for the cost `A` the link was selected with.
    Score,
}

/// The satellite a ground station uplinks to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attachment {
    pub satellite: usize,
    pub elevation: f64,
    /// km
    pub slant_range: f64,
    /// `delay + 1/capacity`, seconds.
    pub quality: f64,
}

/// Picks the visible satellite with the lowest link quality value; ties go
/// to the lower satellite index.
pub fn attach_gs(
    gs: &GroundStation,
    snapshot: &SatelliteSnapshot,
    vis: &VisibilityConfig,
    radio: &RadioConfig,
) -> Result<Attachment, RouteError> {
    let site = ground_station_eci(gs, snapshot.instant);
    let mut best: Option<Attachment> = None;
    for (sat, (&pos, &radius)) in snapshot.positions.iter().zip(&snapshot.radii).enumerate() {
        let elevation = elevation_angle(site, pos);
        let Some(quality) = gs_link_quality(elevation, radius, radio, vis) else {
            continue;
        };
        if best.is_none_or(|b| quality < b.quality) {
            let range = slant_range(elevation, radius).unwrap_or(f64::NAN);
            best = Some(Attachment { satellite: sat, elevation, slant_range: range, quality });
        }
    }
    best.ok_or_else(|| RouteError::NoVisibleSatellite { station: gs.name.clone(), slot: snapshot.slot })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    cost: f64,
    hops: usize,
    node: usize,
}

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        self.cost
            .total_cmp(&o.cost)
            .then(self.hops.cmp(&o.hops))
            .then(self.node.cmp(&o.node))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn trace(pred: &[Option<usize>], mut v: usize) -> Vec<usize> {
    let mut out = vec![v];
    while let Some(p) = pred[v] {
        out.push(p);
        v = p;
    }
    out.reverse();
    out
}

/// Dijkstra over the topology with a non-negative edge weight. Among paths
/// of equal cost the one with fewer hops wins, then the lexicographically
/// smallest satellite sequence. Returns `None` when `dst` is unreachable.
pub fn shortest_path(
    topology: &TopologySnapshot,
    weight: impl Fn(usize, usize) -> f64,
    src: usize,
    dst: usize,
) -> Option<Path> {
    let n = topology.satellite_count();
    if src >= n || dst >= n {
        return None;
    }
    let mut label: Vec<Option<(f64, usize)>> = vec![None; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    label[src] = Some((0.0, 0));
    heap.push(Reverse(Key { cost: 0.0, hops: 0, node: src }));

    while let Some(Reverse(Key { cost, hops, node: u })) = heap.pop() {
        if done[u] || label[u] != Some((cost, hops)) {
            continue;
        }
        done[u] = true;
        if u == dst {
            return Some(Path { nodes: trace(&pred, dst), cost });
        }
        for &v in topology.neighbors(u) {
            let v = v as usize;
            if done[v] {
                continue;
            }
            let cand = (cost + weight(u, v), hops + 1);
            let better = match label[v] {
                None => true,
                Some(cur) => match cand.0.total_cmp(&cur.0).then(cand.1.cmp(&cur.1)) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        let old = pred[v].expect("labelled node has a predecessor");
                        trace(&pred, u) < trace(&pred, old)
                    }
                },
            };
            if better {
                label[v] = Some(cand);
                pred[v] = Some(u);
                heap.push(Reverse(Key { cost: cand.0, hops: cand.1, node: v }));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteResult {
    pub source: String,
    pub destination: String,
    pub entry: usize,
    pub exit: usize,
    pub path: Vec<usize>,
    /// Inter-satellite links traversed.
    pub isl_hops: usize,
    /// Seconds, including both ground legs.
    pub latency_with_gs: f64,
    /// Seconds, inter-satellite links only.
    pub latency_isl_only: f64,
    /// Mean capacity of the traversed inter-satellite links, bit/s; zero
    /// when the path has no such link.
    pub mean_link_capacity: f64,
}

impl RouteResult {
    pub fn satellite_count(&self) -> usize {
        self.path.len()
    }
}

/// Attaches both stations and routes between their satellites.
pub fn route(
    source: &GroundStation,
    destination: &GroundStation,
    snapshot: &SatelliteSnapshot,
    topology: &TopologySnapshot,
    vis: &VisibilityConfig,
    radio: &RadioConfig,
    metric: RouteMetric,
) -> Result<RouteResult, RouteError> {
    let up = attach_gs(source, snapshot, vis, radio)?;
    let down = attach_gs(destination, snapshot, vis, radio)?;
    let dist = |a: usize, b: usize| snapshot.positions[a].distance(snapshot.positions[b]);
    let path = match metric {
        RouteMetric::Latency => shortest_path(topology, |a, b| isl_latency(dist(a, b)), up.satellite, down.satellite),
        RouteMetric::Score => shortest_path(
            topology,
            |a, b| (1.0 - topology.link_cost(a, b).unwrap_or(0.0)).max(0.0),
            up.satellite,
            down.satellite,
        ),
    }
    .ok_or(RouteError::NoRoute { from: up.satellite, to: down.satellite, slot: snapshot.slot })?;

    let hops: Vec<f64> = path.nodes.windows(2).map(|w| dist(w[0], w[1])).collect();
    let isl_latency_total: f64 = hops.iter().map(|&d| isl_latency(d)).sum();
    let mean_link_capacity = if hops.is_empty() {
        0.0
    } else {
        hops.iter().map(|&d| isl_capacity(d, radio).unwrap_or(0.0)).sum::<f64>() / hops.len() as f64
    };
    Ok(RouteResult {
        source: source.name.clone(),
        destination: destination.name.clone(),
        entry: up.satellite,
        exit: down.satellite,
        isl_hops: hops.len(),
        latency_with_gs: propagation_delay(up.slant_range) + isl_latency_total + propagation_delay(down.slant_range),
        latency_isl_only: isl_latency_total,
        mean_link_capacity,
        path: path.nodes,
    })
}
