//! Layered time-expanded graph over the slots of a run.

use serde::{Deserialize, Serialize};

use super::LinkAssessment;

/// Spatial link from satellite `from` in layer `slot` to satellite `to` in
/// layer `slot + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtegLink {
    pub slot: usize,
    pub from: u32,
    pub to: u32,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dteg {
    pub satellites: usize,
    /// Number of layers, one per grid instant.
    pub layers: usize,
    pub links: Vec<DtegLink>,
}

impl Dteg {
    pub fn node_count(&self) -> usize {
        self.satellites * self.layers
    }

    /// Flat node id of satellite `sat` in layer `slot`.
    pub fn node(&self, sat: usize, slot: usize) -> usize {
        slot * self.satellites + sat
    }

    pub fn links_in_layer(&self, slot: usize) -> impl Iterator<Item = &DtegLink> {
        self.links.iter().filter(move |l| l.slot == slot)
    }
}

/// Builds the graph from per-slot scored assessments. Layer `t` gets one
/// spatial link per visible pair of slot `t`, pointing into layer `t + 1`;
/// the final layer has no outgoing links.
pub fn build_dteg(satellites: usize, assessments: &[Vec<LinkAssessment>]) -> Dteg {
    let layers = assessments.len();
    let links = assessments
        .iter()
        .take(layers.saturating_sub(1))
        .enumerate()
        .flat_map(|(slot, pairs)| {
            pairs.iter().filter(|p| p.visible).map(move |p| DtegLink {
                slot,
                from: p.i,
                to: p.j,
                cost: p.cost,
            })
        })
        .collect();
    Dteg { satellites, layers, links }
}
