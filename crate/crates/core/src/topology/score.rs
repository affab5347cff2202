//! Normalisation, link cost and the accumulated per-satellite score.

use serde::{Deserialize, Serialize};

use super::{LinkAssessment, TopologyError, TopologySnapshot};

/// Objective weights: capacity `w1`, latency `w2`, churn `1 - w1 - w2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeights", into = "RawWeights")]
pub struct Weights {
    capacity: f64,
    latency: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(default)]
struct RawWeights {
    w1: f64,
    w2: f64,
}

impl Default for RawWeights {
    fn default() -> Self {
        Weights::default().into()
    }
}

impl TryFrom<RawWeights> for Weights {
    type Error = TopologyError;
    fn try_from(raw: RawWeights) -> Result<Self, Self::Error> {
        Weights::new(raw.w1, raw.w2)
    }
}

impl From<Weights> for RawWeights {
    fn from(w: Weights) -> Self {
        RawWeights { w1: w.capacity, w2: w.latency }
    }
}

impl Default for Weights {
    fn default() -> Self {
        Self { capacity: 0.4, latency: 0.4 }
    }
}

impl Weights {
    pub fn new(capacity: f64, latency: f64) -> Result<Self, TopologyError> {
        let unit = 0.0..=1.0;
        if !unit.contains(&capacity) || !unit.contains(&latency) || capacity + latency > 1.0 + 1e-12 {
            return Err(TopologyError::Weights { w1: capacity, w2: latency });
        }
        Ok(Self { capacity, latency })
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn latency(&self) -> f64 {
        self.latency
    }

    pub fn churn(&self) -> f64 {
        (1.0 - self.capacity - self.latency).max(0.0)
    }
}

/// Largest capacity and latency seen on any visible pair so far.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunningMax {
    pub capacity: f64,
    pub latency: f64,
}

impl RunningMax {
    /// Folds one slot's visible pairs into the maxima. Invisible pairs are
    /// ignored, so a slot with nothing visible leaves the maxima unchanged.
    pub fn update(self, pairs: &[LinkAssessment]) -> RunningMax {
        pairs.iter().filter(|p| p.visible).fold(self, |m, p| RunningMax {
            capacity: m.capacity.max(p.capacity),
            latency: m.latency.max(p.latency),
        })
    }
}

/// Normalised capacity, latency and previous-link indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub capacity: f64,
    pub latency: f64,
    pub churn: f64,
}

pub fn normalize(
    capacity: f64,
    latency: f64,
    linked_before: bool,
    maxes: &RunningMax,
    max_links: usize,
) -> Result<Normalized, TopologyError> {
    if maxes.capacity <= 0.0 || maxes.latency <= 0.0 {
        return Err(TopologyError::Normalization);
    }
    Ok(Normalized {
        capacity: capacity / maxes.capacity,
        latency: latency / maxes.latency,
        churn: if linked_before { 1.0 / max_links as f64 } else { 0.0 },
    })
}

/// `w1·S̄ + w2·(1 − L̄) + (1 − w1 − w2)·φ̄`.
pub fn link_cost(n: &Normalized, weights: &Weights) -> f64 {
    weights.capacity * n.capacity
        + weights.latency * (1.0 - n.latency)
        + weights.churn() * n.churn
}

/// Score of linking towards a satellite whose previous score is `peer_score`.
pub fn score(cost: f64, peer_score: f64, visible: bool) -> f64 {
    if visible {
        cost + peer_score
    } else {
        0.0
    }
}

/// Per-satellite accumulated scores after `step` processed slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    /// Slots processed since the scores were last reset.
    pub step: usize,
    pub scores: Vec<f64>,
}

impl ScoreTable {
    pub fn zeros(satellites: usize) -> Self {
        Self { step: 0, scores: vec![0.0; satellites] }
    }

    pub fn get(&self, i: usize) -> f64 {
        self.scores[i]
    }
}

/// `Π_i = (1/U) Σ_j φ_ij (A_ij + Π_j(prev))`; isolated satellites score zero.
pub fn update_scores(prev: &ScoreTable, topology: &TopologySnapshot, max_links: usize) -> ScoreTable {
    let u = max_links as f64;
    let scores = (0..prev.scores.len())
        .map(|i| {
            topology
                .neighbors(i)
                .iter()
                .map(|&j| topology.link_cost(i, j as usize).unwrap_or(0.0) + prev.get(j as usize))
                .sum::<f64>()
                / u
        })
        .collect();
    ScoreTable { step: prev.step + 1, scores }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Link;
    use approx::assert_abs_diff_eq;

    fn pair(i: u32, j: u32, visible: bool, capacity: f64, latency: f64) -> LinkAssessment {
        LinkAssessment { i, j, visible, capacity, latency, ..LinkAssessment::default() }
    }

    #[test]
    fn weights_validation() {
        assert!(Weights::new(0.4, 0.4).is_ok());
        assert!(Weights::new(1.0, 0.0).is_ok());
        assert!(Weights::new(0.6, 0.5).is_err());
        assert!(Weights::new(-0.1, 0.5).is_err());
        assert_abs_diff_eq!(Weights::default().churn(), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn normalize_examples() {
        let m = RunningMax { capacity: 2e9, latency: 0.02 };
        let n = normalize(2e9, 0.01, true, &m, 4).unwrap();
        assert_eq!(n.capacity, 1.0);
        assert_eq!(n.latency, 0.5);
        assert_eq!(n.churn, 0.25);
        assert_eq!(
            normalize(1.0, 1.0, false, &RunningMax::default(), 4),
            Err(TopologyError::Normalization)
        );
    }

    #[test]
    fn running_max_rules() {
        let start = RunningMax { capacity: 5.0, latency: 0.5 };
        assert_eq!(start.update(&[]), start);
        assert_eq!(start.update(&[pair(0, 1, false, 99.0, 9.0)]), start);
        let up = start.update(&[pair(0, 1, true, 7.0, 0.1)]);
        assert_eq!(up, RunningMax { capacity: 7.0, latency: 0.5 });
        assert!(up.capacity >= start.capacity && up.latency >= start.latency);
    }

    #[test]
    fn link_cost_examples() {
        let w = Weights::default();
        let a = link_cost(&Normalized { capacity: 1.0, latency: 0.0, churn: 0.25 }, &w);
        assert_abs_diff_eq!(a, 0.85, epsilon = 1e-15);
        let z = link_cost(&Normalized { capacity: 0.0, latency: 0.0, churn: 0.0 }, &w);
        assert_abs_diff_eq!(z, 0.4, epsilon = 1e-15);
        let high = link_cost(&Normalized { capacity: 1.0, latency: 1e-9, churn: 0.25 }, &w);
        assert!(high < 1.0);
    }

    #[test]
    fn score_examples() {
        assert_eq!(score(0.7, 3.0, false), 0.0);
        assert_eq!(score(0.7, 0.0, true), 0.7);
        assert_eq!(score(0.5, 2.0, true), 2.5);
    }

    #[test]
    fn score_update_examples() {
        // Hub 0 with four spokes, each A = 0.8; satellite 5 isolated.
        let links = (1..=4).map(|j| Link { a: 0, b: j, cost: 0.8 }).collect();
        let topo = TopologySnapshot::from_links(0, 6, links);
        let next = update_scores(&ScoreTable::zeros(6), &topo, 4);
        assert_eq!(next.step, 1);
        assert_abs_diff_eq!(next.get(0), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(next.get(1), 0.2, epsilon = 1e-15);
        assert_eq!(next.get(5), 0.0);

        let again = update_scores(&next, &topo, 4);
        assert_abs_diff_eq!(again.get(0), (4.0 * 0.8 + 4.0 * 0.2) / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(again.get(1), (0.8 + 0.8) / 4.0, epsilon = 1e-15);
    }
}
