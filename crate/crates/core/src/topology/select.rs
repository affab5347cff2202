//! Degree-constrained greedy link selection.

use super::{Link, SelectionOrder, TopologySnapshot};

/// A selectable pair `i < j` with its directional scores and link cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub i: u32,
    pub j: u32,
    pub score_ij: f64,
    pub score_ji: f64,
    pub cost: f64,
}

impl Candidate {
    /// Symmetric ranking key: the mean of the two directional scores.
    pub fn pair_score(&self) -> f64 {
        0.5 * (self.score_ij + self.score_ji)
    }

    fn score_from(&self, from: u32) -> f64 {
        if from == self.i {
            self.score_ij
        } else {
            self.score_ji
        }
    }

    fn other(&self, from: u32) -> u32 {
        if from == self.i {
            self.j
        } else {
            self.i
        }
    }
}

/// Keeps the highest-scoring candidates subject to every satellite having at
/// most `max_links` links. Candidates with non-positive score are never taken.
pub fn select_links(
    candidates: &[Candidate],
    satellites: usize,
    max_links: usize,
    order: SelectionOrder,
    slot: usize,
) -> TopologySnapshot {
    let links = match order {
        SelectionOrder::Global => select_global(candidates, satellites, max_links),
        SelectionOrder::PerSatellite => select_per_satellite(candidates, satellites, max_links),
    };
    TopologySnapshot::from_links(slot, satellites, links)
}

fn select_global(candidates: &[Candidate], satellites: usize, max_links: usize) -> Vec<Link> {
    let mut ranked: Vec<&Candidate> = candidates.iter().filter(|c| c.pair_score() > 0.0).collect();
    ranked.sort_by(|x, y| {
        y.pair_score()
            .total_cmp(&x.pair_score())
            .then_with(|| (x.i.min(x.j), x.i.max(x.j)).cmp(&(y.i.min(y.j), y.i.max(y.j))))
    });
    let mut degree = vec![0usize; satellites];
    let mut links = Vec::new();
    for c in ranked {
        let (i, j) = (c.i as usize, c.j as usize);
        if degree[i] < max_links && degree[j] < max_links {
            degree[i] += 1;
            degree[j] += 1;
            links.push(Link { a: c.i, b: c.j, cost: c.cost });
        }
    }
    links
}

/// Satellites pick in index order, each taking its best remaining peers by
/// its own directional score until it or its peers are full.
fn select_per_satellite(candidates: &[Candidate], satellites: usize, max_links: usize) -> Vec<Link> {
    let mut incident: Vec<Vec<&Candidate>> = vec![Vec::new(); satellites];
    for c in candidates {
        incident[c.i as usize].push(c);
        incident[c.j as usize].push(c);
    }
    let mut degree = vec![0usize; satellites];
    let mut chosen = std::collections::BTreeSet::new();
    let mut links = Vec::new();
    for (sat, options) in incident.iter_mut().enumerate() {
        let me = sat as u32;
        options.sort_by(|x, y| {
            y.score_from(me)
                .total_cmp(&x.score_from(me))
                .then_with(|| x.other(me).cmp(&y.other(me)))
        });
        for c in options.iter() {
            if degree[sat] >= max_links {
                break;
            }
            let peer = c.other(me) as usize;
            let key = (c.i.min(c.j), c.i.max(c.j));
            if c.score_from(me) <= 0.0 || degree[peer] >= max_links || chosen.contains(&key) {
                continue;
            }
            chosen.insert(key);
            degree[sat] += 1;
            degree[peer] += 1;
            links.push(Link { a: key.0, b: key.1, cost: c.cost });
        }
    }
    links
}
