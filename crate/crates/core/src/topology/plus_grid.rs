//! Orbital plane clustering and the +Grid neighbour pattern.

use std::collections::BTreeSet;

use crate::orbital::SatelliteSnapshot;
use crate::tle::TleRecord;
use crate::vec3::Vec3;

use super::{Candidate, Link, TopologySnapshot};

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalPlane {
    /// Satellite indices, ascending.
    pub members: Vec<u32>,
    /// Circular mean RAAN, degrees in `[0, 360)`.
    pub raan: f64,
    pub inclination: f64,
}

/// Plane membership and plane adjacency derived from mean elements.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneModel {
    pub planes: Vec<OrbitalPlane>,
    plane_of: Vec<usize>,
    /// Neighbouring planes in the RAAN ring of the same inclination shell.
    adjacent: Vec<Vec<usize>>,
    /// In-plane reference axes (node direction, 90° ahead) per satellite.
    axes: Vec<(Vec3, Vec3)>,
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

fn circular_mean(angles: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = angles.fold((0.0, 0.0), |(s, c), a| {
        let r = a.to_radians();
        (s + r.sin(), c + r.cos())
    });
    s.atan2(c).to_degrees().rem_euclid(360.0)
}

/// Groups satellites whose RAAN and inclination agree with a plane's first
/// member within the given tolerances (degrees).
pub fn cluster_planes(records: &[TleRecord], raan_tol: f64, incl_tol: f64) -> PlaneModel {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| {
        records[a]
            .raan
            .total_cmp(&records[b].raan)
            .then(records[a].inclination.total_cmp(&records[b].inclination))
            .then(a.cmp(&b))
    });

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for idx in order {
        let r = &records[idx];
        let home = groups.iter_mut().find(|g| {
            let seed = &records[g[0]];
            angle_gap(seed.raan, r.raan) <= raan_tol
                && (seed.inclination - r.inclination).abs() <= incl_tol
        });
        match home {
            Some(g) => g.push(idx),
            None => groups.push(vec![idx]),
        }
    }

    let mut planes: Vec<OrbitalPlane> = groups
        .into_iter()
        .map(|mut g| {
            g.sort_unstable();
            let raan = circular_mean(g.iter().map(|&k| records[k].raan));
            let inclination = g.iter().map(|&k| records[k].inclination).sum::<f64>() / g.len() as f64;
            OrbitalPlane { members: g.into_iter().map(|k| k as u32).collect(), raan, inclination }
        })
        .collect();
    planes.sort_by(|a, b| a.raan.total_cmp(&b.raan).then(a.members[0].cmp(&b.members[0])));

    let mut plane_of = vec![0; records.len()];
    for (p, plane) in planes.iter().enumerate() {
        for &m in &plane.members {
            plane_of[m as usize] = p;
        }
    }

    // Shells: planes sharing an inclination; RAAN ring within each shell.
    let mut shells: Vec<Vec<usize>> = Vec::new();
    for p in 0..planes.len() {
        let inc = planes[p].inclination;
        match shells.iter_mut().find(|s| (planes[s[0]].inclination - inc).abs() <= incl_tol) {
            Some(s) => s.push(p),
            None => shells.push(vec![p]),
        }
    }
    let mut adjacent = vec![Vec::new(); planes.len()];
    for shell in &shells {
        let k = shell.len();
        if k < 2 {
            continue;
        }
        for (pos, &p) in shell.iter().enumerate() {
            let prev = shell[(pos + k - 1) % k];
            let next = shell[(pos + 1) % k];
            let mut adj = vec![prev, next];
            adj.sort_unstable();
            adj.dedup();
            adjacent[p] = adj;
        }
    }

    let axes = records
        .iter()
        .map(|r| {
            let (so, co) = r.raan.to_radians().sin_cos();
            let (si, ci) = r.inclination.to_radians().sin_cos();
            let node = Vec3::new(co, so, 0.0);
            let normal = Vec3::new(so * si, -co * si, ci);
            (node, normal.cross(node))
        })
        .collect();

    PlaneModel { planes, plane_of, adjacent, axes }
}

impl PlaneModel {
    pub fn plane_of(&self, sat: usize) -> usize {
        self.plane_of[sat]
    }

    pub fn adjacent_planes(&self, plane: usize) -> &[usize] {
        &self.adjacent[plane]
    }

    /// Argument of latitude of a satellite at its current position, radians.
    pub fn phase(&self, sat: usize, position: Vec3) -> f64 {
        let (p, q) = self.axes[sat];
        position.dot(q).atan2(position.dot(p)).rem_euclid(std::f64::consts::TAU)
    }

    /// In-plane ring neighbours first, then at most one link per satellite
    /// towards each adjacent plane, matched nearest-first. Only visible pairs
    /// (present in `candidates`) are used and degrees never exceed `max_links`.
    pub(super) fn select(
        &self,
        snapshot: &SatelliteSnapshot,
        candidates: &[Candidate],
        max_links: usize,
    ) -> TopologySnapshot {
        let n = snapshot.len();
        let lookup = |a: u32, b: u32| -> Option<&Candidate> {
            let key = (a.min(b), a.max(b));
            candidates.binary_search_by_key(&key, |c| (c.i, c.j)).ok().map(|k| &candidates[k])
        };
        let mut degree = vec![0usize; n];
        let mut links = Vec::new();
        let mut taken = BTreeSet::new();

        for plane in &self.planes {
            if plane.members.len() < 2 {
                continue;
            }
            let mut ring: Vec<(f64, u32)> = plane
                .members
                .iter()
                .map(|&m| (self.phase(m as usize, snapshot.positions[m as usize]), m))
                .collect();
            ring.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let k = ring.len();
            let steps = if k == 2 { 1 } else { k };
            for pos in 0..steps {
                let (a, b) = (ring[pos].1, ring[(pos + 1) % k].1);
                let key = (a.min(b), a.max(b));
                let Some(c) = lookup(a, b) else { continue };
                if taken.contains(&key) || degree[a as usize] >= max_links || degree[b as usize] >= max_links {
                    continue;
                }
                taken.insert(key);
                degree[a as usize] += 1;
                degree[b as usize] += 1;
                links.push(Link { a: key.0, b: key.1, cost: c.cost });
            }
        }

        // (satellite, neighbouring plane) slots already used.
        let mut side_used = BTreeSet::new();
        for p in 0..self.planes.len() {
            for &q in self.adjacent_planes(p) {
                if q < p {
                    continue;
                }
                let mut cross: Vec<(f64, u32, u32)> = Vec::new();
                for &a in &self.planes[p].members {
                    for &b in &self.planes[q].members {
                        if lookup(a, b).is_some() {
                            let d = snapshot.positions[a as usize].distance(snapshot.positions[b as usize]);
                            cross.push((d, a.min(b), a.max(b)));
                        }
                    }
                }
                cross.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
                for (_, a, b) in cross {
                    let (pa, pb) = (self.plane_of(a as usize), self.plane_of(b as usize));
                    if side_used.contains(&(a, pb))
                        || side_used.contains(&(b, pa))
                        || taken.contains(&(a, b))
                        || degree[a as usize] >= max_links
                        || degree[b as usize] >= max_links
                    {
                        continue;
                    }
                    side_used.insert((a, pb));
                    side_used.insert((b, pa));
                    taken.insert((a, b));
                    degree[a as usize] += 1;
                    degree[b as usize] += 1;
                    links.push(Link { a, b, cost: lookup(a, b).map_or(0.0, |c| c.cost) });
                }
            }
        }

        TopologySnapshot::from_links(snapshot.slot, n, links)
    }
}
