//! Synthetic Walker-delta constellations expressed as TLE records.

use std::f64::consts::TAU;

use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::tle::TleRecord;
use crate::{EARTH_MU, EARTH_RADIUS_KM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkerParams {
    pub planes: usize,
    pub sats_per_plane: usize,
    /// km above the mean Earth radius.
    pub altitude: f64,
    /// degrees
    pub inclination: f64,
    /// Walker phasing factor `F`.
    pub phasing: usize,
    /// Uniform RAAN perturbation amplitude, degrees.
    pub raan_jitter: f64,
    /// Uniform mean-anomaly perturbation amplitude, degrees.
    pub phase_jitter: f64,
    pub seed: u64,
    pub epoch: DateTime<Utc>,
}

impl Default for WalkerParams {
    fn default() -> Self {
        Self {
            planes: 8,
            sats_per_plane: 12,
            altitude: 550.0,
            inclination: 53.0,
            phasing: 1,
            raan_jitter: 0.0,
            phase_jitter: 0.0,
            seed: 0,
            epoch: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
        }
    }
}

/// Mean motion in revolutions per day of a circular orbit at `altitude` km.
pub fn circular_mean_motion(altitude: f64) -> f64 {
    let a = EARTH_RADIUS_KM + altitude;
    (EARTH_MU / (a * a * a)).sqrt() * 86_400.0 / TAU
}

/// Circular orbits, plane-major order: satellite `p * S + s` is slot `s` of
/// plane `p`. Jitter is drawn from a ChaCha8 stream seeded by `seed`.
pub fn synthetic_walker(params: &WalkerParams) -> Vec<TleRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (p_count, s_count) = (params.planes, params.sats_per_plane);
    let total = (p_count * s_count) as f64;
    let mean_motion = circular_mean_motion(params.altitude);
    let mut jitter = |amp: f64| if amp > 0.0 { rng.gen_range(-amp..=amp) } else { 0.0 };
    let mut out = Vec::with_capacity(p_count * s_count);
    for p in 0..p_count {
        for s in 0..s_count {
            let raan = 360.0 * p as f64 / p_count as f64 + jitter(params.raan_jitter);
            let ma = 360.0 * s as f64 / s_count as f64
                + 360.0 * (params.phasing * p) as f64 / total
                + jitter(params.phase_jitter);
            let idx = p * s_count + s;
            out.push(TleRecord {
                name: format!("WALKER-{p}-{s}"),
                catalog_id: 1 + idx as u32,
                epoch: params.epoch,
                inclination: params.inclination,
                raan: raan.rem_euclid(360.0),
                eccentricity: 0.0,
                arg_perigee: 0.0,
                mean_anomaly: ma.rem_euclid(360.0),
                mean_motion,
                revolution_number: 0,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbital::orbital_period;

    #[test]
    fn layout_and_period() {
        let recs = synthetic_walker(&WalkerParams { planes: 4, sats_per_plane: 6, ..Default::default() });
        assert_eq!(recs.len(), 24);
        assert_eq!(recs[7].raan, 90.0);
        // Plane 1 is offset by F * 360 / (P * S) = 15°.
        assert!((recs[6].mean_anomaly - 15.0).abs() < 1e-12);
        // Roughly 95.6 minutes at 550 km.
        let period = orbital_period(&recs[0]);
        assert!((period / 60.0 - 95.6).abs() < 0.2, "{period}");
    }

    #[test]
    fn two_satellite_plane_is_antipodal() {
        let recs = synthetic_walker(&WalkerParams { planes: 1, sats_per_plane: 2, ..Default::default() });
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].mean_anomaly - recs[0].mean_anomaly, 180.0);
        assert_eq!(recs[0].raan, recs[1].raan);
    }

    #[test]
    fn unjittered_raan_spacing_is_exact() {
        let recs = synthetic_walker(&WalkerParams { planes: 5, sats_per_plane: 1, ..Default::default() });
        for (p, r) in recs.iter().enumerate() {
            assert_eq!(r.raan, 72.0 * p as f64);
        }
    }

    #[test]
    fn seeded_jitter_is_reproducible() {
        let p = WalkerParams { raan_jitter: 1.0, phase_jitter: 2.0, seed: 7, ..Default::default() };
        assert_eq!(synthetic_walker(&p), synthetic_walker(&p));
        let q = WalkerParams { seed: 8, ..p.clone() };
        assert_ne!(synthetic_walker(&p), synthetic_walker(&q));
        for (r, base) in synthetic_walker(&p).iter().zip(synthetic_walker(&WalkerParams::default())) {
            let gap = (r.raan - base.raan + 180.0).rem_euclid(360.0) - 180.0;
            assert!(gap.abs() <= 1.0 + 1e-9);
        }
    }
}
