//! Fixtures shared by the benchmarks.

use chrono::{TimeZone, Utc};
use dotd_core::orbital::{snapshot_series, SatelliteSnapshot, TimeGrid};
use dotd_core::tle::TleRecord;
use dotd_core::walker::{synthetic_walker, WalkerParams};

/// Roughly `satellites` satellites in a 53° shell at 550 km with mild
/// jitter, spread over `planes` planes.
pub fn constellation(satellites: usize, planes: usize) -> Vec<TleRecord> {
    let per_plane = satellites.div_ceil(planes);
    let mut recs = synthetic_walker(&WalkerParams {
        planes,
        sats_per_plane: per_plane,
        raan_jitter: 2.0,
        phase_jitter: 4.0,
        seed: 11,
        ..Default::default()
    });
    recs.truncate(satellites);
    recs
}

/// `slots + 1` snapshots, `tau` seconds apart.
pub fn snapshots(records: &[TleRecord], tau: f64, slots: usize) -> Vec<SatelliteSnapshot> {
    let t0 = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
    let grid = TimeGrid::new(t0, tau, tau * slots as f64).expect("valid grid");
    snapshot_series(records, &grid).expect("circular orbits propagate")
}
