//! Two-body propagation of mean elements and ground-station placement in
//! the Earth-centred inertial frame.

use std::f64::consts::{PI, TAU};

use chrono::{DateTime, Duration as ChronoDuration, TimeZone, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tle::TleRecord;
use crate::vec3::Vec3;
use crate::{EARTH_MU, EARTH_RADIUS_KM};

const KEPLER_TOLERANCE: f64 = 1e-12;
const KEPLER_MAX_ITERATIONS: usize = 50;
/// Beyond this offset from epoch two-body mean elements drift noticeably.
const ACCURACY_WINDOW_DAYS: i64 = 7;

#[derive(Debug, Error, PartialEq)]
pub enum OrbitError {
    #[error("Kepler iteration did not converge for M={mean_anomaly}, e={eccentricity} (residual {residual:e})")]
    KeplerDiverged { mean_anomaly: f64, eccentricity: f64, residual: f64 },
    #[error("eccentricity {0} outside [0, 1)")]
    Eccentricity(f64),
    #[error("satellite {catalog_id} ({name}): {source}")]
    Satellite {
        catalog_id: u32,
        name: String,
        #[source]
        source: Box<OrbitError>,
    },
    #[error("invalid time grid: {0}")]
    TimeGrid(String),
    #[error("ground station {name}: {reason}")]
    GroundStation { name: String, reason: String },
    #[error("no satellites to propagate")]
    NoSatellites,
}

/// Evenly spaced sampling instants `t0, t0 + τ, …, t0 + T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    start: DateTime<Utc>,
    slot_secs: f64,
    horizon_secs: f64,
}

impl TimeGrid {
    pub fn new(start: DateTime<Utc>, slot_secs: f64, horizon_secs: f64) -> Result<Self, OrbitError> {
        if !(slot_secs > 0.0) || !slot_secs.is_finite() {
            return Err(OrbitError::TimeGrid(format!("slot length {slot_secs} s must be positive")));
        }
        if !(horizon_secs >= slot_secs) || !horizon_secs.is_finite() {
            return Err(OrbitError::TimeGrid(format!(
                "horizon {horizon_secs} s shorter than slot length {slot_secs} s"
            )));
        }
        let ratio = horizon_secs / slot_secs;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(OrbitError::TimeGrid(format!(
                "horizon {horizon_secs} s is not a whole number of {slot_secs} s slots"
            )));
        }
        Ok(Self { start, slot_secs, horizon_secs })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn slot_secs(&self) -> f64 {
        self.slot_secs
    }

    pub fn horizon_secs(&self) -> f64 {
        self.horizon_secs
    }

    /// Number of slot intervals; the grid has `slot_count() + 1` instants.
    pub fn slot_count(&self) -> usize {
        (self.horizon_secs / self.slot_secs).round() as usize
    }

    pub fn instant(&self, slot: usize) -> DateTime<Utc> {
        let nanos = (slot as f64 * self.slot_secs * 1e9).round() as i64;
        self.start + ChronoDuration::nanoseconds(nanos)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStation {
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
    #[serde(default)]
    pub altitude: f64,
}

impl GroundStation {
    pub fn new(name: impl Into<String>, latitude: f64, longitude: f64) -> Result<Self, OrbitError> {
        let gs = Self { name: name.into(), latitude, longitude, altitude: 0.0 };
        gs.validate()?;
        Ok(gs)
    }

    pub fn validate(&self) -> Result<(), OrbitError> {
        let fail = |reason: String| OrbitError::GroundStation { name: self.name.clone(), reason };
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(fail(format!("latitude {} outside [-90, 90]", self.latitude)));
        }
        if !(self.longitude > -180.0 && self.longitude <= 180.0) {
            return Err(fail(format!("longitude {} outside (-180, 180]", self.longitude)));
        }
        if !self.altitude.is_finite() {
            return Err(fail("altitude is not finite".into()));
        }
        Ok(())
    }
}

/// Positions of every satellite at one grid instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SatelliteSnapshot {
    pub slot: usize,
    pub instant: DateTime<Utc>,
    pub positions: Vec<Vec3>,
    /// Geocentric radius of each satellite, km.
    pub radii: Vec<f64>,
}

impl SatelliteSnapshot {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Solves `E - e sin E = M` by Newton iteration.
pub fn solve_kepler(mean_anomaly: f64, eccentricity: f64) -> Result<f64, OrbitError> {
    if !(0.0..1.0).contains(&eccentricity) {
        return Err(OrbitError::Eccentricity(eccentricity));
    }
    let residual = |e_anom: f64| e_anom - eccentricity * e_anom.sin() - mean_anomaly;
    let mut e_anom = if eccentricity > 0.8 { PI } else { mean_anomaly };
    for _ in 0..KEPLER_MAX_ITERATIONS {
        let f = residual(e_anom);
        if f.abs() < KEPLER_TOLERANCE {
            return Ok(e_anom);
        }
        e_anom -= f / (1.0 - eccentricity * e_anom.cos());
    }
    let r = residual(e_anom);
    if r.abs() < KEPLER_TOLERANCE {
        Ok(e_anom)
    } else {
        Err(OrbitError::KeplerDiverged { mean_anomaly, eccentricity, residual: r })
    }
}

/// Mean motion in rad/s.
pub fn mean_motion_rad_s(record: &TleRecord) -> f64 {
    record.mean_motion * TAU / 86_400.0
}

/// Semi-major axis in km from mean motion.
pub fn semi_major_axis(record: &TleRecord) -> f64 {
    let n = mean_motion_rad_s(record);
    (EARTH_MU / (n * n)).cbrt()
}

/// Orbital period in seconds.
pub fn orbital_period(record: &TleRecord) -> f64 {
    TAU / mean_motion_rad_s(record)
}

fn seconds_between(from: DateTime<Utc>, to: DateTime<Utc>) -> f64 {
    let d = to - from;
    match d.num_nanoseconds() {
        Some(ns) => ns as f64 * 1e-9,
        None => d.num_milliseconds() as f64 * 1e-3,
    }
}

/// ECI position (km) of a satellite at `instant` under two-body motion.
pub fn propagate(record: &TleRecord, instant: DateTime<Utc>) -> Result<Vec3, OrbitError> {
    let n = mean_motion_rad_s(record);
    let a = semi_major_axis(record);
    let e = record.eccentricity;
    let dt = seconds_between(record.epoch, instant);
    let mean_anomaly = (record.mean_anomaly.to_radians() + n * dt).rem_euclid(TAU);
    let ecc_anomaly = solve_kepler(mean_anomaly, e)?;

    let (sin_e, cos_e) = ecc_anomaly.sin_cos();
    let px = a * (cos_e - e);
    let py = a * (1.0 - e * e).sqrt() * sin_e;
    Ok(perifocal_to_eci(record, px, py))
}

fn perifocal_to_eci(record: &TleRecord, px: f64, py: f64) -> Vec3 {
    let (sw, cw) = record.arg_perigee.to_radians().sin_cos();
    let (si, ci) = record.inclination.to_radians().sin_cos();
    let (so, co) = record.raan.to_radians().sin_cos();
    // R3(-Ω) · R1(-i) · R3(-ω)
    let x = (co * cw - so * sw * ci) * px + (-co * sw - so * cw * ci) * py;
    let y = (so * cw + co * sw * ci) * px + (-so * sw + co * cw * ci) * py;
    let z = (sw * si) * px + (cw * si) * py;
    Vec3::new(x, y, z)
}

/// Greenwich mean sidereal time in radians, `[0, 2π)`, treating UTC as UT1.
pub fn gmst(instant: DateTime<Utc>) -> f64 {
    let j2000 = Utc.with_ymd_and_hms(2000, 1, 1, 12, 0, 0).unwrap();
    let days = seconds_between(j2000, instant) / 86_400.0;
    let t = days / 36_525.0;
    let seconds = 67_310.548_41
        + (876_600.0 * 3_600.0 + 8_640_184.812_866) * t
        + 0.093_104 * t * t
        - 6.2e-6 * t * t * t;
    (seconds.rem_euclid(86_400.0) / 86_400.0 * TAU).rem_euclid(TAU)
}

/// Ground station position on a spherical Earth, rotated into ECI.
pub fn ground_station_eci(gs: &GroundStation, instant: DateTime<Utc>) -> Vec3 {
    let r = EARTH_RADIUS_KM + gs.altitude;
    let (slat, clat) = gs.latitude.to_radians().sin_cos();
    let lon = gs.longitude.to_radians() + gmst(instant);
    let (slon, clon) = lon.sin_cos();
    Vec3::new(r * clat * clon, r * clat * slon, r * slat)
}

/// Propagates every record to each of the `slot_count() + 1` grid instants.
pub fn snapshot_series(
    records: &[TleRecord],
    grid: &TimeGrid,
) -> Result<Vec<SatelliteSnapshot>, OrbitError> {
    if records.is_empty() {
        return Err(OrbitError::NoSatellites);
    }
    let last = grid.instant(grid.slot_count());
    for r in records {
        let window = ChronoDuration::days(ACCURACY_WINDOW_DAYS);
        if grid.start() < r.epoch - window || last > r.epoch + window {
            log::warn!(
                "satellite {} propagated more than {ACCURACY_WINDOW_DAYS} days from its epoch",
                r.catalog_id
            );
        }
    }
    (0..=grid.slot_count())
        .into_par_iter()
        .map(|slot| {
            let instant = grid.instant(slot);
            let positions = records
                .iter()
                .map(|r| {
                    propagate(r, instant).map_err(|e| OrbitError::Satellite {
                        catalog_id: r.catalog_id,
                        name: r.name.clone(),
                        source: Box::new(e),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let radii = positions.iter().map(|p| p.norm()).collect();
            Ok(SatelliteSnapshot { slot, instant, positions, radii })
        })
        .collect()
}
