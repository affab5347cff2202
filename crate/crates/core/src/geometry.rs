//! Elevation, slant range and line-of-sight predicates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vec3::Vec3;
use crate::EARTH_RADIUS_KM;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("arccos argument {0} exceeds 1: orbit radius too small for the minimum elevation")]
    ElevationDomain(f64),
    #[error("negative radicand in slant range (radius {0} km)")]
    SlantDomain(f64),
    #[error("invalid visibility settings: {0}")]
    Config(String),
}

/// How the upper elevation bound of a ground-station link is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElevationCap {
    /// `arccos(R_e cos θ_min / H) − θ_min` for the satellite's radius.
    Computed,
    #[default]
    Fixed90,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VisibilityConfig {
    /// Minimum elevation angle, degrees.
    pub min_elevation: f64,
    pub max_elevation_mode: ElevationCap,
    /// Height of the blocking atmospheric shell above the surface, km.
    pub atmosphere_height: f64,
    /// Longest usable inter-satellite link, km.
    pub max_range: f64,
}

impl Default for VisibilityConfig {
    fn default() -> Self {
        Self {
            min_elevation: 25.0,
            max_elevation_mode: ElevationCap::Fixed90,
            atmosphere_height: 50.0,
            max_range: 7000.0,
        }
    }
}

impl VisibilityConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(0.0..90.0).contains(&self.min_elevation) {
            return Err(GeometryError::Config(format!(
                "minimum elevation {} outside [0, 90)",
                self.min_elevation
            )));
        }
        if !(self.atmosphere_height >= 0.0) {
            return Err(GeometryError::Config("atmosphere height must be >= 0".into()));
        }
        if !(self.max_range > 0.0) {
            return Err(GeometryError::Config("maximum ISL range must be > 0".into()));
        }
        Ok(())
    }

    /// Radius of the blocking shell, `R_e + γ`.
    pub fn blocking_radius(&self) -> f64 {
        EARTH_RADIUS_KM + self.atmosphere_height
    }
}

pub fn theta_max(min_elevation: f64, radius: f64) -> Result<f64, GeometryError> {
    let arg = EARTH_RADIUS_KM * min_elevation.to_radians().cos() / radius;
    if arg > 1.0 {
        return Err(GeometryError::ElevationDomain(arg));
    }
    Ok(arg.acos().to_degrees() - min_elevation)
}

/// Elevation of `sat` above the local horizon plane of `gs`, degrees.
pub fn elevation_angle(gs: Vec3, sat: Vec3) -> f64 {
    let up = gs * (1.0 / gs.norm());
    let los = sat - gs;
    (up.dot(los) / los.norm()).clamp(-1.0, 1.0).asin().to_degrees()
}

pub fn gs_visible(elevation: f64, cfg: &VisibilityConfig, radius: f64) -> bool {
    let upper = match cfg.max_elevation_mode {
        ElevationCap::Fixed90 => 90.0,
        ElevationCap::Computed => match theta_max(cfg.min_elevation, radius) {
            Ok(v) => v,
            Err(_) => return false,
        },
    };
    elevation >= cfg.min_elevation && elevation <= upper
}

/// Ground-to-satellite distance for an elevation angle and orbit radius.
pub fn slant_range(elevation: f64, radius: f64) -> Result<f64, GeometryError> {
    let re_sin = EARTH_RADIUS_KM * elevation.to_radians().sin();
    let h = radius - EARTH_RADIUS_KM;
    let radicand = re_sin * re_sin + h * h + 2.0 * EARTH_RADIUS_KM * h;
    if radicand < 0.0 {
        return Err(GeometryError::SlantDomain(radius));
    }
    Ok(-re_sin + radicand.sqrt())
}

pub fn isl_distance(a: Vec3, b: Vec3) -> f64 {
    a.distance(b)
}

/// Distance from the geocentre to the line through two satellites at radii
/// `ri`, `rj` separated by `d`. Heron's formula in Kahan's sorted form.
pub fn triangle_altitude(ri: f64, rj: f64, d: f64) -> f64 {
    if d == 0.0 {
        return ri.min(rj);
    }
    let mut s = [ri, rj, d];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if p <= 0.0 {
        return 0.0;
    }
    0.5 * p.sqrt() / d
}

/// Line of sight clears the atmosphere shell and the range limit.
pub fn isl_visible(ri: f64, rj: f64, d: f64, cfg: &VisibilityConfig) -> bool {
    d < cfg.max_range && triangle_altitude(ri, rj, d) > cfg.blocking_radius()
}
