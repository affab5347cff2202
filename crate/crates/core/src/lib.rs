//! Dynamic topology design for LEO constellations.
//!
//! The pipeline runs TLE text → [`tle::TleRecord`]s → per-slot
//! [`orbital::SatelliteSnapshot`]s → per-slot [`topology::TopologySnapshot`]s
//! → ground-station routes and metric rows.

pub mod geometry;
pub mod link_budget;
pub mod orbital;
pub mod report;
pub mod routing;
pub mod tle;
pub mod topology;
pub mod vec3;
pub mod walker;

/// Earth's gravitational parameter, km³/s².
pub const EARTH_MU: f64 = 398600.4418;
/// Mean Earth radius, km.
pub const EARTH_RADIUS_KM: f64 = 6378.0;
/// m/s
pub const SPEED_OF_LIGHT: f64 = 3e8;

pub use geometry::{ElevationCap, VisibilityConfig};
pub use link_budget::RadioConfig;
pub use orbital::{snapshot_series, GroundStation, SatelliteSnapshot, TimeGrid};
pub use routing::{route, RouteMetric, RouteResult};
pub use tle::{parse_tle, TleRecord};
pub use topology::{run_algorithm, Algorithm, TopologyConfig, TopologyRun, TopologySnapshot};
pub use vec3::Vec3;
