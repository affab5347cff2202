//! Free-space channel gains, Shannon capacities and propagation delays for
//! ground-to-satellite and inter-satellite links.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{gs_visible, slant_range, VisibilityConfig};
use crate::SPEED_OF_LIGHT;

const BOLTZMANN: f64 = 1.380_649e-23;
const REFERENCE_TEMPERATURE_K: f64 = 290.0;

#[derive(Debug, Error, PartialEq)]
pub enum LinkError {
    #[error("link distance must be positive, got {0} km")]
    Distance(f64),
    #[error("invalid radio settings: {0}")]
    Config(String),
}

/// Radio parameters shared by both link classes. Gains in dBi, losses in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadioConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_w: f64,
    pub noise_power_w: f64,
    pub gs_gain_dbi: f64,
    pub sat_gain_dbi: f64,
    pub isl_tx_gain_dbi: f64,
    pub isl_rx_gain_dbi: f64,
    pub polarization_loss_db: f64,
    pub misalignment_loss_db: f64,
    /// Linear weather attenuation on ground links, `(0, 1]`.
    pub weather_factor: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        let bandwidth_hz = 100e6;
        Self {
            carrier_hz: 12.2e9,
            bandwidth_hz,
            tx_power_w: 10.0,
            noise_power_w: BOLTZMANN * REFERENCE_TEMPERATURE_K * bandwidth_hz,
            gs_gain_dbi: 33.2,
            sat_gain_dbi: 40.0,
            isl_tx_gain_dbi: 40.0,
            isl_rx_gain_dbi: 40.0,
            polarization_loss_db: 4.5,
            misalignment_loss_db: 0.5,
            weather_factor: 1.0,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<(), LinkError> {
        let positive = [
            ("carrier frequency", self.carrier_hz),
            ("bandwidth", self.bandwidth_hz),
            ("transmit power", self.tx_power_w),
            ("noise power", self.noise_power_w),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(LinkError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.weather_factor > 0.0 && self.weather_factor <= 1.0) {
            return Err(LinkError::Config(format!(
                "weather factor {} outside (0, 1]",
                self.weather_factor
            )));
        }
        if self.polarization_loss_db < 0.0 || self.misalignment_loss_db < 0.0 {
            return Err(LinkError::Config("losses are attenuations and must be >= 0 dB".into()));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `(λ / 4πd)²` with `d` in km.
pub fn fspl_gain(distance_km: f64, carrier_hz: f64) -> Result<f64, LinkError> {
    if !(distance_km > 0.0) {
        return Err(LinkError::Distance(distance_km));
    }
    let wavelength = SPEED_OF_LIGHT / carrier_hz;
    let x = wavelength / (4.0 * PI * distance_km * 1e3);
    Ok(x * x)
}

pub fn shannon_capacity(bandwidth_hz: f64, snr: f64) -> f64 {
    bandwidth_hz * (1.0 + snr).log2()
}

pub fn gs_channel_gain(distance_km: f64, cfg: &RadioConfig) -> Result<f64, LinkError> {
    Ok(fspl_gain(distance_km, cfg.carrier_hz)?
        * cfg.weather_factor
        * db_to_linear(cfg.gs_gain_dbi)
        * db_to_linear(cfg.sat_gain_dbi))
}

/// Ground link capacity in bit/s.
pub fn gs_capacity(distance_km: f64, cfg: &RadioConfig) -> Result<f64, LinkError> {
    let snr = cfg.tx_power_w * gs_channel_gain(distance_km, cfg)? / cfg.noise_power_w;
    Ok(shannon_capacity(cfg.bandwidth_hz, snr))
}

pub fn isl_channel_gain(distance_km: f64, cfg: &RadioConfig) -> Result<f64, LinkError> {
    Ok(fspl_gain(distance_km, cfg.carrier_hz)?
        * db_to_linear(-cfg.polarization_loss_db)
        * db_to_linear(-cfg.misalignment_loss_db)
        * db_to_linear(cfg.isl_rx_gain_dbi)
        * db_to_linear(cfg.isl_tx_gain_dbi))
}

/// Inter-satellite link capacity in bit/s.
pub fn isl_capacity(distance_km: f64, cfg: &RadioConfig) -> Result<f64, LinkError> {
    let snr = cfg.tx_power_w * isl_channel_gain(distance_km, cfg)? / cfg.noise_power_w;
    Ok(shannon_capacity(cfg.bandwidth_hz, snr))
}

/// One-way propagation delay in seconds.
pub fn propagation_delay(distance_km: f64) -> f64 {
    distance_km * 1e3 / SPEED_OF_LIGHT
}

pub fn isl_latency(distance_km: f64) -> f64 {
    propagation_delay(distance_km)
}

/// Ground-link quality `delay + 1/capacity` (seconds); `None` when the
/// satellite is outside the visible elevation band.
pub fn gs_link_quality(
    elevation: f64,
    radius: f64,
    radio: &RadioConfig,
    vis: &VisibilityConfig,
) -> Option<f64> {
    if !gs_visible(elevation, vis, radius) {
        return None;
    }
    let d = slant_range(elevation, radius).ok()?;
    let capacity = gs_capacity(d, radio).ok()?;
    Some(propagation_delay(d) + 1.0 / capacity)
}
