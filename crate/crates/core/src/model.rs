//! Domain types shared by every other module, unit conversions at the
//! configuration boundary, and the two elementary model functions: Zipf
//! request probabilities and the deterministic path gain.
//!
//! Everything inside the crate is SI: watts, meters, hertz, bits, joules.
//! dBm, MHz, Mbytes and mAh appear only in the `*_from_*` helpers below and in
//! the configuration loader.

use crate::error::{Error, Result};

/// Catalog of `catalog_size` files of `file_size_bits` each, requested with
/// Zipf popularity of exponent `zipf_exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandModel {
    pub catalog_size: usize,
    pub zipf_exponent: f64,
    pub file_size_bits: f64,
}

impl DemandModel {
    pub fn new(catalog_size: usize, zipf_exponent: f64, file_size_bits: f64) -> Result<Self> {
        let d = Self { catalog_size, zipf_exponent, file_size_bits };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.catalog_size == 0 {
            return Err(Error::Config("catalog_size must be at least 1".into()));
        }
        if !(self.zipf_exponent >= 0.0) || !self.zipf_exponent.is_finite() {
            return Err(Error::Config(format!(
                "zipf_exponent must be a finite value >= 0, got {}",
                self.zipf_exponent
            )));
        }
        if !(self.file_size_bits > 0.0) || !self.file_size_bits.is_finite() {
            return Err(Error::Config(format!(
                "file_size_bits must be > 0, got {}",
                self.file_size_bits
            )));
        }
        Ok(())
    }

    /// Same catalog with a different popularity exponent.
    pub fn with_exponent(&self, zipf_exponent: f64) -> Self {
        Self { zipf_exponent, ..*self }
    }
}

/// Distance metric used by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Topology {
    /// Square cell with hard edges; users near the border see fewer helpers.
    #[default]
    BoundedSquare,
    /// Square cell with wrap-around distance, free of edge effects.
    Torus,
}

impl Topology {
    pub fn name(&self) -> &'static str {
        match self {
            Topology::BoundedSquare => "bounded_square",
            Topology::Torus => "torus",
        }
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounded_square" => Ok(Topology::BoundedSquare),
            "torus" => Ok(Topology::Torus),
            other => Err(Error::Config(format!(
                "unknown topology `{other}` (expected bounded_square or torus)"
            ))),
        }
    }
}

/// User field and collaboration range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    /// Users per square meter.
    pub user_density: f64,
    /// Maximum helper-to-requester distance in meters.
    pub collaboration_distance: f64,
    /// Side of the simulated square cell in meters.
    pub cell_side: f64,
    pub topology: Topology,
}

impl NetworkConfig {
    pub fn new(
        user_density: f64,
        collaboration_distance: f64,
        cell_side: f64,
        topology: Topology,
    ) -> Result<Self> {
        let n = Self { user_density, collaboration_distance, cell_side, topology };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("user_density", self.user_density),
            ("collaboration_distance", self.collaboration_distance),
            ("cell_side", self.cell_side),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.collaboration_distance > self.cell_side {
            return Err(Error::Config(format!(
                "collaboration_distance {} exceeds cell_side {}",
                self.collaboration_distance, self.cell_side
            )));
        }
        Ok(())
    }

    pub fn with_collaboration_distance(&self, r_c: f64) -> Self {
        Self { collaboration_distance: r_c, ..*self }
    }

    /// Mean number of users inside a disc of radius `r_c`: `λ·π·r_c²`.
    pub fn disc_load(&self) -> f64 {
        self.user_density * std::f64::consts::PI * self.collaboration_distance.powi(2)
    }
}

/// Radio and power-consumption parameters of a D2D transmitter.
///
/// The path gain is `K·r^{-α}` with `K = 10^{-L₀/10}` where `L₀` is the loss
/// in dB at the 1 m reference distance. A zero intercept recovers the bare
/// `r^{-α}` law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConfig {
    pub bandwidth_hz: f64,
    /// Constant noise-plus-interference floor in watts.
    pub noise_power_w: f64,
    pub pathloss_db_at_1m: f64,
    pub pathloss_exponent: f64,
    pub max_tx_power_w: f64,
    pub amp_efficiency: f64,
    pub circuit_power_w: f64,
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_power_w", self.noise_power_w),
            ("pathloss_exponent", self.pathloss_exponent),
            ("max_tx_power_w", self.max_tx_power_w),
            ("circuit_power_w", self.circuit_power_w),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if !self.pathloss_db_at_1m.is_finite() {
            return Err(Error::Config("pathloss_db_at_1m must be finite".into()));
        }
        if !(self.amp_efficiency > 0.0 && self.amp_efficiency <= 1.0) {
            return Err(Error::Config(format!(
                "amp_efficiency must lie in (0, 1], got {}",
                self.amp_efficiency
            )));
        }
        if self.pathloss_exponent <= 2.0 {
            log::warn!(
                "pathloss exponent {} <= 2: unbounded-domain integrals may diverge",
                self.pathloss_exponent
            );
        }
        Ok(())
    }

    /// Linear intercept `K` of the gain law.
    pub fn gain_at_1m(&self) -> f64 {
        10f64.powf(-self.pathloss_db_at_1m / 10.0)
    }

    pub fn with_noise_power(&self, noise_power_w: f64) -> Self {
        Self { noise_power_w, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryConfig {
    pub capacity_mah: f64,
    pub voltage_v: f64,
}

impl BatteryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_mah > 0.0) || !(self.voltage_v > 0.0) {
            return Err(Error::Config(format!(
                "battery capacity and voltage must be > 0, got {} mAh at {} V",
                self.capacity_mah, self.voltage_v
            )));
        }
        Ok(())
    }

    /// Stored energy in joules: mAh · V · 3.6.
    pub fn energy_joules(&self) -> f64 {
        3.6 * self.voltage_v * self.capacity_mah
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1e3).log10()
}

pub fn mhz_to_hz(mhz: f64) -> f64 {
    mhz * 1e6
}

/// Decimal megabytes to bits (1 Mbyte = 10⁶ bytes).
pub fn mbytes_to_bits(mbytes: f64) -> f64 {
    mbytes * 8e6
}

/// Zipf request probabilities `p_r(i) = i^{-β} / Σ_k k^{-β}`, index 0 holding
/// the most popular file.
pub fn request_probabilities(demand: &DemandModel) -> Vec<f64> {
    let beta = demand.zipf_exponent;
    let weights: Vec<f64> = (1..=demand.catalog_size)
        .map(|i| if beta == 0.0 { 1.0 } else { (i as f64).powf(-beta) })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Linear power gain at `distance_m`:
/// `10^{-(L₀ + 10·α·log₁₀ r)/10}`.
pub fn path_gain(radio: &RadioConfig, distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(Error::Domain(format!("distance must be > 0, got {distance_m}")));
    }
    let loss_db = radio.pathloss_db_at_1m + 10.0 * radio.pathloss_exponent * distance_m.log10();
    Ok(10f64.powf(-loss_db / 10.0))
}
