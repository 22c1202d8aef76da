//! Experiment configuration: a TOML file of sectioned keys layered over a
//! named preset.
//!
//! ```toml
//! preset = "paper-2015"
//! radio.noise_dbm = -70
//! sweep.axis = "r_c"
//! sweep.values = [10, 20, 30]
//! ```
//!
//! Boundary units are dBm, MHz, Mbytes, mW and mAh; they are converted to SI
//! once in [`ExperimentConfig::resolve`].

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytics::AnalyticsOptions;
use crate::caching::CachingPolicy;
use crate::error::{Error, Result};
use crate::model::{
    dbm_to_watts, mbytes_to_bits, mhz_to_hz, BatteryConfig, DemandModel, NetworkConfig, RadioConfig, Topology,
};
use crate::power::PowerPolicy;
use crate::sim::SelfCacheHit;

pub const DEFAULT_PRESET: &str = "paper-2015";

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 2] = ["paper-2015", "desk-torus"];

macro_rules! section {
    ($(#[$meta:meta])* $name:ident { $($field:ident : $ty:ty),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(#[serde(skip_serializing_if = "Option::is_none")] pub $field: Option<$ty>,)*
        }

        impl $name {
            fn overlay(self, top: Self) -> Self {
                Self { $($field: top.$field.or(self.$field),)* }
            }
        }
    };
}

section!(DemandSection {
    catalog_size: usize,
    zipf_exponent: f64,
    file_size_mbytes: f64,
});

section!(NetSection {
    user_density: f64,
    collaboration_distance_m: f64,
    cell_side_m: f64,
    topology: String,
});

section!(RadioSection {
    bandwidth_mhz: f64,
    noise_dbm: f64,
    pathloss_db_at_1m: f64,
    pathloss_exponent: f64,
    max_tx_power_dbm: f64,
    amp_efficiency: f64,
    circuit_power_mw: f64,
});

section!(BatterySection {
    capacity_mah: f64,
    voltage_v: f64,
});

section!(
    /// Axis is one of `r_c`, `beta`, `lambda`, `noise_dbm`.
    SweepSection {
        axis: String,
        values: Vec<f64>,
    }
);

section!(PolicySection {
    caching: Vec<String>,
    power: Vec<String>,
});

section!(PowerGridSection {
    r_min_m: f64,
    r_max_m: f64,
    r_step_m: f64,
});

section!(McSection {
    realizations: u64,
    master_seed: u64,
    self_cache_hit: String,
    fading_draws: usize,
    histogram_bins: usize,
});

section!(
    /// A zero grid step selects exact per-distance power solves.
    AnalyticsSection {
        energy_grid_step_m: f64,
    }
);

/// The file layer: every key optional, unknown keys rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub demand: DemandSection,
    #[serde(default)]
    pub net: NetSection,
    #[serde(default)]
    pub radio: RadioSection,
    #[serde(default)]
    pub battery: BatterySection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub policies: PolicySection,
    #[serde(default)]
    pub power: PowerGridSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub analytics: AnalyticsSection,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }

    /// Keys set in `top` win over keys set in `self`.
    pub fn overlay(self, top: RawConfig) -> RawConfig {
        RawConfig {
            preset: top.preset.or(self.preset),
            output_dir: top.output_dir.or(self.output_dir),
            demand: self.demand.overlay(top.demand),
            net: self.net.overlay(top.net),
            radio: self.radio.overlay(top.radio),
            battery: self.battery.overlay(top.battery),
            sweep: self.sweep.overlay(top.sweep),
            policies: self.policies.overlay(top.policies),
            power: self.power.overlay(top.power),
            mc: self.mc.overlay(top.mc),
            analytics: self.analytics.overlay(top.analytics),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain data always serializes")
    }
}

fn paper_2015() -> RawConfig {
    RawConfig {
        preset: Some("paper-2015".into()),
        output_dir: None,
        demand: DemandSection { catalog_size: Some(1000), zipf_exponent: Some(1.0), file_size_mbytes: Some(30.0) },
        net: NetSection {
            user_density: Some(0.03),
            collaboration_distance_m: Some(100.0),
            cell_side_m: Some(1000.0),
            topology: Some("bounded_square".into()),
        },
        radio: RadioSection {
            bandwidth_mhz: Some(20.0),
            noise_dbm: Some(-95.0),
            pathloss_db_at_1m: Some(37.6),
            pathloss_exponent: Some(3.68),
            max_tx_power_dbm: Some(23.0),
            amp_efficiency: Some(0.2),
            circuit_power_mw: Some(115.9),
        },
        battery: BatterySection { capacity_mah: Some(1800.0), voltage_v: Some(4.0) },
        sweep: SweepSection { axis: Some("r_c".into()), values: Some((1..=20).map(|k| 10.0 * k as f64).collect()) },
        policies: PolicySection { caching: Some(vec!["optimal".into()]), power: Some(vec!["optimal".into()]) },
        power: PowerGridSection { r_min_m: Some(1.0), r_max_m: Some(300.0), r_step_m: Some(1.0) },
        mc: McSection {
            realizations: Some(20),
            master_seed: Some(2015),
            self_cache_hit: Some("exclude".into()),
            fading_draws: Some(0),
            histogram_bins: Some(0),
        },
        analytics: AnalyticsSection { energy_grid_step_m: Some(crate::analytics::DEFAULT_ENERGY_GRID_STEP) },
    }
}

/// Built-in parameter sets. `desk-torus` shrinks the cell to 300 m with
/// wrap-around edges so Monte Carlo runs stay short.
pub fn preset(name: &str) -> Result<RawConfig> {
    match name {
        "paper-2015" => Ok(paper_2015()),
        "desk-torus" => Ok(paper_2015().overlay(RawConfig {
            preset: Some("desk-torus".into()),
            net: NetSection { cell_side_m: Some(300.0), topology: Some("torus".into()), ..Default::default() },
            sweep: SweepSection { axis: None, values: Some(vec![10.0, 30.0, 50.0]) },
            mc: McSection { realizations: Some(50), ..Default::default() },
            ..Default::default()
        })),
        other => Err(Error::Config(format!("unknown preset `{other}` (known: {})", PRESETS.join(", ")))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    CollaborationDistance,
    ZipfExponent,
    UserDensity,
    NoiseDbm,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::CollaborationDistance => "r_c",
            SweepAxis::ZipfExponent => "beta",
            SweepAxis::UserDensity => "lambda",
            SweepAxis::NoiseDbm => "noise_dbm",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r_c" => Ok(SweepAxis::CollaborationDistance),
            "beta" => Ok(SweepAxis::ZipfExponent),
            "lambda" => Ok(SweepAxis::UserDensity),
            "noise_dbm" => Ok(SweepAxis::NoiseDbm),
            other => Err(Error::Config(format!(
                "unknown sweep axis `{other}` (expected r_c, beta, lambda or noise_dbm)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerGrid {
    pub r_min_m: f64,
    pub r_max_m: f64,
    pub r_step_m: f64,
}

impl PowerGrid {
    /// Grid points `r_min + k·step` up to `r_max` inclusive (within half a
    /// step of rounding).
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.r_max_m - self.r_min_m) / self.r_step_m + 1e-9).floor() as usize;
        (0..=n).map(|k| self.r_min_m + k as f64 * self.r_step_m).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub realizations: u64,
    pub master_seed: u64,
    pub self_cache_hit: SelfCacheHit,
    /// Rayleigh draws for the rate-approximation diagnostic; 0 disables it.
    pub fading_draws: usize,
    /// Bins of the link-distance histogram file; 0 disables it.
    pub histogram_bins: usize,
}

/// A fully resolved experiment in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub demand: DemandModel,
    pub net: NetworkConfig,
    pub radio: RadioConfig,
    pub battery: BatteryConfig,
    pub sweep: Sweep,
    pub caching_policies: Vec<CachingPolicy>,
    pub power_policies: Vec<PowerPolicy>,
    pub power_grid: PowerGrid,
    pub mc: McSettings,
    pub analytics: AnalyticsOptions,
    pub output_dir: Option<PathBuf>,
    /// The merged key set this configuration was resolved from.
    pub raw: RawConfig,
}

fn need<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing key `{key}`")))
}

fn positive(v: f64, key: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("`{key}` must be > 0, got {v}")))
    }
}

fn parse_list<T: FromStr<Err = Error>>(names: Vec<String>, key: &str) -> Result<Vec<T>> {
    if names.is_empty() {
        return Err(Error::Config(format!("`{key}` must list at least one policy")));
    }
    names.iter().map(|n| n.parse::<T>()).collect()
}

impl ExperimentConfig {
    /// Layers `file` over the preset it names (or `preset_override`, or the
    /// default preset) and converts to SI.
    pub fn from_layers(file: RawConfig, preset_override: Option<&str>) -> Result<Self> {
        let name = preset_override
            .map(str::to_owned)
            .or_else(|| file.preset.clone())
            .unwrap_or_else(|| DEFAULT_PRESET.to_owned());
        let mut merged = preset(&name)?.overlay(file);
        merged.preset = Some(name);
        Self::resolve(merged)
    }

    pub fn load(path: &Path, preset_override: Option<&str>) -> Result<Self> {
        Self::from_layers(RawConfig::load(path)?, preset_override)
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::from_layers(RawConfig::default(), Some(name))
    }

    pub fn resolve(raw: RawConfig) -> Result<Self> {
        let d = raw.demand.clone();
        let demand = DemandModel::new(
            need(d.catalog_size, "demand.catalog_size")?,
            need(d.zipf_exponent, "demand.zipf_exponent")?,
            mbytes_to_bits(positive(need(d.file_size_mbytes, "demand.file_size_mbytes")?, "demand.file_size_mbytes")?),
        )?;

        let n = raw.net.clone();
        let topology: Topology = need(n.topology, "net.topology")?.parse()?;
        let net = NetworkConfig::new(
            need(n.user_density, "net.user_density")?,
            need(n.collaboration_distance_m, "net.collaboration_distance_m")?,
            need(n.cell_side_m, "net.cell_side_m")?,
            topology,
        )?;

        let r = raw.radio.clone();
        let radio = RadioConfig {
            bandwidth_hz: mhz_to_hz(need(r.bandwidth_mhz, "radio.bandwidth_mhz")?),
            noise_power_w: dbm_to_watts(need(r.noise_dbm, "radio.noise_dbm")?),
            pathloss_db_at_1m: need(r.pathloss_db_at_1m, "radio.pathloss_db_at_1m")?,
            pathloss_exponent: need(r.pathloss_exponent, "radio.pathloss_exponent")?,
            max_tx_power_w: dbm_to_watts(need(r.max_tx_power_dbm, "radio.max_tx_power_dbm")?),
            amp_efficiency: need(r.amp_efficiency, "radio.amp_efficiency")?,
            circuit_power_w: need(r.circuit_power_mw, "radio.circuit_power_mw")? * 1e-3,
        };
        radio.validate()?;

        let battery = BatteryConfig {
            capacity_mah: need(raw.battery.capacity_mah, "battery.capacity_mah")?,
            voltage_v: need(raw.battery.voltage_v, "battery.voltage_v")?,
        };
        battery.validate()?;

        let axis: SweepAxis = need(raw.sweep.axis.clone(), "sweep.axis")?.parse()?;
        let values = need(raw.sweep.values.clone(), "sweep.values")?;
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("`sweep.values` must be a non-empty list of finite numbers".into()));
        }

        let caching_policies = parse_list(need(raw.policies.caching.clone(), "policies.caching")?, "policies.caching")?;
        let power_policies = parse_list(need(raw.policies.power.clone(), "policies.power")?, "policies.power")?;

        let power_grid = PowerGrid {
            r_min_m: positive(need(raw.power.r_min_m, "power.r_min_m")?, "power.r_min_m")?,
            r_max_m: positive(need(raw.power.r_max_m, "power.r_max_m")?, "power.r_max_m")?,
            r_step_m: positive(need(raw.power.r_step_m, "power.r_step_m")?, "power.r_step_m")?,
        };
        if power_grid.r_max_m < power_grid.r_min_m {
            return Err(Error::Config("`power.r_max_m` must not be below `power.r_min_m`".into()));
        }

        let m = raw.mc.clone();
        let mc = McSettings {
            realizations: need(m.realizations, "mc.realizations")?,
            master_seed: need(m.master_seed, "mc.master_seed")?,
            self_cache_hit: need(m.self_cache_hit, "mc.self_cache_hit")?.parse()?,
            fading_draws: need(m.fading_draws, "mc.fading_draws")?,
            histogram_bins: need(m.histogram_bins, "mc.histogram_bins")?,
        };
        if mc.realizations == 0 {
            return Err(Error::Config("`mc.realizations` must be at least 1".into()));
        }

        let step = need(raw.analytics.energy_grid_step_m, "analytics.energy_grid_step_m")?;
        let analytics = if step == 0.0 {
            AnalyticsOptions::exact()
        } else {
            AnalyticsOptions { energy_grid_step: Some(positive(step, "analytics.energy_grid_step_m")?) }
        };

        Ok(Self {
            demand,
            net,
            radio,
            battery,
            sweep: Sweep { axis, values },
            caching_policies,
            power_policies,
            power_grid,
            mc,
            analytics,
            output_dir: raw.output_dir.clone().map(PathBuf::from),
            raw,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.mc.master_seed = seed;
        self.raw.mc.master_seed = Some(seed);
        self
    }

    pub fn with_output_dir(mut self, dir: PathBuf) -> Self {
        self.raw.output_dir = Some(dir.display().to_string());
        self.output_dir = Some(dir);
        self
    }

    /// Applies one sweep value to a copy of the model parameters.
    pub fn at_sweep_value(&self, value: f64) -> Result<(DemandModel, NetworkConfig, RadioConfig)> {
        let mut demand = self.demand;
        let mut net = self.net;
        let mut radio = self.radio;
        match self.sweep.axis {
            SweepAxis::CollaborationDistance => net.collaboration_distance = value,
            SweepAxis::ZipfExponent => demand.zipf_exponent = value,
            SweepAxis::UserDensity => net.user_density = value,
            SweepAxis::NoiseDbm => radio.noise_power_w = dbm_to_watts(value),
        }
        demand.validate()?;
        net.validate()?;
        radio.validate()?;
        Ok((demand, net, radio))
    }

    /// The merged configuration as TOML, with SI-converted values left in
    /// their boundary units. Loading it reproduces this configuration.
    pub fn to_toml(&self) -> String {
        self.raw.to_toml()
    }
}
