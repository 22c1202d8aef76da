//! Per-link transmission energy and the energy-minimal transmit power.
//!
//! A helper at distance `r` sends `F` bits at the fading-averaged rate
//! `W·log₂(1 + P·g(r)/σ₀²)` and draws `P/η + P_c` watts while doing so. With
//! `y = 1 + P·g/σ₀²` the energy derivative has the sign of
//! `g(y) = y·ln y − y − ε` where `ε = g(r)·η·P_c/σ₀² − 1`. `g` is increasing on
//! `y > 1` and starts at `−(1 + ε) < 0`, so the optimum is either the
//! unique root of `g` or, when `g` is still non-positive at `P_max`, `P_max`
//! itself.

use crate::error::{Error, Result};
use crate::model::{path_gain, DemandModel, RadioConfig};

/// Bisection iteration cap; 200 halvings exhaust f64 resolution on any
/// bracket.
const BISECTION_ITERATIONS: usize = 200;

/// Root acceptance: `|g| ≤ ROOT_TOLERANCE · max(1, |ε|)`.
pub const ROOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PowerPolicy {
    /// Energy-minimal transmit power per link distance.
    Optimal,
    /// Always transmit at `P_max` (the transmission baseline).
    MaxPower,
}

impl PowerPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            PowerPolicy::Optimal => "optimal",
            PowerPolicy::MaxPower => "max",
        }
    }
}

impl std::str::FromStr for PowerPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(PowerPolicy::Optimal),
            "max" | "max_power" => Ok(PowerPolicy::MaxPower),
            other => Err(Error::Config(format!(
                "unknown power policy `{other}` (expected optimal or max)"
            ))),
        }
    }
}

/// Operating point of one D2D link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkEnergyResult {
    pub tx_power_w: f64,
    pub energy_joules: f64,
    pub rate_bps: f64,
    /// `g(r)·η·P_c/σ₀² − 1`.
    pub epsilon: f64,
    pub at_max_power: bool,
}

impl LinkEnergyResult {
    /// `y = 1 + P·g(r)/σ₀²` at the chosen power.
    pub fn snr_plus_one(&self, radio: &RadioConfig, distance_m: f64) -> Result<f64> {
        Ok(1.0 + self.tx_power_w * path_gain(radio, distance_m)? / radio.noise_power_w)
    }
}

fn check_power(tx_power_w: f64) -> Result<()> {
    if !(tx_power_w > 0.0) || !tx_power_w.is_finite() {
        return Err(Error::Domain(format!("transmit power must be > 0, got {tx_power_w}")));
    }
    Ok(())
}

/// `W·log₂(1 + P·g(r)/σ₀²)` in bits per second.
pub fn mean_rate(radio: &RadioConfig, tx_power_w: f64, distance_m: f64) -> Result<f64> {
    check_power(tx_power_w)?;
    let snr = tx_power_w * path_gain(radio, distance_m)? / radio.noise_power_w;
    Ok(radio.bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2)
}

/// Energy in joules to deliver one file at `tx_power_w` over `distance_m`.
///
/// Returns `f64::INFINITY` when the rate underflows to zero; callers test
/// `is_finite()` rather than receiving an arbitrarily large number.
pub fn link_energy(radio: &RadioConfig, demand: &DemandModel, tx_power_w: f64, distance_m: f64) -> Result<f64> {
    let rate = mean_rate(radio, tx_power_w, distance_m)?;
    Ok(energy_at_rate(radio, demand.file_size_bits, tx_power_w, rate))
}

fn energy_at_rate(radio: &RadioConfig, file_size_bits: f64, tx_power_w: f64, rate: f64) -> f64 {
    let duration = file_size_bits / rate;
    if rate <= 0.0 || !duration.is_finite() {
        return f64::INFINITY;
    }
    duration * (tx_power_w / radio.amp_efficiency + radio.circuit_power_w)
}

/// `(1+u)·ln(1+u) − u − κ`, i.e. `g(y)` at `y = 1 + u` with `κ = 1 + ε`.
/// Written in `u` so that small SNRs keep full precision.
fn stationarity(u: f64, kappa: f64) -> f64 {
    (1.0 + u) * u.ln_1p() - u - kappa
}

/// Energy-minimal transmit power for a link of length `distance_m`.
pub fn solve_optimal_power(radio: &RadioConfig, demand: &DemandModel, distance_m: f64) -> Result<LinkEnergyResult> {
    let a = path_gain(radio, distance_m)? / radio.noise_power_w;
    let kappa = a * radio.amp_efficiency * radio.circuit_power_w;
    let epsilon = kappa - 1.0;
    let u_max = a * radio.max_tx_power_w;

    let (u, at_max_power) = if stationarity(u_max, kappa) <= 0.0 {
        (u_max, true)
    } else {
        let tol = ROOT_TOLERANCE * epsilon.abs().max(1.0);
        let (mut lo, mut hi) = (0.0f64, u_max);
        let mut mid = 0.5 * hi;
        for _ in 0..BISECTION_ITERATIONS {
            mid = 0.5 * (lo + hi);
            let g = stationarity(mid, kappa);
            if g.abs() <= tol || mid <= lo || mid >= hi {
                break;
            }
            if g < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (mid, false)
    };

    let (tx_power_w, rate_bps) = if at_max_power {
        (radio.max_tx_power_w, mean_rate(radio, radio.max_tx_power_w, distance_m)?)
    } else {
        (u / a, radio.bandwidth_hz * u.ln_1p() / std::f64::consts::LN_2)
    };
    let energy_joules = energy_at_rate(radio, demand.file_size_bits, tx_power_w, rate_bps);
    Ok(LinkEnergyResult { tx_power_w, energy_joules, rate_bps, epsilon, at_max_power })
}

/// Link energy under `policy`.
pub fn policy_energy(radio: &RadioConfig, demand: &DemandModel, policy: PowerPolicy, distance_m: f64) -> Result<f64> {
    match policy {
        PowerPolicy::Optimal => Ok(solve_optimal_power(radio, demand, distance_m)?.energy_joules),
        PowerPolicy::MaxPower => link_energy(radio, demand, radio.max_tx_power_w, distance_m),
    }
}
