//! Link-distance density, average helper energy, energy cost ratio and the
//! offloading/energy tradeoff across collaboration distances.
//!
//! The distance from a requester of file `i` to its nearest helper is
//! Rayleigh-like with density `2πrλp_c(i)·exp(−λp_c(i)πr²)`. The average helper
//! energy weights the per-link energy by that density on `[0, r_c]` and by the
//! request probability, so non-offloaded requests contribute zero. Dividing by
//! the offloading ratio gives the average over offloaded requests only.

use std::cell::RefCell;

use rayon::prelude::*;

use crate::caching::{offloading_ratio, CachingPolicy};
use crate::error::{Error, Result};
use crate::model::{request_probabilities, BatteryConfig, DemandModel, NetworkConfig, RadioConfig};
use crate::power::{policy_energy, PowerPolicy};
use crate::quadrature::{gauss7, integrate, DEFAULT_MAX_SUBDIVISIONS};

/// Absolute quadrature tolerance relative to the largest link energy on
/// `[0, r_c]`.
pub const QUADRATURE_RELATIVE_SCALE: f64 = 1e-9;

/// Spacing of the tabulated energy profile in meters.
pub const DEFAULT_ENERGY_GRID_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticsOptions {
    /// Tabulate `E(r)` on this grid and interpolate linearly; `None` evaluates
    /// the power solver at every quadrature node.
    pub energy_grid_step: Option<f64>,
}

impl Default for AnalyticsOptions {
    fn default() -> Self {
        Self { energy_grid_step: Some(DEFAULT_ENERGY_GRID_STEP) }
    }
}

impl AnalyticsOptions {
    pub fn exact() -> Self {
        Self { energy_grid_step: None }
    }
}

/// Per-link energy as a function of distance under one power policy.
///
/// In tabulated mode values between grid nodes are linearly interpolated,
/// which preserves the monotonicity of `E(r)`. Distances below the first node
/// or past the table fall back to the solver.
#[derive(Debug, Clone)]
pub struct EnergyProfile {
    radio: RadioConfig,
    demand: DemandModel,
    policy: PowerPolicy,
    step: f64,
    /// `table[k]` holds `E((k + 1)·step)`.
    table: Vec<f64>,
}

impl EnergyProfile {
    pub fn exact(radio: &RadioConfig, demand: &DemandModel, policy: PowerPolicy) -> Self {
        Self { radio: *radio, demand: *demand, policy, step: 0.0, table: Vec::new() }
    }

    pub fn tabulated(radio: &RadioConfig, demand: &DemandModel, policy: PowerPolicy, r_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::Config(format!("energy grid step must be > 0, got {step}")));
        }
        let nodes = (r_max / step).ceil() as usize + 1;
        let table = (1..=nodes)
            .into_par_iter()
            .map(|k| policy_energy(radio, demand, policy, k as f64 * step))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { radio: *radio, demand: *demand, policy, step, table })
    }

    pub fn new(radio: &RadioConfig, demand: &DemandModel, policy: PowerPolicy, r_max: f64, opts: &AnalyticsOptions) -> Result<Self> {
        match opts.energy_grid_step {
            Some(step) => Self::tabulated(radio, demand, policy, r_max, step),
            None => Ok(Self::exact(radio, demand, policy)),
        }
    }

    pub fn policy(&self) -> PowerPolicy {
        self.policy
    }

    pub fn is_tabulated(&self) -> bool {
        !self.table.is_empty()
    }

    pub fn energy(&self, r: f64) -> Result<f64> {
        if !self.table.is_empty() {
            let pos = r / self.step;
            let k = pos.floor() as usize;
            if k >= 1 && k < self.table.len() {
                let lo = self.table[k - 1];
                let hi = self.table[k];
                let t = pos - k as f64;
                return Ok(lo + t * (hi - lo));
            }
        }
        policy_energy(&self.radio, &self.demand, self.policy, r)
    }
}

/// `2πrλp·exp(−λpπr²)`.
pub fn link_distance_pdf(net: &NetworkConfig, p_c_i: f64, r: f64) -> f64 {
    let rate = net.user_density * p_c_i * std::f64::consts::PI;
    2.0 * rate * r * (-rate * r * r).exp()
}

/// Average helper energy per request (offloaded or not) with a prepared
/// energy profile.
pub fn average_energy_with(demand: &DemandModel, net: &NetworkConfig, caching: &[f64], profile: &EnergyProfile) -> Result<f64> {
    if caching.len() != demand.catalog_size {
        return Err(Error::Config(format!(
            "caching vector has {} entries, catalog has {}",
            caching.len(),
            demand.catalog_size
        )));
    }
    let p_r = request_probabilities(demand);
    if profile.is_tabulated() {
        return average_energy_on_grid(net, &p_r, caching, profile);
    }
    let r_c = net.collaboration_distance;
    let scale = profile.energy(r_c)?.abs().max(f64::MIN_POSITIVE);
    let tol = QUADRATURE_RELATIVE_SCALE * scale;

    let mut total = 0.0;
    for (pr, &pc) in p_r.iter().zip(caching) {
        if pc <= 0.0 {
            continue;
        }
        let failure = RefCell::new(None);
        let integrand = |r: f64| match profile.energy(r) {
            Ok(e) => e * link_distance_pdf(net, pc, r),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        };
        let value = integrate(integrand, 0.0, r_c, tol, DEFAULT_MAX_SUBDIVISIONS)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        total += pr * value;
    }
    Ok(total)
}

/// The tabulated profile is linear between nodes, so one 7-point Gauss rule
/// per grid cell integrates it against the request-weighted distance density
/// to far below the interpolation error.
fn average_energy_on_grid(net: &NetworkConfig, p_r: &[f64], caching: &[f64], profile: &EnergyProfile) -> Result<f64> {
    let rates: Vec<(f64, f64)> = p_r
        .iter()
        .zip(caching)
        .filter(|(_, &pc)| pc > 0.0)
        .map(|(&pr, &pc)| (pr, net.user_density * pc * std::f64::consts::PI))
        .collect();
    let density = |r: f64| -> f64 { rates.iter().map(|&(pr, c)| pr * 2.0 * c * r * (-c * r * r).exp()).sum() };
    let r_c = net.collaboration_distance;
    let cells = (r_c / profile.step).ceil() as usize;
    let failure = RefCell::new(None);
    let integrand = |r: f64| match profile.energy(r) {
        Ok(e) => e * density(r),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let mut total = 0.0;
    for k in 0..cells {
        let lo = k as f64 * profile.step;
        let hi = ((k + 1) as f64 * profile.step).min(r_c);
        if hi > lo {
            total += gauss7(integrand, lo, hi);
        }
    }
    match failure.into_inner() {
        Some(e) => Err(e),
        None if !total.is_finite() => Err(Error::Quadrature { lo: 0.0, hi: r_c, estimate: total, error: f64::INFINITY }),
        None => Ok(total),
    }
}

/// Average helper energy per request under `policy`, tabulating the energy
/// profile according to `opts`.
pub fn average_energy(
    demand: &DemandModel,
    net: &NetworkConfig,
    radio: &RadioConfig,
    caching: &[f64],
    policy: PowerPolicy,
    opts: &AnalyticsOptions,
) -> Result<f64> {
    let profile = EnergyProfile::new(radio, demand, policy, net.collaboration_distance, opts)?;
    average_energy_with(demand, net, caching, &profile)
}

/// Average helper energy conditioned on the request being offloaded.
pub fn average_energy_per_offloaded_file(avg_energy_j: f64, offloading_ratio: f64) -> f64 {
    if offloading_ratio > 0.0 {
        avg_energy_j / offloading_ratio
    } else {
        0.0
    }
}

/// Fraction of the battery spent: `Ē / (3.6·V₀·Q)`.
pub fn energy_cost_ratio(avg_energy_j: f64, battery: &BatteryConfig) -> f64 {
    avg_energy_j / battery.energy_joules()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub r_c_m: f64,
    pub offloading_ratio: f64,
    pub avg_energy_j: f64,
    pub avg_energy_per_offloaded_j: f64,
    pub energy_cost_ratio: f64,
    pub caching_policy: CachingPolicy,
    pub power_policy: PowerPolicy,
}

/// Evaluates one tradeoff point with a prepared profile.
pub fn tradeoff_point(
    demand: &DemandModel,
    net: &NetworkConfig,
    battery: &BatteryConfig,
    caching_policy: CachingPolicy,
    profile: &EnergyProfile,
) -> Result<TradeoffPoint> {
    let caching = caching_policy.solve(demand, net)?;
    let ratio = offloading_ratio(demand, net, &caching.probs)?;
    let avg = average_energy_with(demand, net, &caching.probs, profile)?;
    Ok(TradeoffPoint {
        r_c_m: net.collaboration_distance,
        offloading_ratio: ratio,
        avg_energy_j: avg,
        avg_energy_per_offloaded_j: average_energy_per_offloaded_file(avg, ratio),
        energy_cost_ratio: energy_cost_ratio(avg, battery),
        caching_policy,
        power_policy: profile.policy(),
    })
}

/// Offloading ratio and helper energy for each collaboration distance in
/// `r_c_grid` (must be non-empty and strictly increasing). Points are computed
/// in parallel and returned in grid order.
#[allow(clippy::too_many_arguments)]
pub fn tradeoff_curve(
    demand: &DemandModel,
    net: &NetworkConfig,
    r_c_grid: &[f64],
    radio: &RadioConfig,
    battery: &BatteryConfig,
    caching_policy: CachingPolicy,
    power_policy: PowerPolicy,
    opts: &AnalyticsOptions,
) -> Result<Vec<TradeoffPoint>> {
    if r_c_grid.is_empty() {
        return Err(Error::Config("collaboration distance grid is empty".into()));
    }
    if r_c_grid.windows(2).any(|w| !(w[1] > w[0])) || !(r_c_grid[0] > 0.0) {
        return Err(Error::Config("collaboration distance grid must be positive and increasing".into()));
    }
    let r_max = *r_c_grid.last().unwrap();
    let profile = EnergyProfile::new(radio, demand, power_policy, r_max, opts)?;
    r_c_grid
        .par_iter()
        .map(|&r_c| {
            tradeoff_point(demand, &net.with_collaboration_distance(r_c), battery, caching_policy, &profile)
                .map_err(|e| e.context(format!("r_c = {r_c} m")))
        })
        .collect()
}

/// Smallest collaboration distance whose offloading ratio under `policy`
/// reaches `target`, by bisection on the (non-decreasing) ratio.
pub fn collaboration_distance_for_ratio(demand: &DemandModel, net: &NetworkConfig, policy: CachingPolicy, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain(format!("target offloading ratio must lie in (0, 1), got {target}")));
    }
    let ratio_at = |r_c: f64| -> Result<f64> {
        let nw = net.with_collaboration_distance(r_c);
        offloading_ratio(demand, &nw, &policy.solve(demand, &nw)?.probs)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while ratio_at(hi)? < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e7 {
            return Err(Error::Solver(format!("offloading ratio {target} not reachable")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-12 * hi {
            break;
        }
        if ratio_at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
