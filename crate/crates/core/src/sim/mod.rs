//! Monte Carlo simulator of one cache-enabled D2D cell.
//!
//! A realization places a Poisson number of users uniformly in the square
//! cell, gives each one cached file drawn from the caching distribution and
//! one request drawn from the Zipf demand. A request is offloaded when another
//! user caching the requested file lies within the collaboration distance; the
//! nearest such user transmits and the link energy under the chosen power
//! policy is accrued. Interference between concurrent links is folded into the
//! constant noise floor, so no link-to-link coupling is simulated.
//!
//! Realizations are independent. A campaign derives one seed per realization
//! from the master seed, evaluates realizations in parallel and folds the
//! per-realization tallies in index order, so its output does not depend on
//! the number of worker threads.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;

use crate::caching::{hit_probability, CachingPolicy};
use crate::error::{Error, Result};
use crate::model::{request_probabilities, DemandModel, NetworkConfig, RadioConfig};
use crate::power::{mean_rate, policy_energy, PowerPolicy};
use crate::stats::{quantile_sorted, Moments, Z_95};

pub mod grid;

use grid::HelperIndex;

/// Whether a requester that caches its own requested file counts as served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfCacheHit {
    /// The requester is never its own helper (matches the analytic model).
    #[default]
    Exclude,
    /// A local cache hit counts as offloaded with zero link energy.
    LocalHit,
}

impl std::str::FromStr for SelfCacheHit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exclude" => Ok(SelfCacheHit::Exclude),
            "local_hit" => Ok(SelfCacheHit::LocalHit),
            other => Err(Error::Config(format!(
                "unknown self_cache_hit `{other}` (expected exclude or local_hit)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimOptions {
    pub self_cache_hit: SelfCacheHit,
    /// Keep every offloaded link (file, distance) in the report.
    pub record_links: bool,
}

/// One sampled cell. File indices are 0-based (0 is the most popular file).
#[derive(Debug, Clone, PartialEq)]
pub struct CellRealization {
    pub user_positions: Vec<[f64; 2]>,
    pub cached_file: Vec<u32>,
    pub requested_file: Vec<u32>,
    pub rng_seed: u64,
    pub cell_side: f64,
}

impl CellRealization {
    pub fn num_users(&self) -> usize {
        self.user_positions.len()
    }
}

/// An offloaded request: requested file and link length in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRecord {
    pub file: u32,
    pub distance_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DistanceSummary {
    pub count: u64,
    pub mean: f64,
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
    pub max: f64,
}

impl DistanceSummary {
    fn from_distances(distances: &[f64]) -> Self {
        if distances.is_empty() {
            return Self::default();
        }
        let mut sorted = distances.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            count: sorted.len() as u64,
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            p10: quantile_sorted(&sorted, 0.1),
            p50: quantile_sorted(&sorted, 0.5),
            p90: quantile_sorted(&sorted, 0.9),
            max: *sorted.last().unwrap(),
        }
    }
}

/// Aggregated outcome of one realization or a whole campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub num_realizations: u64,
    pub num_requests: u64,
    pub num_offloaded: u64,
    pub empirical_offloading_ratio: f64,
    /// Helper energy per request, non-offloaded requests counting zero.
    pub empirical_avg_energy_j: f64,
    pub empirical_avg_energy_per_offloaded_j: f64,
    /// 95% half-width of the offloading ratio: across realizations when there
    /// are at least two, binomial otherwise.
    pub ci_halfwidth: f64,
    /// 95% half-width of the per-request energy, same convention.
    pub energy_ci_halfwidth: f64,
    pub link_distances: DistanceSummary,
    /// Present only with [`SimOptions::record_links`].
    pub links: Vec<LinkRecord>,
}

/// Splitmix64 finalizer; spreads consecutive inputs over the whole range.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of realization `index` in a campaign with `master_seed`.
pub fn realization_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Samples a cell realization; fully determined by `seed`.
pub fn sample_cell(demand: &DemandModel, net: &NetworkConfig, caching: &[f64], seed: u64) -> Result<CellRealization> {
    if caching.len() != demand.catalog_size {
        return Err(Error::Config(format!(
            "caching vector has {} entries, catalog has {}",
            caching.len(),
            demand.catalog_size
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = net.cell_side;
    let mean_users = net.user_density * side * side;
    let count = Poisson::new(mean_users)
        .map_err(|e| Error::Config(format!("invalid Poisson mean {mean_users}: {e}")))?
        .sample(&mut rng) as usize;

    let cache_dist = WeightedIndex::new(caching).map_err(|e| Error::Config(format!("caching vector: {e}")))?;
    let request_dist = WeightedIndex::new(request_probabilities(demand))
        .map_err(|e| Error::Config(format!("request probabilities: {e}")))?;

    let user_positions = (0..count)
        .map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side])
        .collect();
    let cached_file = (0..count).map(|_| cache_dist.sample(&mut rng) as u32).collect();
    let requested_file = (0..count).map(|_| request_dist.sample(&mut rng) as u32).collect();
    Ok(CellRealization { user_positions, cached_file, requested_file, rng_seed: seed, cell_side: side })
}

/// Per-realization tallies before aggregation.
#[derive(Debug, Clone)]
struct Tally {
    requests: u64,
    offloaded: u64,
    energy_sum: f64,
    energy_sq_sum: f64,
    distances: Vec<f64>,
    links: Vec<LinkRecord>,
}

fn measure(cell: &CellRealization, net: &NetworkConfig, radio: &RadioConfig, demand: &DemandModel, policy: PowerPolicy, opts: &SimOptions) -> Result<Tally> {
    let r_c = net.collaboration_distance;
    let index = HelperIndex::new(&cell.user_positions, &cell.cached_file, cell.cell_side, r_c, net.topology);
    let mut tally = Tally { requests: 0, offloaded: 0, energy_sum: 0.0, energy_sq_sum: 0.0, distances: Vec::new(), links: Vec::new() };
    for (u, (&pos, &file)) in cell.user_positions.iter().zip(&cell.requested_file).enumerate() {
        tally.requests += 1;
        if opts.self_cache_hit == SelfCacheHit::LocalHit && cell.cached_file[u] == file {
            tally.offloaded += 1;
            continue;
        }
        let Some((_, d)) = index.nearest(&cell.user_positions, pos, file, u, r_c) else { continue };
        tally.offloaded += 1;
        if d > 0.0 {
            let e = policy_energy(radio, demand, policy, d)?;
            if !e.is_finite() {
                return Err(Error::Solver(format!("link energy not finite at {d} m")));
            }
            tally.energy_sum += e;
            tally.energy_sq_sum += e * e;
        }
        tally.distances.push(d);
        if opts.record_links {
            tally.links.push(LinkRecord { file, distance_m: d });
        }
    }
    Ok(tally)
}

fn binomial_halfwidth(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    Z_95 * (p * (1.0 - p) / n as f64).sqrt()
}

fn aggregate(tallies: Vec<Tally>) -> SimReport {
    let k = tallies.len() as u64;
    let mut ratio_moments = Moments::default();
    let mut energy_moments = Moments::default();
    let mut requests = 0;
    let mut offloaded = 0;
    let mut energy_sum = 0.0;
    let mut energy_sq_sum = 0.0;
    let mut distances = Vec::new();
    let mut links = Vec::new();
    for t in tallies {
        requests += t.requests;
        offloaded += t.offloaded;
        energy_sum += t.energy_sum;
        if t.requests > 0 {
            ratio_moments.push(t.offloaded as f64 / t.requests as f64);
            energy_moments.push(t.energy_sum / t.requests as f64);
        }
        energy_sq_sum += t.energy_sq_sum;
        distances.extend(t.distances);
        links.extend(t.links);
    }
    let ratio = if requests > 0 { offloaded as f64 / requests as f64 } else { 0.0 };
    let avg_energy = if requests > 0 { energy_sum / requests as f64 } else { 0.0 };
    let (ci, energy_ci) = if ratio_moments.count >= 2 {
        (Z_95 * ratio_moments.standard_error(), Z_95 * energy_moments.standard_error())
    } else {
        let n = requests as f64;
        let var = if requests > 1 { (energy_sq_sum / n - avg_energy * avg_energy).max(0.0) * n / (n - 1.0) } else { 0.0 };
        (binomial_halfwidth(ratio, requests), if requests > 0 { Z_95 * (var / n).sqrt() } else { 0.0 })
    };
    SimReport {
        num_realizations: k,
        num_requests: requests,
        num_offloaded: offloaded,
        empirical_offloading_ratio: ratio,
        empirical_avg_energy_j: avg_energy,
        empirical_avg_energy_per_offloaded_j: if offloaded > 0 { energy_sum / offloaded as f64 } else { 0.0 },
        ci_halfwidth: ci,
        energy_ci_halfwidth: energy_ci,
        link_distances: DistanceSummary::from_distances(&distances),
        links,
    }
}

/// Serves every request of one realization and measures offloading and
/// helper energy.
pub fn match_and_measure(
    cell: &CellRealization,
    net: &NetworkConfig,
    radio: &RadioConfig,
    demand: &DemandModel,
    policy: PowerPolicy,
    opts: &SimOptions,
) -> Result<SimReport> {
    Ok(aggregate(vec![measure(cell, net, radio, demand, policy, opts)?]))
}

/// Runs `num_realizations` independent realizations with a fixed caching
/// vector.
#[allow(clippy::too_many_arguments)]
pub fn run_campaign_with_caching(
    demand: &DemandModel,
    net: &NetworkConfig,
    radio: &RadioConfig,
    caching: &[f64],
    power_policy: PowerPolicy,
    num_realizations: u64,
    master_seed: u64,
    opts: &SimOptions,
) -> Result<SimReport> {
    if num_realizations == 0 {
        return Err(Error::Config("num_realizations must be at least 1".into()));
    }
    let tallies = (0..num_realizations)
        .into_par_iter()
        .map(|i| {
            let cell = sample_cell(demand, net, caching, realization_seed(master_seed, i))?;
            measure(&cell, net, radio, demand, power_policy, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(tallies))
}

/// Solves the caching policy and runs a campaign.
#[allow(clippy::too_many_arguments)]
pub fn run_campaign(
    demand: &DemandModel,
    net: &NetworkConfig,
    radio: &RadioConfig,
    caching_policy: CachingPolicy,
    power_policy: PowerPolicy,
    num_realizations: u64,
    master_seed: u64,
    opts: &SimOptions,
) -> Result<SimReport> {
    let caching = caching_policy.solve(demand, net)?;
    run_campaign_with_caching(demand, net, radio, &caching.probs, power_policy, num_realizations, master_seed, opts)
}

/// Conditional CDF of a recorded link distance given the file and that the
/// link is within `r_c`; the probability integral transform of a link record.
pub fn link_distance_pit(net: &NetworkConfig, caching: &[f64], link: &LinkRecord) -> f64 {
    let p = caching[link.file as usize];
    let unconditional = -(-net.user_density * p * std::f64::consts::PI * link.distance_m.powi(2)).exp_m1();
    unconditional / hit_probability(net, p)
}

/// Rate from the averaged-SNR approximation against the ergodic rate under
/// Rayleigh fading at one link distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingDiagnostic {
    pub distance_m: f64,
    pub approx_rate_bps: f64,
    pub ergodic_rate_bps: f64,
    /// `(approx − ergodic) / ergodic`.
    pub relative_error: f64,
}

/// Estimates `E{W log₂(1 + SNR·|h|²)}` with `|h|² ~ Exp(1)` from `draws`
/// samples.
pub fn fading_rate_diagnostic(radio: &RadioConfig, tx_power_w: f64, distance_m: f64, draws: usize, seed: u64) -> Result<FadingDiagnostic> {
    let approx = mean_rate(radio, tx_power_w, distance_m)?;
    let snr = tx_power_w * crate::model::path_gain(radio, distance_m)? / radio.noise_power_w;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for _ in 0..draws.max(1) {
        let h2: f64 = Exp1.sample(&mut rng);
        acc += (snr * h2).ln_1p();
    }
    let ergodic = radio.bandwidth_hz * acc / draws.max(1) as f64 / std::f64::consts::LN_2;
    Ok(FadingDiagnostic {
        distance_m,
        approx_rate_bps: approx,
        ergodic_rate_bps: ergodic,
        relative_error: (approx - ergodic) / ergodic,
    })
}
