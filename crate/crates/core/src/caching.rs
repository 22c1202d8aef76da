//! Offloading-ratio maximizing probabilistic caching.
//!
//! Every user caches one file drawn from `p_c`. A request for file `i` is
//! offloaded when some user within the collaboration distance caches `i`;
//! the helpers of file `i` form a PPP of density `λ·p_c(i)`, so the hit
//! probability is `1 − exp(−λ·p_c(i)·π·r_c²)`.
//!
//! The optimum has a water-filling shape: with `x_i = ln p_r(i) / (λπr_c²)`,
//! `p_c(i) = [x_i − v]⁺` for the level `v` that makes the vector sum to one.
//! Because `p_r` is sorted, the support is a prefix `1..=i*` and `i*` is the
//! unique index with `h(i*) < λπr_c²/β ≤ h(i*+1)` where
//! `h(n) = ln(nⁿ / n!)`. All of those comparisons run in the log domain.

use crate::error::{Error, Result};
use crate::model::{request_probabilities, DemandModel, NetworkConfig};

pub mod oracle;

pub use oracle::oracle_solve_caching;

/// Drift beyond this after clamping round-off negatives is treated as a bug.
const RENORMALIZATION_LIMIT: f64 = 1e-9;

/// Relative slack on the support-index conditions; inside it both `i` and
/// `i + 1` are accepted and the smaller one wins.
const SUPPORT_TIE_TOLERANCE: f64 = 1e-12;

/// Solved caching distribution with the diagnostics of the KKT solution.
#[derive(Debug, Clone, PartialEq)]
pub struct CachingDistribution {
    /// `p_c(i)`, index 0 is the most popular file.
    pub probs: Vec<f64>,
    /// Largest 1-based file index with positive caching probability.
    pub support_index: usize,
    /// Water level `v = (Σ_{i≤i*} x_i − 1) / i*`.
    pub multiplier: f64,
}

impl CachingDistribution {
    /// Uniform caching over the whole catalog (the caching baseline).
    pub fn uniform(demand: &DemandModel, net: &NetworkConfig) -> Self {
        let n = demand.catalog_size;
        let x = scaled_log_popularity(demand, net);
        let x_sum: f64 = x.iter().sum();
        Self {
            probs: vec![1.0 / n as f64; n],
            support_index: n,
            multiplier: (x_sum - 1.0) / n as f64,
        }
    }
}

/// Caching policy selector used by the analytics and the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CachingPolicy {
    Optimal,
    Uniform,
}

impl CachingPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            CachingPolicy::Optimal => "optimal",
            CachingPolicy::Uniform => "uniform",
        }
    }

    pub fn solve(&self, demand: &DemandModel, net: &NetworkConfig) -> Result<CachingDistribution> {
        match self {
            CachingPolicy::Optimal => solve_optimal_caching(demand, net),
            CachingPolicy::Uniform => Ok(CachingDistribution::uniform(demand, net)),
        }
    }
}

impl std::str::FromStr for CachingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(CachingPolicy::Optimal),
            "uniform" => Ok(CachingPolicy::Uniform),
            other => Err(Error::Config(format!(
                "unknown caching policy `{other}` (expected optimal or uniform)"
            ))),
        }
    }
}

/// Probability that a request for a file cached with probability `p_c` finds
/// a helper within `r_c`.
pub fn hit_probability(net: &NetworkConfig, p_c: f64) -> f64 {
    -(-net.disc_load() * p_c).exp_m1()
}

/// `Σ_i p_r(i) · (1 − exp(−λ·p_c(i)·π·r_c²))`.
pub fn offloading_ratio(demand: &DemandModel, net: &NetworkConfig, caching: &[f64]) -> Result<f64> {
    if caching.len() != demand.catalog_size {
        return Err(Error::Config(format!(
            "caching vector has {} entries, catalog has {}",
            caching.len(),
            demand.catalog_size
        )));
    }
    let p_r = request_probabilities(demand);
    Ok(p_r
        .iter()
        .zip(caching)
        .map(|(pr, pc)| pr * hit_probability(net, *pc))
        .sum())
}

/// `x_i = ln p_r(i) / (λπr_c²)`.
fn scaled_log_popularity(demand: &DemandModel, net: &NetworkConfig) -> Vec<f64> {
    let load = net.disc_load();
    request_probabilities(demand).iter().map(|p| p.ln() / load).collect()
}

/// `ln(n!)` for `n = 0..=max`.
pub(crate) fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=max {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `h(n) = ln(nⁿ / n!)`, non-decreasing in `n`.
fn support_statistic(n: usize, ln_fact: &[f64]) -> f64 {
    let nf = n as f64;
    nf * nf.ln() - ln_fact[n]
}

/// Inclusive 1-based bracket that must contain `i*` when the support is
/// truncated, widened by one on each side to absorb the Stirling slack.
pub fn support_bracket(threshold: f64, catalog_size: usize) -> (usize, usize) {
    let n = catalog_size as f64;
    let lo = (threshold - 1.0).floor() - 1.0;
    let hi = (threshold + (2.0 * std::f64::consts::PI * n).sqrt().ln() + 1.0).ceil() + 1.0;
    let lo = lo.max(1.0) as usize;
    let hi = hi.clamp(1.0, n) as usize;
    (lo.min(hi), hi)
}

/// Finds `i*` with `h(i*) < T ≤ h(i*+1)` for `T = λπr_c²/β`, searching the
/// analytic bracket first and the whole range only if the bracket is empty.
fn find_support_index(threshold: f64, catalog_size: usize, ln_fact: &[f64]) -> Result<usize> {
    let tol = SUPPORT_TIE_TOLERANCE * threshold.abs().max(1.0);
    let satisfies = |i: usize| {
        support_statistic(i, ln_fact) < threshold + tol
            && support_statistic(i + 1, ln_fact) >= threshold - tol
    };
    let (lo, hi) = support_bracket(threshold, catalog_size);
    let upper = hi.min(catalog_size - 1);
    if let Some(i) = (lo..=upper).find(|&i| satisfies(i)) {
        return Ok(i);
    }
    log::warn!(
        "no support index in bracket [{lo}, {hi}] for threshold {threshold}; scanning 1..{catalog_size}"
    );
    (1..catalog_size).find(|&i| satisfies(i)).ok_or_else(|| {
        Error::Solver(format!(
            "no support index satisfies the boundary conditions for threshold {threshold}"
        ))
    })
}

/// Optimal caching distribution in closed form.
pub fn solve_optimal_caching(demand: &DemandModel, net: &NetworkConfig) -> Result<CachingDistribution> {
    demand.validate()?;
    if !(net.user_density > 0.0 && net.collaboration_distance > 0.0) {
        return Err(Error::Config("user density and collaboration distance must be > 0".into()));
    }
    let n = demand.catalog_size;
    let beta = demand.zipf_exponent;
    if n == 1 || beta == 0.0 {
        return Ok(CachingDistribution::uniform(demand, net));
    }

    let load = net.disc_load();
    let threshold = load / beta;
    let ln_fact = ln_factorials(n + 1);

    let support = if support_statistic(n, &ln_fact) < threshold {
        n
    } else {
        find_support_index(threshold, n, &ln_fact)?
    };

    // p(i) = β/(λπr_c²·i*) · Σ_{j≤i*} ln(j/i) + 1/i*
    let k = support as f64;
    let scale = beta / (load * k);
    let mut probs = vec![0.0; n];
    for (idx, p) in probs.iter_mut().take(support).enumerate() {
        let i = (idx + 1) as f64;
        *p = scale * (ln_fact[support] - k * i.ln()) + 1.0 / k;
    }
    clamp_and_renormalize(&mut probs)?;

    let x = scaled_log_popularity(demand, net);
    let multiplier = (x[..support].iter().sum::<f64>() - 1.0) / k;
    let support_index = probs.iter().rposition(|&p| p > 0.0).map_or(1, |i| i + 1);

    Ok(CachingDistribution { probs, support_index, multiplier })
}

fn clamp_and_renormalize(probs: &mut [f64]) -> Result<()> {
    for p in probs.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > RENORMALIZATION_LIMIT {
        return Err(Error::Solver(format!(
            "caching distribution sums to {total} before renormalization"
        )));
    }
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Topology;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn net(lambda: f64, r_c: f64) -> NetworkConfig {
        NetworkConfig::new(lambda, r_c, 1000.0, Topology::Torus).unwrap()
    }

    fn demand(n: usize, beta: f64) -> DemandModel {
        DemandModel::new(n, beta, 2.4e8).unwrap()
    }

    #[test]
    fn single_file_catalog() {
        let c = solve_optimal_caching(&demand(1, 1.0), &net(0.03, 10.0)).unwrap();
        assert_eq!(c.probs, vec![1.0]);
        assert_eq!(c.support_index, 1);
    }

    #[test]
    fn zero_exponent_is_uniform() {
        for (n, r_c) in [(7, 10.0), (1000, 100.0), (3, 1.0)] {
            let c = solve_optimal_caching(&demand(n, 0.0), &net(0.03, r_c)).unwrap();
            assert!(c.probs.iter().all(|&p| (p - 1.0 / n as f64).abs() < 1e-15));
            assert_eq!(c.support_index, n);
        }
    }

    #[test]
    fn paper_preset_support_index() {
        let d = demand(1000, 1.0);
        let nw = net(0.03, 10.0);
        let c = solve_optimal_caching(&d, &nw).unwrap();
        // h(11) = 8.875 < 9.4248 <= h(12) = 9.832
        assert_eq!(c.support_index, 11);
        let (lo, hi) = support_bracket(nw.disc_load(), 1000);
        assert!(lo <= 9 && hi >= 14);
        assert!(c.probs[..11].iter().all(|&p| p > 0.0));
        assert!(c.probs[11..].iter().all(|&p| p == 0.0));
        let ratio = offloading_ratio(&d, &nw, &c.probs).unwrap();
        assert!(ratio > 0.20, "ratio {ratio}");
    }

    #[test]
    fn multiplier_reproduces_water_level() {
        let d = demand(200, 0.8);
        let nw = net(0.03, 20.0);
        let c = solve_optimal_caching(&d, &nw).unwrap();
        let x = scaled_log_popularity(&d, &nw);
        for (p, xi) in c.probs.iter().zip(&x) {
            assert!((p - (xi - c.multiplier).max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn full_support_when_load_is_large() {
        // ln(10^10/10!) = 8.0 < λπr_c²/β = 94.2
        let c = solve_optimal_caching(&demand(10, 1.0), &net(0.03, 100.0 / 10f64.sqrt())).unwrap();
        assert_eq!(c.support_index, 10);
        assert!(c.probs.iter().all(|&p| p > 0.0));
    }

    #[test]
    fn offloading_ratio_examples() {
        let d = demand(5, 1.0);
        let pr = request_probabilities(&d);
        let mut pc = vec![0.0; 5];
        pc[0] = 1.0;
        let r = offloading_ratio(&d, &net(1.0, 100.0), &pc).unwrap();
        assert!((r - pr[0]).abs() < 1e-15);

        let r = offloading_ratio(&demand(1, 1.0), &net(0.03, 10.0), &[1.0]).unwrap();
        let want = 1.0 - (-0.03 * std::f64::consts::PI * 100.0).exp();
        assert!((r - want).abs() < 1e-15);
        assert!((r - 0.99992).abs() < 1e-5);
    }

    #[test]
    fn offloading_ratio_length_mismatch() {
        let e = offloading_ratio(&demand(3, 1.0), &net(0.03, 10.0), &[0.5, 0.5]).unwrap_err();
        assert!(e.is_config());
    }

    #[test]
    fn beats_uniform_and_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, beta, r_c) in [(10, 0.5, 10.0), (50, 1.0, 30.0), (300, 1.5, 15.0)] {
            let d = demand(n, beta);
            let nw = net(0.03, r_c);
            let best = offloading_ratio(&d, &nw, &solve_optimal_caching(&d, &nw).unwrap().probs).unwrap();
            let uni = offloading_ratio(&d, &nw, &vec![1.0 / n as f64; n]).unwrap();
            assert!(best >= uni - 1e-15);
            for _ in 0..100 {
                let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().ln()).collect();
                let s: f64 = raw.iter().sum();
                let pt: Vec<f64> = raw.iter().map(|v| v / s).collect();
                assert!(best >= offloading_ratio(&d, &nw, &pt).unwrap() - 1e-15);
            }
        }
    }

    #[test]
    fn optimal_ratio_monotone_in_collaboration_distance() {
        let d = demand(1000, 1.0);
        let mut prev = 0.0;
        for k in 1..=40 {
            let nw = net(0.03, 5.0 * k as f64);
            let r = offloading_ratio(&d, &nw, &solve_optimal_caching(&d, &nw).unwrap().probs).unwrap();
            assert!(r >= prev - 1e-12);
            prev = r;
        }
    }

    proptest! {
        #[test]
        fn structure_holds(n in 1usize..400, beta in 0.0f64..2.5, lambda in 0.001f64..0.1, r_c in 1.0f64..150.0) {
            let d = demand(n, beta);
            let nw = NetworkConfig::new(lambda, r_c, 1000.0, Topology::Torus).unwrap();
            let c = solve_optimal_caching(&d, &nw).unwrap();
            let s: f64 = c.probs.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
            prop_assert!(c.probs.iter().all(|&p| p >= 0.0));
            prop_assert!(c.probs.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(c.probs[c.support_index - 1] > 0.0);
            prop_assert!(c.probs[c.support_index..].iter().all(|&p| p == 0.0));
            if beta > 0.0 {
                prop_assert!(c.probs[..c.support_index].windows(2).all(|w| w[1] < w[0]));
            }
            if beta > 0.0 && c.support_index < n {
                let t = nw.disc_load() / beta;
                let i_star = c.support_index as f64;
                prop_assert!(t - 1.0 <= i_star);
                prop_assert!(i_star <= t + (2.0 * std::f64::consts::PI * n as f64).sqrt().ln() + 1.0);
            }
        }
    }
}
