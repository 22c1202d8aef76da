//! Generic first-order solver for the caching problem, independent of the
//! closed form. It only knows the objective, its gradient and the simplex, and
//! exists to cross-check [`super::solve_optimal_caching`].

use crate::error::{Error, Result};
use crate::model::{request_probabilities, DemandModel, NetworkConfig};

const MAX_ITERATIONS: usize = 500_000;

/// Euclidean projection onto the probability simplex (sort-and-threshold).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Maximizes the offloading ratio over the simplex by projected gradient
/// ascent.
///
/// The objective is separable with per-coordinate curvature
/// `c²·p_r(i)·e^{−c·t}` (`c = λπr_c²`), which is largest at the smaller end of
/// each step. The step size is backtracked until it is below the inverse of
/// that local bound, so every accepted step is an ascent step without having
/// to compare objective values at round-off level. Iteration stops when the
/// projected step moves no coordinate by more than `tolerance`.
pub fn oracle_solve_caching(demand: &DemandModel, net: &NetworkConfig, tolerance: f64) -> Result<Vec<f64>> {
    if !(tolerance > 0.0) {
        return Err(Error::Config(format!("oracle tolerance must be > 0, got {tolerance}")));
    }
    let n = demand.catalog_size;
    let c = net.disc_load();
    let p_r = request_probabilities(demand);
    let mut p = vec![1.0 / n as f64; n];
    let mut step = 1.0
        / p_r
            .iter()
            .zip(&p)
            .map(|(pr, pc)| c * c * pr * (-c * pc).exp())
            .fold(0.0, f64::max);

    for _ in 0..MAX_ITERATIONS {
        let grad: Vec<f64> = p_r.iter().zip(&p).map(|(pr, pc)| c * pr * (-c * pc).exp()).collect();
        let mut next;
        loop {
            let trial: Vec<f64> = p.iter().zip(&grad).map(|(x, g)| x + step * g).collect();
            next = project_to_simplex(&trial);
            let curvature = p_r
                .iter()
                .zip(p.iter().zip(&next))
                .map(|(pr, (a, b))| c * c * pr * (-c * a.min(*b)).exp())
                .fold(0.0, f64::max);
            if step * curvature <= 1.0 {
                break;
            }
            step *= 0.5;
            if step < f64::MIN_POSITIVE {
                return Err(Error::Solver("oracle step size underflow".into()));
            }
        }
        let moved = p.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        p = next;
        if moved <= tolerance {
            return Ok(p);
        }
        step *= 1.5;
    }
    Err(Error::Solver(format!(
        "projected gradient oracle did not reach tolerance {tolerance} in {MAX_ITERATIONS} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caching::{offloading_ratio, solve_optimal_caching};
    use crate::model::Topology;

    #[test]
    fn projection_is_identity_on_simplex() {
        let v = [0.2, 0.3, 0.5];
        let p = project_to_simplex(&v);
        for (a, b) in p.iter().zip(v) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_to_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        assert_eq!(project_to_simplex(&[0.0, 0.0]), vec![0.5, 0.5]);
        let p = project_to_simplex(&[1.0, 1.0, -5.0]);
        assert_eq!(p, vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn two_file_grid_scan_agrees() {
        let d = DemandModel::new(2, 1.0, 1.0).unwrap();
        let nw = NetworkConfig::new(0.03, 10.0, 1000.0, Topology::Torus).unwrap();
        let (mut best, mut best_p) = (f64::MIN, 0.0);
        for k in 0..=10_000 {
            let p1 = k as f64 * 1e-4;
            let v = offloading_ratio(&d, &nw, &[p1, 1.0 - p1]).unwrap();
            if v > best {
                best = v;
                best_p = p1;
            }
        }
        let oracle = oracle_solve_caching(&d, &nw, 1e-13).unwrap();
        assert!((oracle[0] - best_p).abs() <= 1e-4);
        let closed = solve_optimal_caching(&d, &nw).unwrap();
        assert!((oracle[0] - closed.probs[0]).abs() <= 1e-6);
    }

    #[test]
    fn heavy_load_leaves_uniform_start() {
        // λπr_c² ≈ 942: gradients near the uniform start are of order e^{-94}
        let d = DemandModel::new(10, 1.5, 1.0).unwrap();
        let nw = NetworkConfig::new(0.03, 100.0, 1000.0, Topology::Torus).unwrap();
        let oracle = oracle_solve_caching(&d, &nw, 1e-13).unwrap();
        let closed = solve_optimal_caching(&d, &nw).unwrap();
        assert!((oracle[0] - oracle[9]) > 1e-3);
        let gap = oracle.iter().zip(&closed.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap <= 1e-6, "gap {gap:e}");
    }

    #[test]
    fn zero_exponent_gives_uniform() {
        let d = DemandModel::new(25, 0.0, 1.0).unwrap();
        let nw = NetworkConfig::new(0.03, 30.0, 1000.0, Topology::Torus).unwrap();
        let p = oracle_solve_caching(&d, &nw, 1e-12).unwrap();
        assert!(p.iter().all(|&x| (x - 0.04).abs() < 1e-9));
    }

    #[test]
    fn rejects_bad_tolerance() {
        let d = DemandModel::new(3, 1.0, 1.0).unwrap();
        let nw = NetworkConfig::new(0.03, 10.0, 1000.0, Topology::Torus).unwrap();
        assert!(oracle_solve_caching(&d, &nw, 0.0).is_err());
    }
}
