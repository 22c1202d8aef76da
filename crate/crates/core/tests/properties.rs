use d2d_offload::analytics::{tradeoff_curve, AnalyticsOptions};
use d2d_offload::caching::CachingPolicy;
use d2d_offload::harness::ExperimentConfig;
use d2d_offload::power::{solve_optimal_power, PowerPolicy};

fn preset() -> ExperimentConfig {
    ExperimentConfig::preset("paper-2015").unwrap()
}

#[test]
fn optimal_link_energy_grows_with_distance() {
    let c = preset();
    let mut prev = 0.0;
    for k in 1..=3000 {
        let r = 0.1 * k as f64;
        let e = solve_optimal_power(&c.radio, &c.demand, r).unwrap().energy_joules;
        assert!(e >= prev, "r = {r}: {e} < {prev}");
        prev = e;
    }
}

#[test]
fn ratio_and_energy_monotone_in_collaboration_distance() {
    let c = preset();
    let grid: Vec<f64> = (1..=20).map(|k| 10.0 * k as f64).collect();
    for beta in [0.5, 1.0] {
        let d = c.demand.with_exponent(beta);
        for power in [PowerPolicy::Optimal, PowerPolicy::MaxPower] {
            let curve = tradeoff_curve(&d, &c.net, &grid, &c.radio, &c.battery, CachingPolicy::Optimal, power, &AnalyticsOptions::default()).unwrap();
            for w in curve.windows(2) {
                assert!(w[1].offloading_ratio >= w[0].offloading_ratio - 1e-12);
                assert!(w[1].avg_energy_j >= w[0].avg_energy_j * (1.0 - 1e-12), "beta={beta} {power:?} r_c={}", w[1].r_c_m);
            }
        }
    }
}

#[test]
fn optimal_power_never_costs_more_on_average() {
    let c = preset();
    let grid = [10.0, 50.0, 100.0, 150.0];
    for caching in [CachingPolicy::Optimal, CachingPolicy::Uniform] {
        let opt = tradeoff_curve(&c.demand, &c.net, &grid, &c.radio, &c.battery, caching, PowerPolicy::Optimal, &AnalyticsOptions::default()).unwrap();
        let max = tradeoff_curve(&c.demand, &c.net, &grid, &c.radio, &c.battery, caching, PowerPolicy::MaxPower, &AnalyticsOptions::default()).unwrap();
        for (a, b) in opt.iter().zip(&max) {
            assert!(a.avg_energy_j <= b.avg_energy_j * (1.0 + 1e-12));
            assert_eq!(a.offloading_ratio, b.offloading_ratio);
        }
    }
}
