//! Experiment harness: configuration, subcommands and CSV emission.
//!
//! Every command is a pure function of an [`ExperimentConfig`] returning an
//! [`Output`]. Sweep points run in parallel and rows are collected in sweep
//! order, so a rerun with the same configuration and seed produces the same
//! bytes.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytics::{average_energy, tradeoff_curve, AnalyticsOptions, TradeoffPoint};
use crate::caching::{hit_probability, offloading_ratio, CachingPolicy};
use crate::error::{Error, Result};
use crate::model::{request_probabilities, watts_to_dbm, DemandModel, NetworkConfig, RadioConfig};
use crate::power::{solve_optimal_power, PowerPolicy};
use crate::sim::{fading_rate_diagnostic, run_campaign_with_caching, SimOptions, SimReport};

pub mod config;
pub mod table;

pub use config::{ExperimentConfig, RawConfig, SweepAxis};
pub use table::{format_number, Cell, Series, Table};

/// Tables and plot series produced by one command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    pub tables: Vec<Table>,
    pub series: Vec<Series>,
}

impl Output {
    fn extend(&mut self, other: Output) {
        self.tables.extend(other.tables);
        self.series.extend(other.series);
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CacheDist,
    Power,
    Tradeoff,
    Simulate,
    Figures,
}

impl Command {
    pub const ALL: [Command; 5] = [Command::CacheDist, Command::Power, Command::Tradeoff, Command::Simulate, Command::Figures];

    pub fn name(&self) -> &'static str {
        match self {
            Command::CacheDist => "cache-dist",
            Command::Power => "power",
            Command::Tradeoff => "tradeoff",
            Command::Simulate => "simulate",
            Command::Figures => "figures",
        }
    }

    pub fn run(&self, cfg: &ExperimentConfig) -> Result<Output> {
        match self {
            Command::CacheDist => cmd_cache_dist(cfg),
            Command::Power => cmd_power(cfg),
            Command::Tradeoff => cmd_tradeoff(cfg),
            Command::Simulate => cmd_simulate(cfg),
            Command::Figures => cmd_figures(cfg),
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

fn series_name(prefix: &str, parts: &[(&str, String)]) -> String {
    let mut name = prefix.to_owned();
    for (k, v) in parts {
        name.push_str(&format!("_{k}{v}"));
    }
    name
}

fn sweep_label(axis: SweepAxis, v: f64) -> String {
    format!("{} = {}", axis.name(), format_number(v))
}

pub const CACHE_DIST_COLUMNS: [&str; 6] = ["file_index", "p_c", "beta", "lambda", "r_c", "i_star"];

fn cache_dist_rows(table: &mut Table, series: &mut Vec<Series>, prefix: &str, demand: &DemandModel, net: &NetworkConfig, solved: &[f64], i_star: usize) {
    for (i, &p) in solved.iter().enumerate() {
        table.push(vec![
            (i + 1).into(),
            p.into(),
            demand.zipf_exponent.into(),
            net.user_density.into(),
            net.collaboration_distance.into(),
            i_star.into(),
        ]);
    }
    series.push(Series {
        name: series_name(
            prefix,
            &[
                ("beta", format_number(demand.zipf_exponent)),
                ("lambda", format_number(net.user_density)),
                ("rc", format_number(net.collaboration_distance)),
            ],
        ),
        x_label: "file_index",
        y_label: "p_c",
        points: solved.iter().enumerate().map(|(i, &p)| ((i + 1) as f64, p)).collect(),
    });
}

fn cache_dist_table(name: &str, points: &[(DemandModel, NetworkConfig)]) -> Result<Output> {
    let solved = points
        .par_iter()
        .map(|(d, n)| {
            CachingPolicy::Optimal
                .solve(d, n)
                .map_err(|e| e.context(format!("beta = {}, lambda = {}, r_c = {}", d.zipf_exponent, n.user_density, n.collaboration_distance)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(name, &CACHE_DIST_COLUMNS);
    let mut series = Vec::new();
    for ((d, n), s) in points.iter().zip(&solved) {
        cache_dist_rows(&mut table, &mut series, name, d, n, &s.probs, s.support_index);
    }
    Ok(Output { tables: vec![table], series })
}

/// Optimal caching distribution for each sweep value of `beta`, `lambda` or
/// `r_c`.
pub fn cmd_cache_dist(cfg: &ExperimentConfig) -> Result<Output> {
    if cfg.sweep.axis == SweepAxis::NoiseDbm {
        return Err(Error::Config("cache-dist sweeps r_c, beta or lambda; the noise floor does not affect caching".into()));
    }
    let points = cfg
        .sweep
        .values
        .iter()
        .map(|&v| cfg.at_sweep_value(v).map(|(d, n, _)| (d, n)).map_err(|e| e.context(sweep_label(cfg.sweep.axis, v))))
        .collect::<Result<Vec<_>>>()?;
    cache_dist_table("cache_dist", &points)
}

pub const POWER_COLUMNS: [&str; 5] = ["r_m", "p_star_w", "p_star_dbm", "energy_j", "at_max_power"];

fn power_table(name: &str, radio: &RadioConfig, demand: &DemandModel, grid: &[f64]) -> Result<Output> {
    let solved = grid
        .par_iter()
        .map(|&r| solve_optimal_power(radio, demand, r).map_err(|e| e.context(format!("r = {r} m"))))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(name, &POWER_COLUMNS);
    for (&r, s) in grid.iter().zip(&solved) {
        table.push(vec![
            r.into(),
            s.tx_power_w.into(),
            watts_to_dbm(s.tx_power_w).into(),
            s.energy_joules.into(),
            s.at_max_power.into(),
        ]);
    }
    let series = vec![
        Series {
            name: format!("{name}_p_star_dbm"),
            x_label: "r_m",
            y_label: "p_star_dbm",
            points: grid.iter().zip(&solved).map(|(&r, s)| (r, watts_to_dbm(s.tx_power_w))).collect(),
        },
        Series {
            name: format!("{name}_energy_j"),
            x_label: "r_m",
            y_label: "energy_j",
            points: grid.iter().zip(&solved).map(|(&r, s)| (r, s.energy_joules)).collect(),
        },
    ];
    Ok(Output { tables: vec![table], series })
}

/// Optimal transmit power and link energy over the configured distance grid.
pub fn cmd_power(cfg: &ExperimentConfig) -> Result<Output> {
    power_table("power", &cfg.radio, &cfg.demand, &cfg.power_grid.points())
}

pub const TRADEOFF_COLUMNS: [&str; 7] = [
    "r_c_m",
    "caching_policy",
    "power_policy",
    "offloading_ratio",
    "avg_energy_j",
    "avg_energy_per_offloaded_j",
    "energy_cost_ratio",
];

const PARAMETER_COLUMNS: [&str; 3] = ["beta", "lambda", "noise_dbm"];

fn tradeoff_cells(p: &TradeoffPoint) -> Vec<Cell> {
    vec![
        p.r_c_m.into(),
        p.caching_policy.name().into(),
        p.power_policy.name().into(),
        p.offloading_ratio.into(),
        p.avg_energy_j.into(),
        p.avg_energy_per_offloaded_j.into(),
        p.energy_cost_ratio.into(),
    ]
}

/// One tradeoff curve: model parameters, policy pair and the r_c grid.
#[derive(Debug, Clone)]
struct Curve {
    demand: DemandModel,
    net: NetworkConfig,
    radio: RadioConfig,
    caching: CachingPolicy,
    power: PowerPolicy,
    r_c: Vec<f64>,
}

fn ensure_increasing(values: &[f64], what: &str) -> Result<Vec<f64>> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if v.len() != values.len() || v != values {
        return Err(Error::Config(format!("{what} values must be strictly increasing")));
    }
    Ok(v)
}

/// Tradeoff rows for each curve in order. With `with_parameters` the model
/// parameters lead each row so curves of one figure can share a table.
fn tradeoff_table(name: &str, curves: &[Curve], battery: &crate::model::BatteryConfig, opts: &AnalyticsOptions, with_parameters: bool) -> Result<Output> {
    let columns: Vec<&'static str> = if with_parameters {
        PARAMETER_COLUMNS.iter().chain(TRADEOFF_COLUMNS.iter()).copied().collect()
    } else {
        TRADEOFF_COLUMNS.to_vec()
    };
    let mut table = Table::new(name, &columns);
    let mut series = Vec::new();
    for c in curves {
        let points = tradeoff_curve(&c.demand, &c.net, &c.r_c, &c.radio, battery, c.caching, c.power, opts)?;
        let noise_dbm = watts_to_dbm(c.radio.noise_power_w);
        for p in &points {
            let mut row: Vec<Cell> = Vec::new();
            if with_parameters {
                row.extend([c.demand.zipf_exponent.into(), c.net.user_density.into(), noise_dbm.into()]);
            }
            row.extend(tradeoff_cells(p));
            table.push(row);
        }
        let mut parts = vec![("c", c.caching.name().to_owned()), ("p", c.power.name().to_owned())];
        if with_parameters {
            parts.extend([
                ("beta", format_number(c.demand.zipf_exponent)),
                ("lambda", format_number(c.net.user_density)),
                ("noise", format_number(noise_dbm)),
            ]);
        }
        series.push(Series {
            name: series_name(name, &parts),
            x_label: "offloading_ratio",
            y_label: "energy_cost_ratio",
            points: points.iter().map(|p| (p.offloading_ratio, p.energy_cost_ratio)).collect(),
        });
    }
    Ok(Output { tables: vec![table], series })
}

fn policy_pairs(cfg: &ExperimentConfig) -> Vec<(CachingPolicy, PowerPolicy)> {
    cfg.caching_policies
        .iter()
        .flat_map(|&c| cfg.power_policies.iter().map(move |&p| (c, p)))
        .collect()
}

/// Offloading ratio and helper energy over the `r_c` sweep for every
/// configured policy pair.
pub fn cmd_tradeoff(cfg: &ExperimentConfig) -> Result<Output> {
    if cfg.sweep.axis != SweepAxis::CollaborationDistance {
        return Err(Error::Config(format!(
            "tradeoff sweeps r_c; got sweep.axis = \"{}\"",
            cfg.sweep.axis.name()
        )));
    }
    let r_c = ensure_increasing(&cfg.sweep.values, "sweep")?;
    let curves: Vec<Curve> = policy_pairs(cfg)
        .into_iter()
        .map(|(caching, power)| Curve { demand: cfg.demand, net: cfg.net, radio: cfg.radio, caching, power, r_c: r_c.clone() })
        .collect();
    tradeoff_table("tradeoff", &curves, &cfg.battery, &cfg.analytics, false)
}

pub const SIMULATE_COLUMNS: [&str; 23] = [
    "r_c_m",
    "beta",
    "lambda",
    "noise_dbm",
    "caching_policy",
    "power_policy",
    "topology",
    "self_cache_hit",
    "realizations",
    "master_seed",
    "num_requests",
    "num_offloaded",
    "offloading_ratio_sim",
    "offloading_ratio_analytic",
    "ci_halfwidth",
    "z_score",
    "avg_energy_sim_j",
    "avg_energy_analytic_j",
    "energy_ci_halfwidth",
    "link_distance_mean_m",
    "link_distance_p10_m",
    "link_distance_p50_m",
    "link_distance_p90_m",
];

pub const HISTOGRAM_COLUMNS: [&str; 8] = [
    "r_c_m",
    "caching_policy",
    "power_policy",
    "bin_lo_m",
    "bin_hi_m",
    "count",
    "fraction_sim",
    "fraction_analytic",
];

pub const FADING_COLUMNS: [&str; 8] = [
    "r_c_m",
    "caching_policy",
    "power_policy",
    "distance_m",
    "tx_power_w",
    "approx_rate_bps",
    "ergodic_rate_bps",
    "relative_error",
];

/// Probability that an offloaded link is between `lo` and `hi` meters long,
/// from the nearest-helper distance law.
fn analytic_bin_fraction(demand: &DemandModel, net: &NetworkConfig, caching: &[f64], lo: f64, hi: f64) -> f64 {
    let pr = request_probabilities(demand);
    let cdf = |p: f64, r: f64| -(-net.user_density * p * std::f64::consts::PI * r * r).exp_m1();
    let mut mass = 0.0;
    let mut offloaded = 0.0;
    for (&q, &p) in pr.iter().zip(caching) {
        mass += q * (cdf(p, hi) - cdf(p, lo));
        offloaded += q * hit_probability(net, p);
    }
    if offloaded > 0.0 {
        mass / offloaded
    } else {
        0.0
    }
}

fn simulate_into(name: &str, cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let mut main = Table::new(name, &SIMULATE_COLUMNS);
    let mut hist = Table::new(format!("{name}_link_histogram"), &HISTOGRAM_COLUMNS);
    let mut fading = Table::new(format!("{name}_fading"), &FADING_COLUMNS);
    let opts = SimOptions { self_cache_hit: cfg.mc.self_cache_hit, record_links: cfg.mc.histogram_bins > 0 };
    let mut analytic_series: Vec<Series> = Vec::new();
    let mut sim_series: Vec<Series> = Vec::new();
    for (caching_policy, power_policy) in policy_pairs(cfg) {
        let mut a_pts = Vec::new();
        let mut s_pts = Vec::new();
        for &v in &cfg.sweep.values {
            let label = sweep_label(cfg.sweep.axis, v);
            let (demand, net, radio) = cfg.at_sweep_value(v).map_err(|e| e.context(label.clone()))?;
            let point = || -> Result<(Vec<f64>, f64, f64, SimReport)> {
                let caching = caching_policy.solve(&demand, &net)?.probs;
                let ratio = offloading_ratio(&demand, &net, &caching)?;
                let energy = average_energy(&demand, &net, &radio, &caching, power_policy, &cfg.analytics)?;
                let report = run_campaign_with_caching(
                    &demand,
                    &net,
                    &radio,
                    &caching,
                    power_policy,
                    cfg.mc.realizations,
                    cfg.mc.master_seed,
                    &opts,
                )?;
                Ok((caching, ratio, energy, report))
            };
            let (caching, ratio, energy, report) = point().map_err(|e| e.context(label.clone()))?;
            let z = if report.ci_halfwidth > 0.0 {
                (report.empirical_offloading_ratio - ratio) / (report.ci_halfwidth / crate::stats::Z_95)
            } else {
                f64::NAN
            };
            let noise_dbm = watts_to_dbm(radio.noise_power_w);
            main.push(vec![
                net.collaboration_distance.into(),
                demand.zipf_exponent.into(),
                net.user_density.into(),
                noise_dbm.into(),
                caching_policy.name().into(),
                power_policy.name().into(),
                net.topology.name().into(),
                match cfg.mc.self_cache_hit {
                    crate::sim::SelfCacheHit::Exclude => "exclude",
                    crate::sim::SelfCacheHit::LocalHit => "local_hit",
                }
                .into(),
                report.num_realizations.into(),
                cfg.mc.master_seed.into(),
                report.num_requests.into(),
                report.num_offloaded.into(),
                report.empirical_offloading_ratio.into(),
                ratio.into(),
                report.ci_halfwidth.into(),
                z.into(),
                report.empirical_avg_energy_j.into(),
                energy.into(),
                report.energy_ci_halfwidth.into(),
                report.link_distances.mean.into(),
                report.link_distances.p10.into(),
                report.link_distances.p50.into(),
                report.link_distances.p90.into(),
            ]);
            a_pts.push((v, ratio));
            s_pts.push((v, report.empirical_offloading_ratio));

            if cfg.mc.histogram_bins > 0 {
                let bins = cfg.mc.histogram_bins;
                let width = net.collaboration_distance / bins as f64;
                let mut counts = vec![0u64; bins];
                for link in &report.links {
                    counts[((link.distance_m / width) as usize).min(bins - 1)] += 1;
                }
                let total = report.links.len().max(1) as f64;
                for (k, &count) in counts.iter().enumerate() {
                    let (lo, hi) = (k as f64 * width, (k + 1) as f64 * width);
                    hist.push(vec![
                        net.collaboration_distance.into(),
                        caching_policy.name().into(),
                        power_policy.name().into(),
                        lo.into(),
                        hi.into(),
                        count.into(),
                        (count as f64 / total).into(),
                        analytic_bin_fraction(&demand, &net, &caching, lo, hi).into(),
                    ]);
                }
            }

            if cfg.mc.fading_draws > 0 && report.link_distances.count > 0 {
                let r = report.link_distances.p50;
                let tx = match power_policy {
                    PowerPolicy::Optimal => solve_optimal_power(&radio, &demand, r)?.tx_power_w,
                    PowerPolicy::MaxPower => radio.max_tx_power_w,
                };
                let d = fading_rate_diagnostic(&radio, tx, r, cfg.mc.fading_draws, cfg.mc.master_seed)?;
                fading.push(vec![
                    net.collaboration_distance.into(),
                    caching_policy.name().into(),
                    power_policy.name().into(),
                    d.distance_m.into(),
                    tx.into(),
                    d.approx_rate_bps.into(),
                    d.ergodic_rate_bps.into(),
                    d.relative_error.into(),
                ]);
            }
        }
        let axis = cfg.sweep.axis.name();
        analytic_series.push(Series {
            name: series_name(&format!("{name}_analytic"), &[("c", caching_policy.name().into()), ("p", power_policy.name().into())]),
            x_label: axis,
            y_label: "offloading_ratio",
            points: a_pts,
        });
        sim_series.push(Series {
            name: series_name(&format!("{name}_sim"), &[("c", caching_policy.name().into()), ("p", power_policy.name().into())]),
            x_label: axis,
            y_label: "offloading_ratio",
            points: s_pts,
        });
    }
    out.tables.push(main);
    if cfg.mc.histogram_bins > 0 {
        out.tables.push(hist);
    }
    if cfg.mc.fading_draws > 0 {
        out.tables.push(fading);
    }
    out.series.extend(analytic_series);
    out.series.extend(sim_series);
    Ok(())
}

/// Monte Carlo campaigns next to the analytic offloading ratio and energy
/// for every sweep point and policy pair.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Output> {
    let mut out = Output::default();
    simulate_into("simulate", cfg, &mut out)?;
    Ok(out)
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

/// Tables behind the evaluation figures, all on the configured base
/// parameters:
///
/// * `fig3a_cache_dist`: caching distribution at `r_c = 100` m for
///   `beta ∈ {0.5, 1, 1.5}` and `lambda ∈ {0.01, 0.03}`.
/// * `fig3b_power`: optimal power and link energy over the power grid.
/// * `fig4_analytic`, `fig4_simulate`: offloading ratio and energy versus
///   `r_c ∈ {10, …, 200}` m, analytic for all policy pairs, simulated for
///   optimal and uniform caching with optimal power.
/// * `fig5_beta_lambda`: `r_c = 100` m, `beta ∈ {0, 0.25, …, 2}`,
///   `lambda ∈ {0.01, …, 0.05}`.
/// * `fig6a` to `fig6d`: tradeoff over `r_c ∈ {10, …, 100}` m for all policy
///   pairs, then for noise `{-95, -85, -75, -70}` dBm, `lambda ∈ {0.01, 0.03,
///   0.05}` and `beta ∈ {0, 0.5, 1, 1.5}` with both policies optimal.
pub fn cmd_figures(cfg: &ExperimentConfig) -> Result<Output> {
    let mut out = Output::default();
    let at = |beta: f64, lambda: f64, r_c: f64| -> Result<(DemandModel, NetworkConfig)> {
        let d = cfg.demand.with_exponent(beta);
        let n = NetworkConfig { user_density: lambda, collaboration_distance: r_c, ..cfg.net };
        d.validate()?;
        n.validate()?;
        Ok((d, n))
    };

    let fig3a = [0.5, 1.0, 1.5]
        .iter()
        .flat_map(|&b| [0.01, 0.03].into_iter().map(move |l| (b, l)))
        .map(|(b, l)| at(b, l, 100.0))
        .collect::<Result<Vec<_>>>()?;
    out.extend(cache_dist_table("fig3a_cache_dist", &fig3a)?);
    out.extend(power_table("fig3b_power", &cfg.radio, &cfg.demand, &cfg.power_grid.points())?);

    let all_pairs = [
        (CachingPolicy::Optimal, PowerPolicy::Optimal),
        (CachingPolicy::Optimal, PowerPolicy::MaxPower),
        (CachingPolicy::Uniform, PowerPolicy::Optimal),
        (CachingPolicy::Uniform, PowerPolicy::MaxPower),
    ];
    let curve = |d: DemandModel, n: NetworkConfig, radio: RadioConfig, (caching, power): (CachingPolicy, PowerPolicy), r_c: &[f64]| Curve {
        demand: d,
        net: n,
        radio,
        caching,
        power,
        r_c: r_c.to_vec(),
    };
    let optimal = (CachingPolicy::Optimal, PowerPolicy::Optimal);

    let r_c_fig4 = grid(10.0, 200.0, 10.0);
    let curves: Vec<Curve> = all_pairs.iter().map(|&pp| curve(cfg.demand, cfg.net, cfg.radio, pp, &r_c_fig4)).collect();
    out.extend(tradeoff_table("fig4_analytic", &curves, &cfg.battery, &cfg.analytics, true)?);

    let mut sim_cfg = cfg.clone();
    sim_cfg.sweep = config::Sweep { axis: SweepAxis::CollaborationDistance, values: r_c_fig4 };
    sim_cfg.caching_policies = vec![CachingPolicy::Optimal, CachingPolicy::Uniform];
    sim_cfg.power_policies = vec![PowerPolicy::Optimal];
    simulate_into("fig4_simulate", &sim_cfg, &mut out)?;

    let mut fig5 = Vec::new();
    for lambda in [0.01, 0.02, 0.03, 0.04, 0.05] {
        for beta in grid(0.0, 2.0, 0.25) {
            let (d, n) = at(beta, lambda, 100.0)?;
            fig5.push(curve(d, n, cfg.radio, optimal, &[100.0]));
        }
    }
    out.extend(tradeoff_table("fig5_beta_lambda", &fig5, &cfg.battery, &cfg.analytics, true)?);

    let r_c_fig6 = grid(10.0, 100.0, 5.0);
    let base = (cfg.demand, cfg.net);
    let fig6a: Vec<Curve> = all_pairs.iter().map(|&pp| curve(base.0, base.1, cfg.radio, pp, &r_c_fig6)).collect();
    out.extend(tradeoff_table("fig6a_policies", &fig6a, &cfg.battery, &cfg.analytics, true)?);

    let fig6b: Vec<Curve> = [-95.0, -85.0, -75.0, -70.0]
        .iter()
        .map(|&dbm| curve(base.0, base.1, cfg.radio.with_noise_power(crate::model::dbm_to_watts(dbm)), optimal, &r_c_fig6))
        .collect();
    out.extend(tradeoff_table("fig6b_noise", &fig6b, &cfg.battery, &cfg.analytics, true)?);

    let fig6c = [0.01, 0.03, 0.05]
        .iter()
        .map(|&l| at(cfg.demand.zipf_exponent, l, 100.0).map(|(d, n)| curve(d, n, cfg.radio, optimal, &r_c_fig6)))
        .collect::<Result<Vec<_>>>()?;
    out.extend(tradeoff_table("fig6c_density", &fig6c, &cfg.battery, &cfg.analytics, true)?);

    let fig6d = [0.0, 0.5, 1.0, 1.5]
        .iter()
        .map(|&b| at(b, cfg.net.user_density, 100.0).map(|(d, n)| curve(d, n, cfg.radio, optimal, &r_c_fig6)))
        .collect::<Result<Vec<_>>>()?;
    out.extend(tradeoff_table("fig6d_zipf", &fig6d, &cfg.battery, &cfg.analytics, true)?);
    Ok(out)
}

/// Writes `config.toml`, one CSV per table and, with `plot_data`, one
/// two-column `.dat` file per series under `plot/`. Returns the paths
/// written, in order.
pub fn write_output(out: &Output, cfg: &ExperimentConfig, dir: &Path, plot_data: bool) -> Result<Vec<PathBuf>> {
    let io = |p: &Path, e: std::io::Error| Error::Io(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::new();
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, cfg.to_toml()).map_err(|e| io(&config_path, e))?;
    written.push(config_path);
    for t in &out.tables {
        let path = dir.join(format!("{}.csv", t.name));
        t.write(&path)?;
        written.push(path);
    }
    if plot_data {
        let plot_dir = dir.join("plot");
        std::fs::create_dir_all(&plot_dir).map_err(|e| io(&plot_dir, e))?;
        for s in &out.series {
            let path = plot_dir.join(format!("{}.dat", s.name));
            std::fs::write(&path, s.to_dat()).map_err(|e| io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_layers(RawConfig::parse(extra).unwrap(), None).unwrap()
    }

    #[test]
    fn commands_parse_by_name() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("plot".parse::<Command>().unwrap_err().is_config());
    }

    #[test]
    fn cache_dist_rows_per_sweep_value() {
        let c = cfg("sweep.axis = \"beta\"\nsweep.values = [0, 1]\ndemand.catalog_size = 50\n");
        let out = cmd_cache_dist(&c).unwrap();
        let t = &out.tables[0];
        assert_eq!(t.rows.len(), 100);
        let p = t.numbers("p_c");
        assert!(p[..50].iter().all(|&x| (x - p[0]).abs() < 1e-15));
        assert_eq!(out.series.len(), 2);
    }

    #[test]
    fn noise_sweep_rejected_for_cache_dist() {
        let c = cfg("sweep.axis = \"noise_dbm\"\nsweep.values = [-90]\n");
        assert!(cmd_cache_dist(&c).unwrap_err().is_config());
    }

    #[test]
    fn tradeoff_needs_increasing_r_c() {
        let c = cfg("sweep.values = [20, 10]\n");
        assert!(cmd_tradeoff(&c).unwrap_err().is_config());
        let c = cfg("sweep.axis = \"beta\"\nsweep.values = [1]\n");
        assert!(cmd_tradeoff(&c).unwrap_err().is_config());
    }

    #[test]
    fn tradeoff_has_row_per_policy_pair() {
        let c = cfg(
            "sweep.values = [10, 20]\npolicies.caching = [\"optimal\", \"uniform\"]\npolicies.power = [\"optimal\", \"max\"]\n",
        );
        let out = cmd_tradeoff(&c).unwrap();
        assert_eq!(out.tables[0].rows.len(), 8);
        assert_eq!(out.tables[0].columns, TRADEOFF_COLUMNS.to_vec());
        assert_eq!(out.series.len(), 4);
    }

    #[test]
    fn analytic_histogram_sums_to_one() {
        let c = cfg("");
        let caching = CachingPolicy::Optimal.solve(&c.demand, &c.net).unwrap().probs;
        let r_c = c.net.collaboration_distance;
        let total: f64 = (0..20)
            .map(|k| analytic_bin_fraction(&c.demand, &c.net, &caching, k as f64 * r_c / 20.0, (k + 1) as f64 * r_c / 20.0))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simulate_emits_optional_tables() {
        let c = cfg(
            "preset = \"desk-torus\"\nsweep.values = [20]\nmc.realizations = 3\nmc.histogram_bins = 5\nmc.fading_draws = 1000\n",
        );
        let out = cmd_simulate(&c).unwrap();
        let names: Vec<&str> = out.tables.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["simulate", "simulate_link_histogram", "simulate_fading"]);
        assert_eq!(out.tables[1].rows.len(), 5);
        let counts: f64 = out.tables[1].numbers("count").iter().sum();
        assert_eq!(counts, out.tables[0].numbers("num_offloaded")[0]);
    }
}
