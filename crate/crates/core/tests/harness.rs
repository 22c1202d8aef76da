use std::path::PathBuf;

use d2d_offload::caching::{oracle_solve_caching, CachingPolicy};
use d2d_offload::harness::{cmd_cache_dist, cmd_power, cmd_tradeoff, write_output, Cell, Command, ExperimentConfig, RawConfig, Table};
use d2d_offload::power::link_energy;

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_layers(RawConfig::parse(text).unwrap(), None).unwrap()
}

const GOLDEN_CONFIG: &str = "demand.catalog_size = 20\nnet.collaboration_distance_m = 30\nsweep.axis = \"beta\"\nsweep.values = [0, 0.5, 1, 1.5]\n";

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/cache_dist_oracle.csv")
}

/// The cache-dist table built from the projected-gradient oracle instead of
/// the closed form.
fn oracle_table(cfg: &ExperimentConfig) -> Table {
    let mut t = Table::new("cache_dist", &["file_index", "p_c", "beta", "lambda", "r_c", "i_star"]);
    for &beta in &cfg.sweep.values {
        let (d, n, _) = cfg.at_sweep_value(beta).unwrap();
        let p = oracle_solve_caching(&d, &n, 1e-14).unwrap();
        let support = p.iter().rposition(|&x| x > 0.0).unwrap() + 1;
        for (i, &x) in p.iter().enumerate() {
            t.push(vec![(i + 1).into(), x.into(), beta.into(), n.user_density.into(), n.collaboration_distance.into(), support.into()]);
        }
    }
    t
}

#[test]
fn cache_dist_matches_oracle_golden() {
    let cfg = config(GOLDEN_CONFIG);
    if std::env::var_os("D2D_REGENERATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_path().parent().unwrap()).unwrap();
        oracle_table(&cfg).write(&golden_path()).unwrap();
    }
    let golden = std::fs::read_to_string(golden_path()).unwrap();
    let ours = cmd_cache_dist(&cfg).unwrap().tables.remove(0).to_csv();
    let (g_lines, o_lines): (Vec<&str>, Vec<&str>) = (golden.lines().collect(), ours.lines().collect());
    assert_eq!(g_lines.len(), o_lines.len());
    assert_eq!(g_lines[..2], o_lines[..2]);
    for (g, o) in g_lines[2..].iter().zip(&o_lines[2..]) {
        for (k, (a, b)) in g.split(',').zip(o.split(',')).enumerate() {
            let (a, b): (f64, f64) = (a.parse().unwrap(), b.parse().unwrap());
            let tol = if k == 1 { 1e-9 } else { 0.0 };
            assert!((a - b).abs() <= tol, "golden `{g}` vs `{o}`");
        }
    }
}

#[test]
fn cache_dist_shapes() {
    let cfg = config("sweep.axis = \"beta\"\nsweep.values = [0, 0.5, 1, 1.5]\n");
    let t = cmd_cache_dist(&cfg).unwrap().tables.remove(0);
    let p = t.numbers("p_c");
    let n = cfg.demand.catalog_size;
    assert_eq!(p.len(), 4 * n);
    assert!(p[..n].iter().all(|&x| (x - 1.0 / n as f64).abs() < 1e-15));
    for block in p.chunks(n) {
        assert!(block.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }
    let head: Vec<f64> = p.chunks(n).map(|b| b[0]).collect();
    assert!(head.windows(2).all(|w| w[1] > w[0]), "{head:?}");
}

#[test]
fn cache_dist_denser_users_spread_the_cache() {
    let cfg = config("net.collaboration_distance_m = 10\nsweep.axis = \"lambda\"\nsweep.values = [0.01, 0.03, 0.05]\n");
    let t = cmd_cache_dist(&cfg).unwrap().tables.remove(0);
    let n = cfg.demand.catalog_size;
    let head: Vec<f64> = t.numbers("p_c").chunks(n).map(|b| b[0]).collect();
    let support: Vec<f64> = t.numbers("i_star").chunks(n).map(|b| b[0]).collect();
    assert!(head.windows(2).all(|w| w[1] < w[0]), "{head:?}");
    assert!(support.windows(2).all(|w| w[1] > w[0]), "{support:?}");
}

/// Minimum energy over a 10,000-point power grid, refined by golden-section
/// search around the best grid point.
fn grid_search_energy(cfg: &ExperimentConfig, r: f64) -> f64 {
    let p_max = cfg.radio.max_tx_power_w;
    let e = |p: f64| link_energy(&cfg.radio, &cfg.demand, p, r).unwrap();
    let n = 10_000;
    let best = (1..=n).min_by(|&a, &b| e(p_max * a as f64 / n as f64).total_cmp(&e(p_max * b as f64 / n as f64))).unwrap();
    let (mut lo, mut hi) = (p_max * (best - 1) as f64 / n as f64, (p_max * (best + 1) as f64 / n as f64).min(p_max));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if e(a) < e(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    e(0.5 * (lo + hi)).min(e(p_max))
}

#[test]
fn power_table_matches_grid_search() {
    let cfg = config("power.r_min_m = 1\npower.r_max_m = 300\npower.r_step_m = 7\n");
    let t = cmd_power(&cfg).unwrap().tables.remove(0);
    let r = t.numbers("r_m");
    let e = t.numbers("energy_j");
    let p = t.numbers("p_star_w");
    for ((&r, &e), &p) in r.iter().zip(&e).zip(&p) {
        assert!(p <= cfg.radio.max_tx_power_w * (1.0 + 1e-12));
        let oracle = grid_search_energy(&cfg, r);
        assert!(((e - oracle) / oracle).abs() <= 1e-9, "r={r}: {e} vs {oracle}");
    }
    let flags = t.column_index("at_max_power").unwrap();
    assert_eq!(t.rows.last().unwrap()[flags], Cell::Bool(true));
    assert!(e.windows(2).all(|w| w[1] >= w[0]));
}

/// Linear interpolation of `(x, y)` points sorted by `x`.
fn interpolate(points: &[(f64, f64)], x: f64) -> Option<f64> {
    points.windows(2).find(|w| w[0].0 <= x && x <= w[1].0).map(|w| {
        let t = (x - w[0].0) / (w[1].0 - w[0].0);
        w[0].1 + t * (w[1].1 - w[0].1)
    })
}

#[test]
fn optimal_policies_dominate_tradeoff() {
    let r_c: Vec<String> = (2..=20).map(|k| (5 * k).to_string()).collect();
    let cfg = config(&format!(
        "sweep.values = [{}]\npolicies.caching = [\"optimal\", \"uniform\"]\npolicies.power = [\"optimal\", \"max\"]\n",
        r_c.join(", ")
    ));
    let out = cmd_tradeoff(&cfg).unwrap();
    let curves = &out.series;
    assert_eq!(curves.len(), 4);
    let best = curves.iter().find(|s| s.name.ends_with("_coptimal_poptimal")).unwrap();
    for other in curves.iter().filter(|s| s.name != best.name) {
        let mut compared = 0;
        for &(x, y) in &other.points {
            if let Some(y_best) = interpolate(&best.points, x) {
                assert!(y_best <= y * (1.0 + 1e-9), "{}: at ratio {x} best {y_best} vs {y}", other.name);
                compared += 1;
            }
        }
        assert!(compared > 0, "{}", other.name);
    }
    let t = &out.tables[0];
    let ratio = t.numbers("offloading_ratio");
    let energy = t.numbers("avg_energy_j");
    for rows in ratio.chunks(r_c.len()).zip(energy.chunks(r_c.len())) {
        assert!(rows.0.windows(2).all(|w| w[1] >= w[0]));
        assert!(rows.1.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn uniform_policy_rows_are_labelled() {
    let cfg = config("sweep.values = [50]\npolicies.caching = [\"uniform\"]\npolicies.power = [\"max\"]\n");
    let csv = cmd_tradeoff(&cfg).unwrap().tables[0].to_csv();
    assert!(csv.lines().nth(2).unwrap().starts_with("50,uniform,max,"));
    assert_eq!(CachingPolicy::Uniform.name(), "uniform");
}

#[test]
fn output_directory_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("sweep.values = [10, 20]\n").with_output_dir(dir.path().to_path_buf());
    let out = Command::Tradeoff.run(&cfg).unwrap();
    let written = write_output(&out, &cfg, dir.path(), true).unwrap();
    let names: Vec<String> = written.iter().map(|p| p.strip_prefix(dir.path()).unwrap().display().to_string()).collect();
    assert_eq!(names, ["config.toml", "tradeoff.csv", "plot/tradeoff_coptimal_poptimal.dat"]);
    let reloaded = ExperimentConfig::load(&dir.path().join("config.toml"), None).unwrap();
    assert_eq!(reloaded, cfg);
    let csv = std::fs::read(dir.path().join("tradeoff.csv")).unwrap();
    assert!(!csv.contains(&b'\r'));
    assert!(std::str::from_utf8(&csv).unwrap().starts_with("# d2d-offload tradeoff schema v1\n"));
    let dat = std::fs::read_to_string(dir.path().join("plot/tradeoff_coptimal_poptimal.dat")).unwrap();
    assert_eq!(dat.lines().count(), 3);
    assert!(dat.lines().skip(1).all(|l| l.split(' ').count() == 2));
}
