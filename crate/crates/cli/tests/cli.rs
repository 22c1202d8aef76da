use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_d2d-offload")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn power_to_stdout() {
    let out = run(&["power", "--preset", "paper-2015"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# d2d-offload power schema v1"));
    assert_eq!(lines.next(), Some("r_m,p_star_w,p_star_dbm,energy_j,at_max_power"));
    assert_eq!(lines.count(), 300);
}

#[test]
fn unknown_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "radio.noise = -70\n");
    let out = run(&["power", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("noise"));
}

#[test]
fn missing_config_and_bad_preset_exit_2() {
    assert_eq!(run(&["power", "--config", "/nonexistent/run.toml"]).status.code(), Some(2));
    assert_eq!(run(&["power", "--preset", "paper-1999"]).status.code(), Some(2));
    assert_eq!(run(&["figures"]).status.code(), Some(2));
    assert_eq!(run(&["power", "--plot-data"]).status.code(), Some(2));
}

#[test]
fn unbounded_energy_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "radio.pathloss_db_at_1m = 4000\nsweep.values = [10]\n");
    let out = run(&["tradeoff", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn out_dir_receives_config_csv_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.values = [10, 20, 30]\npolicies.caching = [\"optimal\", \"uniform\"]\n");
    let out_dir = dir.path().join("out");
    let out = run(&["tradeoff", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--plot-data"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["config.toml", "tradeoff.csv", "plot/tradeoff_coptimal_poptimal.dat", "plot/tradeoff_cuniform_poptimal.dat"] {
        assert!(out_dir.join(name).is_file(), "{name}");
    }
    let copied = std::fs::read_to_string(out_dir.join("config.toml")).unwrap();
    assert!(copied.contains("noise_dbm = -95.0"));
    let again = dir.path().join("again");
    let rerun = run(&["tradeoff", "--config", out_dir.join("config.toml").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(rerun.status.code(), Some(0));
    let csv = std::fs::read(out_dir.join("tradeoff.csv")).unwrap();
    assert_eq!(std::fs::read(again.join("tradeoff.csv")).unwrap(), csv);
}

#[test]
fn seed_flag_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "preset = \"desk-torus\"\nsweep.values = [20]\nmc.realizations = 3\n");
    let a = run(&["simulate", "--config", &cfg, "--seed", "11"]);
    let b = run(&["simulate", "--config", &cfg, "--seed", "11"]);
    let c = run(&["simulate", "--config", &cfg, "--seed", "12"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert!(String::from_utf8(a.stdout).unwrap().contains(",11,"));
}

#[test]
fn cache_dist_sweeps_zipf_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "demand.catalog_size = 5\nsweep.axis = \"beta\"\nsweep.values = [0, 1]\n");
    let out = run(&["cache-dist", "--config", &cfg]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().nth(2).unwrap().starts_with("1,0.2,0,0.03,100,5"));
}
