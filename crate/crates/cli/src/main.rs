use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use d2d_offload::harness::{write_output, Command, ExperimentConfig, RawConfig};
use d2d_offload::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Subcommand {
    CacheDist,
    Power,
    Tradeoff,
    Simulate,
    Figures,
}

impl From<Subcommand> for Command {
    fn from(s: Subcommand) -> Self {
        match s {
            Subcommand::CacheDist => Command::CacheDist,
            Subcommand::Power => Command::Power,
            Subcommand::Tradeoff => Command::Tradeoff,
            Subcommand::Simulate => Command::Simulate,
            Subcommand::Figures => Command::Figures,
        }
    }
}

/// Caching distribution, transmit power, offloading/energy tradeoff and
/// Monte Carlo experiments for cache-enabled D2D networks.
///
/// Exit status: 0 on success, 2 on a configuration error, 3 on a solver or
/// quadrature failure.
#[derive(Debug, Parser)]
#[command(name = "d2d-offload", version)]
struct Cli {
    #[arg(value_enum)]
    command: Subcommand,

    /// TOML file of sectioned keys layered over the preset.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Base parameter set (paper-2015 or desk-torus).
    #[arg(long)]
    preset: Option<String>,

    /// Master seed for Monte Carlo runs; overrides mc.master_seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory; overrides output_dir. Without one, CSV goes to
    /// standard output.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write two-column files per curve under <out>/plot.
    #[arg(long)]
    plot_data: bool,
}

fn run(cli: &Cli) -> Result<(), Error> {
    let file = match &cli.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    let mut cfg = ExperimentConfig::from_layers(file, cli.preset.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(dir) = &cli.out {
        cfg = cfg.with_output_dir(dir.clone());
    }
    let command = Command::from(cli.command);
    if cfg.output_dir.is_none() && (cli.plot_data || command == Command::Figures) {
        return Err(Error::Config(format!(
            "{} needs an output directory (--out or output_dir)",
            if cli.plot_data { "--plot-data" } else { "figures" }
        )));
    }
    let out = command.run(&cfg)?;
    match &cfg.output_dir {
        Some(dir) => {
            for path in write_output(&out, &cfg, dir, cli.plot_data)? {
                log::info!("wrote {}", path.display());
            }
        }
        None => {
            for t in &out.tables {
                print!("{}", t.to_csv());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("d2d-offload: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
