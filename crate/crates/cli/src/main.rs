//! `uofdm`: run ACO-OFDM / Flip-OFDM experiments from the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uofdm::channel::{random_diffuse_ir, ChannelDump};
use uofdm::modem::complexity_report;
use uofdm::sim::{run_ber_sweep, ChannelMode};

use crate::config::RawConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments; exit code 1.
    Validation(String),
    /// Failure while running; exit code 2.
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<uofdm::Error> for CliError {
    fn from(e: uofdm::Error) -> Self {
        match e {
            uofdm::Error::Config(_) => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "uofdm", version, about = "Unipolar optical OFDM (ACO / Flip) simulator")]
struct Cli {
    /// Master RNG seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key = value run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo BER sweep; writes ber.csv, run.conf and manifest.json.
    BerSweep {
        /// Channel mode. `los` also selects a 10-sample cyclic prefix
        /// unless one is configured explicitly.
        #[arg(long)]
        channel: Option<String>,
        /// Configuration overrides.
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Draw one diffuse channel realization and write channel.txt.
    ChannelGen {
        #[arg(long, default_value_t = 8.0)]
        rms_delay_ns: f64,
        #[arg(long, default_value_t = 0.75)]
        tap_spacing_ns: f64,
        #[arg(long, default_value_t = 64)]
        taps: usize,
    },
    /// Transform counts and costs of both schemes per frame-pair window.
    Complexity {
        #[arg(long, default_value_t = 100)]
        windows: u64,
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Generate a matplotlib script that plots a ber.csv.
    PlotScript {
        /// CSV written by ber-sweep.
        csv: PathBuf,
    },
}

fn load_config(cli: &Cli, overrides: &[String]) -> Result<RawConfig, CliError> {
    let mut raw = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            RawConfig::parse(&text, &path.display().to_string())?
        }
        None => RawConfig::default(),
    };
    for o in overrides {
        raw.set_override(o)?;
    }
    if let Some(seed) = cli.seed {
        raw.set_override(&format!("seed={seed}"))?;
    }
    Ok(raw)
}

fn ensure_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn write(path: PathBuf, contents: &str) -> Result<(), CliError> {
    fs::write(&path, contents).map_err(|e| io_error(&path, e))
}

fn cmd_ber_sweep(cli: &Cli, channel: Option<&str>, overrides: &[String]) -> Result<(), CliError> {
    let mut raw = load_config(cli, &[])?;
    if let Some(mode) = channel {
        let mode: ChannelMode = mode.parse()?;
        raw.set_override(&format!("channel={mode}"))?;
        if mode == ChannelMode::LosAwgn && !raw.contains("cyclic_prefix") {
            raw.set_override("cyclic_prefix=10")?;
        }
    }
    for o in overrides {
        raw.set_override(o)?;
    }
    if let Some(seed) = cli.seed {
        raw.set_override(&format!("seed={seed}"))?;
    }
    let cfg = raw.resolve()?;

    let result = run_ber_sweep(&cfg)?;
    ensure_out(&cli.out)?;
    write(cli.out.join("ber.csv"), &output::ber_csv(&result))?;
    write(cli.out.join("run.conf"), &config::render(&cfg))?;
    let manifest = output::manifest(cli.config.as_deref(), &cfg, &["ber.csv", "run.conf"]);
    write(cli.out.join("manifest.json"), &manifest)?;
    for curve in &result.curves {
        for p in &curve.points {
            println!(
                "{:<5} {:<9} snr {:>6} dB  ber {:.3e} ± {:.1e}  ({} errors / {} bits)",
                curve.scheme, cfg.channel_mode, p.snr_db, p.ber, p.stderr, p.bit_errors, p.bits
            );
        }
    }
    Ok(())
}

fn cmd_channel_gen(cli: &Cli, rms_delay_ns: f64, tap_spacing_ns: f64, taps: usize) -> Result<(), CliError> {
    if !(rms_delay_ns > 0.0) || !(tap_spacing_ns > 0.0) || taps == 0 {
        return Err(CliError::Validation(format!(
            "invalid channel parameters: D = {rms_delay_ns} ns, spacing = {tap_spacing_ns} ns, taps = {taps}"
        )));
    }
    let seed = cli.seed.unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rms_delay_ns / 1e9;
    let ir = random_diffuse_ir(d, tap_spacing_ns / 1e9, taps, &mut rng)?;
    let energy = ir.energy();
    let rms = ir.rms_delay();
    let dump = ChannelDump {
        rms_delay_spread: d,
        seed,
        ir,
    };
    ensure_out(&cli.out)?;
    let path = cli.out.join("channel.txt");
    write(path.clone(), &dump.to_text())?;
    println!("wrote {} ({taps} taps)", path.display());
    println!("sum h^2 = {energy:.12}");
    println!("rms delay = {:.4} ns", rms * 1e9);
    Ok(())
}

fn cmd_complexity(cli: &Cli, windows: u64, overrides: &[String]) -> Result<(), CliError> {
    let cfg = load_config(cli, overrides)?.resolve()?;
    let report = complexity_report(&cfg.ofdm, windows)?;
    print!("{report}");
    Ok(())
}

fn cmd_plot_script(cli: &Cli, csv: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(csv).map_err(|e| CliError::Validation(format!("{}: {e}", csv.display())))?;
    let rows = output::parse_ber_csv(&text).map_err(|m| CliError::Validation(format!("{}: {m}", csv.display())))?;
    let name = csv
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "ber.csv".into());
    ensure_out(&cli.out)?;
    let path = cli.out.join("plot_ber.py");
    write(path.clone(), &output::plot_script(&rows, &name))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::BerSweep { channel, overrides } => cmd_ber_sweep(cli, channel.as_deref(), overrides),
        Command::ChannelGen {
            rms_delay_ns,
            tap_spacing_ns,
            taps,
        } => cmd_channel_gen(cli, *rms_delay_ns, *tap_spacing_ns, *taps),
        Command::Complexity { windows, overrides } => cmd_complexity(cli, *windows, overrides),
        Command::PlotScript { csv } => cmd_plot_script(cli, csv),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Validation(_) => 1,
                CliError::Runtime(_) => 2,
            })
        }
    }
}
