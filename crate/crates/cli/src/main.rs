use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use nanolink_core::assembly::run_assembly;
use nanolink_core::channel::channel_response;
use nanolink_core::config::ConfigFile;
use nanolink_core::csvout;
use nanolink_core::experiment::{run_channel_sweep, run_end_to_end, sweep_ber};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "nanolink",
    about = "Wired nano-communication link simulator",
    version
)]
struct Cli {
    /// Configuration file (key = value under [section] headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed override, applied after the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long, global = true, default_value = "out.csv")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate nanowire self-assembly and export the growth trace.
    Assemble,
    /// Export the nanowire frequency response (attenuation/phase/delay).
    Channel,
    /// Export the maximum-throughput curve over the first 60 µs.
    Throughput,
    /// Simulate Ca2+ release for a rectangular pulse and export the trace.
    Release,
    /// Monte-Carlo BER over the threshold sweep, one curve per channel count.
    Ber,
    /// Run the full pipeline on a random message and export per-symbol results.
    E2e,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path).context("loading config")?,
        None => ConfigFile::default(),
    };

    match cli.command {
        Command::Assemble => {
            let mut cfg = file.assembly()?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let (state, trace) = run_assembly(&cfg)?;
            csvout::export_growth_trace(&trace, &cli.out)?;
            eprintln!(
                "assembly: chain length {} complete={} -> {}",
                state.chain.len(),
                state.complete,
                cli.out.display()
            );
        }
        Command::Channel => {
            let cfg = experiment_config(&file, cli.seed)?;
            let freqs: Vec<f64> = (0..=120)
                .map(|i| 10f64.powf(3.0 + i as f64 * 0.05))
                .collect();
            let resp = channel_response(&cfg.rlc, cfg.wire_length_um, &freqs, cfg.load_ohm)?;
            csvout::export_channel_response(&resp, &cli.out)?;
            eprintln!("channel: {} points -> {}", freqs.len(), cli.out.display());
        }
        Command::Throughput => {
            let cfg = experiment_config(&file, cli.seed)?;
            let times: Vec<f64> = (0..=600).map(|i| i as f64 * 0.1e-6).collect();
            csvout::export_throughput(&cfg.velocity, &cfg.capacity, &times, &cli.out)?;
            eprintln!(
                "throughput: {} points -> {}",
                times.len(),
                cli.out.display()
            );
        }
        Command::Release => {
            let cfg = experiment_config(&file, cli.seed)?;
            let rows = run_channel_sweep(&cfg)?;
            csvout::export_channel_sweep(&rows, &cli.out)?;
            // also export the full trace for the strongest case
            let mut single = cfg.clone();
            single.bit_count = 1;
            let result = nanolink_core::experiment::run_trial(
                &single,
                &vec![1; single.scheme.bits_per_symbol()],
            )?;
            let trace_path = cli.out.with_extension("trace.csv");
            csvout::export_ca_trace(&result, &trace_path)?;
            eprintln!(
                "release: {} cases -> {}; trace -> {}",
                rows.len(),
                cli.out.display(),
                trace_path.display()
            );
        }
        Command::Ber => {
            let cfg = experiment_config(&file, cli.seed)?;
            let curves = sweep_ber(&cfg)?;
            csvout::export_ber(&curves, &cli.out)?;
            for c in &curves {
                let (xi, ber) = c.min_ber();
                eprintln!(
                    "ber: n={} min BER {:.3e} at threshold {}",
                    c.n_channels, ber, xi
                );
            }
            eprintln!("ber -> {}", cli.out.display());
        }
        Command::E2e => {
            let mut cfg = experiment_config(&file, cli.seed)?;
            if file.get("experiment", "bit_count").is_none() {
                cfg.bit_count = 32; // full traces are stored; keep it small by default
            }
            let result = run_end_to_end(&cfg)?;
            csvout::export_e2e(&result, cfg.scheme.bits_per_symbol(), &cli.out)?;
            let errors = result
                .bits
                .iter()
                .zip(&result.decoded)
                .filter(|(a, b)| a != b)
                .count();
            eprintln!(
                "e2e: {} bits, {} errors -> {}",
                result.bits.len(),
                errors,
                cli.out.display()
            );
        }
    }
    Ok(())
}

fn experiment_config(
    file: &ConfigFile,
    seed: Option<u64>,
) -> Result<nanolink_core::experiment::ExperimentConfig> {
    let mut cfg = file.experiment()?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}
