use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use beamtrain::channel::{generate_channel, save_channel, strip_los};
use beamtrain::harness::{emit_csv, emit_summary_json, run_experiment, ExperimentConfig, ExperimentOutput};
use beamtrain::training::Method;
use beamtrain::Error;

#[derive(Parser)]
#[command(name = "beamtrain", version, about = "Hybrid-MIMO mmWave beam training simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment and write results.csv and summary.json.
    Run {
        /// Config file, or one of the built-in profiles `default` and `fast`.
        #[arg(long, required_unless_present = "fast")]
        config: Option<String>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Use the reduced `fast` profile instead of --config.
        #[arg(long, conflicts_with = "config")]
        fast: bool,
    },
    /// Run K-Best (plus the configured baselines) for a list of K values.
    SweepK {
        /// Comma-separated K values, e.g. 1,2,5,10.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long, default_value = "default")]
        config: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate one channel realization and write it as JSON.
    GenChannel {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "default")]
        config: String,
    },
    /// Write the beam codebook as JSON.
    Codebook {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "default")]
        config: String,
    },
}

const EXIT_USAGE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParam { .. } | Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn load(config: &str, seed: Option<u64>) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::resolve(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run { config, out_dir, seed, fast } => {
            let cfg = load(if fast { "fast" } else { config.as_deref().unwrap_or("default") }, seed)?;
            run_and_write(&cfg, &out_dir)
        }
        Command::SweepK { k, config, out_dir, seed } => {
            let mut cfg = load(&config, seed)?;
            cfg.k_values = k;
            if !cfg.runs(Method::Kbest) {
                cfg.methods.push(Method::Kbest);
            }
            cfg.validate()?;
            run_and_write(&cfg, &out_dir)
        }
        Command::GenChannel { seed, out, config } => {
            let cfg = load(&config, None)?;
            let mut ch = generate_channel(&cfg.channel_params, seed)?;
            if cfg.nlos {
                ch = strip_los(&ch)?;
            }
            save_channel(&ch, &out)?;
            eprintln!("wrote {} clusters to {}", ch.clusters().len(), out.display());
            Ok(())
        }
        Command::Codebook { out, config } => {
            let cfg = load(&config, None)?;
            let cb = cfg.build_codebook()?;
            fs::write(&out, cb.to_json()? + "\n")?;
            eprintln!("wrote {} beams to {}", cb.len(), out.display());
            Ok(())
        }
    }
}

fn run_and_write(cfg: &ExperimentConfig, out_dir: &PathBuf) -> Result<(), Error> {
    fs::create_dir_all(out_dir)?;
    let out: ExperimentOutput = run_experiment(cfg)?;
    emit_csv(&out.records, out_dir.join("results.csv"))?;
    emit_summary_json(&out.summary, out_dir.join("summary.json"))?;
    fs::write(out_dir.join("config.conf"), cfg.to_text())?;

    let dropped = out.dropped_energy_fraction.iter().sum::<f64>() / out.dropped_energy_fraction.len() as f64;
    eprintln!(
        "{} realizations, {} records; mean dropped tap energy {:.3e}",
        cfg.n_realizations,
        out.records.len(),
        dropped
    );
    for row in &out.summary {
        let rel = row.mean_rel_rate.map(|r| format!("{r:.4}")).unwrap_or_else(|| "-".into());
        eprintln!(
            "  {:<6} K={:<4} rate {:>8.4} b/s/Hz  rel {}  iterations {:.0}+{:.0}",
            row.method.as_str(),
            row.k,
            row.mean_rate,
            rel,
            row.mean_n_siso_iter,
            row.mean_n_mimo_iter
        );
    }
    Ok(())
}
