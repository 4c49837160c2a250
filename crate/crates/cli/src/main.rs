use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use ornament_cli::commands::{self, ClassifyOutputs};
use ornament_cli::server::{self, AppState};
use ornament_cli::session::SessionConfig;
use ornament_cli::{CliError, CliResult};
use ornament_core::survey::{TsneOptions, Unobserved};

/// Wallpaper-group ornaments: generation, symmetry classification and
/// similarity-survey analysis.
#[derive(Parser)]
#[command(name = "ornament", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the patterns described by a JSON job file.
    Generate {
        job: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Detect the symmetries of a PNG and print its signature as JSON.
    Classify {
        image: PathBuf,
        /// Acceptance threshold on match scores.
        #[arg(long)]
        threshold: Option<f64>,
        /// Write an overlay of the detected centers and axes here.
        #[arg(long)]
        annotate: Option<PathBuf>,
        /// Write the unit cell and fundamental domain PNGs into this directory.
        #[arg(long)]
        extract: Option<PathBuf>,
        /// Write the signature here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute distance and similarity matrices from survey responses.
    Analyze {
        /// Responses as JSONL or CSV.
        responses: PathBuf,
        /// Task list (JSON array, or an object with a `tasks` array such as a session config).
        tasks: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        experiment: Option<u8>,
        #[arg(long, default_value = "analysis")]
        out_dir: PathBuf,
    },
    /// Embed a distance (CSV) or similarity (JSON) matrix with tSNE.
    Embed {
        matrix: PathBuf,
        #[arg(long, default_value_t = 2)]
        dims: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5.0)]
        perplexity: f64,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        /// Distance of never-compared pairs: `max` (largest observed) or a number.
        #[arg(long, default_value = "max")]
        unobserved: String,
        #[arg(long, default_value = "embedding")]
        out_dir: PathBuf,
    },
    /// Write a synthetic task list and response file.
    Synth {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        experiment: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inconsistent participants (experiment 1).
        #[arg(long, default_value_t = 13)]
        inconsistent: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Print the group catalog as JSON.
    Catalog,
    /// Run an experiment session over HTTP.
    Serve {
        /// Session config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Directory of the append-only response and event logs.
        #[arg(long, default_value = "session-data")]
        data_dir: PathBuf,
        #[arg(long, env = "ORNAMENT_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

fn parse_unobserved(s: &str) -> CliResult<Unobserved> {
    match s {
        "max" => Ok(Unobserved::MaxObserved),
        v => v
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite() && *x >= 0.0)
            .map(Unobserved::Value)
            .ok_or_else(|| CliError::Schema(format!("--unobserved takes 'max' or a non-negative number, got '{s}'"))),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate { job, out_dir } => {
            for path in commands::generate(&job, &out_dir)? {
                println!("{}", path.display());
            }
        }
        Command::Classify { image, threshold, annotate, extract, out } => {
            let sig = commands::classify(&image, threshold, &ClassifyOutputs { annotate, extract })?;
            let text = commands::signature_json(&sig);
            match out {
                Some(path) => commands::write_file(&path, text)?,
                None => print!("{text}"),
            }
        }
        Command::Analyze { responses, tasks, experiment, out_dir } => {
            let report = commands::analyze_files(&responses, &tasks, experiment)?;
            commands::write_report(&report, &out_dir)?;
            print!("{}", report.to_json_string());
        }
        Command::Embed { matrix, dims, seed, perplexity, iterations, unobserved, out_dir } => {
            let opts = TsneOptions { dims, seed, perplexity, iterations, ..TsneOptions::default() };
            let out = commands::embed(&matrix, &opts, parse_unobserved(&unobserved)?, &out_dir)?;
            print!("{}", out.embedding.to_csv());
            eprintln!("final KL {:.6}; wrote {}", out.embedding.final_kl, out_dir.display());
        }
        Command::Synth { experiment, seed, inconsistent, out_dir } => {
            for path in commands::synth(experiment, seed, inconsistent, &out_dir)? {
                println!("{}", path.display());
            }
        }
        Command::Catalog => {
            let text = serde_json::to_string_pretty(&ornament_core::groups::catalog_json())?;
            println!("{text}");
        }
        Command::Serve { config, data_dir, port, host } => {
            let config = SessionConfig::load(&config)?;
            let state = Arc::new(AppState::open(&config, &data_dir)?);
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Server(e.to_string()))?;
            rt.block_on(async {
                let listener = server::bind(SocketAddr::new(host, port)).await?;
                let addr = listener.local_addr().map_err(|e| CliError::Server(e.to_string()))?;
                eprintln!("session '{}' listening on http://{addr}", config.session_id);
                server::run(listener, state, async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
