use std::path::PathBuf;
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, Parser, Subcommand};
use polyharmonic_cli::{normalize_key, read_config_file, run, write_diagnostic, Command, ExperimentConfig, OUT_DIR_ENV};

/// Radial experiments for `Δ^k u − λu = |u|^{2*−2}u` on the unit ball.
#[derive(Parser)]
#[command(name = "polyharmonic", version)]
struct Cli {
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $POLYHARMONIC_OUT, else ./polyharmonic-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for Monte-Carlo estimates.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Args)]
#[group(skip)]
struct Dims {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Subcommand)]
enum Sub {
    /// Bubble profile, residual and mass integrals.
    Bubble {
        #[command(flatten)]
        dims: Dims,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<f64>,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        stretch: Option<f64>,
        #[arg(long)]
        r_lo: Option<f64>,
        #[arg(long)]
        r_hi: Option<f64>,
    },
    /// Green tables (discrete inversion or Boggio's formula).
    Green {
        #[command(flatten)]
        dims: Dims,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        grid: Option<String>,
        /// Comma-separated pole radii.
        #[arg(long)]
        poles: Option<String>,
        /// `discrete` or `boggio`.
        #[arg(long)]
        provenance: Option<String>,
        /// Coefficient of the potential `μ r^{−2k}`.
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        mollify: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Pohozaev identity checks and the boundary constant `D_r`.
    Pohozaev {
        #[command(flatten)]
        dims: Dims,
        /// Evaluate `D_r` on the fundamental solution instead.
        #[arg(long)]
        dkn: bool,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        inner: Option<f64>,
        /// `bubble` or `fundamental`.
        #[arg(long)]
        field: Option<String>,
        #[arg(long)]
        grid_points: Option<usize>,
    },
    /// Continuation of the positive branch in λ (values in units of λ₁).
    Branch {
        #[command(flatten)]
        dims: Dims,
        #[arg(long)]
        lambda_start: Option<f64>,
        #[arg(long)]
        lambda_end: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_halvings: Option<usize>,
    },
    /// Coercivity margin of `Δ^k + h − V`.
    Coercivity {
        #[command(flatten)]
        dims: Dims,
        #[arg(long, allow_hyphen_values = true)]
        h: Option<f64>,
        /// `h` as a multiple of λ₁.
        #[arg(long, allow_hyphen_values = true)]
        h_lambda1: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        mollify: Option<f64>,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        grid: Option<String>,
    },
    /// Green bound certificates and Monte-Carlo Neumann iterates.
    Certify {
        #[command(flatten)]
        dims: Dims,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        /// Comma-separated exponents.
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        poles: Option<String>,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        grid: Option<String>,
        /// Neumann iterate index to estimate (needs --seed).
        #[arg(long)]
        iterate: Option<usize>,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        h: Option<f64>,
        #[arg(long)]
        d_min: Option<f64>,
        #[arg(long)]
        d_max: Option<f64>,
    },
}

/// Values given explicitly on the command line, keyed by flag name.
fn explicit(m: &ArgMatches, into: &mut Vec<(String, String)>) {
    for id in m.ids() {
        let id = id.as_str();
        if m.value_source(id) != Some(ValueSource::CommandLine) {
            continue;
        }
        if let Ok(Some(raw)) = m.try_get_raw(id) {
            let v: Vec<String> = raw.map(|s| s.to_string_lossy().into_owned()).collect();
            into.push((normalize_key(id), v.join(",")));
        }
    }
}

fn build() -> Result<ExperimentConfig, polyharmonic_cli::CliError> {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            std::process::exit(1);
        }
    };
    let mut given = Vec::new();
    explicit(&matches, &mut given);
    let sub = matches.subcommand();
    if let Some((_, m)) = sub {
        explicit(m, &mut given);
    }
    let file = given
        .iter()
        .find(|(k, _)| k == "config")
        .map(|(_, v)| PathBuf::from(v));
    let (file_command, mut params) = match file {
        Some(path) => read_config_file(&path)?,
        None => Default::default(),
    };
    let command: Command = match (sub.map(|(name, _)| name), file_command) {
        (Some(name), _) => name.parse()?,
        (None, Some(c)) => c,
        (None, None) => {
            return Err(polyharmonic_cli::CliError::Usage(
                "no command given (use a subcommand or `command = ...` in --config)".into(),
            ))
        }
    };
    for (k, v) in given {
        if k != "config" {
            params.insert(k, v);
        }
    }
    Ok(ExperimentConfig { command, params })
}

fn main() -> ExitCode {
    let config = match build() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&config) {
        Ok(a) => {
            println!("{}: {}", config.command, a.summary);
            println!("report: {}", a.report.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(p) = write_diagnostic(&config, &e) {
                eprintln!("diagnostic: {}", p.display());
            } else {
                eprintln!("diagnostic not written (output directory unusable; set --out or {OUT_DIR_ENV})");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
