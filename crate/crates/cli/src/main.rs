#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;

/// Time-dependent quantum oscillator in Vlasov and Wigner form.
///
/// Any scenario field can also be set with a dotted flag, for example
/// `--driver.g 0.3` or `--grid.x.points=301`.
#[derive(Parser)]
#[command(name = "wvl", version, about)]
struct Cli {
    /// Scenario JSON file; the built-in Mathieu (1, 0.2) scenario if omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated state orders
    #[arg(long, global = true, value_delimiter = ',')]
    n: Option<Vec<i64>>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    t1: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    dt: Option<f64>,
    /// Sign of the (ṗ + ηx)² term in the rank-4 Wigner function
    #[arg(long, global = true, value_parser = ["negative", "reduced"])]
    rank4_sign: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Width history, densities, velocity field and potentials
    Simulate,
    /// Wigner grids and ellipse geometry
    Wigner,
    /// Energy spectra by quadrature and by trajectory
    Spectrum,
    /// Mathieu stability raster
    Stability,
    /// Residual and invariant checks; exits non-zero on any failure
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Wigner => "wigner",
            Self::Spectrum => "spectrum",
            Self::Stability => "stability",
            Self::Verify => "verify",
        }
    }
}

/// Top-level scenario keys reachable only through overrides.
const CONFIG_ROOTS: [&str; 12] = [
    "params",
    "driver",
    "time",
    "grid",
    "output",
    "rank4_sign",
    "rank4_slice",
    "wigner_times",
    "launch",
    "tolerances",
    "stability",
    "verify",
];

fn is_override(key: &str) -> bool {
    key.contains('.') || CONFIG_ROOTS.contains(&key)
}

/// Splits `--a.b value` and `--a.b=value` pairs off the argument list.
type Overrides = Vec<(String, String)>;

fn split_dotted(args: Vec<String>) -> CliResult<(Vec<String>, Overrides)> {
    let mut rest = Vec::new();
    let mut dotted = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--").filter(|f| f.split('=').next().is_some_and(is_override)) else {
            rest.push(arg);
            continue;
        };
        match flag.split_once('=') {
            Some((k, v)) => dotted.push((k.to_string(), v.to_string())),
            None => {
                let v = it.next().ok_or_else(|| CliError::Config(format!("--{flag} needs a value")))?;
                dotted.push((flag.to_string(), v));
            }
        }
    }
    Ok((rest, dotted))
}

fn configure(cli: &Cli, mut overrides: Overrides) -> CliResult<ScenarioConfig> {
    let named = [
        ("output", cli.out.as_ref().map(|p| serde_json::to_string(p).expect("path serializes"))),
        ("n", cli.n.as_ref().map(|n| serde_json::to_string(n).expect("list serializes"))),
        ("time.t0", cli.t0.map(|v| v.to_string())),
        ("time.t1", cli.t1.map(|v| v.to_string())),
        ("time.dt", cli.dt.map(|v| v.to_string())),
        ("rank4_sign", cli.rank4_sign.clone()),
    ];
    overrides.extend(named.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
    config::load(cli.config.as_deref(), &overrides)
}

fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("WVL_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("WVL_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| CliError::Config(e.to_string()))
}

fn run() -> CliResult<PathBuf> {
    let (args, dotted) = split_dotted(std::env::args().collect())?;
    let cli = Cli::parse_from(args);
    let config = configure(&cli, dotted)?;
    init_threads()?;
    let mut out = OutputDir::create(&config.output)?;
    let result: CliResult<Value> = match cli.command {
        Command::Simulate => commands::simulate::run(&config, &mut out),
        Command::Wigner => commands::wigner::run(&config, &mut out),
        Command::Spectrum => commands::spectrum::run(&config, &mut out),
        Command::Stability => commands::stability::run(&config, &mut out),
        Command::Verify => commands::verify::run(&config, &mut out),
    };
    match result {
        Ok(summary) => out.finish(cli.command.name(), &config, summary),
        Err(e) => {
            // keep whatever was written (verify.json in particular) traceable
            out.finish(cli.command.name(), &config, serde_json::json!({ "error": e.to_string() }))?;
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(manifest) => {
            println!("wrote {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
