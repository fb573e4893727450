mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Status;
use config::RunConfig;
use output::OutDir;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] proxygap_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use proxygap_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::InvalidParameter(_) | E::InvalidCut(_) | E::TooLarge { .. } | E::EnergyOutOfRange { .. }) => 2,
            CliError::Core(E::NoConvergence { .. }) => 3,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "proxygap", version, about = "Entropy-gap entanglement scans for spin chains")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for randomized searches; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy gap over an energy or temperature grid.
    GapScan,
    /// Certified minimal energy under the configured constraints.
    PptEmin,
    /// XY-chain detection region in the thermodynamic limit.
    ThermoLimit,
    /// Bell-staircase gap bound for a list of local dimensions.
    BellGap {
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 5.0)]
        nu: f64,
        /// Local dimensions, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<f64>,
    },
    /// Weak-duality sandwich against the separable entropy search.
    Oracle,
    /// Field window in which the Dicke state is the XXZ ground state.
    DickeRange {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        delta_j: f64,
    },
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    match &cli.config {
        Some(p) => RunConfig::load(p),
        None => Err(CliError::Config("--config is required for this command".into())),
    }
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Command::DickeRange { n, m, delta_j } = cli.command {
        println!("{}", commands::dicke_range(n, m, delta_j)?);
        return Ok(Status::Ok);
    }
    if let Command::BellGap { beta, nu, ref d } = cli.command {
        let out = OutDir::create(cli.out.as_deref().unwrap_or(".".as_ref()))?;
        return commands::bell_gap(beta, nu, d, &out);
    }
    let cfg = load(cli)?;
    let dir = cli.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    let out = OutDir::create(&dir)?;
    match cli.command {
        Command::GapScan => commands::gap_scan(&cfg, &out),
        Command::PptEmin => commands::ppt_emin(&cfg, &out),
        Command::ThermoLimit => commands::thermo_limit(&cfg, &out),
        Command::Oracle => commands::oracle(&cfg, cli.seed.or(cfg.seed).unwrap_or(0), &out),
        Command::BellGap { .. } | Command::DickeRange { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => {
            eprintln!("warning: solver did not converge everywhere; results are flagged");
            ExitCode::from(3)
        }
        Ok(Status::Violation(msg)) => {
            eprintln!("invariant violated: {msg}");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
