use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use levy_entropy::experiments::Suite;
use levy_entropy::Error;

mod commands;
mod config;

use commands::Outcome;
use config::{load_specs, parse_positive_list, parse_reals, parse_times, CommandKind, RunConfig, SampleFormat};

/// Entropy of Lévy process increments: densities, entropies, sampling and
/// verification suites.
#[derive(Parser, Debug)]
#[command(name = "levy-entropy", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Replay a saved run config instead of a subcommand.
    #[arg(long, value_name = "FILE", conflicts_with = "save_config")]
    config: Option<PathBuf>,

    /// Write the resolved run config here before running.
    #[arg(long, value_name = "FILE", global = true)]
    save_config: Option<PathBuf>,

    /// Worker threads (defaults to all cores).
    #[arg(long, env = "LEVY_ENTROPY_THREADS", global = true)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Process spec: inline JSON, a JSON file (one spec or an array), or `builtins`.
    #[arg(long, value_name = "SPEC")]
    spec: Vec<String>,

    /// Output file (stdout if absent).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Leave wall-clock fields out of JSON output.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ψ samples, the sector check and the estimated index.
    Describe {
        #[command(flatten)]
        common: Common,
        /// Frequencies, comma separated.
        #[arg(long, value_name = "LIST")]
        xi_grid: Option<String>,
    },
    /// The density of L_t on a grid, as x,pdf CSV.
    Density {
        #[command(flatten)]
        common: Common,
        /// A single time.
        #[arg(long, value_name = "T")]
        t_grid: String,
        #[arg(long)]
        points: Option<usize>,
        /// Grid range as LO,HI.
        #[arg(long, value_name = "LO,HI", allow_hyphen_values = true)]
        x_range: Option<String>,
    },
    /// h(L_t) over a t-grid, or H_{n,m} over --n and --m.
    Entropy {
        #[command(flatten)]
        common: Common,
        /// `a,b,c` or `geom:START:RATIO:COUNT`.
        #[arg(long, value_name = "GRID")]
        t_grid: Option<String>,
        #[arg(long, value_name = "LIST")]
        n: Option<String>,
        #[arg(long, value_name = "LIST")]
        m: Option<String>,
    },
    /// Exact draws of L_t.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "T")]
        t_grid: String,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<SampleFormat>,
    },
    /// Run a verification suite and write its reports as JSON.
    Verify {
        /// One of slope, lss, upper_bound, inequality, renyi, monotone, gamma, moments, hierarchy, all.
        #[arg(default_value = "all")]
        suite: Suite,
        #[command(flatten)]
        common: Common,
        /// Override a tolerance, e.g. `slope=0.01`.
        #[arg(long, value_name = "KEY=VAL")]
        tolerance: Vec<String>,
        #[arg(long, value_name = "GRID")]
        t_grid: Option<String>,
        #[arg(long, value_name = "LIST")]
        n: Option<String>,
        #[arg(long, value_name = "LIST")]
        m: Option<String>,
    },
    /// Entropy-versus-index table as CSV.
    Table {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "T")]
        t_star: Option<f64>,
        #[arg(long, value_name = "KEY=VAL")]
        tolerance: Vec<String>,
        /// Also write the hierarchy report as JSON here.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
}

fn apply_common(config: &mut RunConfig, common: Common) -> Result<()> {
    for s in &common.spec {
        config.specs.extend(load_specs(s)?);
    }
    config.out = common.out;
    config.seed = common.seed;
    config.timestamp = !common.no_timestamp;
    Ok(())
}

fn apply_tolerances(config: &mut RunConfig, overrides: &[String]) -> Result<()> {
    for o in overrides {
        config.tolerances.set_from_str(o)?;
    }
    Ok(())
}

fn resolve(command: Command) -> Result<RunConfig> {
    let config = match command {
        Command::Describe { common, xi_grid } => {
            let mut c = RunConfig::new(CommandKind::Describe);
            apply_common(&mut c, common)?;
            c.grids.xi_grid = xi_grid.as_deref().map(parse_reals).transpose()?;
            c
        }
        Command::Density { common, t_grid, points, x_range } => {
            let mut c = RunConfig::new(CommandKind::Density);
            apply_common(&mut c, common)?;
            c.grids.t_grid = Some(parse_times(&t_grid)?);
            c.points = points;
            c.x_range = match x_range.as_deref().map(parse_reals).transpose()? {
                None => None,
                Some(v) if v.len() == 2 && v[0] < v[1] => Some([v[0], v[1]]),
                Some(_) => return Err(Error::Precondition("--x-range takes LO,HI with LO < HI".into()).into()),
            };
            c
        }
        Command::Entropy { common, t_grid, n, m } => {
            let mut c = RunConfig::new(CommandKind::Entropy);
            apply_common(&mut c, common)?;
            c.grids.t_grid = t_grid.as_deref().map(parse_times).transpose()?;
            c.grids.n_list = n.as_deref().map(parse_positive_list).transpose()?;
            c.grids.m_list = m.as_deref().map(parse_positive_list).transpose()?;
            c
        }
        Command::Sample { common, t_grid, count, format } => {
            let mut c = RunConfig::new(CommandKind::Sample);
            apply_common(&mut c, common)?;
            c.grids.t_grid = Some(parse_times(&t_grid)?);
            c.count = count;
            c.format = format;
            c
        }
        Command::Verify { suite, common, tolerance, t_grid, n, m } => {
            let mut c = RunConfig::new(CommandKind::Verify);
            c.suite = Some(suite);
            apply_common(&mut c, common)?;
            apply_tolerances(&mut c, &tolerance)?;
            c.grids.t_grid = t_grid.as_deref().map(parse_times).transpose()?;
            c.grids.n_list = n.as_deref().map(parse_positive_list).transpose()?;
            c.grids.m_list = m.as_deref().map(parse_positive_list).transpose()?;
            c
        }
        Command::Table { common, t_star, tolerance, report } => {
            let mut c = RunConfig::new(CommandKind::Table);
            apply_common(&mut c, common)?;
            apply_tolerances(&mut c, &tolerance)?;
            c.t_star = t_star;
            c.report = report;
            c
        }
    };
    Ok(config)
}

fn run(cli: Cli) -> Result<Outcome> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Precondition("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let config = match (cli.command, &cli.config) {
        (Some(_), Some(_)) => {
            return Err(Error::Precondition("--config replaces the subcommand; give one or the other".into()).into())
        }
        (None, None) => {
            return Err(Error::Precondition("a subcommand or --config is required (see --help)".into()).into())
        }
        (None, Some(path)) => RunConfig::load(path)?,
        (Some(cmd), None) => resolve(cmd)?,
    };
    if let Some(path) = &cli.save_config {
        config.save(path)?;
    }
    commands::execute(&config)
}

/// 2 for bad input, 3 for numerical trouble.
fn error_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(
            Error::Numerical { .. }
            | Error::NonIntegrable { .. }
            | Error::ExcessiveTail { .. }
            | Error::Misaligned(_)
            | Error::Divergent(_),
        ) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
