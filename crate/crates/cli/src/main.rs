//! `qsp` command-line interface.
//!
//! Exit codes: 0 on success, 1 on runtime failures (I/O), 2 on usage and
//! validation errors. Diagnostics go to standard error.

mod commands;
mod output;
mod plotdata;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::CliError;

#[derive(Parser)]
#[command(
    name = "qsp",
    version,
    about = "Quadratic pricing over outcome-probability curves"
)]
pub struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write output to a file instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Reserved for randomized emitters; the fixed default keeps runs
    /// reproducible
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
pub enum Command {
    /// Evaluate the referendum model
    Model(ModelArgs),
    /// Price votes against a curve file
    Price(PriceArgs),
    /// Totals, averages, growth witness and granularity diagnostics
    Analyze(AnalyzeArgs),
    /// Build, export and query precomputed probability tables
    Lattice {
        #[command(subcommand)]
        action: LatticeAction,
    },
    /// Emit plot-ready figure data
    Plotdata(PlotdataArgs),
}

#[derive(Args)]
pub struct ModelArgs {
    /// Average-voter yes probability, in [0, 1]
    #[arg(long)]
    pub y: f64,
    /// Voter count
    #[arg(long)]
    pub n: u32,
    /// Bought votes for a single evaluation
    #[arg(long, conflicts_with = "i_range")]
    pub i: Option<u32>,
    /// Inclusive bought-vote range LO..HI; emits an i,p,dp table
    #[arg(long = "i-range", value_parser = parse_range)]
    pub i_range: Option<(u32, u32)>,
}

#[derive(Args)]
pub struct PriceArgs {
    /// Curve file in the i,p format
    #[arg(long)]
    pub curve: PathBuf,
    /// Market constant
    #[arg(long)]
    pub k2: f64,
    /// Perceived value; adds the purchase maximum to the output
    #[arg(long)]
    pub v: Option<f64>,
    /// Also emit the greedy buyer's decision trace
    #[arg(long, requires = "v")]
    pub trace: bool,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Curve file in the i,p format
    #[arg(long, conflicts_with = "demo")]
    pub curve: Option<PathBuf>,
    /// Bundled demo family: linear | logistic | early-saturating | slow-start
    #[arg(long)]
    pub demo: Option<String>,
    /// Knots when sampling a demo family
    #[arg(long, default_value_t = 1000)]
    pub knots: usize,
    /// Market constant
    #[arg(long)]
    pub k2: f64,
    /// Purchase count the totals are evaluated at
    #[arg(long = "i-max", conflicts_with = "v_list")]
    pub i_max: Option<u64>,
    /// Comma-separated stakeholder values; adds the granularity block
    #[arg(long = "v-list", value_delimiter = ',')]
    pub v_list: Option<Vec<f64>>,
    /// k2 grid START:STOP:COUNT; emits a sweep table (needs --v-list)
    #[arg(long = "sweep-k2", value_parser = parse_grid, requires = "v_list")]
    pub sweep_k2: Option<(f64, f64, usize)>,
}

#[derive(Subcommand)]
pub enum LatticeAction {
    /// Precompute a table and save it to --out
    Build(LatticeBuildArgs),
    /// Export a stored table as y,n,i,p CSV
    Export {
        /// Binary lattice file
        #[arg(long)]
        input: PathBuf,
    },
    /// Read one stored cell
    Query {
        /// Binary lattice file
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        y: f64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        i: u32,
    },
}

#[derive(Args)]
pub struct LatticeBuildArgs {
    #[arg(long, default_value_t = 0.0)]
    pub y_start: f64,
    #[arg(long, default_value_t = 0.01)]
    pub y_step: f64,
    #[arg(long, default_value_t = 101)]
    pub y_count: u32,
    #[arg(long, default_value_t = 1000)]
    pub n_max: u32,
    #[arg(long, default_value_t = 501)]
    pub i_cap: u32,
    /// Lift the cell-count guard for big grids
    #[arg(long)]
    pub allow_large: bool,
}

#[derive(Args)]
pub struct PlotdataArgs {
    /// Figure id: 4, 5, 6, 7, 9 or 10
    pub figure: u32,
    /// Directory the files are written into (default: $QSP_OUT_DIR or .)
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
}

fn parse_range(raw: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = raw
        .split_once("..")
        .ok_or_else(|| format!("expected LO..HI, found `{raw}`"))?;
    let lo: u32 = lo.trim().parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi: u32 = hi.trim().parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn parse_grid(raw: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected START:STOP:COUNT, found `{raw}`"));
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| "bad grid start".to_string())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| "bad grid stop".to_string())?;
    let count: usize = parts[2].trim().parse().map_err(|_| "bad grid count".to_string())?;
    if count < 1 {
        return Err("grid needs at least one point".to_string());
    }
    Ok((start, stop, count))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Model(args) => commands::model(&cli, args),
        Command::Price(args) => commands::price(&cli, args),
        Command::Analyze(args) => commands::analyze(&cli, args),
        Command::Lattice { action } => commands::lattice(&cli, action),
        Command::Plotdata(args) => plotdata::run(&cli, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
