use std::path::PathBuf;
use std::str::FromStr;

use balducci_core::{FractionalAssumption, PayoffKind};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "balducci",
    version,
    about = "Moments of life-insurance payoffs under Balducci's assumption"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a mortality table and report its age range.
    Validate {
        /// CSV file with header `age,lx`.
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Price one moment order for one or more payoff kinds.
    Price {
        #[command(flatten)]
        contract: ContractArgs,
        /// Moment order; 0 gives the window probability.
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Price several moment orders.
    Moments {
        #[command(flatten)]
        contract: ContractArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        orders: Vec<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check closed forms against quadrature and Monte Carlo.
    Compare {
        #[command(flatten)]
        contract: ContractArgs,
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Monte Carlo sample count.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Monte Carlo seed; `BALDUCCI_SEED` takes precedence.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Export survival or density curves under UDD and Balducci as CSV.
    PlotData {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        x: Option<u32>,
        #[arg(long, default_value = "0", value_parser = parse_defer)]
        defer: Deferment,
        #[command(flatten)]
        term: TermArgs,
        #[arg(long, value_enum, default_value_t = PlotModeArg::Survival)]
        mode: PlotModeArg,
        /// Grid step in years; must divide one year.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=17))]
        precision: u32,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ModelArgs {
    /// CSV file with header `age,lx`.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Parametric law, `weibull:ALPHA:BETA[:OMEGA]`.
    #[arg(long, value_parser = parse_law)]
    pub law: Option<LawArg>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct TermArgs {
    /// Term in whole years.
    #[arg(long)]
    pub term: Option<u32>,
    /// Run to the model's terminal or truncation age.
    #[arg(long)]
    pub to_omega: bool,
}

#[derive(Debug, Args)]
pub struct ContractArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Annual effective interest rate.
    #[arg(long, allow_negative_numbers = true)]
    pub interest: f64,
    /// Issue age; defaults to the first age of the table.
    #[arg(long)]
    pub x: Option<u32>,
    /// Deferment `L` or `L*N1` (years and periods of length 1/j).
    #[arg(long, default_value = "0", value_parser = parse_defer)]
    pub defer: Deferment,
    #[command(flatten)]
    pub term: TermArgs,
    /// Payoff kinds, comma separated.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_kind)]
    pub kind: Vec<PayoffKind>,
    /// Periods per year for the periodic kinds.
    #[arg(long, default_value_t = 1)]
    pub j: u32,
    #[arg(long, default_value = "balducci", value_parser = parse_assumption)]
    pub assumption: FractionalAssumption,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Significant digits in printed numbers.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=17))]
    pub precision: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotModeArg {
    Survival,
    Density,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawArg {
    pub alpha: f64,
    pub beta: f64,
    pub omega: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Deferment {
    pub years: u32,
    pub periods: u32,
}

fn parse_law(s: &str) -> Result<LawArg, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || format!("expected weibull:ALPHA:BETA[:OMEGA], got `{s}`");
    if parts.first() != Some(&"weibull") || !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let alpha = f64::from_str(parts[1]).map_err(|_| bad())?;
    let beta = f64::from_str(parts[2]).map_err(|_| bad())?;
    let omega = parts
        .get(3)
        .map(|o| u32::from_str(o))
        .transpose()
        .map_err(|_| bad())?;
    Ok(LawArg { alpha, beta, omega })
}

fn parse_defer(s: &str) -> Result<Deferment, String> {
    let bad = || format!("expected L or L*N1, got `{s}`");
    let (years, periods) = match s.split_once('*') {
        Some((l, n1)) => (l, n1),
        None => (s, "0"),
    };
    Ok(Deferment {
        years: years.trim().parse().map_err(|_| bad())?,
        periods: periods.trim().parse().map_err(|_| bad())?,
    })
}

fn parse_kind(s: &str) -> Result<PayoffKind, String> {
    s.parse().map_err(|e: balducci_core::Error| e.to_string())
}

fn parse_assumption(s: &str) -> Result<FractionalAssumption, String> {
    s.parse().map_err(|e: balducci_core::Error| e.to_string())
}
