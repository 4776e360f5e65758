use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tonsure_core::ingest::{AlignPolicy, ColumnSelector, Transform};
use tonsure_core::tail::TailRegion;
use tonsure_core::{Measure, Metric, Space};

#[derive(Debug, Parser)]
#[command(name = "tonsure", version, about = "Anti-robust exploratory statistics for paired series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Association measures as a function of tonsure percent.
    Tonsure(TonsureArgs),
    /// Empirical tail dependence and tail insulation curves.
    Taildep(TaildepArgs),
    /// Octant populations of tonsured rank-space data.
    Octants(OctantsArgs),
    /// CAPM beta retaining only days with large market moves.
    Beta(BetaArgs),
    /// Seeded Gaussian and g-and-h synthetic pairs.
    Simulate(SimulateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Tonsure(_) => "tonsure",
            Command::Taildep(_) => "taildep",
            Command::Octants(_) => "octants",
            Command::Beta(_) => "beta",
            Command::Simulate(_) => "simulate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    pub fn is_on(self) -> bool {
        self == Switch::On
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Switch::On => "on",
            Switch::Off => "off",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    L2,
    R1,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::L2 => Metric::L2,
            MetricArg::R1 => Metric::R1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    Values,
    Ranks,
}

impl From<SpaceArg> for Space {
    fn from(s: SpaceArg) -> Self {
        match s {
            SpaceArg::Values => Space::Values,
            SpaceArg::Ranks => Space::Ranks,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    None,
    Diff,
    Log,
    Pct,
}

impl From<TransformArg> for Transform {
    fn from(t: TransformArg) -> Self {
        match t {
            TransformArg::None => Transform::None,
            TransformArg::Diff => Transform::ArithmeticChange,
            TransformArg::Log => Transform::LogReturn,
            TransformArg::Pct => Transform::PctReturn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlignArg {
    Key,
    Positional,
}

impl From<AlignArg> for AlignPolicy {
    fn from(a: AlignArg) -> Self {
        match a {
            AlignArg::Key => AlignPolicy::InnerJoinOnKey,
            AlignArg::Positional => AlignPolicy::Positional,
        }
    }
}

/// `FILE:COL`, split at the last colon.
#[derive(Debug, Clone, PartialEq)]
pub struct InputRef {
    pub path: PathBuf,
    pub column: ColumnSelector,
}

impl std::fmt::Display for InputRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.path.display(), self.column)
    }
}

fn parse_input(s: &str) -> Result<InputRef, String> {
    let (file, col) = s
        .rsplit_once(':')
        .ok_or_else(|| format!("expected FILE:COL, got `{s}`"))?;
    if file.is_empty() {
        return Err(format!("missing file name in `{s}`"));
    }
    let column = col.parse().map_err(|e: tonsure_core::Error| e.to_string())?;
    Ok(InputRef {
        path: PathBuf::from(file),
        column,
    })
}

fn parse_measure(s: &str) -> Result<Measure, String> {
    s.parse().map_err(|e: tonsure_core::Error| e.to_string())
}

fn parse_region(s: &str) -> Result<TailRegion, String> {
    s.parse().map_err(|e: tonsure_core::Error| e.to_string())
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "tab" | "\\t" => Ok(b'\t'),
        "comma" => Ok(b','),
        "semicolon" => Ok(b';'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be one ASCII character, got `{s}`")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum UGrid {
    Default,
    Geometric { start: f64, end: f64, count: usize },
    List(Vec<f64>),
}

impl UGrid {
    pub const DEFAULT_COUNT: usize = 20;

    pub fn resolve(&self, n: usize) -> Vec<f64> {
        match self {
            UGrid::Default => tonsure_core::tail::default_u_grid(n, Self::DEFAULT_COUNT),
            UGrid::Geometric { start, end, count } => {
                if *count == 1 {
                    return vec![*start];
                }
                let ratio = (end / start).powf(1.0 / (*count - 1) as f64);
                (0..*count).map(|i| start * ratio.powi(i as i32)).collect()
            }
            UGrid::List(us) => us.clone(),
        }
    }
}

fn parse_u_grid(s: &str) -> Result<UGrid, String> {
    if s == "default" {
        return Ok(UGrid::Default);
    }
    let number = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}` in u grid"));
    if let Some(rest) = s.strip_prefix("geom:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [start, end, count] = parts[..] else {
            return Err("expected geom:START:END:COUNT".into());
        };
        let (start, end) = (number(start)?, number(end)?);
        let count: usize = count.parse().map_err(|_| format!("bad count `{count}`"))?;
        if !(start > 0.0 && end > 0.0) || count == 0 {
            return Err("geometric u grid needs positive START, END and COUNT".into());
        }
        return Ok(UGrid::Geometric { start, end, count });
    }
    let us = s.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
    Ok(UGrid::List(us))
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// First series, as FILE:COL (COL is a header name or 0-based index).
    #[arg(long, value_name = "FILE:COL", value_parser = parse_input)]
    pub input_x: InputRef,
    /// Second series, as FILE:COL.
    #[arg(long, value_name = "FILE:COL", value_parser = parse_input)]
    pub input_y: InputRef,
    #[arg(long, value_enum, default_value = "none")]
    pub transform_x: TransformArg,
    #[arg(long, value_enum, default_value = "none")]
    pub transform_y: TransformArg,
    /// Field delimiter; defaults to tab for .tsv files and comma otherwise.
    #[arg(long, value_parser = parse_delimiter)]
    pub delimiter: Option<u8>,
    /// How the two columns are paired.
    #[arg(long, value_enum, default_value = "key")]
    pub align: AlignArg,
}

#[derive(Debug, Args)]
pub struct NullArgs {
    /// Matched Gaussian null envelope.
    #[arg(long, value_enum)]
    pub null: Option<Switch>,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "on")]
    pub plots: Switch,
}

#[derive(Debug, Args)]
pub struct TonsureArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "l2")]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value = "values")]
    pub space: SpaceArg,
    /// Comma-separated subset of pearson, spearman, somers_dba.
    #[arg(long, value_delimiter = ',', value_parser = parse_measure, default_value = "pearson,spearman,somers_dba")]
    pub measures: Vec<Measure>,
    /// Tonsure grid step in percent.
    #[arg(long, default_value_t = 5.0)]
    pub step: f64,
    #[arg(long, default_value_t = tonsure_core::tonsure::RELIABILITY_FLOOR)]
    pub min_survivors: usize,
    #[command(flatten)]
    pub null: NullArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TaildepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated corners (ur, ul, br, bl) and edges (t0, r0, b0, l0).
    #[arg(long, value_delimiter = ',', value_parser = parse_region, default_value = "ur,ul,br,bl,t0,r0,b0,l0")]
    pub regions: Vec<TailRegion>,
    /// `default`, `geom:START:END:COUNT`, or a comma-separated list of u.
    #[arg(long, value_name = "SPEC", value_parser = parse_u_grid, default_value = "default")]
    pub u_grid: UGrid,
    #[command(flatten)]
    pub null: NullArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OctantsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 10.0)]
    pub step: f64,
    #[arg(long, default_value_t = tonsure_core::tonsure::RELIABILITY_FLOOR)]
    pub min_survivors: usize,
    #[command(flatten)]
    pub null: NullArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// `--input-x` is the stock, `--input-y` the market.
#[derive(Debug, Args)]
pub struct BetaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Ascending minimum absolute market moves.
    #[arg(long, value_delimiter = ',', required = true)]
    pub thresholds: Vec<f64>,
    #[command(flatten)]
    pub null: NullArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.61, allow_negative_numbers = true)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// g-and-h skewness applied to both columns of gh_x, gh_y.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub g: f64,
    #[arg(long, default_value_t = 0.0)]
    pub h: f64,
    /// Also tabulate correlations over every (g_x, g_y) pair of this list.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub g_grid: Vec<f64>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_splits_at_last_colon() {
        let r = parse_input("data/a:b.csv:close").unwrap();
        assert_eq!(r.path, PathBuf::from("data/a:b.csv"));
        assert_eq!(r.column, ColumnSelector::Name("close".into()));
        assert_eq!(parse_input("x.csv:2").unwrap().column, ColumnSelector::Index(2));
        assert!(parse_input("x.csv").is_err());
        assert!(parse_input(":1").is_err());
    }

    #[test]
    fn u_grid_forms() {
        assert_eq!(parse_u_grid("default").unwrap(), UGrid::Default);
        assert_eq!(parse_u_grid("0.2,0.1").unwrap(), UGrid::List(vec![0.2, 0.1]));
        let g = parse_u_grid("geom:0.4:0.1:3").unwrap().resolve(100);
        assert_eq!(g.len(), 3);
        assert!((g[1] - 0.2).abs() < 1e-12);
        assert!(parse_u_grid("geom:0.4:0.1").is_err());
        assert!(parse_u_grid("a,b").is_err());
    }

    #[test]
    fn defaults_resolve() {
        let cli = Cli::try_parse_from(["tonsure", "tonsure", "--input-x", "a.csv:x", "--input-y", "a.csv:y", "--out", "o"])
            .unwrap();
        let Command::Tonsure(t) = cli.command else { panic!() };
        assert_eq!(t.measures, Measure::ALL.to_vec());
        assert_eq!(t.min_survivors, 24);
        assert_eq!(t.null.replicates, 1000);
        assert_eq!(t.null.null, None);
    }
}
