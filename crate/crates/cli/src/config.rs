use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use foodscape::data::{FoodCategory, TimeSlot};
use foodscape::kde::{Bandwidth, DEFAULT_HOTSPOT_QUANTILE};
use foodscape::Execution;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "foodscape",
    version,
    about = "Food hot spots and category dependencies by time of day"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, filter and summarize the raw CSV files.
    Ingest(IngestArgs),
    /// Bandwidth selection, density rasters and hot spots per slot.
    Kde(KdeArgs),
    /// Category dependency networks per slot.
    Bn(BnArgs),
    /// Generate a synthetic dataset from a JSON spec.
    Synth(SynthArgs),
    /// Ingest, kde and bn in one run.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long, value_name = "CSV")]
    pub posts: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    pub businesses: Option<PathBuf>,
    /// Last day of the 365-day analysis window (YYYY-MM-DD).
    #[arg(long, value_name = "DATE")]
    pub reference_date: Option<NaiveDate>,
    /// Normalized dataset written by `ingest`, instead of the CSV files.
    #[arg(long, value_name = "JSON", conflicts_with_all = ["posts", "businesses", "reference_date"])]
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Disable multi-threading. Outputs are identical either way.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SlotChoice {
    Breakfast,
    Lunch,
    Dinner,
    All,
}

impl SlotChoice {
    pub fn slots(self) -> Vec<TimeSlot> {
        match self {
            SlotChoice::Breakfast => vec![TimeSlot::Breakfast],
            SlotChoice::Lunch => vec![TimeSlot::Lunch],
            SlotChoice::Dinner => vec![TimeSlot::Dinner],
            SlotChoice::All => TimeSlot::NAMED.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitGraph {
    Empty,
    Full,
}

/// `MIN:MAX:COUNT` in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, count] = parts[..] else {
            return Err(format!("expected MIN:MAX:COUNT, got `{s}`"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        Ok(GridSpec {
            min: num(min)?,
            max: num(max)?,
            count: count
                .trim()
                .parse()
                .map_err(|e| format!("`{count}`: {e}"))?,
        })
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            min: 10.0,
            max: 2000.0,
            count: 32,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct KdeOptions {
    #[arg(long, value_enum, default_value = "all")]
    pub slot: SlotChoice,
    /// Only use posts of these categories (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    pub category: Vec<FoodCategory>,
    /// One surface per category instead of pooling them.
    #[arg(long)]
    pub per_category: bool,
    /// Fixed bandwidth in meters; skips cross-validation.
    #[arg(long, value_name = "METERS", conflicts_with = "bandwidth_grid")]
    pub bandwidth: Option<f64>,
    /// Log-spaced candidate grid for cross-validation [default: 10:2000:32].
    #[arg(long, value_name = "MIN:MAX:COUNT")]
    pub bandwidth_grid: Option<GridSpec>,
    /// Raster cell size in meters [default: bandwidth / 4].
    #[arg(long, value_name = "METERS")]
    pub cell_size: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_HOTSPOT_QUANTILE)]
    pub hotspot_quantile: f64,
    /// Hot spots listed per row of summary.tsv.
    #[arg(long, default_value_t = 3)]
    pub top_hotspots: usize,
    /// CSV of `name,latitude,longitude` used to name hot spots
    /// [default: built-in Manhattan neighbourhoods].
    #[arg(long, value_name = "CSV")]
    pub gazetteer: Option<PathBuf>,
    /// Seed for the jitter applied to posts sharing exact coordinates.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BnOptions {
    #[arg(long, value_enum, default_value = "all")]
    pub slot: SlotChoice,
    #[arg(long, value_enum, default_value = "empty")]
    pub bn_init: InitGraph,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct KdeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub kde: KdeOptions,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BnArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub bn: BnOptions,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// JSON synthetic dataset spec.
    #[arg(long, value_name = "JSON")]
    pub spec: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub kde: KdeOptions,
    #[arg(long, value_enum, default_value = "empty")]
    pub bn_init: InitGraph,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BandwidthConfig {
    Fixed { meters: f64 },
    CrossValidated { min: f64, max: f64, count: usize },
}

impl BandwidthConfig {
    pub fn candidates(&self) -> Result<Option<Vec<Bandwidth>>, CliError> {
        match *self {
            BandwidthConfig::Fixed { .. } => Ok(None),
            BandwidthConfig::CrossValidated { min, max, count } => {
                Bandwidth::log_grid(min, max, count)
                    .map(Some)
                    .map_err(|e| CliError::Input(format!("--bandwidth-grid: {e}")))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputConfig {
    pub posts: Option<String>,
    pub businesses: Option<String>,
    pub dataset: Option<String>,
    pub posts_sha256: String,
    pub businesses_sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct KdeConfig {
    pub slots: Vec<TimeSlot>,
    pub categories: Vec<FoodCategory>,
    pub per_category: bool,
    pub bandwidth: BandwidthConfig,
    pub cell_size_m: Option<f64>,
    pub hotspot_quantile: f64,
    pub top_hotspots: usize,
    pub gazetteer: Option<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BnConfig {
    pub slots: Vec<TimeSlot>,
    pub init: InitGraph,
    pub max_iters: usize,
}

/// Effective settings of a run, written to `config.json`. The output
/// directory is left out so runs into different directories compare equal.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub tool_version: &'static str,
    pub input: InputConfig,
    pub reference_date: NaiveDate,
    pub window_days: u32,
    pub kde: Option<KdeConfig>,
    pub bn: Option<BnConfig>,
    #[serde(serialize_with = "serialize_execution")]
    pub execution: Execution,
}

fn serialize_execution<S: serde::Serializer>(exec: &Execution, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(if exec.is_parallel() {
        "parallel"
    } else {
        "sequential"
    })
}

impl KdeOptions {
    pub fn to_config(&self) -> Result<KdeConfig, CliError> {
        let bandwidth = match (self.bandwidth, self.bandwidth_grid) {
            (Some(h), _) => {
                Bandwidth::new(h).map_err(|e| CliError::Input(format!("--bandwidth: {e}")))?;
                BandwidthConfig::Fixed { meters: h }
            }
            (None, grid) => {
                let g = grid.unwrap_or_default();
                BandwidthConfig::CrossValidated {
                    min: g.min,
                    max: g.max,
                    count: g.count,
                }
            }
        };
        bandwidth.candidates()?;
        if !(self.hotspot_quantile > 0.0 && self.hotspot_quantile < 1.0) {
            return Err(CliError::Input(format!(
                "--hotspot-quantile must lie in (0, 1), got {}",
                self.hotspot_quantile
            )));
        }
        if let Some(c) = self.cell_size {
            if !(c.is_finite() && c > 0.0) {
                return Err(CliError::Input(format!("--cell-size must be > 0, got {c}")));
            }
        }
        let mut categories = self.category.clone();
        categories.sort();
        categories.dedup();
        Ok(KdeConfig {
            slots: self.slot.slots(),
            categories,
            per_category: self.per_category,
            bandwidth,
            cell_size_m: self.cell_size,
            hotspot_quantile: self.hotspot_quantile,
            top_hotspots: self.top_hotspots,
            gazetteer: self.gazetteer.as_ref().map(|p| p.display().to_string()),
            seed: self.seed,
        })
    }
}

impl CommonArgs {
    pub fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}
