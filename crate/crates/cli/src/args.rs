use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fca_core::engine::Model;
use fca_core::geometry::{Crs, DistanceMetric};
use fca_core::network::Direction;

/// Floating catchment area accessibility scores for service locations.
///
/// Thresholds carry units: `15mi`, `24km`, `500m` for distance buffers and
/// `30min` (or bare minutes with `--times`) for travel time.
#[derive(Debug, Parser)]
#[command(name = "fca", version, args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML file of `flag = value` pairs; command-line flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Precompute zone/provider travel times over a road network.
    Catchment(CatchmentArgs),
    /// Score zones with 2SFCA or E2SFCA.
    Access(AccessArgs),
    /// Add an age-adjusted demand field to a zone file.
    Demand(DemandArgs),
    /// Add natural-breaks classes to a scored file.
    Classify(ClassifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Geojson,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Driving,
    Walking,
}

#[derive(Debug, Args)]
pub struct SpatialArgs {
    /// Coordinate reference of all inputs.
    #[arg(long, default_value = "lonlat", value_parser = parse_crs)]
    pub crs: Crs,
    /// CSV column holding x / longitude.
    #[arg(long, default_value = "lon")]
    pub x_field: String,
    /// CSV column holding y / latitude.
    #[arg(long, default_value = "lat")]
    pub y_field: String,
}

#[derive(Debug, Args)]
pub struct ProviderArgs {
    /// Provider points (GeoJSON or CSV).
    #[arg(long, value_name = "PATH")]
    pub providers: PathBuf,
    #[arg(long, default_value = "id")]
    pub provider_id: String,
    /// Supply field, e.g. number of dialysis stations.
    #[arg(long, default_value = "capacity")]
    pub capacity: String,
}

#[derive(Debug, Args)]
pub struct ZoneArgs {
    /// Demand zones (GeoJSON polygons/points or CSV points).
    #[arg(long, value_name = "PATH")]
    pub zones: PathBuf,
    #[arg(long, default_value = "id")]
    pub zone_id: String,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Defaults to the extension of `--out`.
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct CatchmentArgs {
    #[command(flatten)]
    pub providers: ProviderArgs,
    #[command(flatten)]
    pub zones: ZoneArgs,
    #[command(flatten)]
    pub spatial: SpatialArgs,
    /// Road edges (CSV or GeoJSON LineStrings).
    #[arg(long, value_name = "PATH")]
    pub network: PathBuf,
    /// Largest travel time kept in the matrix.
    #[arg(long, default_value = "30min")]
    pub cutoff: String,
    #[arg(long, default_value = "demand-to-provider", value_parser = parse_direction)]
    pub direction: Direction,
    #[arg(long, default_value = "500m")]
    pub snap_tolerance: String,
    /// Fail instead of warning when a site cannot be snapped.
    #[arg(long)]
    pub strict: bool,
    /// Walking derives edge times from `length_m` at `--speed-kmh`.
    #[arg(long, value_enum, default_value = "driving")]
    pub mode: Mode,
    /// Travel speed applied to `length_m` (walking defaults to 5).
    #[arg(long)]
    pub speed_kmh: Option<f64>,
    /// Cost-matrix CSV to write.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AccessArgs {
    #[command(flatten)]
    pub providers: ProviderArgs,
    #[command(flatten)]
    pub zones: ZoneArgs,
    #[command(flatten)]
    pub spatial: SpatialArgs,
    /// Zone population field.
    #[arg(long, default_value = "population")]
    pub demand: String,
    #[arg(long, default_value = "e2sfca", value_parser = parse_model)]
    pub model: Model,
    /// Distance-buffer ring bounds, e.g. `5mi,10mi,15mi`.
    #[arg(long, conflicts_with = "cost_matrix")]
    pub buffer: Option<String>,
    /// Precomputed travel-time matrix from `fca catchment`.
    #[arg(long, value_name = "PATH")]
    pub cost_matrix: Option<PathBuf>,
    /// Travel-time ring bounds, e.g. `10,20,30` (minutes).
    #[arg(long, requires = "cost_matrix")]
    pub times: Option<String>,
    /// Decay weight per ring, e.g. `1,0.68,0.22`.
    #[arg(long)]
    pub weights: Option<String>,
    /// Derive ring weights from a Gaussian with this bandwidth (same units as the rings).
    #[arg(long, conflicts_with = "weights")]
    pub gaussian_bandwidth: Option<String>,
    /// Scores are reported per this many people.
    #[arg(long, default_value_t = 100_000.0)]
    pub per_capita: f64,
    /// Distance metric for buffers; defaults from `--crs`.
    #[arg(long, value_parser = parse_metric)]
    pub metric: Option<DistanceMetric>,
    /// Age-band count fields; demand becomes their weighted sum.
    #[arg(long, requires = "rates")]
    pub age_fields: Option<String>,
    /// `band,rate_per_million` table used with `--age-fields`.
    #[arg(long, value_name = "PATH")]
    pub rates: Option<PathBuf>,
    /// Natural-breaks classes; 0 disables classification.
    #[arg(long, default_value_t = 5)]
    pub classes: usize,
    /// Also write step-1 provider ratios here.
    #[arg(long, value_name = "PATH")]
    pub emit_step1: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DemandArgs {
    #[command(flatten)]
    pub zones: ZoneArgs,
    #[command(flatten)]
    pub spatial: SpatialArgs,
    /// `band,rate_per_million` table.
    #[arg(long, value_name = "PATH")]
    pub rates: PathBuf,
    /// Zone count field per band, in table order; defaults to the band labels.
    #[arg(long)]
    pub age_fields: Option<String>,
    #[arg(long, default_value = "adjusted_demand")]
    pub out_field: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Scored file from `fca access`.
    #[arg(long, value_name = "PATH")]
    pub scores: PathBuf,
    /// Id field of GeoJSON scores.
    #[arg(long, default_value = "id")]
    pub zone_id: String,
    #[arg(long, default_value_t = fca_core::classify::DEFAULT_CLASSES)]
    pub classes: usize,
    #[command(flatten)]
    pub spatial: SpatialArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_crs(s: &str) -> Result<Crs, String> {
    s.parse().map_err(|e: fca_core::Error| e.to_string())
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse().map_err(|e: fca_core::Error| e.to_string())
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse().map_err(|e: fca_core::Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<DistanceMetric, String> {
    s.parse().map_err(|e: fca_core::Error| e.to_string())
}
