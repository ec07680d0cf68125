//! Spatial accessibility scoring with the two-step floating catchment area
//! method (2SFCA) and its enhanced, distance-decay variant (E2SFCA).
//!
//! Catchments come either from distance buffers around sites or from
//! travel-time reachability over a road graph. The pipeline is:
//!
//! 1. [`ingest`] providers, demand zones and (optionally) a road network,
//! 2. optionally re-weight zone demand by age band with [`demand`],
//! 3. derive a sparse zone/provider [`CostMatrix`](network::CostMatrix), either
//!    with [`geometry::buffer_cost_matrix`] or [`network::build_cost_matrix`],
//! 4. score zones with [`engine`],
//! 5. classify and serialize with [`classify`] and [`output`].
//!
//! Every numeric type is generic over [`Scalar`], which is implemented for
//! `f32` and `f64`. The aliases at the crate root pin the `f64` instantiation
//! used by the command-line tool.

// Negated comparisons below are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod demand;
pub mod engine;
mod error;
pub mod geometry;
pub mod ingest;
pub mod network;
pub mod output;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type GeoPoint = geometry::GeoPoint<f64>;
pub type SpatialIndex = geometry::SpatialIndex<f64>;
pub type ProviderSite = ingest::ProviderSite<f64>;
pub type DemandZone = ingest::DemandZone<f64>;
pub type ZoneGeometry = ingest::ZoneGeometry<f64>;
pub type RoadNetwork = ingest::RoadNetwork<f64>;
pub type RoutingGraph = network::RoutingGraph<f64>;
pub type CostMatrix = network::CostMatrix<f64>;
pub type AgeWeights = demand::AgeWeights<f64>;
pub type RingScheme = engine::RingScheme<f64>;
pub type ProviderRatio = engine::ProviderRatio<f64>;
pub type AccessResult = engine::AccessResult<f64>;
pub type Classification = classify::Classification<f64>;
pub type Summary = classify::Summary<f64>;

/// Meters per statute mile.
pub const METERS_PER_MILE: f64 = 1_609.344;
