//! Loading providers, demand zones and road networks from GeoJSON and CSV.
//!
//! Loading is all-or-nothing: the first invalid record aborts the load with
//! an error naming the record (or, for duplicate ids, every duplicate).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use geojson::{Feature, FeatureCollection, GeoJson, Geometry, GeometryValue, JsonObject, JsonValue};

use crate::geometry::{Crs, GeoPoint};
use crate::{Error, Result, Scalar};

/// Closed coordinate ring, first vertex repeated at the end.
pub type Ring<T> = Vec<[T; 2]>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocumentFormat {
    GeoJson,
    Csv,
}

impl DocumentFormat {
    /// Guesses the format from a file extension (`.csv` or anything else as GeoJSON).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => DocumentFormat::Csv,
            _ => DocumentFormat::GeoJson,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProviderSite<T> {
    pub id: String,
    pub location: GeoPoint<T>,
    pub capacity: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ZoneGeometry<T> {
    Point([T; 2]),
    /// Outer ring followed by holes.
    Polygon(Vec<Ring<T>>),
    MultiPolygon(Vec<Vec<Ring<T>>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemandZone<T> {
    pub id: String,
    pub geometry: ZoneGeometry<T>,
    pub crs: Crs,
    /// Unset when the zone was loaded with age bands and not yet weighted.
    pub demand: Option<T>,
    /// Ordered (band label, head count) pairs.
    pub age_counts: Option<Vec<(String, T)>>,
    /// Source attributes, carried through to outputs.
    pub properties: JsonObject,
}

impl<T: Scalar> DemandZone<T> {
    pub fn new(id: impl Into<String>, geometry: ZoneGeometry<T>, crs: Crs, demand: Option<T>) -> Self {
        DemandZone {
            id: id.into(),
            geometry,
            crs,
            demand,
            age_counts: None,
            properties: JsonObject::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoadEdge<T> {
    pub from: String,
    pub to: String,
    pub cost_s: T,
    pub bidirectional: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoadNetwork<T> {
    pub nodes: BTreeMap<String, GeoPoint<T>>,
    pub edges: Vec<RoadEdge<T>>,
}

impl<T: Scalar> RoadNetwork<T> {
    /// Validates that every edge endpoint exists and every cost is positive.
    pub fn new(nodes: BTreeMap<String, GeoPoint<T>>, edges: Vec<RoadEdge<T>>) -> Result<Self> {
        if let Some(first) = nodes.values().next() {
            if let Some((id, p)) = nodes.iter().find(|(_, p)| p.crs != first.crs) {
                return Err(Error::Validation(format!(
                    "node '{id}' has crs {} unlike the rest ({})",
                    p.crs, first.crs
                )));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if !(e.cost_s > T::zero()) || !e.cost_s.is_finite() {
                return Err(Error::Validation(format!(
                    "edge {i} ({} -> {}): cost_s must be positive and finite, got {}",
                    e.from, e.to, e.cost_s
                )));
            }
            for end in [&e.from, &e.to] {
                if !nodes.contains_key(end) {
                    return Err(Error::Validation(format!(
                        "edge {i} references unknown node '{end}'"
                    )));
                }
            }
        }
        Ok(RoadNetwork { nodes, edges })
    }

    pub fn crs(&self) -> Option<Crs> {
        self.nodes.values().next().map(|p| p.crs)
    }

    /// Edges with bidirectional ones expanded into both directions.
    pub fn directed_edges(&self) -> impl Iterator<Item = (&str, &str, T)> + '_ {
        self.edges.iter().flat_map(|e| {
            let fwd = Some((e.from.as_str(), e.to.as_str(), e.cost_s));
            let back = e
                .bidirectional
                .then_some((e.to.as_str(), e.from.as_str(), e.cost_s));
            fwd.into_iter().chain(back)
        })
    }

    pub fn directed_edge_count(&self) -> usize {
        self.edges.iter().map(|e| 1 + e.bidirectional as usize).sum()
    }
}

/// Field names for provider documents.
#[derive(Clone, Debug)]
pub struct ProviderFields {
    pub id: String,
    /// `None` loads locations only, with zero capacity.
    pub capacity: Option<String>,
    /// CSV coordinate columns.
    pub x: String,
    pub y: String,
}

impl ProviderFields {
    pub fn new(id: impl Into<String>, capacity: impl Into<String>) -> Self {
        ProviderFields {
            id: id.into(),
            capacity: Some(capacity.into()),
            x: "lon".into(),
            y: "lat".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DemandSource {
    Field(String),
    AgeBands(Vec<String>),
}

#[derive(Clone, Debug)]
pub struct ZoneFields {
    pub id: String,
    /// `None` loads geometry only (demand unset).
    pub demand: Option<DemandSource>,
    pub x: String,
    pub y: String,
}

impl ZoneFields {
    pub fn new(id: impl Into<String>, demand: DemandSource) -> Self {
        ZoneFields {
            id: id.into(),
            demand: Some(demand),
            x: "lon".into(),
            y: "lat".into(),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// One input record, either a GeoJSON feature or a CSV row.
struct Record<'a> {
    index: usize,
    props: &'a JsonObject,
}

impl Record<'_> {
    fn get(&self, field: &str) -> Result<&JsonValue> {
        self.props.get(field).ok_or_else(|| {
            Error::Schema(format!("record {}: missing field '{field}'", self.index))
        })
    }

    fn id(&self, field: &str) -> Result<String> {
        let id = match self.get(field)? {
            JsonValue::String(s) => s.trim().to_string(),
            JsonValue::Number(n) => n.to_string(),
            other => {
                return Err(Error::Validation(format!(
                    "record {}: id field '{field}' has unusable value {other}",
                    self.index
                )))
            }
        };
        if id.is_empty() {
            return Err(Error::Validation(format!(
                "record {}: empty id in field '{field}'",
                self.index
            )));
        }
        Ok(id)
    }

    fn non_negative<T: Scalar>(&self, field: &str) -> Result<T> {
        let raw = self.get(field)?;
        match number_value(raw) {
            Some(v) if v.is_finite() && v >= 0.0 => Ok(T::lit(v)),
            _ => Err(Error::Validation(format!(
                "record {}: field '{field}' must be a non-negative number, got {raw}",
                self.index
            ))),
        }
    }
}

fn number_value(v: &JsonValue) -> Option<f64> {
    match v {
        JsonValue::Number(n) => n.as_f64(),
        JsonValue::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = BTreeSet::new();
    let mut dups = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            dups.insert(id);
        }
    }
    if dups.is_empty() {
        Ok(())
    } else {
        let list: Vec<_> = dups.into_iter().collect();
        Err(Error::Validation(format!("duplicate ids: {}", list.join(", "))))
    }
}

fn parse_feature_collection(text: &str) -> Result<FeatureCollection> {
    match text.parse::<GeoJson>() {
        Ok(GeoJson::FeatureCollection(fc)) => Ok(fc),
        Ok(_) => Err(Error::Parse("expected a GeoJSON FeatureCollection".into())),
        Err(e) => Err(Error::Parse(format!("invalid GeoJSON: {e}"))),
    }
}

/// CSV rows as JSON objects of strings, so both formats share one code path.
fn csv_rows(text: &str) -> Result<Vec<JsonObject>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(format!("invalid CSV header: {e}")))?
        .clone();
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| Error::Parse(format!("CSV row {i}: {e}")))?;
            Ok(headers
                .iter()
                .zip(rec.iter())
                .map(|(h, v)| (h.to_string(), JsonValue::String(v.to_string())))
                .collect())
        })
        .collect()
}

fn point_from<T: Scalar>(x: f64, y: f64, crs: Crs, index: usize) -> Result<GeoPoint<T>> {
    GeoPoint::new(T::lit(x), T::lit(y), crs)
        .map_err(|e| Error::Validation(format!("record {index}: {e}")))
}

fn csv_point<T: Scalar>(rec: &Record<'_>, x: &str, y: &str, crs: Crs) -> Result<GeoPoint<T>> {
    let coord = |field: &str| -> Result<f64> {
        let raw = rec.get(field)?;
        number_value(raw).ok_or_else(|| {
            Error::Validation(format!(
                "record {}: coordinate '{field}' is not numeric: {raw}",
                rec.index
            ))
        })
    };
    point_from(coord(x)?, coord(y)?, crs, rec.index)
}

pub fn load_providers<T: Scalar>(
    text: &str,
    format: DocumentFormat,
    fields: &ProviderFields,
    crs: Crs,
) -> Result<Vec<ProviderSite<T>>> {
    let build = |rec: &Record<'_>, location: GeoPoint<T>| -> Result<ProviderSite<T>> {
        let capacity = match &fields.capacity {
            Some(f) => rec.non_negative(f)?,
            None => T::zero(),
        };
        Ok(ProviderSite {
            id: rec.id(&fields.id)?,
            location,
            capacity,
        })
    };
    let sites = match format {
        DocumentFormat::GeoJson => {
            let fc = parse_feature_collection(text)?;
            let empty = JsonObject::new();
            fc.features
                .iter()
                .enumerate()
                .map(|(index, f)| {
                    let rec = Record {
                        index,
                        props: f.properties.as_ref().unwrap_or(&empty),
                    };
                    let location = match f.geometry.as_ref().map(|g| &g.value) {
                        Some(GeometryValue::Point { coordinates }) => {
                            let c = xy(coordinates, index)?;
                            point_from(c[0], c[1], crs, index)?
                        }
                        _ => {
                            return Err(Error::Parse(format!(
                                "record {index}: provider features must be Points"
                            )))
                        }
                    };
                    build(&rec, location)
                })
                .collect::<Result<Vec<_>>>()?
        }
        DocumentFormat::Csv => csv_rows(text)?
            .iter()
            .enumerate()
            .map(|(index, props)| {
                let rec = Record { index, props };
                build(&rec, csv_point(&rec, &fields.x, &fields.y, crs)?)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    check_unique(sites.iter().map(|s| s.id.as_str()))?;
    Ok(sites)
}

fn xy(p: &geojson::Position, index: usize) -> Result<[f64; 2]> {
    match p.as_slice() {
        [x, y, ..] => Ok([*x, *y]),
        _ => Err(Error::Parse(format!("record {index}: position needs two coordinates"))),
    }
}

fn convert_ring<T: Scalar>(ring: &[geojson::Position], id: &str, crs: Crs, index: usize) -> Result<Ring<T>> {
    let geom_err = |reason: String| Error::Geometry {
        id: id.to_string(),
        reason,
    };
    if ring.len() < 4 {
        return Err(geom_err(format!("ring has {} vertices, need at least 4", ring.len())));
    }
    let pts = ring
        .iter()
        .map(|p| {
            let c = xy(p, index)?;
            let g: GeoPoint<T> = GeoPoint::new(T::lit(c[0]), T::lit(c[1]), crs)
                .map_err(|e| geom_err(e.to_string()))?;
            Ok([g.x, g.y])
        })
        .collect::<Result<Vec<_>>>()?;
    if pts.first() != pts.last() {
        return Err(geom_err("ring is not closed".into()));
    }
    Ok(pts)
}

fn convert_polygon<T: Scalar>(
    rings: &[Vec<geojson::Position>],
    id: &str,
    crs: Crs,
    index: usize,
) -> Result<Vec<Ring<T>>> {
    if rings.is_empty() {
        return Err(Error::Geometry {
            id: id.to_string(),
            reason: "polygon without rings".into(),
        });
    }
    rings.iter().map(|r| convert_ring(r, id, crs, index)).collect()
}

pub fn load_zones<T: Scalar>(
    text: &str,
    format: DocumentFormat,
    fields: &ZoneFields,
    crs: Crs,
) -> Result<Vec<DemandZone<T>>> {
    let build = |rec: &Record<'_>, id: String, geometry: ZoneGeometry<T>| -> Result<DemandZone<T>> {
        let (demand, age_counts) = match &fields.demand {
            None => (None, None),
            Some(DemandSource::Field(f)) => (Some(rec.non_negative(f)?), None),
            Some(DemandSource::AgeBands(bands)) => {
                let counts = bands
                    .iter()
                    .map(|b| Ok((b.clone(), rec.non_negative(b)?)))
                    .collect::<Result<Vec<_>>>()?;
                (None, Some(counts))
            }
        };
        Ok(DemandZone {
            id,
            geometry,
            crs,
            demand,
            age_counts,
            properties: rec.props.clone(),
        })
    };
    let zones = match format {
        DocumentFormat::GeoJson => {
            let fc = parse_feature_collection(text)?;
            let empty = JsonObject::new();
            fc.features
                .iter()
                .enumerate()
                .map(|(index, f)| {
                    let rec = Record {
                        index,
                        props: f.properties.as_ref().unwrap_or(&empty),
                    };
                    let id = rec.id(&fields.id)?;
                    let geometry = match f.geometry.as_ref().map(|g| &g.value) {
                        Some(GeometryValue::Point { coordinates }) => {
                            let p: GeoPoint<T> = {
                                let c = xy(coordinates, index)?;
                                point_from(c[0], c[1], crs, index)?
                            };
                            ZoneGeometry::Point([p.x, p.y])
                        }
                        Some(GeometryValue::Polygon { coordinates }) => {
                            ZoneGeometry::Polygon(convert_polygon(coordinates, &id, crs, index)?)
                        }
                        Some(GeometryValue::MultiPolygon { coordinates }) => ZoneGeometry::MultiPolygon(
                            coordinates
                                .iter()
                                .map(|p| convert_polygon(p, &id, crs, index))
                                .collect::<Result<_>>()?,
                        ),
                        _ => {
                            return Err(Error::Geometry {
                                id,
                                reason: "expected Point, Polygon or MultiPolygon".into(),
                            })
                        }
                    };
                    build(&rec, id, geometry)
                })
                .collect::<Result<Vec<_>>>()?
        }
        DocumentFormat::Csv => csv_rows(text)?
            .iter()
            .enumerate()
            .map(|(index, props)| {
                let rec = Record { index, props };
                let p: GeoPoint<T> = csv_point(&rec, &fields.x, &fields.y, crs)?;
                build(&rec, rec.id(&fields.id)?, ZoneGeometry::Point([p.x, p.y]))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    check_unique(zones.iter().map(|z| z.id.as_str()))?;
    Ok(zones)
}

/// Options for road-network loading.
#[derive(Clone, Copy, Debug)]
pub struct RoadOptions<T> {
    pub crs: Crs,
    /// When set, edge costs are `length_m / speed` instead of the `cost_s` column.
    pub speed_mps: Option<T>,
}

impl<T> RoadOptions<T> {
    pub fn new(crs: Crs) -> Self {
        RoadOptions { crs, speed_mps: None }
    }
}

/// Walking speed used when a network is loaded for pedestrian travel.
pub const WALKING_SPEED_KMH: f64 = 5.0;

const ROAD_COLUMNS: [&str; 6] = ["from_id", "to_id", "from_x", "from_y", "to_x", "to_y"];

fn parse_oneway(v: Option<&JsonValue>, index: usize) -> Result<bool> {
    match v {
        None | Some(JsonValue::Null) => Ok(false),
        Some(JsonValue::Bool(b)) => Ok(*b),
        Some(JsonValue::String(s)) => match s.trim().to_ascii_lowercase().as_str() {
            "" | "false" | "0" | "no" => Ok(false),
            "true" | "1" | "yes" => Ok(true),
            other => Err(Error::Validation(format!("edge {index}: bad oneway value '{other}'"))),
        },
        Some(other) => Err(Error::Validation(format!("edge {index}: bad oneway value {other}"))),
    }
}

fn edge_cost<T: Scalar>(rec: &Record<'_>, speed: Option<T>) -> Result<T> {
    let (field, divisor) = match speed {
        Some(s) => ("length_m", s),
        None => ("cost_s", T::one()),
    };
    let raw = rec.props.get(field).ok_or_else(|| {
        Error::Schema(format!("edge {}: missing column '{field}'", rec.index))
    })?;
    match number_value(raw) {
        Some(v) if v.is_finite() && v > 0.0 => Ok(T::lit(v) / divisor),
        _ => Err(Error::Validation(format!(
            "edge {}: {field} must be positive and finite, got {raw}",
            rec.index
        ))),
    }
}

fn add_node<T: Scalar>(
    nodes: &mut BTreeMap<String, GeoPoint<T>>,
    id: String,
    point: Option<GeoPoint<T>>,
    index: usize,
) -> Result<()> {
    let Some(p) = point else { return Ok(()) };
    match nodes.get(&id) {
        Some(existing) if *existing != p => Err(Error::Validation(format!(
            "edge {index}: node '{id}' redefined at ({}, {}) after ({}, {})",
            p.x, p.y, existing.x, existing.y
        ))),
        Some(_) => Ok(()),
        None => {
            nodes.insert(id, p);
            Ok(())
        }
    }
}

/// Loads a road network from the edge CSV
/// (`from_id,to_id,from_x,from_y,to_x,to_y,cost_s[,oneway][,length_m]`)
/// or from GeoJSON LineStrings carrying `from_id`, `to_id`, `cost_s` and
/// optional `oneway` properties.
///
/// In CSV, coordinates of a node may be left blank on all but one row.
pub fn load_road_network<T: Scalar>(
    text: &str,
    format: DocumentFormat,
    opts: &RoadOptions<T>,
) -> Result<RoadNetwork<T>> {
    let mut nodes = BTreeMap::new();
    let mut edges = Vec::new();
    match format {
        DocumentFormat::Csv => {
            let rows = csv_rows(text)?;
            if let Some(first) = rows.first() {
                for col in ROAD_COLUMNS {
                    if !first.contains_key(col) {
                        return Err(Error::Schema(format!("road CSV lacks column '{col}'")));
                    }
                }
            }
            for (index, props) in rows.iter().enumerate() {
                let rec = Record { index, props };
                let from = rec.id("from_id")?;
                let to = rec.id("to_id")?;
                let endpoint = |xf: &str, yf: &str| -> Result<Option<GeoPoint<T>>> {
                    let (xs, ys) = (rec.get(xf)?, rec.get(yf)?);
                    if xs.as_str().is_some_and(str::is_empty) && ys.as_str().is_some_and(str::is_empty) {
                        return Ok(None);
                    }
                    csv_point(&rec, xf, yf, opts.crs).map(Some)
                };
                let (fp, tp) = (endpoint("from_x", "from_y")?, endpoint("to_x", "to_y")?);
                add_node(&mut nodes, from.clone(), fp, index)?;
                add_node(&mut nodes, to.clone(), tp, index)?;
                edges.push(RoadEdge {
                    cost_s: edge_cost(&rec, opts.speed_mps)?,
                    bidirectional: !parse_oneway(props.get("oneway"), index)?,
                    from,
                    to,
                });
            }
        }
        DocumentFormat::GeoJson => {
            let fc = parse_feature_collection(text)?;
            let empty = JsonObject::new();
            for (index, f) in fc.features.iter().enumerate() {
                let rec = Record {
                    index,
                    props: f.properties.as_ref().unwrap_or(&empty),
                };
                let line = match f.geometry.as_ref().map(|g| &g.value) {
                    Some(GeometryValue::LineString { coordinates }) if coordinates.len() >= 2 => coordinates,
                    _ => {
                        return Err(Error::Parse(format!(
                            "edge {index}: road features must be LineStrings with two or more positions"
                        )))
                    }
                };
                let a = xy(&line[0], index)?;
                let b = xy(&line[line.len() - 1], index)?;
                let from = rec.id("from_id")?;
                let to = rec.id("to_id")?;
                add_node(&mut nodes, from.clone(), Some(point_from(a[0], a[1], opts.crs, index)?), index)?;
                add_node(&mut nodes, to.clone(), Some(point_from(b[0], b[1], opts.crs, index)?), index)?;
                edges.push(RoadEdge {
                    cost_s: edge_cost(&rec, opts.speed_mps)?,
                    bidirectional: !parse_oneway(rec.props.get("oneway"), index)?,
                    from,
                    to,
                });
            }
        }
    }
    RoadNetwork::new(nodes, edges)
}

fn json_number<T: Scalar>(v: T) -> JsonValue {
    JsonValue::from(v.to_f64_lossy())
}

fn position<T: Scalar>(c: &[T; 2]) -> geojson::Position {
    geojson::Position::from([c[0].to_f64_lossy(), c[1].to_f64_lossy()])
}

fn polygon_value<T: Scalar>(rings: &[Ring<T>]) -> Vec<Vec<geojson::Position>> {
    rings.iter().map(|r| r.iter().map(position).collect()).collect()
}

pub(crate) fn zone_geometry<T: Scalar>(geometry: &ZoneGeometry<T>) -> Geometry {
    Geometry::new(match geometry {
        ZoneGeometry::Point(p) => GeometryValue::Point {
            coordinates: position(p),
        },
        ZoneGeometry::Polygon(rings) => GeometryValue::Polygon {
            coordinates: polygon_value(rings),
        },
        ZoneGeometry::MultiPolygon(polys) => GeometryValue::MultiPolygon {
            coordinates: polys.iter().map(|p| polygon_value(p)).collect(),
        },
    })
}

pub(crate) fn feature(geometry: Geometry, properties: JsonObject) -> Feature {
    Feature {
        bbox: None,
        geometry: Some(geometry),
        id: None,
        properties: Some(properties),
        foreign_members: None,
    }
}

pub(crate) fn collection_string(features: Vec<Feature>) -> String {
    GeoJson::from(FeatureCollection::new(features)).to_string()
}

/// Sets `key` unless it already holds the same value, so untouched
/// attributes keep their original JSON representation.
fn set_number<T: Scalar>(props: &mut JsonObject, key: &str, v: T) {
    if props.get(key).and_then(number_value) != Some(v.to_f64_lossy()) {
        props.insert(key.to_string(), json_number(v));
    }
}

/// Zone feature carrying the source attributes plus id (and demand, when
/// `demand_field` is named).
pub(crate) fn zone_properties<T: Scalar>(zone: &DemandZone<T>, id_field: &str, demand_field: Option<&str>) -> JsonObject {
    let mut props = zone.properties.clone();
    let id_matches = props.get(id_field).is_some_and(|v| match v {
        JsonValue::String(s) => s.trim() == zone.id,
        JsonValue::Number(n) => n.to_string() == zone.id,
        _ => false,
    });
    if !id_matches {
        props.insert(id_field.to_string(), JsonValue::String(zone.id.clone()));
    }
    if let (Some(field), Some(d)) = (demand_field, zone.demand) {
        set_number(&mut props, field, d);
    }
    props
}

pub fn write_zones_geojson<T: Scalar>(zones: &[DemandZone<T>], id_field: &str, demand_field: Option<&str>) -> String {
    collection_string(
        zones
            .iter()
            .map(|z| feature(zone_geometry(&z.geometry), zone_properties(z, id_field, demand_field)))
            .collect(),
    )
}

pub fn write_providers_geojson<T: Scalar>(providers: &[ProviderSite<T>], fields: &ProviderFields) -> String {
    collection_string(
        providers
            .iter()
            .map(|p| {
                let mut props = JsonObject::new();
                props.insert(fields.id.clone(), JsonValue::String(p.id.clone()));
                if let Some(cap) = &fields.capacity {
                    props.insert(cap.clone(), json_number(p.capacity));
                }
                feature(
                    Geometry::new(GeometryValue::Point {
                        coordinates: position(&[p.location.x, p.location.y]),
                    }),
                    props,
                )
            })
            .collect(),
    )
}

pub fn write_road_network_csv<T: Scalar>(network: &RoadNetwork<T>) -> String {
    let mut out = String::from("from_id,to_id,from_x,from_y,to_x,to_y,cost_s,oneway\n");
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for e in &network.edges {
        let a = network.nodes[&e.from];
        let b = network.nodes[&e.to];
        w.write_record([
            e.from.clone(),
            e.to.clone(),
            a.x.to_string(),
            a.y.to_string(),
            b.x.to_string(),
            b.y.to_string(),
            e.cost_s.to_string(),
            (!e.bidirectional).to_string(),
        ])
        .expect("in-memory CSV write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("utf-8"));
    out
}
