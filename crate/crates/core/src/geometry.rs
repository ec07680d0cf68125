//! Distance metrics, zone representative points and radius queries.

use std::fmt;
use std::str::FromStr;

use crate::ingest::{DemandZone, ProviderSite, Ring, ZoneGeometry};
use crate::network::{CostMatrix, CostUnit, Direction};
use crate::{Error, Result, Scalar};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Coordinate reference of a point: geographic degrees or projected meters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Crs {
    LonLat,
    Planar,
}

impl fmt::Display for Crs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Crs::LonLat => "lonlat",
            Crs::Planar => "planar",
        })
    }
}

impl FromStr for Crs {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lonlat" | "lonlat-degrees" | "wgs84" => Ok(Crs::LonLat),
            "planar" | "planar-meters" => Ok(Crs::Planar),
            other => Err(Error::Contract(format!("unknown crs '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeoPoint<T> {
    pub x: T,
    pub y: T,
    pub crs: Crs,
}

impl<T: Scalar> GeoPoint<T> {
    /// Builds a validated point. Longitude/latitude must lie in
    /// [-180, 180] x [-90, 90]; planar coordinates must be finite.
    pub fn new(x: T, y: T, crs: Crs) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Validation(format!(
                "non-finite coordinate ({x}, {y})"
            )));
        }
        if crs == Crs::LonLat {
            let (lon_max, lat_max) = (T::lit(180.0), T::lit(90.0));
            if x.abs() > lon_max || y.abs() > lat_max {
                return Err(Error::Validation(format!(
                    "lon/lat ({x}, {y}) outside [-180,180]x[-90,90]"
                )));
            }
        }
        Ok(GeoPoint { x, y, crs })
    }

    pub fn lonlat(lon: T, lat: T) -> Result<Self> {
        Self::new(lon, lat, Crs::LonLat)
    }

    pub fn planar(x: T, y: T) -> Result<Self> {
        Self::new(x, y, Crs::Planar)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceMetric {
    Euclidean,
    Haversine,
}

impl DistanceMetric {
    /// The natural metric for a coordinate reference.
    pub fn for_crs(crs: Crs) -> Self {
        match crs {
            Crs::LonLat => DistanceMetric::Haversine,
            Crs::Planar => DistanceMetric::Euclidean,
        }
    }

    fn required_crs(self) -> Crs {
        match self {
            DistanceMetric::Euclidean => Crs::Planar,
            DistanceMetric::Haversine => Crs::LonLat,
        }
    }

    pub fn check(self, crs: Crs) -> Result<()> {
        if crs == self.required_crs() {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "{self} distance requires {} coordinates, got {crs}",
                self.required_crs()
            )))
        }
    }
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceMetric::Euclidean => "euclidean",
            DistanceMetric::Haversine => "haversine",
        })
    }
}

impl FromStr for DistanceMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" | "euclidean-planar" => Ok(DistanceMetric::Euclidean),
            "haversine" | "haversine-geodesic" => Ok(DistanceMetric::Haversine),
            other => Err(Error::Contract(format!("unknown metric '{other}'"))),
        }
    }
}

/// Distance in meters between two points sharing a crs compatible with `metric`.
pub fn distance<T: Scalar>(a: &GeoPoint<T>, b: &GeoPoint<T>, metric: DistanceMetric) -> Result<T> {
    metric.check(a.crs)?;
    metric.check(b.crs)?;
    Ok(raw_distance(a.x, a.y, b.x, b.y, metric))
}

#[inline]
fn raw_distance<T: Scalar>(ax: T, ay: T, bx: T, by: T, metric: DistanceMetric) -> T {
    match metric {
        DistanceMetric::Euclidean => (bx - ax).hypot(by - ay),
        DistanceMetric::Haversine => haversine(ax, ay, bx, by),
    }
}

fn haversine<T: Scalar>(lon1: T, lat1: T, lon2: T, lat2: T) -> T {
    let half = T::lit(0.5);
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let s_lat = ((phi2 - phi1) * half).sin();
    let s_lon = ((lon2 - lon1).to_radians() * half).sin();
    let a = s_lat * s_lat + phi1.cos() * phi2.cos() * s_lon * s_lon;
    let a = a.min(T::one()).max(T::zero());
    T::lit(2.0 * EARTH_RADIUS_M) * a.sqrt().asin()
}

/// Point the zone is represented by for distance and snapping purposes.
///
/// Polygons use the area-weighted centroid. When that falls outside the
/// shape (concave or multi-part zones), the midpoint of the widest interior
/// horizontal chord through the vertical middle of the largest part is used
/// instead, which always lies inside.
pub fn representative_point<T: Scalar>(zone: &DemandZone<T>) -> Result<GeoPoint<T>> {
    let degenerate = |reason: &str| Error::Geometry {
        id: zone.id.clone(),
        reason: reason.to_string(),
    };
    let parts: Vec<&[Ring<T>]> = match &zone.geometry {
        ZoneGeometry::Point(p) => return GeoPoint::new(p[0], p[1], zone.crs),
        ZoneGeometry::Polygon(rings) => vec![rings.as_slice()],
        ZoneGeometry::MultiPolygon(polys) => polys.iter().map(Vec::as_slice).collect(),
    };
    let origin = parts
        .first()
        .and_then(|p| p.first())
        .and_then(|r| r.first())
        .copied()
        .ok_or_else(|| degenerate("empty polygon"))?;

    let mut total_area = T::zero();
    let mut moment = [T::zero(), T::zero()];
    let mut largest: Option<(T, usize)> = None;
    for (idx, rings) in parts.iter().enumerate() {
        let mut part_area = T::zero();
        for (ridx, ring) in rings.iter().enumerate() {
            let (area, c) = ring_area_centroid(ring, origin);
            let area = if ridx == 0 { area.abs() } else { -area.abs() };
            part_area += area;
            moment[0] += area * c[0];
            moment[1] += area * c[1];
        }
        total_area += part_area;
        if largest.is_none_or(|(a, _)| part_area > a) {
            largest = Some((part_area, idx));
        }
    }
    if !(total_area > T::zero()) {
        return Err(degenerate("zero-area polygon"));
    }
    let cx = origin[0] + moment[0] / total_area;
    let cy = origin[1] + moment[1] / total_area;
    if point_in_parts(cx, cy, &parts) {
        return GeoPoint::new(cx, cy, zone.crs);
    }

    let (_, idx) = largest.expect("at least one part");
    let rings = parts[idx];
    let (ymin, ymax) = rings[0]
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| {
            (lo.min(p[1]), hi.max(p[1]))
        });
    let y = (ymin + ymax) * T::lit(0.5);
    let mut xs: Vec<T> = Vec::new();
    for ring in rings {
        for w in ring.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a[1] > y) != (b[1] > y) {
                xs.push(a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]));
            }
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    let best = xs
        .chunks_exact(2)
        .fold(None::<(T, T)>, |best, pair| {
            let width = pair[1] - pair[0];
            match best {
                Some((w, _)) if w >= width => best,
                _ => Some((width, (pair[0] + pair[1]) * T::lit(0.5))),
            }
        })
        .ok_or_else(|| degenerate("no interior chord"))?;
    if !point_in_parts(best.1, y, &parts) {
        return Err(degenerate("could not place an interior point"));
    }
    GeoPoint::new(best.1, y, zone.crs)
}

/// Signed shoelace area and centroid of a closed ring, computed relative to
/// `origin` to limit cancellation; the centroid is returned in the same
/// shifted frame.
fn ring_area_centroid<T: Scalar>(ring: &[[T; 2]], origin: [T; 2]) -> (T, [T; 2]) {
    let mut twice_area = T::zero();
    let mut cx = T::zero();
    let mut cy = T::zero();
    for w in ring.windows(2) {
        let (x0, y0) = (w[0][0] - origin[0], w[0][1] - origin[1]);
        let (x1, y1) = (w[1][0] - origin[0], w[1][1] - origin[1]);
        let cross = x0 * y1 - x1 * y0;
        twice_area += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    if twice_area == T::zero() {
        return (T::zero(), [T::zero(), T::zero()]);
    }
    let six_area = T::lit(3.0) * twice_area;
    (twice_area * T::lit(0.5), [cx / six_area, cy / six_area])
}

/// Even-odd point-in-polygon test over all rings of all parts.
pub fn point_in_rings<T: Scalar>(x: T, y: T, rings: &[Ring<T>]) -> bool {
    let mut inside = false;
    for ring in rings {
        for w in ring.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a[1] > y) != (b[1] > y) {
                let xi = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if x < xi {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

fn point_in_parts<T: Scalar>(x: T, y: T, parts: &[&[Ring<T>]]) -> bool {
    parts.iter().any(|rings| point_in_rings(x, y, rings))
}

/// Uniform-grid index over labelled points for radius search.
///
/// Cells are laid out in the native coordinate units (degrees or meters).
/// A query visits every cell overlapping a conservative bounding box of the
/// search circle and then filters candidates with the exact metric, so the
/// result always equals a linear scan.
#[derive(Clone, Debug)]
pub struct SpatialIndex<T> {
    crs: Crs,
    entries: Vec<(String, GeoPoint<T>)>,
    origin: [T; 2],
    cell: T,
    dims: [usize; 2],
    cells: Vec<Vec<u32>>,
}

impl<T: Scalar> SpatialIndex<T> {
    /// Indexes `entries`; all points must share one crs. `crs` names the
    /// reference used when the set is empty.
    pub fn new(crs: Crs, entries: Vec<(String, GeoPoint<T>)>) -> Result<Self> {
        if let Some((id, p)) = entries.iter().find(|(_, p)| p.crs != crs) {
            return Err(Error::Contract(format!(
                "point '{id}' has crs {} but index is {crs}",
                p.crs
            )));
        }
        let (mut lo, mut hi) = ([T::infinity(); 2], [T::neg_infinity(); 2]);
        for (_, p) in &entries {
            lo = [lo[0].min(p.x), lo[1].min(p.y)];
            hi = [hi[0].max(p.x), hi[1].max(p.y)];
        }
        if entries.is_empty() {
            lo = [T::zero(); 2];
            hi = [T::zero(); 2];
        }
        let side = (entries.len() as f64).sqrt().ceil().max(1.0) as usize;
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let cell = if extent > T::zero() {
            extent / T::lit(side as f64)
        } else {
            T::one()
        };
        let dim = |span: T| -> usize {
            ((span / cell).floor().to_usize().unwrap_or(0) + 1).min(side + 1)
        };
        let dims = [dim(hi[0] - lo[0]), dim(hi[1] - lo[1])];
        let mut index = SpatialIndex {
            crs,
            entries,
            origin: lo,
            cell,
            dims,
            cells: vec![Vec::new(); dims[0] * dims[1]],
        };
        for i in 0..index.entries.len() {
            let p = index.entries[i].1;
            let cx = index.cell_coord(p.x, 0);
            let cy = index.cell_coord(p.y, 1);
            index.cells[cy * dims[0] + cx].push(i as u32);
        }
        Ok(index)
    }

    pub fn crs(&self) -> Crs {
        self.crs
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, GeoPoint<T>)] {
        &self.entries
    }

    fn cell_coord(&self, v: T, axis: usize) -> usize {
        let c = ((v - self.origin[axis]) / self.cell).floor();
        if c < T::zero() {
            0
        } else {
            c.to_usize().unwrap_or(usize::MAX).min(self.dims[axis] - 1)
        }
    }

    /// Cell index range overlapping [lo, hi] on an axis, or `None` when the
    /// interval misses the grid.
    fn cell_span(&self, lo: T, hi: T, axis: usize) -> Option<(usize, usize)> {
        let top = self.origin[axis] + self.cell * T::lit(self.dims[axis] as f64);
        if hi < self.origin[axis] || lo > top {
            return None;
        }
        Some((self.cell_coord(lo, axis), self.cell_coord(hi, axis)))
    }

    /// All entries within `radius` meters of `center` (boundary inclusive),
    /// with their distances, ordered by id.
    pub fn radius_query(
        &self,
        center: &GeoPoint<T>,
        radius: T,
        metric: DistanceMetric,
    ) -> Result<Vec<(String, T)>> {
        if !(radius >= T::zero()) {
            return Err(Error::Contract(format!("negative radius {radius}")));
        }
        metric.check(self.crs)?;
        metric.check(center.crs)?;
        let mut hits = Vec::new();
        for (xr, yr) in self.search_boxes(center, radius, metric) {
            let (Some(xs), Some(ys)) = (self.cell_span(xr.0, xr.1, 0), self.cell_span(yr.0, yr.1, 1))
            else {
                continue;
            };
            for cy in ys.0..=ys.1 {
                for cx in xs.0..=xs.1 {
                    for &i in &self.cells[cy * self.dims[0] + cx] {
                        let (id, p) = &self.entries[i as usize];
                        let d = raw_distance(center.x, center.y, p.x, p.y, metric);
                        if d <= radius {
                            hits.push((i, id.clone(), d));
                        }
                    }
                }
            }
        }
        hits.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
        // Wrapped longitude boxes can overlap at the seam.
        hits.dedup_by_key(|h| h.0);
        Ok(hits.into_iter().map(|(_, id, d)| (id, d)).collect())
    }

    /// Conservative coordinate boxes (x-range, y-range) covering the circle.
    #[allow(clippy::type_complexity)]
    fn search_boxes(
        &self,
        center: &GeoPoint<T>,
        radius: T,
        metric: DistanceMetric,
    ) -> Vec<((T, T), (T, T))> {
        let pad = T::lit(1e-9);
        match metric {
            DistanceMetric::Euclidean => {
                let r = radius * (T::one() + pad) + pad * (center.x.abs() + center.y.abs() + T::one());
                vec![((center.x - r, center.x + r), (center.y - r, center.y + r))]
            }
            DistanceMetric::Haversine => {
                let full_lon = (T::lit(-180.0), T::lit(180.0));
                let delta = radius / T::lit(EARTH_RADIUS_M) * (T::one() + pad) + pad;
                if delta >= T::PI() {
                    return vec![(full_lon, (T::lit(-90.0), T::lit(90.0)))];
                }
                let lat = center.y.to_radians();
                let lat_lo = (lat - delta).to_degrees();
                let lat_hi = (lat + delta).to_degrees();
                let lat_range = (lat_lo.max(T::lit(-90.0)), lat_hi.min(T::lit(90.0)));
                if lat_lo <= T::lit(-90.0) || lat_hi >= T::lit(90.0) {
                    return vec![(full_lon, lat_range)];
                }
                let ratio = delta.sin() / lat.cos();
                if ratio >= T::one() {
                    return vec![(full_lon, lat_range)];
                }
                let dlon = ratio.asin().to_degrees() * (T::one() + pad) + pad;
                let (lo, hi) = (center.x - dlon, center.x + dlon);
                let deg360 = T::lit(360.0);
                if lo < full_lon.0 {
                    vec![((lo + deg360, full_lon.1), lat_range), ((full_lon.0, hi), lat_range)]
                } else if hi > full_lon.1 {
                    vec![((lo, full_lon.1), lat_range), ((full_lon.0, hi - deg360), lat_range)]
                } else {
                    vec![((lo, hi), lat_range)]
                }
            }
        }
    }

    /// Nearest entry by `metric`; ties go to the smallest id. Linear scan.
    pub fn nearest(&self, center: &GeoPoint<T>, metric: DistanceMetric) -> Result<Option<(&str, T)>> {
        metric.check(self.crs)?;
        metric.check(center.crs)?;
        let mut best: Option<(&str, T)> = None;
        for (id, p) in &self.entries {
            let d = raw_distance(center.x, center.y, p.x, p.y, metric);
            best = match best {
                Some((bid, bd)) if bd < d || (bd == d && bid <= id.as_str()) => Some((bid, bd)),
                _ => Some((id.as_str(), d)),
            };
        }
        Ok(best)
    }
}

/// Distance-buffer costs: every (zone, provider) pair whose representative
/// points lie within `radius` meters. Distances are symmetric, so the matrix
/// is tagged demand-to-provider.
pub fn buffer_cost_matrix<T: Scalar>(
    zones: &[DemandZone<T>],
    providers: &[ProviderSite<T>],
    radius: T,
    metric: DistanceMetric,
) -> Result<CostMatrix<T>> {
    let crs = match (zones.first(), providers.first()) {
        (Some(z), _) => z.crs,
        (None, Some(p)) => p.location.crs,
        (None, None) => metric.required_crs(),
    };
    metric.check(crs)?;
    let points = zones
        .iter()
        .map(|z| Ok((z.id.clone(), representative_point(z)?)))
        .collect::<Result<Vec<_>>>()?;
    let index = SpatialIndex::new(crs, points)?;
    let mut matrix = CostMatrix::new(CostUnit::Meters, Direction::DemandToProvider, Some(radius));
    for provider in providers {
        for (zone_id, d) in index.radius_query(&provider.location, radius, metric)? {
            matrix.insert(zone_id, provider.id.clone(), d);
        }
    }
    Ok(matrix)
}
