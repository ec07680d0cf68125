//! Travel-time catchments over a road graph: snapping sites to nodes,
//! cutoff shortest-path searches and the sparse zone/provider cost matrix.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::geometry::{representative_point, DistanceMetric, GeoPoint, SpatialIndex};
use crate::ingest::{DemandZone, ProviderSite, RoadNetwork};
use crate::{Error, Result, Scalar};

/// Default snap tolerance in meters.
pub const DEFAULT_SNAP_TOLERANCE_M: f64 = 500.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Direction {
    /// Patients travel from zones to facilities.
    #[default]
    DemandToProvider,
    ProviderToDemand,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::DemandToProvider => "demand-to-provider",
            Direction::ProviderToDemand => "provider-to-demand",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "demand-to-provider" | "d2p" | "to-provider" => Ok(Direction::DemandToProvider),
            "provider-to-demand" | "p2d" | "from-provider" => Ok(Direction::ProviderToDemand),
            other => Err(Error::Contract(format!("unknown direction '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostUnit {
    Seconds,
    Meters,
}

impl fmt::Display for CostUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostUnit::Seconds => "s",
            CostUnit::Meters => "m",
        })
    }
}

/// Sparse (zone, provider) -> cost table, truncated at `cutoff`.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix<T> {
    pub direction: Direction,
    pub unit: CostUnit,
    pub cutoff: Option<T>,
    entries: BTreeMap<(String, String), T>,
    pub unreached_zones: Vec<String>,
    pub unreached_providers: Vec<String>,
}

/// Header of the cost-matrix cache file.
pub const COST_MATRIX_HEADER: &str = "zone_id,provider_id,cost_s";

impl<T: Scalar> CostMatrix<T> {
    pub fn new(unit: CostUnit, direction: Direction, cutoff: Option<T>) -> Self {
        CostMatrix {
            direction,
            unit,
            cutoff,
            entries: BTreeMap::new(),
            unreached_zones: Vec::new(),
            unreached_providers: Vec::new(),
        }
    }

    pub fn insert(&mut self, zone: impl Into<String>, provider: impl Into<String>, cost: T) {
        self.entries.insert((zone.into(), provider.into()), cost);
    }

    pub fn get(&self, zone: &str, provider: &str) -> Option<T> {
        self.entries
            .get(&(zone.to_string(), provider.to_string()))
            .copied()
    }

    /// Entries in (zone id, provider id) order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, T)> + '_ {
        self.entries
            .iter()
            .map(|((z, p), c)| (z.as_str(), p.as_str(), *c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Serializes to the `zone_id,provider_id,cost_s` cache format.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.entries.len() + 1));
        out.push_str(COST_MATRIX_HEADER);
        out.push('\n');
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        for (z, p, c) in self.entries() {
            w.write_record([z, p, &c.to_string()])
                .expect("in-memory CSV write");
        }
        out.push_str(
            &String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("utf-8"),
        );
        out
    }

    /// Parses the cache format. Direction defaults to demand-to-provider and
    /// the cutoff is unknown.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Parse(format!("invalid cost matrix header: {e}")))?;
        if headers.iter().collect::<Vec<_>>().join(",") != COST_MATRIX_HEADER {
            return Err(Error::Schema(format!(
                "cost matrix header must be '{COST_MATRIX_HEADER}'"
            )));
        }
        let mut matrix = CostMatrix::new(CostUnit::Seconds, Direction::DemandToProvider, None);
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("cost matrix row {i}: {e}")))?;
            let cost: f64 = rec[2].parse().map_err(|_| {
                Error::Validation(format!("cost matrix row {i}: bad cost '{}'", &rec[2]))
            })?;
            if !(cost >= 0.0) || !cost.is_finite() {
                return Err(Error::Validation(format!(
                    "cost matrix row {i}: cost must be finite and non-negative"
                )));
            }
            if rec[0].is_empty() || rec[1].is_empty() {
                return Err(Error::Validation(format!("cost matrix row {i}: empty id")));
            }
            let key = (rec[0].to_string(), rec[1].to_string());
            if matrix.entries.insert(key, T::lit(cost)).is_some() {
                return Err(Error::Validation(format!(
                    "cost matrix row {i}: duplicate pair ({}, {})",
                    &rec[0], &rec[1]
                )));
            }
        }
        Ok(matrix)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snap<T> {
    pub node: String,
    pub distance_m: T,
}

/// Outcome of snapping a set of sites.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SnapResult<T> {
    pub snapped: BTreeMap<String, Snap<T>>,
    /// Sites whose nearest node exceeded the tolerance, with that distance.
    pub failed: Vec<(String, T)>,
}

#[derive(Clone, Copy, PartialEq)]
struct Frontier<T> {
    cost: T,
    node: u32,
}

impl<T: PartialEq> Eq for Frontier<T> {}

impl<T: PartialOrd> Ord for Frontier<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on cost, then node.
        other
            .cost
            .partial_cmp(&self.cost)
            .expect("finite costs")
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl<T: PartialOrd> PartialOrd for Frontier<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compressed adjacency (forward and reverse) plus a node index for snapping.
#[derive(Clone, Debug)]
pub struct RoutingGraph<T> {
    ids: Vec<String>,
    lookup: HashMap<String, u32>,
    forward: Adjacency<T>,
    reverse: Adjacency<T>,
    nodes: SpatialIndex<T>,
    metric: DistanceMetric,
}

#[derive(Clone, Debug)]
struct Adjacency<T> {
    offsets: Vec<usize>,
    targets: Vec<(u32, T)>,
}

impl<T: Copy> Adjacency<T> {
    fn build(n: usize, mut arcs: Vec<(u32, u32, T)>) -> Self {
        arcs.sort_by_key(|a| (a.0, a.1));
        let mut offsets = vec![0usize; n + 1];
        for a in &arcs {
            offsets[a.0 as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Adjacency {
            offsets,
            targets: arcs.into_iter().map(|(_, t, c)| (t, c)).collect(),
        }
    }

    fn out(&self, node: u32) -> &[(u32, T)] {
        &self.targets[self.offsets[node as usize]..self.offsets[node as usize + 1]]
    }
}

impl<T: Scalar> RoutingGraph<T> {
    pub fn new(network: &RoadNetwork<T>) -> Result<Self> {
        let crs = network
            .crs()
            .ok_or_else(|| Error::Contract("road network has no nodes".into()))?;
        let ids: Vec<String> = network.nodes.keys().cloned().collect();
        let lookup: HashMap<String, u32> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as u32))
            .collect();
        let mut fwd = Vec::with_capacity(network.directed_edge_count());
        for (from, to, cost) in network.directed_edges() {
            fwd.push((lookup[from], lookup[to], cost));
        }
        let rev = fwd.iter().map(|&(a, b, c)| (b, a, c)).collect();
        let nodes = SpatialIndex::new(
            crs,
            network
                .nodes
                .iter()
                .map(|(id, p)| (id.clone(), *p))
                .collect(),
        )?;
        Ok(RoutingGraph {
            forward: Adjacency::build(ids.len(), fwd),
            reverse: Adjacency::build(ids.len(), rev),
            ids,
            lookup,
            nodes,
            metric: DistanceMetric::for_crs(crs),
        })
    }

    pub fn metric(&self) -> DistanceMetric {
        self.metric
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    /// Nearest node within `tolerance` meters; equal distances resolve to the
    /// smallest node id.
    pub fn snap(&self, point: &GeoPoint<T>, tolerance: T) -> Result<Snap<T>> {
        if !(tolerance > T::zero()) {
            return Err(Error::Contract(format!(
                "snap tolerance must be positive, got {tolerance}"
            )));
        }
        let hits = self.nodes.radius_query(point, tolerance, self.metric)?;
        // Hits are id-ordered, so the first minimum wins ties.
        let best = hits.into_iter().fold(None::<(String, T)>, |best, hit| match best {
            Some(b) if b.1 <= hit.1 => Some(b),
            _ => Some(hit),
        });
        match best {
            Some((node, distance_m)) => Ok(Snap { node, distance_m }),
            None => {
                let (_, d) = self
                    .nodes
                    .nearest(point, self.metric)?
                    .expect("graph has nodes");
                Err(Error::SnapFailure {
                    distance_m: d.to_f64_lossy(),
                })
            }
        }
    }

    /// Snaps labelled sites, splitting successes from out-of-tolerance failures.
    pub fn snap_sites<'a, I>(&self, sites: I, tolerance: T) -> Result<SnapResult<T>>
    where
        I: IntoIterator<Item = (&'a str, GeoPoint<T>)>,
    {
        let mut result = SnapResult {
            snapped: BTreeMap::new(),
            failed: Vec::new(),
        };
        for (id, point) in sites {
            match self.snap(&point, tolerance) {
                Ok(s) => {
                    result.snapped.insert(id.to_string(), s);
                }
                Err(Error::SnapFailure { distance_m }) => {
                    result.failed.push((id.to_string(), T::lit(distance_m)))
                }
                Err(e) => return Err(e),
            }
        }
        result.failed.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(result)
    }

    fn search(&self, origin: u32, cutoff: T, reverse: bool) -> Vec<(u32, T)> {
        let adj = if reverse { &self.reverse } else { &self.forward };
        let mut best = vec![T::infinity(); self.ids.len()];
        let mut heap = BinaryHeap::new();
        let mut settled = Vec::new();
        best[origin as usize] = T::zero();
        heap.push(Frontier {
            cost: T::zero(),
            node: origin,
        });
        while let Some(Frontier { cost, node }) = heap.pop() {
            if cost > best[node as usize] {
                continue;
            }
            settled.push((node, cost));
            for &(next, w) in adj.out(node) {
                let candidate = cost + w;
                if candidate <= cutoff && candidate < best[next as usize] {
                    best[next as usize] = candidate;
                    heap.push(Frontier {
                        cost: candidate,
                        node: next,
                    });
                }
            }
        }
        settled
    }

    /// Exact shortest-path cost to every node reachable within `cutoff` seconds.
    pub fn shortest_path_times(&self, origin: &str, cutoff: T) -> Result<BTreeMap<String, T>> {
        self.times(origin, cutoff, false)
    }

    /// Like [`shortest_path_times`](Self::shortest_path_times) but following
    /// edges backwards: costs from every node *to* `origin`.
    pub fn shortest_path_times_to(&self, origin: &str, cutoff: T) -> Result<BTreeMap<String, T>> {
        self.times(origin, cutoff, true)
    }

    fn times(&self, origin: &str, cutoff: T, reverse: bool) -> Result<BTreeMap<String, T>> {
        if !(cutoff > T::zero()) {
            return Err(Error::Contract(format!("cutoff must be positive, got {cutoff}")));
        }
        let &start = self
            .lookup
            .get(origin)
            .ok_or_else(|| Error::Contract(format!("unknown origin node '{origin}'")))?;
        Ok(self
            .search(start, cutoff, reverse)
            .into_iter()
            .map(|(n, c)| (self.ids[n as usize].clone(), c))
            .collect())
    }

    /// Builds the zone/provider travel-cost matrix with one cutoff search per
    /// distinct zone node. Sites that fail to snap are reported in the
    /// matrix's `unreached_*` lists and left out.
    pub fn cost_matrix(
        &self,
        zones: &[DemandZone<T>],
        providers: &[ProviderSite<T>],
        cutoff: T,
        direction: Direction,
        tolerance: T,
    ) -> Result<CostMatrix<T>> {
        if !(cutoff > T::zero()) {
            return Err(Error::Contract(format!("cutoff must be positive, got {cutoff}")));
        }
        let zone_points = zones
            .iter()
            .map(|z| Ok((z.id.as_str(), representative_point(z)?)))
            .collect::<Result<Vec<_>>>()?;
        let zone_snaps = self.snap_sites(zone_points, tolerance)?;
        let provider_snaps = self.snap_sites(
            providers.iter().map(|p| (p.id.as_str(), p.location)),
            tolerance,
        )?;

        let mut providers_at: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
        for (id, s) in &provider_snaps.snapped {
            providers_at
                .entry(self.lookup[&s.node])
                .or_default()
                .push(id.as_str());
        }

        let mut origins: Vec<u32> = zone_snaps
            .snapped
            .values()
            .map(|s| self.lookup[&s.node])
            .collect();
        origins.sort_unstable();
        origins.dedup();
        let reverse = direction == Direction::ProviderToDemand;
        let reached: HashMap<u32, Vec<(u32, T)>> = origins
            .par_iter()
            .map(|&o| (o, self.search(o, cutoff, reverse)))
            .collect();

        let mut matrix = CostMatrix::new(CostUnit::Seconds, direction, Some(cutoff));
        for (zone_id, s) in &zone_snaps.snapped {
            for &(node, cost) in &reached[&self.lookup[&s.node]] {
                if let Some(ids) = providers_at.get(&node) {
                    for provider_id in ids {
                        matrix.insert(zone_id.clone(), *provider_id, cost);
                    }
                }
            }
        }
        matrix.unreached_zones = zone_snaps.failed.into_iter().map(|f| f.0).collect();
        matrix.unreached_providers = provider_snaps.failed.into_iter().map(|f| f.0).collect();
        Ok(matrix)
    }
}

/// Snaps one point onto `network`; see [`RoutingGraph::snap`].
pub fn snap<T: Scalar>(point: &GeoPoint<T>, network: &RoadNetwork<T>, tolerance: T) -> Result<Snap<T>> {
    RoutingGraph::new(network)?.snap(point, tolerance)
}

pub fn shortest_path_times<T: Scalar>(
    network: &RoadNetwork<T>,
    origin: &str,
    cutoff: T,
) -> Result<BTreeMap<String, T>> {
    RoutingGraph::new(network)?.shortest_path_times(origin, cutoff)
}

pub fn build_cost_matrix<T: Scalar>(
    network: &RoadNetwork<T>,
    zones: &[DemandZone<T>],
    providers: &[ProviderSite<T>],
    cutoff: T,
    direction: Direction,
    tolerance: T,
) -> Result<CostMatrix<T>> {
    RoutingGraph::new(network)?.cost_matrix(zones, providers, cutoff, direction, tolerance)
}
