use std::collections::BTreeMap;

use fca_core::engine::{self, RingScheme};
use fca_core::geometry::{self, Crs, DistanceMetric, GeoPoint, SpatialIndex};
use fca_core::ingest::{
    self, DemandSource, DemandZone, DocumentFormat, ProviderFields, ProviderSite, RoadEdge, RoadNetwork, ZoneFields,
    ZoneGeometry,
};
use fca_core::network::{CostMatrix, CostUnit, Direction, RoutingGraph};
use fca_core::{classify, demand};
use fca_oracle::{brute_force_access, floyd_warshall, jenks_exhaustive, random_graph, RandomInstance};
use proptest::prelude::*;

fn lonlat_strategy() -> impl Strategy<Value = (f64, f64)> {
    (-180.0..=180.0f64, -89.0..=89.0f64)
}

fn planar_cloud() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-5_000.0..5_000.0f64, -5_000.0..5_000.0f64), 0..300)
}

fn linear_scan(points: &[(String, GeoPoint<f64>)], c: &GeoPoint<f64>, r: f64, m: DistanceMetric) -> Vec<(String, f64)> {
    let mut hits: Vec<(String, f64)> = points
        .iter()
        .filter_map(|(id, p)| {
            let d = geometry::distance(c, p, m).unwrap();
            (d <= r).then(|| (id.clone(), d))
        })
        .collect();
    hits.sort_by(|a, b| a.0.cmp(&b.0));
    hits
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn planar_radius_query_matches_scan(cloud in planar_cloud(), qx in -6_000.0..6_000.0f64, qy in -6_000.0..6_000.0f64, r in 0.0..4_000.0f64) {
        let pts: Vec<_> = cloud.iter().enumerate()
            .map(|(i, &(x, y))| (format!("{i:04}"), GeoPoint::planar(x, y).unwrap()))
            .collect();
        let index = SpatialIndex::new(Crs::Planar, pts.clone()).unwrap();
        let c = GeoPoint::planar(qx, qy).unwrap();
        prop_assert_eq!(
            index.radius_query(&c, r, DistanceMetric::Euclidean).unwrap(),
            linear_scan(&pts, &c, r, DistanceMetric::Euclidean)
        );
    }

    #[test]
    fn lonlat_radius_query_matches_scan(
        cloud in prop::collection::vec(lonlat_strategy(), 1..200),
        q in lonlat_strategy(),
        r in 0.0..3_000_000.0f64,
    ) {
        let pts: Vec<_> = cloud.iter().enumerate()
            .map(|(i, &(x, y))| (format!("{i:04}"), GeoPoint::lonlat(x, y).unwrap()))
            .collect();
        let index = SpatialIndex::new(Crs::LonLat, pts.clone()).unwrap();
        let c = GeoPoint::lonlat(q.0, q.1).unwrap();
        prop_assert_eq!(
            index.radius_query(&c, r, DistanceMetric::Haversine).unwrap(),
            linear_scan(&pts, &c, r, DistanceMetric::Haversine)
        );
    }

    #[test]
    fn boundary_point_is_inside(cloud in planar_cloud(), pick in any::<prop::sample::Index>()) {
        prop_assume!(!cloud.is_empty());
        let pts: Vec<_> = cloud.iter().enumerate()
            .map(|(i, &(x, y))| (format!("{i:04}"), GeoPoint::planar(x, y).unwrap()))
            .collect();
        let index = SpatialIndex::new(Crs::Planar, pts.clone()).unwrap();
        let c = GeoPoint::planar(0.0, 0.0).unwrap();
        let (id, p) = &pts[pick.index(pts.len())];
        let r = geometry::distance(&c, p, DistanceMetric::Euclidean).unwrap();
        let hits = index.radius_query(&c, r, DistanceMetric::Euclidean).unwrap();
        prop_assert!(hits.iter().any(|h| &h.0 == id));
    }

    #[test]
    fn metrics_are_symmetric_and_obey_triangle_inequality(a in lonlat_strategy(), b in lonlat_strategy(), c in lonlat_strategy()) {
        let [a, b, c] = [a, b, c].map(|(x, y)| GeoPoint::lonlat(x, y).unwrap());
        let d = |p: &GeoPoint<f64>, q: &GeoPoint<f64>| geometry::distance(p, q, DistanceMetric::Haversine).unwrap();
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &a) == 0.0);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);

        let [pa, pb, pc] = [a, b, c].map(|p| GeoPoint::planar(p.x * 1e4, p.y * 1e4).unwrap());
        let e = |p: &GeoPoint<f64>, q: &GeoPoint<f64>| geometry::distance(p, q, DistanceMetric::Euclidean).unwrap();
        prop_assert_eq!(e(&pa, &pb), e(&pb, &pa));
        prop_assert!(e(&pa, &pc) <= e(&pa, &pb) + e(&pb, &pc) + 1e-9);
    }

    /// Star-shaped polygons (vertices sorted by angle) are simple but often
    /// concave; the representative point must still be inside.
    #[test]
    fn representative_point_is_interior(
        radii in prop::collection::vec(0.05..10.0f64, 3..24),
        jitter in prop::collection::vec(0.0..1.0f64, 24),
        cx in -100.0..100.0f64, cy in -60.0..60.0f64,
    ) {
        let n = radii.len();
        let mut ring: Vec<[f64; 2]> = radii.iter().enumerate().map(|(i, r)| {
            let theta = (i as f64 + 0.8 * jitter[i]) / n as f64 * std::f64::consts::TAU;
            [cx + r * theta.cos(), cy + r * theta.sin()]
        }).collect();
        ring.push(ring[0]);
        let rings = vec![ring];
        let zone = DemandZone::new("z", ZoneGeometry::Polygon(rings.clone()), Crs::Planar, Some(1.0));
        let p = geometry::representative_point(&zone).unwrap();
        prop_assert!(geometry::point_in_rings(p.x, p.y, &rings));
    }

    #[test]
    fn age_adjusted_demand_is_linear_and_monotone(counts in prop::collection::vec(0u32..100_000, 5), bump in 0usize..5) {
        let w = demand::derive_age_weights(&[11.0, 77.0, 561.0, 1171.0, 2080.0]).unwrap();
        let c: Vec<f64> = counts.iter().map(|&v| v as f64).collect();
        let base = demand::age_adjusted_demand(&c, &w).unwrap();
        let doubled: Vec<f64> = c.iter().map(|v| 2.0 * v).collect();
        prop_assert_eq!(demand::age_adjusted_demand(&doubled, &w).unwrap(), 2.0 * base);
        let mut more = c.clone();
        more[bump] += 1.0;
        prop_assert!(demand::age_adjusted_demand(&more, &w).unwrap() > base);
    }

    #[test]
    fn jenks_is_permutation_invariant(values in prop::collection::vec(-50.0..50.0f64, 1..40), k in 1usize..6, seed in any::<u64>()) {
        let mut distinct = values.clone();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        distinct.dedup();
        prop_assume!(k <= distinct.len());
        let a = classify::jenks_breaks(&values, k).unwrap();
        let mut shuffled = values.clone();
        use rand::{seq::SliceRandom, SeedableRng};
        shuffled.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
        let b = classify::jenks_breaks(&shuffled, k).unwrap();
        prop_assert_eq!(a.breaks, b.breaks);
    }

    #[test]
    fn zone_documents_round_trip(
        pops in prop::collection::vec(0.0..1e7f64, 1..20),
        origin in lonlat_strategy(),
    ) {
        let zones: Vec<DemandZone<f64>> = pops.iter().enumerate().map(|(i, &p)| {
            let (x, y) = (origin.0.clamp(-170.0, 170.0) + i as f64 * 0.01, origin.1);
            let ring = vec![[x, y], [x + 0.01, y], [x + 0.01, y + 0.01], [x, y + 0.01], [x, y]];
            let mut z = DemandZone::new(format!("Z{i}"), ZoneGeometry::Polygon(vec![ring]), Crs::LonLat, Some(p));
            z.properties.insert("GEOID".into(), format!("Z{i}").into());
            z.properties.insert("pop".into(), p.into());
            z
        }).collect();
        let doc = ingest::write_zones_geojson(&zones, "GEOID", Some("pop"));
        let fields = ZoneFields::new("GEOID", DemandSource::Field("pop".into()));
        let back: Vec<DemandZone<f64>> = ingest::load_zones(&doc, DocumentFormat::GeoJson, &fields, Crs::LonLat).unwrap();
        prop_assert_eq!(&back, &zones);
        let again = ingest::write_zones_geojson(&back, "GEOID", Some("pop"));
        prop_assert_eq!(again, doc);
    }

    #[test]
    fn provider_documents_round_trip(sites in prop::collection::vec((lonlat_strategy(), 0.0..500.0f64), 1..30)) {
        let providers: Vec<ProviderSite<f64>> = sites.iter().enumerate().map(|(i, &((x, y), cap))| ProviderSite {
            id: format!("P{i}"),
            location: GeoPoint::lonlat(x, y).unwrap(),
            capacity: cap,
        }).collect();
        let fields = ProviderFields::new("id", "capacity");
        let doc = ingest::write_providers_geojson(&providers, &fields);
        let back: Vec<ProviderSite<f64>> = ingest::load_providers(&doc, DocumentFormat::GeoJson, &fields, Crs::LonLat).unwrap();
        prop_assert_eq!(back, providers);
    }
}

fn network_from(n: usize, edges: &[(usize, usize, f64)], bidirectional: bool) -> RoadNetwork<f64> {
    let nodes = (0..n)
        .map(|i| (format!("n{i:02}"), GeoPoint::planar(i as f64 * 10.0, 0.0).unwrap()))
        .collect();
    let edges = edges
        .iter()
        .map(|&(a, b, c)| RoadEdge {
            from: format!("n{a:02}"),
            to: format!("n{b:02}"),
            cost_s: c,
            bidirectional,
        })
        .collect();
    RoadNetwork::new(nodes, edges).unwrap()
}

#[test]
fn cutoff_search_matches_floyd_warshall() {
    for seed in 0..50u64 {
        let (n, edges) = random_graph(seed, 60);
        let oracle = floyd_warshall(n, &edges);
        let graph = RoutingGraph::new(&network_from(n, &edges, false)).unwrap();
        let cutoff = 700.0;
        for origin in 0..n {
            let got = graph.shortest_path_times(&format!("n{origin:02}"), cutoff).unwrap();
            let want: BTreeMap<String, f64> = oracle[origin]
                .iter()
                .enumerate()
                .filter_map(|(j, d)| d.filter(|&d| d <= cutoff).map(|d| (format!("n{j:02}"), d)))
                .collect();
            assert_eq!(got, want, "seed {seed} origin {origin}");
        }
    }
}

#[test]
fn bidirectional_networks_give_transposed_matrices() {
    for seed in 0..20u64 {
        let (n, edges) = random_graph(seed + 100, 40);
        let net = network_from(n, &edges, true);
        let zones: Vec<DemandZone<f64>> = (0..n)
            .step_by(2)
            .map(|i| DemandZone::new(format!("z{i}"), ZoneGeometry::Point([i as f64 * 10.0, 1.0]), Crs::Planar, Some(1.0)))
            .collect();
        let providers: Vec<ProviderSite<f64>> = (1..n)
            .step_by(3)
            .map(|i| ProviderSite {
                id: format!("p{i}"),
                location: GeoPoint::planar(i as f64 * 10.0, -1.0).unwrap(),
                capacity: 1.0,
            })
            .collect();
        let graph = RoutingGraph::new(&net).unwrap();
        let d2p = graph.cost_matrix(&zones, &providers, 900.0, Direction::DemandToProvider, 5.0).unwrap();
        let p2d = graph.cost_matrix(&zones, &providers, 900.0, Direction::ProviderToDemand, 5.0).unwrap();
        let a: Vec<_> = d2p.entries().collect();
        let b: Vec<_> = p2d.entries().collect();
        assert_eq!(a, b, "seed {seed}");

        let mut reversed_zones = zones.clone();
        reversed_zones.reverse();
        let again = graph.cost_matrix(&reversed_zones, &providers, 900.0, Direction::DemandToProvider, 5.0).unwrap();
        assert_eq!(again.entries().collect::<Vec<_>>(), a);
    }
}

fn to_core(inst: &RandomInstance) -> (Vec<ProviderSite<f64>>, Vec<DemandZone<f64>>, CostMatrix<f64>) {
    let providers = inst
        .providers
        .iter()
        .map(|(id, cap)| ProviderSite {
            id: id.clone(),
            location: GeoPoint::planar(0.0, 0.0).unwrap(),
            capacity: *cap,
        })
        .collect();
    let zones = inst
        .zones
        .iter()
        .map(|(id, pop)| DemandZone::new(id.clone(), ZoneGeometry::Point([0.0, 0.0]), Crs::Planar, Some(*pop)))
        .collect();
    let mut m = CostMatrix::new(CostUnit::Seconds, Direction::DemandToProvider, None);
    for (z, p, c) in &inst.costs {
        m.insert(z.clone(), p.clone(), *c);
    }
    (providers, zones, m)
}

#[test]
fn capacity_and_demand_scaling() {
    for seed in 0..20u64 {
        let inst = RandomInstance::generate(seed);
        let (providers, zones, costs) = to_core(&inst);
        let scheme = RingScheme::new(inst.thresholds.clone(), inst.weights.clone()).unwrap();
        let base = engine::accessibility(&providers, &zones, &costs, &scheme, 1.0).unwrap();
        let c = 4.0;
        let scaled_cap: Vec<_> = providers.iter().cloned().map(|mut p| { p.capacity *= c; p }).collect();
        let scaled_pop: Vec<_> = zones.iter().cloned().map(|mut z| { z.demand = z.demand.map(|d| d * c); z }).collect();
        let up = engine::accessibility(&scaled_cap, &zones, &costs, &scheme, 1.0).unwrap();
        let down = engine::accessibility(&providers, &scaled_pop, &costs, &scheme, 1.0).unwrap();
        for (id, z) in &base.zones {
            // Powers of two scale exactly.
            assert_eq!(up.zones[id].final_index, c * z.final_index);
            assert_eq!(down.zones[id].final_index, z.final_index / c);
        }
    }
}

#[test]
fn input_order_does_not_change_bits() {
    for seed in 0..20u64 {
        let inst = RandomInstance::generate(seed);
        let (mut providers, mut zones, costs) = to_core(&inst);
        let scheme = RingScheme::new(inst.thresholds.clone(), inst.weights.clone()).unwrap();
        let a = engine::accessibility(&providers, &zones, &costs, &scheme, 1.0).unwrap();
        providers.reverse();
        zones.reverse();
        let b = engine::accessibility(&providers, &zones, &costs, &scheme, 1.0).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn engine_matches_brute_force_in_f32_too() {
    let inst = RandomInstance::generate(7);
    let bf = brute_force_access(&inst.providers, &inst.zones, &inst.cost_map(), &inst.thresholds, &inst.weights, 1.0);
    let providers: Vec<ProviderSite<f32>> = inst
        .providers
        .iter()
        .map(|(id, cap)| ProviderSite { id: id.clone(), location: GeoPoint::planar(0.0, 0.0).unwrap(), capacity: *cap as f32 })
        .collect();
    let zones: Vec<DemandZone<f32>> = inst
        .zones
        .iter()
        .map(|(id, pop)| DemandZone::new(id.clone(), ZoneGeometry::Point([0.0, 0.0]), Crs::Planar, Some(*pop as f32)))
        .collect();
    let mut costs = CostMatrix::<f32>::new(CostUnit::Seconds, Direction::DemandToProvider, None);
    for (z, p, c) in &inst.costs {
        costs.insert(z.clone(), p.clone(), *c as f32);
    }
    let scheme = RingScheme::new(
        inst.thresholds.iter().map(|&t| t as f32).collect(),
        inst.weights.iter().map(|&w| w as f32).collect(),
    )
    .unwrap();
    let got = engine::accessibility(&providers, &zones, &costs, &scheme, 1.0f32).unwrap();
    for (id, want) in &bf.access {
        let v = got.zones[id].final_index as f64;
        assert!((v - want).abs() <= 1e-4 * want.abs().max(1e-6), "{id}: {v} vs {want}");
    }
}

#[test]
fn jenks_matches_exhaustive_small() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.random_range(1..=12);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(0..8) as f64 * 1.5).collect();
        let mut distinct = values.clone();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        distinct.dedup();
        for k in 1..=distinct.len().min(4) {
            let got = classify::jenks_breaks(&values, k).unwrap();
            let (breaks, ssd) = jenks_exhaustive(&values, k);
            assert_eq!(got.breaks, breaks, "{values:?} k={k}");
            assert!((got.within_ssd - ssd).abs() <= 1e-9 * ssd.max(1.0));
        }
    }
}
