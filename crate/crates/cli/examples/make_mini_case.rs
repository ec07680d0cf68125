//! Regenerates `tests/fixtures/mini_case`: 10 providers and 50 zones around
//! Nashville, a road network with integer-second edges, and reference
//! scores for the four model configurations.
//!
//! Five urban zones sit within 5 miles and 10 minutes of every provider;
//! five rural zones lie beyond 15 miles, behind a one-hour road.
//!
//!     cargo run -p fca-cli --example make_mini_case

#[path = "../tests/common/mini_case.rs"]
mod mini_case;

use std::fs;

use fca_oracle::{floyd_warshall, haversine_m};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use mini_case::{Config, MiniCase, CONFIGS, MILE_M};

const LON0: f64 = -86.8;
const LAT0: f64 = 36.1;
const RURAL_LON: f64 = -85.5;
const RURAL_LAT: f64 = 36.3;
const SPEED_MPS: f64 = 13.4;
const DETOUR: f64 = 1.25;
const HALF_SIDE_M: f64 = 100.0;

struct Site {
    id: String,
    lon: f64,
    lat: f64,
    kind: &'static str,
    value: u32,
}

fn offset(lon: f64, lat: f64, dx: f64, dy: f64) -> (f64, f64) {
    let m_per_deg_lat = 110_574.0;
    let m_per_deg_lon = 111_320.0 * lat.to_radians().cos();
    (lon + dx / m_per_deg_lon, lat + dy / m_per_deg_lat)
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn place(rng: &mut StdRng, taken: &[(f64, f64)], lon: f64, lat: f64, r_min: f64, r_max: f64) -> (f64, f64) {
    loop {
        let r = rng.random_range(r_min..r_max);
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let (x, y) = offset(lon, lat, r * theta.cos(), r * theta.sin());
        let (x, y) = (round6(x), round6(y));
        if taken.iter().all(|t| haversine_m(t.0, t.1, x, y) > 400.0) {
            return (x, y);
        }
    }
}

/// Keeps buffer distances clear of the ring bounds so centroid rounding
/// cannot move a zone between rings.
fn clear_of_bounds(providers: &[Site], lon: f64, lat: f64) -> bool {
    providers.iter().all(|p| {
        let d = haversine_m(p.lon, p.lat, lon, lat);
        [5.0, 10.0, 15.0].iter().all(|m| (d - m * MILE_M).abs() > 5.0)
    })
}

fn travel_s(a: &Site, b: &Site) -> f64 {
    (haversine_m(a.lon, a.lat, b.lon, b.lat) * DETOUR / SPEED_MPS).round().max(1.0)
}

/// Joins each site to its two nearest predecessors (by distance from `hub`).
fn connect(sites: &[&Site], hub: (f64, f64), roads: &mut Vec<(String, String, f64)>) {
    let mut order: Vec<&Site> = sites.to_vec();
    order.sort_by(|a, b| {
        let da = haversine_m(hub.0, hub.1, a.lon, a.lat);
        let db = haversine_m(hub.0, hub.1, b.lon, b.lat);
        da.total_cmp(&db)
    });
    for (i, s) in order.iter().enumerate().skip(1) {
        let mut prev: Vec<&Site> = order[..i].to_vec();
        prev.sort_by(|a, b| travel_s(a, s).total_cmp(&travel_s(b, s)));
        for p in prev.into_iter().take(2) {
            roads.push((format!("n_{}", p.id), format!("n_{}", s.id), travel_s(p, s)));
        }
    }
}

fn square(lon: f64, lat: f64) -> Value {
    let (x0, y0) = offset(lon, lat, -HALF_SIDE_M, -HALF_SIDE_M);
    let (x1, y1) = offset(lon, lat, HALF_SIDE_M, HALF_SIDE_M);
    // Symmetric about the centre so the centroid is the site itself.
    let (dx, dy) = ((x1 - x0) / 2.0, (y1 - y0) / 2.0);
    let (x0, x1, y0, y1) = (lon - dx, lon + dx, lat - dy, lat + dy);
    json!([[[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]])
}

fn main() {
    let mut rng = StdRng::seed_from_u64(36_100);
    let mut taken: Vec<(f64, f64)> = Vec::new();
    let mut providers: Vec<Site> = Vec::new();
    for i in 1..=10 {
        let (lon, lat) = place(&mut rng, &taken, LON0, LAT0, 300.0, 2_500.0);
        taken.push((lon, lat));
        let value = rng.random_range(8..40);
        providers.push(Site { id: format!("P{i:02}"), lon, lat, kind: "provider", value });
    }

    let groups: [(&str, &'static str, (f64, f64), (f64, f64), (u32, u32)); 3] = [
        ("U", "urban", (LON0, LAT0), (0.0, 900.0), (2_000, 6_000)),
        ("S", "suburban", (LON0, LAT0), (3_000.0, 40_000.0), (500, 5_000)),
        ("R", "rural", (RURAL_LON, RURAL_LAT), (0.0, 4_000.0), (200, 1_500)),
    ];
    let mut zones: Vec<Site> = Vec::new();
    for (prefix, kind, hub, r, pop) in groups {
        let n = if kind == "suburban" { 40 } else { 5 };
        for i in 1..=n {
            let (lon, lat) = loop {
                let (lon, lat) = place(&mut rng, &taken, hub.0, hub.1, r.0, r.1);
                if clear_of_bounds(&providers, lon, lat) {
                    break (lon, lat);
                }
            };
            taken.push((lon, lat));
            let value = rng.random_range(pop.0..pop.1);
            zones.push(Site { id: format!("{prefix}{i:02}"), lon, lat, kind, value });
        }
    }

    let mut roads = Vec::new();
    let mainland: Vec<&Site> = providers.iter().chain(zones.iter().filter(|z| z.kind != "rural")).collect();
    let rural: Vec<&Site> = zones.iter().filter(|z| z.kind == "rural").collect();
    connect(&mainland, (LON0, LAT0), &mut roads);
    connect(&rural, (RURAL_LON, RURAL_LAT), &mut roads);
    let (gate_m, gate_r) = mainland
        .iter()
        .flat_map(|m| rural.iter().map(move |r| (*m, *r)))
        .min_by(|a, b| {
            haversine_m(a.0.lon, a.0.lat, a.1.lon, a.1.lat).total_cmp(&haversine_m(b.0.lon, b.0.lat, b.1.lon, b.1.lat))
        })
        .unwrap();
    roads.push((format!("n_{}", gate_m.id), format!("n_{}", gate_r.id), 3_600.0));

    // Every urban zone must be within 10 minutes and 5 miles of every provider.
    let all: Vec<&Site> = mainland.iter().chain(rural.iter()).copied().collect();
    let index = |id: &str| all.iter().position(|s| s.id == id).unwrap();
    let edges: Vec<(usize, usize, f64)> = roads
        .iter()
        .flat_map(|(a, b, c)| {
            let (a, b) = (index(&a[2..]), index(&b[2..]));
            [(a, b, *c), (b, a, *c)]
        })
        .collect();
    let d = floyd_warshall(all.len(), &edges);
    for u in zones.iter().filter(|z| z.kind == "urban") {
        for p in &providers {
            let t = d[index(&u.id)][index(&p.id)].expect("connected");
            assert!(t <= 600.0, "{} -> {} takes {t} s", u.id, p.id);
            assert!(haversine_m(u.lon, u.lat, p.lon, p.lat) < 5.0 * MILE_M);
        }
    }

    let dir = mini_case::dir();
    fs::create_dir_all(&dir).unwrap();
    let providers_doc = json!({
        "type": "FeatureCollection",
        "features": providers.iter().map(|p| json!({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [p.lon, p.lat]},
            "properties": {"id": p.id, "capacity": p.value, "node": format!("n_{}", p.id)},
        })).collect::<Vec<_>>(),
    });
    let zones_doc = json!({
        "type": "FeatureCollection",
        "features": zones.iter().map(|z| json!({
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": square(z.lon, z.lat)},
            "properties": {"id": z.id, "population": z.value, "kind": z.kind, "node": format!("n_{}", z.id)},
        })).collect::<Vec<_>>(),
    });
    fs::write(dir.join("providers.geojson"), serde_json::to_string_pretty(&providers_doc).unwrap()).unwrap();
    fs::write(dir.join("zones.geojson"), serde_json::to_string_pretty(&zones_doc).unwrap()).unwrap();

    let coords = |id: &str| {
        let s = all[index(&id[2..])];
        (s.lon, s.lat)
    };
    let mut csv = String::from("from_id,to_id,from_x,from_y,to_x,to_y,cost_s,oneway\n");
    for (a, b, c) in &roads {
        let (ax, ay) = coords(a);
        let (bx, by) = coords(b);
        csv.push_str(&format!("{a},{b},{ax},{ay},{bx},{by},{c},false\n"));
    }
    fs::write(dir.join("roads.csv"), csv).unwrap();

    let case = MiniCase::load();
    for config in CONFIGS {
        let rings = if config.enhanced() { 3 } else { 0 };
        fs::write(config.golden_path(), mini_case::golden_csv(&case.reference(config), rings)).unwrap();
        if config == Config::EnhancedNetwork {
            let n = case.costs(config).len();
            println!("{n} zone/provider pairs within 30 minutes");
        }
    }
    println!("wrote {}", dir.display());
}
