//! The bundled mini case: fixture paths, the four model configurations and
//! their brute-force reference scores.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use fca_oracle::{brute_force_access, floyd_warshall, haversine_m};

pub const PER_CAPITA: f64 = 100_000.0;
pub const MILE_M: f64 = 1_609.344;
pub const DECAY: [f64; 3] = [1.0, 0.68, 0.22];

pub fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini_case")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Config {
    TwoStepBuffer,
    EnhancedBuffer,
    TwoStepNetwork,
    EnhancedNetwork,
}

pub const CONFIGS: [Config; 4] = [
    Config::TwoStepBuffer,
    Config::EnhancedBuffer,
    Config::TwoStepNetwork,
    Config::EnhancedNetwork,
];

impl Config {
    pub fn name(self) -> &'static str {
        match self {
            Config::TwoStepBuffer => "2sfca_buffer",
            Config::EnhancedBuffer => "e2sfca_buffer",
            Config::TwoStepNetwork => "2sfca_network",
            Config::EnhancedNetwork => "e2sfca_network",
        }
    }

    pub fn network(self) -> bool {
        matches!(self, Config::TwoStepNetwork | Config::EnhancedNetwork)
    }

    pub fn enhanced(self) -> bool {
        matches!(self, Config::EnhancedBuffer | Config::EnhancedNetwork)
    }

    /// Flags for `fca access` after the common input flags.
    pub fn flags(self, matrix: &Path) -> Vec<String> {
        let mut f = vec!["--model".to_string(), if self.enhanced() { "e2sfca" } else { "2sfca" }.into()];
        match self {
            Config::TwoStepBuffer => f.extend(["--buffer".into(), "15mi".into()]),
            Config::EnhancedBuffer => {}
            Config::TwoStepNetwork => f.extend(["--cost-matrix".into(), matrix.display().to_string(), "--times".into(), "30".into()]),
            Config::EnhancedNetwork => f.extend(["--cost-matrix".into(), matrix.display().to_string()]),
        }
        f
    }

    pub fn thresholds(self) -> Vec<f64> {
        match self {
            Config::TwoStepBuffer => vec![15.0 * MILE_M],
            Config::EnhancedBuffer => vec![5.0 * MILE_M, 10.0 * MILE_M, 15.0 * MILE_M],
            Config::TwoStepNetwork => vec![1800.0],
            Config::EnhancedNetwork => vec![600.0, 1200.0, 1800.0],
        }
    }

    pub fn weights(self) -> Vec<f64> {
        if self.enhanced() {
            DECAY.to_vec()
        } else {
            vec![1.0]
        }
    }

    pub fn golden_path(self) -> PathBuf {
        dir().join(format!("golden_{}.csv", self.name()))
    }
}

#[derive(Clone, Debug)]
pub struct Site {
    pub id: String,
    pub lon: f64,
    pub lat: f64,
    pub node: String,
    pub value: f64,
    pub kind: String,
}

fn read_sites(path: &Path, value_field: &str) -> Vec<Site> {
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    doc["features"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            let g = &f["geometry"];
            let (lon, lat) = match g["type"].as_str().unwrap() {
                "Point" => (g["coordinates"][0].as_f64().unwrap(), g["coordinates"][1].as_f64().unwrap()),
                // Mean of the distinct vertices of the outer ring.
                "Polygon" => {
                    let ring = g["coordinates"][0].as_array().unwrap();
                    let pts = &ring[..ring.len() - 1];
                    let n = pts.len() as f64;
                    (
                        pts.iter().map(|p| p[0].as_f64().unwrap()).sum::<f64>() / n,
                        pts.iter().map(|p| p[1].as_f64().unwrap()).sum::<f64>() / n,
                    )
                }
                other => panic!("unexpected geometry {other}"),
            };
            let p = &f["properties"];
            Site {
                id: p["id"].as_str().unwrap().into(),
                lon,
                lat,
                node: p["node"].as_str().unwrap().into(),
                value: p[value_field].as_f64().unwrap(),
                kind: p.get("kind").and_then(|k| k.as_str()).unwrap_or("").into(),
            }
        })
        .collect()
}

pub struct MiniCase {
    pub providers: Vec<Site>,
    pub zones: Vec<Site>,
    /// (from, to, seconds), both directions usable.
    pub roads: Vec<(String, String, f64)>,
}

impl MiniCase {
    pub fn load() -> Self {
        let d = dir();
        let roads = std::fs::read_to_string(d.join("roads.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let c: Vec<&str> = l.split(',').collect();
                (c[0].to_string(), c[1].to_string(), c[6].parse().unwrap())
            })
            .collect();
        MiniCase {
            providers: read_sites(&d.join("providers.geojson"), "capacity"),
            zones: read_sites(&d.join("zones.geojson"), "population"),
            roads,
        }
    }

    /// Zone-to-provider costs within the largest threshold of `config`.
    pub fn costs(&self, config: Config) -> HashMap<(String, String), f64> {
        let limit = *config.thresholds().last().unwrap();
        let mut out = HashMap::new();
        if config.network() {
            let mut index: BTreeMap<&str, usize> = BTreeMap::new();
            for (a, b, _) in &self.roads {
                let n = index.len();
                index.entry(a).or_insert(n);
                let n = index.len();
                index.entry(b).or_insert(n);
            }
            let mut edges = Vec::new();
            for (a, b, c) in &self.roads {
                edges.push((index[a.as_str()], index[b.as_str()], *c));
                edges.push((index[b.as_str()], index[a.as_str()], *c));
            }
            let d = floyd_warshall(index.len(), &edges);
            for z in &self.zones {
                for p in &self.providers {
                    if let Some(c) = d[index[z.node.as_str()]][index[p.node.as_str()]] {
                        if c <= limit {
                            out.insert((z.id.clone(), p.id.clone()), c);
                        }
                    }
                }
            }
        } else {
            for z in &self.zones {
                for p in &self.providers {
                    let c = haversine_m(p.lon, p.lat, z.lon, z.lat);
                    if c <= limit {
                        out.insert((z.id.clone(), p.id.clone()), c);
                    }
                }
            }
        }
        out
    }

    /// zone id -> (final_index, ring values)
    pub fn reference(&self, config: Config) -> BTreeMap<String, (f64, Vec<f64>)> {
        let providers: Vec<(String, f64)> = self.providers.iter().map(|p| (p.id.clone(), p.value)).collect();
        let zones: Vec<(String, f64)> = self.zones.iter().map(|z| (z.id.clone(), z.value)).collect();
        let bf = brute_force_access(
            &providers,
            &zones,
            &self.costs(config),
            &config.thresholds(),
            &config.weights(),
            PER_CAPITA,
        );
        bf.access
            .iter()
            .map(|(id, &a)| {
                let rings = if config.enhanced() { bf.rings[id].clone() } else { Vec::new() };
                (id.clone(), (a, rings))
            })
            .collect()
    }
}

pub fn golden_csv(reference: &BTreeMap<String, (f64, Vec<f64>)>, rings: usize) -> String {
    let mut out = String::from("zone_id,final_index");
    for r in 1..=rings {
        out.push_str(&format!(",ring_{r}"));
    }
    out.push('\n');
    for (id, (a, ring_values)) in reference {
        out.push_str(&format!("{id},{a}"));
        for v in ring_values {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// zone id -> (final_index, ring values) from a scored or golden CSV.
pub fn read_scores(text: &str) -> BTreeMap<String, (f64, Vec<f64>)> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let rings: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("ring_"))
        .map(|(i, _)| i)
        .collect();
    lines
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (
                c[0].to_string(),
                (c[1].parse().unwrap(), rings.iter().map(|&i| c[i].parse().unwrap()).collect()),
            )
        })
        .collect()
}
