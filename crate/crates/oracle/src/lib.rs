//! Slow, direct reference computations for checking `fca-core`.
//!
//! Nothing here depends on `fca-core`: every routine is a literal
//! transcription of the quantity it checks, written for clarity rather than
//! speed.

use std::collections::{BTreeMap, HashMap};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

/// Great-circle distance in meters on a sphere of radius 6,371 km.
pub fn haversine_m(lon1: f64, lat1: f64, lon2: f64, lat2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = (lat2 - lat1).to_radians();
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * 6_371_000.0 * h.sqrt().min(1.0).asin()
}

/// All-pairs shortest paths; `None` marks unreachable pairs.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<Option<f64>>> {
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0.0);
    }
    for &(a, b, c) in edges {
        if d[a][b].is_none_or(|old| c < old) {
            d[a][b] = Some(c);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i][k] else { continue };
            for j in 0..n {
                if let Some(kj) = d[k][j] {
                    if d[i][j].is_none_or(|old| ik + kj < old) {
                        d[i][j] = Some(ik + kj);
                    }
                }
            }
        }
    }
    d
}

/// Ring membership written straight from the interval definitions:
/// ring 1 is [0, t1], ring r is (t(r-1), t(r)].
pub fn ring_of(cost: f64, thresholds: &[f64]) -> Option<usize> {
    for r in 0..thresholds.len() {
        let upper = thresholds[r];
        let inside = if r == 0 {
            cost >= 0.0 && cost <= upper
        } else {
            cost > thresholds[r - 1] && cost <= upper
        };
        if inside {
            return Some(r);
        }
    }
    None
}

/// Direct E2SFCA (and, with one ring of weight 1, 2SFCA) evaluation.
///
/// Step 1: `R_j = S_j / sum_r sum_{k: d_kj in D_r} P_k W_r`, 0 when the
/// denominator is 0. Step 2: `A_i = per_capita * sum_r sum_{j: d_ij in D_r} R_j W_r`.
/// Zones and providers are visited in ascending id order.
#[derive(Clone, Debug)]
pub struct BruteForce {
    pub ratios: BTreeMap<String, f64>,
    pub denominators: BTreeMap<String, f64>,
    pub access: BTreeMap<String, f64>,
    pub rings: BTreeMap<String, Vec<f64>>,
}

pub fn brute_force_access(
    providers: &[(String, f64)],
    zones: &[(String, f64)],
    costs: &HashMap<(String, String), f64>,
    thresholds: &[f64],
    weights: &[f64],
    per_capita: f64,
) -> BruteForce {
    let mut providers = providers.to_vec();
    let mut zones = zones.to_vec();
    providers.sort_by(|a, b| a.0.cmp(&b.0));
    zones.sort_by(|a, b| a.0.cmp(&b.0));

    let mut ratios = BTreeMap::new();
    let mut denominators = BTreeMap::new();
    for (pj, supply) in &providers {
        let mut denom = 0.0;
        for (zk, pop) in &zones {
            if let Some(&d) = costs.get(&(zk.clone(), pj.clone())) {
                if let Some(r) = ring_of(d, thresholds) {
                    denom += pop * weights[r];
                }
            }
        }
        ratios.insert(pj.clone(), if denom > 0.0 { supply / denom } else { 0.0 });
        denominators.insert(pj.clone(), denom);
    }

    let mut access = BTreeMap::new();
    let mut rings = BTreeMap::new();
    for (zi, _) in &zones {
        let mut per_ring = vec![0.0; thresholds.len()];
        for (pj, _) in &providers {
            if let Some(&d) = costs.get(&(zi.clone(), pj.clone())) {
                if let Some(r) = ring_of(d, thresholds) {
                    per_ring[r] += ratios[pj] * weights[r];
                }
            }
        }
        let mut total = 0.0;
        for v in &per_ring {
            total += v;
        }
        access.insert(zi.clone(), per_capita * total);
        rings.insert(zi.clone(), per_ring);
    }
    BruteForce {
        ratios,
        denominators,
        access,
        rings,
    }
}

/// A random accessibility instance.
#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub providers: Vec<(String, f64)>,
    pub zones: Vec<(String, f64)>,
    /// (zone, provider, cost)
    pub costs: Vec<(String, String, f64)>,
    pub thresholds: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RandomInstance {
    /// Up to 30 providers and 200 zones, sparse costs (some exactly on ring
    /// bounds), 1-3 rings with first weight 1 and decreasing weights after.
    pub fn generate(seed: u64) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let n_providers = rng.random_range(1..=30);
        let n_zones = rng.random_range(1..=200);
        let n_rings = rng.random_range(1..=3);
        let mut thresholds = Vec::new();
        let mut t = 0.0;
        for _ in 0..n_rings {
            t += rng.random_range(1.0..20.0f64).round();
            thresholds.push(t);
        }
        let mut weights = vec![1.0];
        for _ in 1..n_rings {
            let prev: f64 = *weights.last().unwrap();
            weights.push(prev * rng.random_range(0.05..1.0));
        }
        let mut providers: Vec<(String, f64)> = (0..n_providers)
            .map(|i| {
                let cap = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(1..60) as f64 };
                (format!("p{i:03}"), cap)
            })
            .collect();
        let mut zones: Vec<(String, f64)> = (0..n_zones)
            .map(|i| {
                let pop = if rng.random_bool(0.05) {
                    0.0
                } else {
                    rng.random_range(1.0..12_000.0f64).round()
                };
                (format!("z{i:04}"), pop)
            })
            .collect();
        let density = rng.random_range(0.02..0.5);
        let max_t = *thresholds.last().unwrap();
        let mut costs = Vec::new();
        for (z, _) in &zones {
            for (p, _) in &providers {
                if rng.random_bool(density) {
                    let c = if rng.random_bool(0.1) {
                        thresholds[rng.random_range(0..thresholds.len())]
                    } else if rng.random_bool(0.02) {
                        0.0
                    } else {
                        rng.random_range(0.0..max_t * 1.4)
                    };
                    costs.push((z.clone(), p.clone(), c));
                }
            }
        }
        providers.shuffle(&mut rng);
        zones.shuffle(&mut rng);
        costs.shuffle(&mut rng);
        RandomInstance {
            providers,
            zones,
            costs,
            thresholds,
            weights,
        }
    }

    pub fn cost_map(&self) -> HashMap<(String, String), f64> {
        self.costs
            .iter()
            .map(|(z, p, c)| ((z.clone(), p.clone()), *c))
            .collect()
    }
}

/// Total within-class sum of squared deviations, computed class by class
/// with the two-pass formula.
pub fn within_ssd(classes: &[Vec<f64>]) -> f64 {
    classes
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / c.len() as f64;
            c.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
        })
        .sum()
}

/// Exhaustive natural-breaks search: tries every way to cut the distinct
/// sorted values into `k` contiguous groups and keeps the lowest total
/// within-class SSD; near-equal totals (relative 1e-9) go to the
/// lexicographically smallest break sequence.
pub fn jenks_exhaustive(values: &[f64], k: usize) -> (Vec<f64>, f64) {
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    let m = distinct.len();
    assert!(k >= 1 && k <= m);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut cuts = Vec::new();
    enumerate_cuts(m, k - 1, 1, &mut cuts, &mut |cuts| {
        let mut bounds: Vec<usize> = cuts.to_vec();
        bounds.push(m);
        let mut classes = Vec::new();
        let mut lo = 0;
        for &hi in &bounds {
            let members: Vec<f64> = values
                .iter()
                .copied()
                .filter(|v| *v >= distinct[lo] && *v <= distinct[hi - 1])
                .collect();
            classes.push(members);
            lo = hi;
        }
        let ssd = within_ssd(&classes);
        let breaks: Vec<f64> = bounds.iter().map(|&b| distinct[b - 1]).collect();
        let scale = best.as_ref().map_or(1.0, |b| b.1.abs().max(1e-300));
        match &best {
            Some((_, b)) if ssd >= *b - 1e-9 * scale => {}
            _ => best = Some((breaks, ssd)),
        }
    });
    best.unwrap()
}

fn enumerate_cuts(m: usize, remaining: usize, start: usize, cuts: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if remaining == 0 {
        visit(cuts);
        return;
    }
    for c in start..=(m - remaining) {
        cuts.push(c);
        enumerate_cuts(m, remaining - 1, c + 1, cuts, visit);
        cuts.pop();
    }
}

/// Random directed graph with positive integer-valued costs.
pub fn random_graph(seed: u64, max_nodes: usize) -> (usize, Vec<(usize, usize, f64)>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_nodes);
    let density = rng.random_range(0.02..0.25);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(density) {
                edges.push((a, b, rng.random_range(1..500) as f64));
            }
        }
    }
    (n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_degree_of_longitude_on_the_equator() {
        let d = haversine_m(0.0, 0.0, 1.0, 0.0);
        assert!((d - 6_371_000.0 * std::f64::consts::PI / 180.0).abs() < 1e-6);
    }

    #[test]
    fn floyd_warshall_line() {
        let d = floyd_warshall(3, &[(0, 1, 120.0), (1, 2, 180.0)]);
        assert_eq!(d[0], vec![Some(0.0), Some(120.0), Some(300.0)]);
        assert_eq!(d[2][0], None);
    }

    #[test]
    fn exhaustive_two_clusters() {
        let (breaks, ssd) = jenks_exhaustive(&[1.0, 2.0, 3.0, 10.0, 11.0, 12.0], 2);
        assert_eq!(breaks, vec![3.0, 12.0]);
        assert_eq!(ssd, 4.0);
    }

    #[test]
    fn brute_force_hand_example() {
        let providers = vec![("p".to_string(), 10.0)];
        let zones = vec![("a".to_string(), 1000.0), ("b".to_string(), 1000.0)];
        let costs = [(("a".to_string(), "p".to_string()), 3.0), (("b".to_string(), "p".to_string()), 12.0)]
            .into_iter()
            .collect();
        let bf = brute_force_access(&providers, &zones, &costs, &[5.0, 10.0, 15.0], &[1.0, 0.68, 0.22], 1.0);
        assert!((bf.access["a"] - 0.00819672).abs() < 1e-8);
        assert!((bf.access["b"] - 0.00180328).abs() < 1e-8);
    }
}
