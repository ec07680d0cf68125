//! The two-step floating catchment computations.
//!
//! Step 1 gives every provider a supply-to-demand ratio over the demand in
//! its catchment; step 2 sums, for every zone, the ratios of the providers
//! it can reach. The enhanced variant splits the catchment into rings and
//! weights each ring by a decay factor in both steps.
//!
//! Both steps read the same [`CostMatrix`] and the same [`RingScheme`].
//! All sums run in ascending id order, so results are bit-identical for any
//! input ordering and any thread count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::ingest::{DemandZone, ProviderSite};
use crate::network::CostMatrix;
use crate::{Error, Result, Scalar, METERS_PER_MILE};

/// Ring bounds used by the enhanced model when none are given, in miles.
pub const DEFAULT_RING_MILES: [f64; 3] = [5.0, 10.0, 15.0];
/// Decay weights paired with the default rings.
pub const DEFAULT_DECAY_WEIGHTS: [f64; 3] = [1.0, 0.68, 0.22];
pub const MAX_RINGS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    /// Classic 2SFCA: a single catchment, no decay.
    TwoStep,
    /// E2SFCA: up to three decay-weighted rings.
    Enhanced,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::TwoStep => "2sfca",
            Model::Enhanced => "e2sfca",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "2sfca" => Ok(Model::TwoStep),
            "e2sfca" => Ok(Model::Enhanced),
            other => Err(Error::Contract(format!("unknown model '{other}'"))),
        }
    }
}

/// Catchment thresholds with their decay weights.
#[derive(Clone, Debug, PartialEq)]
pub struct RingScheme<T> {
    thresholds: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> RingScheme<T> {
    /// Thresholds must be positive and strictly ascending (one to three of
    /// them); weights must match in number and lie in (0, 1].
    pub fn new(thresholds: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if thresholds.is_empty() || thresholds.len() > MAX_RINGS {
            return Err(Error::Contract(format!(
                "ring schemes take 1 to {MAX_RINGS} thresholds, got {}",
                thresholds.len()
            )));
        }
        if weights.len() != thresholds.len() {
            return Err(Error::Contract(format!(
                "{} thresholds but {} weights",
                thresholds.len(),
                weights.len()
            )));
        }
        if !(thresholds[0] > T::zero()) || thresholds.iter().any(|t| !t.is_finite()) {
            return Err(Error::Contract("thresholds must be positive and finite".into()));
        }
        if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Contract("thresholds must be strictly ascending".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > T::zero() && **w <= T::one())) {
            return Err(Error::Contract(format!("ring weight {w} outside (0, 1]")));
        }
        Ok(RingScheme { thresholds, weights })
    }

    /// One ring of weight 1: the classic catchment.
    pub fn single(threshold: T) -> Result<Self> {
        Self::new(vec![threshold], vec![T::one()])
    }

    /// Rings weighted by [`gaussian_ring_weights`].
    pub fn gaussian(thresholds: Vec<T>, bandwidth: T) -> Result<Self> {
        let weights = gaussian_ring_weights(&thresholds, bandwidth)?;
        Self::new(thresholds, weights)
    }

    /// 5/10/15-mile rings (in meters) weighted 1/0.68/0.22.
    pub fn default_buffer() -> Self {
        Self::new(
            DEFAULT_RING_MILES
                .iter()
                .map(|m| T::lit(m * METERS_PER_MILE))
                .collect(),
            DEFAULT_DECAY_WEIGHTS.iter().map(|&w| T::lit(w)).collect(),
        )
        .expect("valid default scheme")
    }

    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn max_threshold(&self) -> T {
        *self.thresholds.last().expect("non-empty scheme")
    }

    /// Zero-based ring slot of a cost.
    fn slot(&self, cost: T) -> Option<usize> {
        self.thresholds.iter().position(|&t| cost <= t)
    }
}

/// One-based ring of `cost`: ring 1 is [0, t1], ring r is (t(r-1), t(r)],
/// and costs beyond the last threshold fall in no ring.
pub fn assign_ring<T: Scalar>(cost: T, scheme: &RingScheme<T>) -> Option<usize> {
    scheme.slot(cost).map(|s| s + 1)
}

/// Gaussian decay evaluated at ring midpoints and normalized to the first
/// ring: `exp(-(m_r^2 - m_1^2) / (2 b^2))`.
pub fn gaussian_ring_weights<T: Scalar>(thresholds: &[T], bandwidth: T) -> Result<Vec<T>> {
    if !(bandwidth > T::zero()) || !bandwidth.is_finite() {
        return Err(Error::Contract(format!(
            "Gaussian bandwidth must be positive, got {bandwidth}"
        )));
    }
    let half = T::lit(0.5);
    let mut lower = T::zero();
    let mids: Vec<T> = thresholds
        .iter()
        .map(|&t| {
            let m = (lower + t) * half;
            lower = t;
            m
        })
        .collect();
    let Some(&m1) = mids.first() else {
        return Ok(Vec::new());
    };
    let denom = T::lit(2.0) * bandwidth * bandwidth;
    let weights: Vec<T> = mids
        .iter()
        .map(|&m| (-(m * m - m1 * m1) / denom).exp())
        .collect();
    if weights.windows(2).any(|w| !(w[1] < w[0])) || weights.iter().any(|w| !(*w > T::zero())) {
        return Err(Error::Contract(format!(
            "bandwidth {bandwidth} does not separate the rings: weights {weights:?}"
        )));
    }
    Ok(weights)
}

/// Step-1 output for one provider.
#[derive(Clone, Debug, PartialEq)]
pub struct ProviderRatio<T> {
    pub provider_id: String,
    pub ratio: T,
    /// Demand in the catchment, ring-weighted for the enhanced model.
    pub weighted_demand: T,
    pub served: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZoneAccess<T> {
    pub final_index: T,
    /// Unscaled per-ring sums (enhanced model only; empty otherwise).
    pub ring_values: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccessResult<T> {
    pub model: Model,
    pub per_capita: T,
    /// Number of ring fields each zone carries (0 for the classic model).
    pub rings: usize,
    pub zones: BTreeMap<String, ZoneAccess<T>>,
    pub ratios: Vec<ProviderRatio<T>>,
}

impl<T: Scalar> AccessResult<T> {
    pub fn final_index(&self, zone: &str) -> Option<T> {
        self.zones.get(zone).map(|z| z.final_index)
    }
}

/// Providers, zones and cost entries resolved to sorted indices.
struct Problem<'a, T> {
    providers: Vec<&'a ProviderSite<T>>,
    zones: Vec<&'a DemandZone<T>>,
    demand: Vec<T>,
    /// Per provider: (zone index, ring slot), zone-ascending.
    by_provider: Vec<Vec<(usize, usize)>>,
    /// Per zone: (provider index, ring slot), provider-ascending.
    by_zone: Vec<Vec<(usize, usize)>>,
}

fn sorted_refs<'a, I, V>(items: I, id: impl Fn(&V) -> &str, what: &str) -> Result<Vec<&'a V>>
where
    I: IntoIterator<Item = &'a V>,
    V: 'a,
{
    let mut refs: Vec<&V> = items.into_iter().collect();
    refs.sort_by(|a, b| id(a).cmp(id(b)));
    if let Some(w) = refs.windows(2).find(|w| id(w[0]) == id(w[1])) {
        return Err(Error::Contract(format!("duplicate {what} id '{}'", id(w[0]))));
    }
    Ok(refs)
}

impl<'a, T: Scalar> Problem<'a, T> {
    fn new(
        providers: &'a [ProviderSite<T>],
        zones: &'a [DemandZone<T>],
        costs: &CostMatrix<T>,
        scheme: &RingScheme<T>,
    ) -> Result<Self> {
        let providers = sorted_refs(providers, |p: &ProviderSite<T>| p.id.as_str(), "provider")?;
        let zones = sorted_refs(zones, |z: &DemandZone<T>| z.id.as_str(), "zone")?;
        let demand = zones
            .iter()
            .map(|z| {
                z.demand.ok_or_else(|| {
                    Error::Contract(format!("zone '{}' has no demand value", z.id))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let find = |ids: &[&str], id: &str, what: &str| {
            ids.binary_search(&id)
                .map_err(|_| Error::Contract(format!("cost matrix references unknown {what} '{id}'")))
        };
        let provider_ids: Vec<&str> = providers.iter().map(|p| p.id.as_str()).collect();
        let zone_ids: Vec<&str> = zones.iter().map(|z| z.id.as_str()).collect();
        let mut by_provider = vec![Vec::new(); providers.len()];
        let mut by_zone = vec![Vec::new(); zones.len()];
        // Entries arrive zone-major with providers ascending, which keeps
        // both adjacency lists sorted.
        for (z, p, cost) in costs.entries() {
            let zi = find(&zone_ids, z, "zone")?;
            let pi = find(&provider_ids, p, "provider")?;
            if let Some(slot) = scheme.slot(cost) {
                by_provider[pi].push((zi, slot));
                by_zone[zi].push((pi, slot));
            }
        }
        Ok(Problem {
            providers,
            zones,
            demand,
            by_provider,
            by_zone,
        })
    }

    fn ratios(&self, weighted: Option<&[T]>) -> Vec<ProviderRatio<T>> {
        (0..self.providers.len())
            .into_par_iter()
            .map(|pi| {
                let weighted_demand = self.by_provider[pi].iter().fold(T::zero(), |acc, &(zi, slot)| {
                    acc + match weighted {
                        Some(w) => self.demand[zi] * w[slot],
                        None => self.demand[zi],
                    }
                });
                let provider = self.providers[pi];
                let served = weighted_demand > T::zero();
                if !served {
                    log::warn!(
                        "provider '{}' has no demand in its catchment; ratio set to 0",
                        provider.id
                    );
                }
                ProviderRatio {
                    provider_id: provider.id.clone(),
                    ratio: if served {
                        provider.capacity / weighted_demand
                    } else {
                        T::zero()
                    },
                    weighted_demand,
                    served,
                }
            })
            .collect()
    }
}

fn check_per_capita<T: Scalar>(per_capita: T) -> Result<()> {
    if per_capita > T::zero() && per_capita.is_finite() {
        Ok(())
    } else {
        Err(Error::Contract(format!("per-capita multiplier must be positive, got {per_capita}")))
    }
}

/// Step 1 of the (enhanced) model: `R_j = S_j / sum_k P_k W_ring(d_kj)`.
pub fn step1_ratios<T: Scalar>(
    providers: &[ProviderSite<T>],
    zones: &[DemandZone<T>],
    costs: &CostMatrix<T>,
    scheme: &RingScheme<T>,
) -> Result<Vec<ProviderRatio<T>>> {
    Ok(Problem::new(providers, zones, costs, scheme)?.ratios(Some(scheme.weights())))
}

/// Enhanced two-step accessibility:
/// `A_i = per_capita * sum_j R_j W_ring(d_ij)`, with the per-ring partial
/// sums kept in [`ZoneAccess::ring_values`].
pub fn accessibility<T: Scalar>(
    providers: &[ProviderSite<T>],
    zones: &[DemandZone<T>],
    costs: &CostMatrix<T>,
    scheme: &RingScheme<T>,
    per_capita: T,
) -> Result<AccessResult<T>> {
    check_per_capita(per_capita)?;
    let problem = Problem::new(providers, zones, costs, scheme)?;
    let weights = scheme.weights();
    let ratios = problem.ratios(Some(weights));
    let rows: Vec<ZoneAccess<T>> = (0..problem.zones.len())
        .into_par_iter()
        .map(|zi| {
            let mut ring_values = vec![T::zero(); scheme.len()];
            for &(pi, slot) in &problem.by_zone[zi] {
                ring_values[slot] += ratios[pi].ratio * weights[slot];
            }
            let total = ring_values.iter().fold(T::zero(), |acc, &v| acc + v);
            ZoneAccess {
                final_index: per_capita * total,
                ring_values,
            }
        })
        .collect();
    Ok(AccessResult {
        model: Model::Enhanced,
        per_capita,
        rings: scheme.len(),
        zones: problem.zones.iter().map(|z| z.id.clone()).zip(rows).collect(),
        ratios,
    })
}

/// Classic two-step accessibility with one catchment of `threshold`:
/// `R_j = S_j / sum_{d_kj <= d0} P_k` and `A_i = per_capita * sum_{d_ij <= d0} R_j`.
pub fn two_step<T: Scalar>(
    providers: &[ProviderSite<T>],
    zones: &[DemandZone<T>],
    costs: &CostMatrix<T>,
    threshold: T,
    per_capita: T,
) -> Result<AccessResult<T>> {
    check_per_capita(per_capita)?;
    let scheme = RingScheme::single(threshold)?;
    let problem = Problem::new(providers, zones, costs, &scheme)?;
    let ratios = problem.ratios(None);
    let rows: Vec<ZoneAccess<T>> = (0..problem.zones.len())
        .into_par_iter()
        .map(|zi| {
            let total = problem.by_zone[zi]
                .iter()
                .fold(T::zero(), |acc, &(pi, _)| acc + ratios[pi].ratio);
            ZoneAccess {
                final_index: per_capita * total,
                ring_values: Vec::new(),
            }
        })
        .collect();
    Ok(AccessResult {
        model: Model::TwoStep,
        per_capita,
        rings: 0,
        zones: problem.zones.iter().map(|z| z.id.clone()).zip(rows).collect(),
        ratios,
    })
}

/// Dispatches on `model`; the classic model requires a one-ring scheme.
pub fn score<T: Scalar>(
    model: Model,
    providers: &[ProviderSite<T>],
    zones: &[DemandZone<T>],
    costs: &CostMatrix<T>,
    scheme: &RingScheme<T>,
    per_capita: T,
) -> Result<AccessResult<T>> {
    match model {
        Model::TwoStep if scheme.len() == 1 => {
            two_step(providers, zones, costs, scheme.max_threshold(), per_capita)
        }
        Model::TwoStep => Err(Error::Contract(format!(
            "2sfca takes one threshold, got {}",
            scheme.len()
        ))),
        Model::Enhanced => accessibility(providers, zones, costs, scheme, per_capita),
    }
}
