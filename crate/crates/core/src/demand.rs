//! Age-adjusted demand from age-band incidence rates.
//!
//! Each band's weight is its incidence rate relative to the first (baseline)
//! band, rounded to the nearest integer. A zone's adjusted demand is the
//! weighted sum of its band head counts.

use crate::ingest::DemandZone;
use crate::{Error, Result, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct AgeBand<T> {
    pub label: String,
    pub rate_per_million: T,
    pub weight: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgeWeights<T> {
    pub bands: Vec<AgeBand<T>>,
}

impl<T: Scalar> AgeWeights<T> {
    /// Derives weights from labelled rates; the first entry is the baseline.
    pub fn from_rates<S: Into<String>>(table: impl IntoIterator<Item = (S, T)>) -> Result<Self> {
        let table: Vec<(String, T)> = table.into_iter().map(|(l, r)| (l.into(), r)).collect();
        let Some(&(_, baseline)) = table.first() else {
            return Err(Error::Contract("no age bands given".into()));
        };
        let mut bands = Vec::with_capacity(table.len());
        for (label, rate) in table {
            if !(rate > T::zero()) || !rate.is_finite() {
                return Err(Error::Contract(format!(
                    "incidence rate for band '{label}' must be positive, got {rate}"
                )));
            }
            // Float::round is half-away-from-zero.
            let weight = (rate / baseline).round();
            if weight < T::one() {
                return Err(Error::Contract(format!(
                    "band '{label}' rate {rate} rounds to weight {weight} against baseline {baseline}"
                )));
            }
            bands.push(AgeBand {
                label,
                rate_per_million: rate,
                weight,
            });
        }
        Ok(AgeWeights { bands })
    }

    pub fn weights(&self) -> Vec<T> {
        self.bands.iter().map(|b| b.weight).collect()
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }
}

/// Weights for unlabelled rates (bands are named `band_1`, `band_2`, ...).
pub fn derive_age_weights<T: Scalar>(rates: &[T]) -> Result<AgeWeights<T>> {
    AgeWeights::from_rates(
        rates
            .iter()
            .enumerate()
            .map(|(i, &r)| (format!("band_{}", i + 1), r)),
    )
}

/// Sum of `count_i * weight_i` over bands.
pub fn age_adjusted_demand<T: Scalar>(counts: &[T], weights: &AgeWeights<T>) -> Result<T> {
    if counts.len() != weights.len() {
        return Err(Error::Contract(format!(
            "{} age counts for {} weighted bands",
            counts.len(),
            weights.len()
        )));
    }
    if let Some(c) = counts.iter().find(|c| !(**c >= T::zero())) {
        return Err(Error::Contract(format!("negative age count {c}")));
    }
    Ok(counts
        .iter()
        .zip(&weights.bands)
        .fold(T::zero(), |acc, (&c, b)| acc + c * b.weight))
}

/// Sets every zone's demand from its age counts.
pub fn apply_age_weights<T: Scalar>(zones: &mut [DemandZone<T>], weights: &AgeWeights<T>) -> Result<()> {
    for zone in zones.iter_mut() {
        let counts = zone.age_counts.as_ref().ok_or_else(|| {
            Error::Contract(format!("zone '{}' has no age counts", zone.id))
        })?;
        let values: Vec<T> = counts.iter().map(|(_, c)| *c).collect();
        zone.demand = Some(age_adjusted_demand(&values, weights).map_err(|e| match e {
            Error::Contract(m) => Error::Schema(format!("zone '{}': {m}", zone.id)),
            other => other,
        })?);
    }
    Ok(())
}

/// Reads a `band,rate_per_million` CSV into labelled rates.
pub fn read_rates_csv<T: Scalar>(text: &str) -> Result<Vec<(String, T)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(format!("invalid weights header: {e}")))?;
    if headers.iter().collect::<Vec<_>>() != ["band", "rate_per_million"] {
        return Err(Error::Schema(
            "weights file header must be 'band,rate_per_million'".into(),
        ));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| Error::Parse(format!("weights row {i}: {e}")))?;
            let rate: f64 = rec[1]
                .parse()
                .map_err(|_| Error::Validation(format!("weights row {i}: bad rate '{}'", &rec[1])))?;
            Ok((rec[0].to_string(), T::lit(rate)))
        })
        .collect()
}
