//! Natural-breaks classification and summary statistics of scores.

use std::collections::BTreeMap;

use crate::engine::AccessResult;
use crate::{Error, Result, Scalar};

pub const DEFAULT_CLASSES: usize = 5;

/// Optimal class upper bounds for a set of values.
#[derive(Clone, Debug, PartialEq)]
pub struct NaturalBreaks<T> {
    /// Ascending class upper bounds; the last one is the maximum value.
    pub breaks: Vec<T>,
    /// Total within-class sum of squared deviations of the partition.
    pub within_ssd: T,
    /// Goodness of variance fit, `1 - within / total`.
    pub gvf: T,
}

impl<T: Scalar> NaturalBreaks<T> {
    /// One-based class of `value`.
    pub fn class_of(&self, value: T) -> usize {
        self.breaks
            .iter()
            .position(|&b| value <= b)
            .unwrap_or(self.breaks.len() - 1)
            + 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification<T> {
    pub k: usize,
    pub breaks: Vec<T>,
    pub assignment: BTreeMap<String, usize>,
    pub gvf: T,
}

/// Running sums over the distinct sorted values, shifted by the mean.
struct Moments<T> {
    count: Vec<T>,
    sum: Vec<T>,
    sum_sq: Vec<T>,
}

impl<T: Scalar> Moments<T> {
    fn new(distinct: &[(T, usize)], shift: T) -> Self {
        let n = distinct.len();
        let mut m = Moments {
            count: vec![T::zero(); n + 1],
            sum: vec![T::zero(); n + 1],
            sum_sq: vec![T::zero(); n + 1],
        };
        for (i, &(v, c)) in distinct.iter().enumerate() {
            let w = T::lit(c as f64);
            let x = v - shift;
            m.count[i + 1] = m.count[i] + w;
            m.sum[i + 1] = m.sum[i] + w * x;
            m.sum_sq[i + 1] = m.sum_sq[i] + w * x * x;
        }
        m
    }

    /// Sum of squared deviations of distinct values `a..b`.
    fn ssd(&self, a: usize, b: usize) -> T {
        let w = self.count[b] - self.count[a];
        let s = self.sum[b] - self.sum[a];
        let q = self.sum_sq[b] - self.sum_sq[a];
        (q - s * s / w).max(T::zero())
    }
}

/// Fisher-Jenks optimal partition of `values` into `k` classes.
///
/// Equal values never straddle a break. Among partitions of equal total
/// within-class variance the one with the lexicographically smallest
/// break sequence is returned.
pub fn jenks_breaks<T: Scalar>(values: &[T], k: usize) -> Result<NaturalBreaks<T>> {
    if values.is_empty() {
        return Err(Error::Contract("cannot classify an empty value list".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Contract(format!("non-finite value {v}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut distinct: Vec<(T, usize)> = Vec::new();
    for v in sorted {
        match distinct.last_mut() {
            Some((last, c)) if *last == v => *c += 1,
            _ => distinct.push((v, 1)),
        }
    }
    let m = distinct.len();
    if k == 0 || k > m {
        return Err(Error::Contract(format!(
            "class count {k} must be between 1 and the number of distinct values ({m})"
        )));
    }
    let mean = values.iter().fold(T::zero(), |a, &v| a + v) / T::lit(values.len() as f64);
    let moments = Moments::new(&distinct, mean);
    let total = moments.ssd(0, m);
    let tol = (total * T::lit(1e-12)).max(T::min_positive_value());

    // best[c][s]: optimal cost of splitting distinct[s..] into c + 1 classes;
    // first_end[c][s]: smallest end of the first class achieving it.
    let mut best = vec![vec![T::infinity(); m + 1]; k];
    let mut first_end = vec![vec![m; m + 1]; k];
    for s in 0..m {
        best[0][s] = moments.ssd(s, m);
    }
    for c in 1..k {
        for s in 0..m.saturating_sub(c) {
            let mut cost = T::infinity();
            let mut end = m;
            for e in (s + 1)..=(m - c) {
                let candidate = moments.ssd(s, e) + best[c - 1][e];
                if candidate < cost - tol {
                    cost = candidate;
                    end = e;
                }
            }
            best[c][s] = cost;
            first_end[c][s] = end;
        }
    }

    let mut breaks = Vec::with_capacity(k);
    let mut s = 0;
    for c in (1..k).rev() {
        let e = first_end[c][s];
        breaks.push(distinct[e - 1].0);
        s = e;
    }
    breaks.push(distinct[m - 1].0);
    let within = best[k - 1][0];
    let gvf = if total > T::zero() {
        (T::one() - within / total).max(T::zero()).min(T::one())
    } else {
        T::one()
    };
    Ok(NaturalBreaks {
        breaks,
        within_ssd: within,
        gvf,
    })
}

/// Classifies labelled values into `k` natural-break classes.
pub fn classify<T: Scalar>(values: &[(String, T)], k: usize) -> Result<Classification<T>> {
    let nb = jenks_breaks(&values.iter().map(|v| v.1).collect::<Vec<_>>(), k)?;
    Ok(Classification {
        k,
        assignment: values
            .iter()
            .map(|(id, v)| (id.clone(), nb.class_of(*v)))
            .collect(),
        breaks: nb.breaks,
        gvf: nb.gvf,
    })
}

/// Classifies the final indices of an accessibility result.
pub fn classify_result<T: Scalar>(result: &AccessResult<T>, k: usize) -> Result<Classification<T>> {
    let values: Vec<(String, T)> = result
        .zones
        .iter()
        .map(|(id, z)| (id.clone(), z.final_index))
        .collect();
    classify(&values, k)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary<T> {
    pub count: usize,
    pub min: T,
    pub max: T,
    pub mean: T,
    pub median: T,
    /// Zones with no provider in range, by id.
    pub zero_access: Vec<String>,
}

pub fn summary_stats<T: Scalar>(result: &AccessResult<T>) -> Result<Summary<T>> {
    if result.zones.is_empty() {
        return Err(Error::Contract("empty accessibility result".into()));
    }
    let mut values: Vec<T> = result.zones.values().map(|z| z.final_index).collect();
    let count = values.len();
    let mean = values.iter().fold(T::zero(), |a, &v| a + v) / T::lit(count as f64);
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    let median = if count % 2 == 1 {
        values[count / 2]
    } else {
        (values[count / 2 - 1] + values[count / 2]) * T::lit(0.5)
    };
    Ok(Summary {
        count,
        min: values[0],
        max: values[count - 1],
        mean,
        median,
        zero_access: result
            .zones
            .iter()
            .filter(|(_, z)| z.final_index == T::zero())
            .map(|(id, _)| id.clone())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Model, ZoneAccess};

    #[test]
    fn two_obvious_clusters() {
        let nb = jenks_breaks(&[10.0, 1.0, 12.0, 2.0, 11.0, 3.0], 2).unwrap();
        assert_eq!(nb.breaks, vec![3.0, 12.0]);
        assert_eq!(nb.class_of(2.0), 1);
        assert_eq!(nb.class_of(11.0), 2);
        assert_eq!(nb.within_ssd, 4.0);
    }

    #[test]
    fn single_class_holds_everything() {
        let nb = jenks_breaks(&[4.0, 1.0, 9.0], 1).unwrap();
        assert_eq!(nb.breaks, vec![9.0]);
        assert_eq!(nb.gvf, 0.0);
    }

    #[test]
    fn k_equal_to_n_gives_singletons() {
        let nb = jenks_breaks(&[5.0, 1.0, 3.0, 2.0], 4).unwrap();
        assert_eq!(nb.breaks, vec![1.0, 2.0, 3.0, 5.0]);
        assert_eq!(nb.gvf, 1.0);
    }

    #[test]
    fn too_many_classes_is_rejected() {
        assert!(jenks_breaks(&[1.0, 1.0, 2.0], 3).is_err());
        assert!(jenks_breaks::<f64>(&[], 1).is_err());
        assert!(jenks_breaks(&[1.0], 0).is_err());
    }

    #[test]
    fn ties_resolve_to_smallest_first_break() {
        // {1}{2,3} and {1,2}{3} both leave 0.5.
        let nb = jenks_breaks(&[1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(nb.breaks, vec![1.0, 3.0]);
    }

    fn result(values: &[(&str, f64)]) -> AccessResult<f64> {
        AccessResult {
            model: Model::TwoStep,
            per_capita: 1.0,
            rings: 0,
            zones: values
                .iter()
                .map(|&(id, v)| {
                    (
                        id.to_string(),
                        ZoneAccess {
                            final_index: v,
                            ring_values: vec![],
                        },
                    )
                })
                .collect(),
            ratios: vec![],
        }
    }

    #[test]
    fn summary_of_three() {
        let s = summary_stats(&result(&[("a", 0.0), ("b", 10.0), ("c", 20.0)])).unwrap();
        assert_eq!((s.min, s.max, s.mean, s.median), (0.0, 20.0, 10.0, 10.0));
        assert_eq!(s.zero_access, vec!["a"]);
    }

    #[test]
    fn summary_of_equal_values() {
        let s = summary_stats(&result(&[("a", 3.0), ("b", 3.0)])).unwrap();
        assert_eq!((s.min, s.max, s.mean), (3.0, 3.0, 3.0));
        assert!(s.zero_access.is_empty());
        assert!(summary_stats(&result(&[])).is_err());
    }

    #[test]
    fn classify_assigns_every_zone() {
        let c = classify_result(&result(&[("a", 0.0), ("b", 0.1), ("c", 5.0), ("d", 5.2)]), 2).unwrap();
        assert_eq!(c.assignment["a"], 1);
        assert_eq!(c.assignment["d"], 2);
        assert_eq!(c.assignment.len(), 4);
    }
}
