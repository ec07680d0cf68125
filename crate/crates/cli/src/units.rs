//! Threshold values with unit suffixes (`15mi`, `24km`, `500m`, `30min`).

use std::fmt;

use fca_core::METERS_PER_MILE;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Quantity {
    Meters(f64),
    Seconds(f64),
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Meters(m) => write!(f, "{m}m"),
            Quantity::Seconds(s) => write!(f, "{s}s"),
        }
    }
}

fn split_number(s: &str) -> (&str, &str) {
    let at = s
        .find(|c: char| c.is_ascii_alphabetic())
        .unwrap_or(s.len());
    (s[..at].trim(), s[at..].trim())
}

/// Parses one value; `bare` supplies the unit when no suffix is given.
pub fn parse_quantity(s: &str, bare: Option<&str>) -> Result<Quantity, String> {
    let (num, unit) = split_number(s.trim());
    let unit = match (unit, bare) {
        ("", Some(u)) => u,
        ("", None) => return Err(format!("'{s}' needs a unit suffix (mi, km, m or min)")),
        (u, _) => u,
    };
    let v: f64 = num
        .parse()
        .map_err(|_| format!("'{s}' is not a number with a unit"))?;
    if !(v.is_finite() && v > 0.0) {
        return Err(format!("'{s}' must be positive"));
    }
    match unit.to_ascii_lowercase().as_str() {
        "mi" | "mile" | "miles" => Ok(Quantity::Meters(v * METERS_PER_MILE)),
        "km" => Ok(Quantity::Meters(v * 1000.0)),
        "m" => Ok(Quantity::Meters(v)),
        "min" | "mins" | "minutes" => Ok(Quantity::Seconds(v * 60.0)),
        "s" | "sec" => Ok(Quantity::Seconds(v)),
        other => Err(format!("unknown unit '{other}' in '{s}'")),
    }
}

fn parse_list(s: &str, bare: Option<&str>) -> Result<Vec<Quantity>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_quantity(p, bare))
        .collect()
}

/// Comma-separated lengths in meters; every item needs a unit.
pub fn parse_lengths(s: &str) -> Result<Vec<f64>, String> {
    parse_list(s, None)?
        .into_iter()
        .map(|q| match q {
            Quantity::Meters(m) => Ok(m),
            Quantity::Seconds(_) => Err(format!("'{s}': buffer thresholds must be lengths")),
        })
        .collect()
}

/// Comma-separated times in seconds; bare numbers are minutes.
pub fn parse_times(s: &str) -> Result<Vec<f64>, String> {
    parse_list(s, Some("min"))?
        .into_iter()
        .map(|q| match q {
            Quantity::Seconds(t) => Ok(t),
            Quantity::Meters(_) => Err(format!("'{s}': travel-time thresholds must be times")),
        })
        .collect()
}

/// Comma-separated plain numbers.
pub fn parse_numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{p}' is not a number"))
        })
        .collect()
}
