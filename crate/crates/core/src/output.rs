//! Scored zone documents (GeoJSON / CSV) and the step-1 side table.

use std::collections::HashSet;

use geojson::JsonValue;

use crate::classify::Classification;
use crate::engine::{AccessResult, ProviderRatio};
use crate::ingest::{self, DemandZone, DocumentFormat};
use crate::{Error, Result, Scalar};

pub const FINAL_INDEX_FIELD: &str = "final_index";
pub const CLASS_FIELD: &str = "access_class";

pub fn ring_field(ring: usize) -> String {
    format!("ring_{ring}")
}

/// Writes the input zones with `final_index`, `ring_1..ring_R` (enhanced
/// model) and `access_class` (when classified) added. GeoJSON keeps the
/// zone geometry and attributes; CSV carries `zone_id` and the scores only.
pub fn write_results<T: Scalar>(
    zones: &[DemandZone<T>],
    result: &AccessResult<T>,
    classification: Option<&Classification<T>>,
    format: DocumentFormat,
    id_field: &str,
) -> Result<String> {
    let known: HashSet<&str> = zones.iter().map(|z| z.id.as_str()).collect();
    if let Some(id) = result.zones.keys().find(|id| !known.contains(id.as_str())) {
        return Err(Error::Contract(format!("result zone '{id}' is not among the input zones")));
    }
    let rows = zones
        .iter()
        .map(|z| {
            let access = result
                .zones
                .get(&z.id)
                .ok_or_else(|| Error::Contract(format!("zone '{}' has no score", z.id)))?;
            let class = match classification {
                Some(c) => Some(*c.assignment.get(&z.id).ok_or_else(|| {
                    Error::Contract(format!("zone '{}' is not classified", z.id))
                })?),
                None => None,
            };
            Ok((z, access, class))
        })
        .collect::<Result<Vec<_>>>()?;

    match format {
        DocumentFormat::GeoJson => Ok(ingest::collection_string(
            rows.into_iter()
                .map(|(z, access, class)| {
                    let mut props = ingest::zone_properties(z, id_field, None);
                    props.insert(FINAL_INDEX_FIELD.into(), JsonValue::from(access.final_index.to_f64_lossy()));
                    for (r, v) in access.ring_values.iter().enumerate() {
                        props.insert(ring_field(r + 1), JsonValue::from(v.to_f64_lossy()));
                    }
                    if let Some(c) = class {
                        props.insert(CLASS_FIELD.into(), JsonValue::from(c));
                    }
                    ingest::feature(ingest::zone_geometry(&z.geometry), props)
                })
                .collect(),
        )),
        DocumentFormat::Csv => {
            let mut header = vec!["zone_id".to_string(), FINAL_INDEX_FIELD.to_string()];
            header.extend((1..=result.rings).map(ring_field));
            if classification.is_some() {
                header.push(CLASS_FIELD.into());
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header).expect("in-memory CSV write");
            for (z, access, class) in rows {
                let mut rec = vec![z.id.clone(), access.final_index.to_string()];
                rec.extend(access.ring_values.iter().map(|v| v.to_string()));
                if let Some(c) = class {
                    rec.push(c.to_string());
                }
                w.write_record(&rec).expect("in-memory CSV write");
            }
            Ok(String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("utf-8"))
        }
    }
}

/// One row of a scored CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredRow<T> {
    pub zone_id: String,
    pub final_index: T,
    pub ring_values: Vec<T>,
    pub access_class: Option<usize>,
}

pub fn read_results_csv<T: Scalar>(text: &str) -> Result<Vec<ScoredRow<T>>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(format!("invalid CSV header: {e}")))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("zone_id").ok_or_else(|| Error::Schema("missing column 'zone_id'".into()))?;
    let score_col = col(FINAL_INDEX_FIELD)
        .ok_or_else(|| Error::Schema(format!("missing column '{FINAL_INDEX_FIELD}'")))?;
    let ring_cols: Vec<usize> = (1..).map(ring_field).map_while(|f| col(&f)).collect();
    let class_col = col(CLASS_FIELD);
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| Error::Parse(format!("row {i}: {e}")))?;
            let num = |c: usize| -> Result<T> {
                rec[c]
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| Error::Validation(format!("row {i}: '{}' is not a number", &rec[c])))
            };
            Ok(ScoredRow {
                zone_id: rec[id_col].to_string(),
                final_index: num(score_col)?,
                ring_values: ring_cols.iter().map(|&c| num(c)).collect::<Result<_>>()?,
                access_class: match class_col {
                    Some(c) => Some(rec[c].parse().map_err(|_| {
                        Error::Validation(format!("row {i}: bad class '{}'", &rec[c]))
                    })?),
                    None => None,
                },
            })
        })
        .collect()
}

/// `provider_id,ratio,weighted_demand,served` table of step-1 ratios.
pub fn write_step1_csv<T: Scalar>(ratios: &[ProviderRatio<T>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["provider_id", "ratio", "weighted_demand", "served"])
        .expect("in-memory CSV write");
    for r in ratios {
        w.write_record([
            r.provider_id.clone(),
            r.ratio.to_string(),
            r.weighted_demand.to_string(),
            r.served.to_string(),
        ])
        .expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify_result;
    use crate::engine::{Model, ZoneAccess};
    use crate::geometry::Crs;
    use crate::ingest::{load_zones, DemandSource, ZoneFields, ZoneGeometry};

    fn square_zone(id: &str) -> DemandZone<f64> {
        let ring = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]];
        DemandZone::new(id, ZoneGeometry::Polygon(vec![ring]), Crs::LonLat, Some(5000.0))
    }

    fn enhanced(values: &[(&str, [f64; 3])], per_capita: f64) -> AccessResult<f64> {
        AccessResult {
            model: Model::Enhanced,
            per_capita,
            rings: 3,
            zones: values
                .iter()
                .map(|(id, rings)| {
                    (
                        id.to_string(),
                        ZoneAccess {
                            final_index: per_capita * (rings[0] + rings[1] + rings[2]),
                            ring_values: rings.to_vec(),
                        },
                    )
                })
                .collect(),
            ratios: vec![],
        }
    }

    #[test]
    fn geojson_gets_final_index() {
        let zones = [square_zone("t1")];
        let mut result = enhanced(&[("t1", [0.0; 3])], 1.0);
        result.model = Model::TwoStep;
        result.rings = 0;
        let z = result.zones.get_mut("t1").unwrap();
        z.final_index = 200.0;
        z.ring_values.clear();
        let doc = write_results(&zones, &result, None, DocumentFormat::GeoJson, "GEOID").unwrap();
        let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
        let props = &v["features"][0]["properties"];
        assert_eq!(props["final_index"], 200.0);
        assert_eq!(props["GEOID"], "t1");
        assert!(props.get("ring_1").is_none());
        assert_eq!(v["features"][0]["geometry"]["type"], "Polygon");
    }

    #[test]
    fn ring_fields_sum_to_final_index() {
        let zones = [square_zone("a"), square_zone("b")];
        let result = enhanced(&[("a", [0.001, 0.0005, 0.0001]), ("b", [0.0, 0.0, 0.0002])], 100_000.0);
        let doc = write_results(&zones, &result, None, DocumentFormat::GeoJson, "id").unwrap();
        let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
        for f in v["features"].as_array().unwrap() {
            let p = &f["properties"];
            let sum: f64 = (1..=3).map(|r| p[format!("ring_{r}")].as_f64().unwrap()).sum();
            let fi = p["final_index"].as_f64().unwrap();
            assert!((fi - 100_000.0 * sum).abs() <= 1e-12 * fi.abs().max(1.0));
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let zones = [square_zone("a"), square_zone("b"), square_zone("c")];
        let result = enhanced(
            &[("a", [0.1 + 0.2, 1.0 / 3.0, 0.0]), ("b", [2.0f64.sqrt(), 0.0, 1e-17]), ("c", [0.0; 3])],
            7.0,
        );
        let class = classify_result(&result, 2).unwrap();
        let text = write_results(&zones, &result, Some(&class), DocumentFormat::Csv, "id").unwrap();
        assert!(text.starts_with("zone_id,final_index,ring_1,ring_2,ring_3,access_class\n"));
        let rows: Vec<ScoredRow<f64>> = read_results_csv(&text).unwrap();
        for row in rows {
            let z = &result.zones[&row.zone_id];
            assert_eq!(row.final_index.to_bits(), z.final_index.to_bits());
            assert_eq!(row.ring_values, z.ring_values);
            assert_eq!(row.access_class, Some(class.assignment[&row.zone_id]));
        }
    }

    #[test]
    fn geojson_round_trip_keeps_geometry_and_scores() {
        let zones = [square_zone("a")];
        let result = enhanced(&[("a", [0.1 + 0.2, 1.0 / 3.0, 1e-300])], 3.0);
        let doc = write_results(&zones, &result, None, DocumentFormat::GeoJson, "id").unwrap();
        let fields = ZoneFields::new("id", DemandSource::Field(FINAL_INDEX_FIELD.into()));
        let back: Vec<DemandZone<f64>> = load_zones(&doc, DocumentFormat::GeoJson, &fields, Crs::LonLat).unwrap();
        assert_eq!(back[0].geometry, zones[0].geometry);
        assert_eq!(back[0].demand.unwrap().to_bits(), result.zones["a"].final_index.to_bits());
        assert_eq!(back[0].properties["ring_2"].as_f64(), Some(1.0 / 3.0));
    }

    #[test]
    fn unknown_result_zone_is_rejected() {
        let zones = [square_zone("a")];
        let result = enhanced(&[("a", [0.0; 3]), ("ghost", [0.0; 3])], 1.0);
        assert!(matches!(
            write_results(&zones, &result, None, DocumentFormat::Csv, "id"),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn step1_table() {
        let text = write_step1_csv(&[ProviderRatio {
            provider_id: "p".into(),
            ratio: 0.002,
            weighted_demand: 5000.0,
            served: true,
        }]);
        assert_eq!(text, "provider_id,ratio,weighted_demand,served\np,0.002,5000,true\n");
    }
}
