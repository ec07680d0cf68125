use std::collections::BTreeSet;
use std::path::Path;

use fca_core::classify;
use fca_core::demand;
use fca_core::engine::{self, Model, ZoneAccess, DEFAULT_DECAY_WEIGHTS, MAX_RINGS};
use fca_core::geometry::{self, DistanceMetric};
use fca_core::ingest::{self, DemandSource, DocumentFormat, ProviderFields, RoadOptions, ZoneFields, WALKING_SPEED_KMH};
use fca_core::output::{self, ring_field, FINAL_INDEX_FIELD};
use fca_core::{
    AccessResult, AgeWeights, Classification, CostMatrix, DemandZone, ProviderSite, RingScheme, RoutingGraph, ZoneGeometry,
};
use geojson::JsonValue;

use crate::args::{
    AccessArgs, CatchmentArgs, ClassifyArgs, Command, DemandArgs, Format, Mode, OutputArgs, ProviderArgs,
    SpatialArgs, ZoneArgs,
};
use crate::units::{parse_lengths, parse_numbers, parse_times};
use crate::CliError;

type Res<T> = Result<T, CliError>;

pub fn run_command(command: &Command) -> Res<()> {
    match command {
        Command::Catchment(a) => catchment(a),
        Command::Access(a) => access(a),
        Command::Demand(a) => demand_adjust(a),
        Command::Classify(a) => classify_scores(a),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn write_file(path: &Path, text: &str) -> Res<()> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn output_format(out: &OutputArgs) -> DocumentFormat {
    match out.format {
        Some(Format::Csv) => DocumentFormat::Csv,
        Some(Format::Geojson) => DocumentFormat::GeoJson,
        None => DocumentFormat::from_path(&out.out),
    }
}

fn format_name(f: DocumentFormat) -> &'static str {
    match f {
        DocumentFormat::GeoJson => "geojson",
        DocumentFormat::Csv => "csv",
    }
}

fn list<T: ToString>(values: &[T]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Prints the fully resolved parameter set on one line.
fn echo(command: &str, params: &[(&str, String)]) {
    let body: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    eprintln!("fca {command}: {}", body.join(" "));
}

fn single(values: Vec<f64>, flag: &str) -> Res<f64> {
    match values.as_slice() {
        [v] => Ok(*v),
        _ => Err(usage(format!("{flag} takes exactly one value"))),
    }
}

fn load_providers(a: &ProviderArgs, s: &SpatialArgs, with_capacity: bool) -> Res<Vec<ProviderSite>> {
    let text = ingest::read_text(&a.providers)?;
    let mut fields = ProviderFields::new(&a.provider_id, &a.capacity);
    if !with_capacity {
        fields.capacity = None;
    }
    fields.x = s.x_field.clone();
    fields.y = s.y_field.clone();
    Ok(ingest::load_providers(&text, DocumentFormat::from_path(&a.providers), &fields, s.crs)?)
}

fn load_zones(a: &ZoneArgs, s: &SpatialArgs, demand: Option<DemandSource>) -> Res<Vec<DemandZone>> {
    let text = ingest::read_text(&a.zones)?;
    let fields = ZoneFields {
        id: a.zone_id.clone(),
        demand,
        x: s.x_field.clone(),
        y: s.y_field.clone(),
    };
    Ok(ingest::load_zones(&text, DocumentFormat::from_path(&a.zones), &fields, s.crs)?)
}

fn catchment(a: &CatchmentArgs) -> Res<()> {
    let cutoff = single(parse_times(&a.cutoff).map_err(usage)?, "--cutoff")?;
    let tolerance = single(parse_lengths(&a.snap_tolerance).map_err(usage)?, "--snap-tolerance")?;
    let speed_kmh = match (a.mode, a.speed_kmh) {
        (_, Some(s)) if !(s.is_finite() && s > 0.0) => {
            return Err(usage(format!("--speed-kmh must be positive, got {s}")))
        }
        (Mode::Walking, s) => Some(s.unwrap_or(WALKING_SPEED_KMH)),
        (Mode::Driving, s) => s,
    };
    echo(
        "catchment",
        &[
            ("network", a.network.display().to_string()),
            ("cutoff_s", cutoff.to_string()),
            ("direction", a.direction.to_string()),
            ("snap_tolerance_m", tolerance.to_string()),
            ("strict", a.strict.to_string()),
            ("mode", format!("{:?}", a.mode).to_lowercase()),
            ("speed_kmh", speed_kmh.map_or("from-cost_s".into(), |s| s.to_string())),
            ("crs", a.spatial.crs.to_string()),
            ("out", a.out.display().to_string()),
        ],
    );

    let network_text = ingest::read_text(&a.network)?;
    let providers = load_providers(&a.providers, &a.spatial, false)?;
    let zones = load_zones(&a.zones, &a.spatial, None)?;
    let mut opts = RoadOptions::new(a.spatial.crs);
    opts.speed_mps = speed_kmh.map(|s| s / 3.6);
    let network = ingest::load_road_network(&network_text, DocumentFormat::from_path(&a.network), &opts)?;
    let graph = RoutingGraph::new(&network)?;
    let matrix = graph.cost_matrix(&zones, &providers, cutoff, a.direction, tolerance)?;

    let failures = report_unreached(&graph, &zones, &providers, &matrix)?;
    if a.strict && failures > 0 {
        return Err(fca_core::Error::Validation(format!(
            "{failures} site(s) could not be snapped within {tolerance} m"
        ))
        .into());
    }
    if matrix.is_empty() {
        log::warn!("no zone reaches any provider within {cutoff} s; writing an empty matrix");
    }
    eprintln!(
        "fca catchment: {} zone/provider pairs within {cutoff} s",
        matrix.len()
    );
    write_file(&a.out, &matrix.to_csv())
}

/// Prints snap failures (with the distance to the nearest node) and sites
/// that reach nothing within the cutoff. Returns the snap-failure count.
fn report_unreached(
    graph: &RoutingGraph,
    zones: &[DemandZone],
    providers: &[ProviderSite],
    matrix: &CostMatrix,
) -> Res<usize> {
    let snap_distance = |p| graph.snap(&p, f64::INFINITY).map(|s| s.distance_m);
    for id in &matrix.unreached_zones {
        let zone = zones.iter().find(|z| &z.id == id).expect("reported zone exists");
        let d = snap_distance(geometry::representative_point(zone)?)?;
        eprintln!("unreached zone {id}: nearest road node {d:.1} m away");
    }
    for id in &matrix.unreached_providers {
        let site = providers.iter().find(|p| &p.id == id).expect("reported provider exists");
        let d = snap_distance(site.location)?;
        eprintln!("unreached provider {id}: nearest road node {d:.1} m away");
    }
    let linked_zones: BTreeSet<&str> = matrix.entries().map(|e| e.0).collect();
    let linked_providers: BTreeSet<&str> = matrix.entries().map(|e| e.1).collect();
    let isolated_zones = zones
        .iter()
        .filter(|z| !linked_zones.contains(z.id.as_str()) && !matrix.unreached_zones.contains(&z.id))
        .count();
    let isolated_providers = providers
        .iter()
        .filter(|p| !linked_providers.contains(p.id.as_str()) && !matrix.unreached_providers.contains(&p.id))
        .count();
    if isolated_zones + isolated_providers > 0 {
        eprintln!(
            "{isolated_zones} zone(s) and {isolated_providers} provider(s) have no counterpart within the cutoff"
        );
    }
    Ok(matrix.unreached_zones.len() + matrix.unreached_providers.len())
}

enum Mobility {
    Buffer(DistanceMetric),
    Network(CostMatrix),
}

fn ring_scheme(a: &AccessArgs, thresholds: Vec<f64>, network: bool) -> Res<RingScheme> {
    if thresholds.len() > MAX_RINGS {
        return Err(usage(format!("at most {MAX_RINGS} rings, got {}", thresholds.len())));
    }
    if a.model == Model::TwoStep {
        if thresholds.len() != 1 {
            return Err(usage(format!("2sfca takes one threshold, got {}", thresholds.len())));
        }
        if a.weights.is_some() || a.gaussian_bandwidth.is_some() {
            return Err(usage("2sfca takes no decay weights"));
        }
        return Ok(RingScheme::single(thresholds[0])?);
    }
    if let Some(w) = &a.weights {
        let weights = parse_numbers(w).map_err(usage)?;
        if weights.len() != thresholds.len() {
            return Err(usage(format!(
                "{} thresholds but {} weights",
                thresholds.len(),
                weights.len()
            )));
        }
        return Ok(RingScheme::new(thresholds, weights)?);
    }
    if let Some(b) = &a.gaussian_bandwidth {
        let bandwidth = if network { parse_times(b) } else { parse_lengths(b) };
        let bandwidth = single(bandwidth.map_err(usage)?, "--gaussian-bandwidth")?;
        return Ok(RingScheme::gaussian(thresholds, bandwidth)?);
    }
    match thresholds.len() {
        1 => Ok(RingScheme::single(thresholds[0])?),
        3 => Ok(RingScheme::new(thresholds, DEFAULT_DECAY_WEIGHTS.to_vec())?),
        n => Err(usage(format!("{n} rings need --weights or --gaussian-bandwidth"))),
    }
}

fn split_fields(s: &str) -> Vec<String> {
    s.split(',').map(|f| f.trim().to_string()).filter(|f| !f.is_empty()).collect()
}

fn read_age_weights(path: &Path) -> Res<AgeWeights> {
    let rates = demand::read_rates_csv(&ingest::read_text(path)?)?;
    Ok(AgeWeights::from_rates(rates)?)
}

fn check_band_count(fields: &[String], weights: &AgeWeights) -> Res<()> {
    if fields.len() != weights.len() {
        return Err(fca_core::Error::Schema(format!(
            "{} age fields for {} weighted bands",
            fields.len(),
            weights.len()
        ))
        .into());
    }
    Ok(())
}

/// Classifies with at most as many classes as there are distinct scores.
fn classify_clamped(result: &AccessResult, requested: usize) -> Res<Option<Classification>> {
    if requested == 0 || result.zones.is_empty() {
        return Ok(None);
    }
    let distinct: BTreeSet<u64> = result.zones.values().map(|z| z.final_index.to_bits()).collect();
    let k = requested.min(distinct.len());
    if k < requested {
        log::warn!("only {k} distinct scores; using {k} classes instead of {requested}");
    }
    Ok(Some(classify::classify_result(result, k)?))
}

fn print_summary(result: &AccessResult) -> Res<()> {
    if result.zones.is_empty() {
        return Ok(());
    }
    let s = classify::summary_stats(result)?;
    eprintln!(
        "fca summary: zones={} min={} max={} mean={} median={} zero_access={}",
        s.count,
        s.min,
        s.max,
        s.mean,
        s.median,
        s.zero_access.len()
    );
    Ok(())
}

fn access(a: &AccessArgs) -> Res<()> {
    if !(a.per_capita.is_finite() && a.per_capita > 0.0) {
        return Err(usage(format!("--per-capita must be positive, got {}", a.per_capita)));
    }
    let crs = a.spatial.crs;
    let (thresholds, network) = match (&a.cost_matrix, &a.buffer) {
        (Some(_), _) => {
            let t = match (&a.times, a.model) {
                (Some(t), _) => parse_times(t).map_err(usage)?,
                (None, Model::TwoStep) => vec![30.0 * 60.0],
                (None, Model::Enhanced) => vec![600.0, 1200.0, 1800.0],
            };
            (t, true)
        }
        (None, Some(b)) => (parse_lengths(b).map_err(usage)?, false),
        (None, None) => {
            let miles: &[f64] = match a.model {
                Model::TwoStep => &engine::DEFAULT_RING_MILES[2..],
                Model::Enhanced => &engine::DEFAULT_RING_MILES,
            };
            (miles.iter().map(|m| m * fca_core::METERS_PER_MILE).collect(), false)
        }
    };
    if network && a.metric.is_some() {
        return Err(usage("--metric applies to distance buffers only"));
    }
    let scheme = ring_scheme(a, thresholds, network)?;
    let metric = a.metric.unwrap_or(DistanceMetric::for_crs(crs));
    let age_fields = a.age_fields.as_deref().map(split_fields);
    let format = output_format(&a.output);

    let mut params = vec![
        ("model", a.model.to_string()),
        (
            "mobility",
            if network {
                format!("cost-matrix:{}", a.cost_matrix.as_ref().expect("network mode").display())
            } else {
                format!("buffer:{metric}")
            },
        ),
        (if network { "thresholds_s" } else { "thresholds_m" }, list(scheme.thresholds())),
        ("weights", list(scheme.weights())),
        ("per_capita", a.per_capita.to_string()),
        ("crs", crs.to_string()),
        (
            "demand",
            match &age_fields {
                Some(f) => format!("age-adjusted:{}", f.join("+")),
                None => a.demand.clone(),
            },
        ),
        ("classes", a.classes.to_string()),
        ("out", a.output.out.display().to_string()),
        ("format", format_name(format).into()),
    ];
    if let Some(p) = &a.emit_step1 {
        params.push(("emit_step1", p.display().to_string()));
    }
    echo("access", &params);

    let mobility = match &a.cost_matrix {
        Some(path) => Mobility::Network(CostMatrix::from_csv(&ingest::read_text(path)?)?),
        None => Mobility::Buffer(metric),
    };
    let providers = load_providers(&a.providers, &a.spatial, true)?;
    let mut zones = match &age_fields {
        Some(fields) => {
            let rates = a.rates.as_ref().expect("clap requires --rates with --age-fields");
            let weights = read_age_weights(rates)?;
            check_band_count(fields, &weights)?;
            let mut zones = load_zones(&a.zones, &a.spatial, Some(DemandSource::AgeBands(fields.clone())))?;
            demand::apply_age_weights(&mut zones, &weights)?;
            zones
        }
        None => load_zones(&a.zones, &a.spatial, Some(DemandSource::Field(a.demand.clone())))?,
    };
    zones.iter_mut().for_each(|z| z.age_counts = None);

    let costs = match mobility {
        Mobility::Network(m) => m,
        Mobility::Buffer(metric) => geometry::buffer_cost_matrix(&zones, &providers, scheme.max_threshold(), metric)?,
    };
    let result = engine::score(a.model, &providers, &zones, &costs, &scheme, a.per_capita)?;
    let unserved = result.ratios.iter().filter(|r| !r.served).count();
    if unserved > 0 {
        eprintln!("fca access: {unserved} provider(s) have no demand in their catchment");
    }
    let classification = classify_clamped(&result, a.classes)?;
    let doc = output::write_results(&zones, &result, classification.as_ref(), format, &a.zones.zone_id)?;
    write_file(&a.output.out, &doc)?;
    if let Some(path) = &a.emit_step1 {
        write_file(path, &output::write_step1_csv(&result.ratios))?;
    }
    print_summary(&result)
}

fn demand_adjust(a: &DemandArgs) -> Res<()> {
    let weights = read_age_weights(&a.rates)?;
    let fields = match &a.age_fields {
        Some(f) => split_fields(f),
        None => weights.bands.iter().map(|b| b.label.clone()).collect(),
    };
    let format = output_format(&a.output);
    echo(
        "demand",
        &[
            ("rates", a.rates.display().to_string()),
            ("age_fields", fields.join(",")),
            ("weights", list(&weights.weights())),
            ("out_field", a.out_field.clone()),
            ("out", a.output.out.display().to_string()),
            ("format", format_name(format).into()),
        ],
    );
    check_band_count(&fields, &weights)?;
    let mut zones = load_zones(&a.zones, &a.spatial, Some(DemandSource::AgeBands(fields)))?;
    demand::apply_age_weights(&mut zones, &weights)?;
    let doc = match format {
        DocumentFormat::GeoJson => ingest::write_zones_geojson(&zones, &a.zones.zone_id, Some(&a.out_field)),
        DocumentFormat::Csv => zones_csv(&zones, &a.zones.zone_id, &a.out_field),
    };
    write_file(&a.output.out, &doc)
}

/// Zone attributes as CSV with `demand_field` set from each zone's demand.
fn zones_csv(zones: &[DemandZone], id_field: &str, demand_field: &str) -> String {
    let mut columns: BTreeSet<&str> = zones.iter().flat_map(|z| z.properties.keys().map(String::as_str)).collect();
    columns.remove(id_field);
    columns.remove(demand_field);
    let header: Vec<&str> = [id_field].into_iter().chain(columns).chain([demand_field]).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory CSV write");
    for z in zones {
        let mut rec = vec![z.id.clone()];
        for col in &header[1..header.len() - 1] {
            rec.push(match z.properties.get(*col) {
                None | Some(JsonValue::Null) => String::new(),
                Some(JsonValue::String(s)) => s.clone(),
                Some(v) => v.to_string(),
            });
        }
        rec.push(z.demand.map_or(String::new(), |d| d.to_string()));
        w.write_record(&rec).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("utf-8")
}

fn classify_scores(a: &ClassifyArgs) -> Res<()> {
    if a.classes == 0 {
        return Err(usage("--classes must be at least 1"));
    }
    let input = DocumentFormat::from_path(&a.scores);
    let format = output_format(&a.output);
    if input == DocumentFormat::Csv && format == DocumentFormat::GeoJson {
        return Err(usage("CSV scores carry no geometry; write CSV output"));
    }
    echo(
        "classify",
        &[
            ("scores", a.scores.display().to_string()),
            ("classes", a.classes.to_string()),
            ("out", a.output.out.display().to_string()),
            ("format", format_name(format).into()),
        ],
    );
    let text = ingest::read_text(&a.scores)?;
    let (zones, access): (Vec<DemandZone>, Vec<ZoneAccess<f64>>) = match input {
        DocumentFormat::GeoJson => {
            let fields = ZoneFields {
                id: a.zone_id.clone(),
                demand: Some(DemandSource::Field(FINAL_INDEX_FIELD.into())),
                x: a.spatial.x_field.clone(),
                y: a.spatial.y_field.clone(),
            };
            let zones = ingest::load_zones(&text, input, &fields, a.spatial.crs)?;
            let access = zones
                .iter()
                .map(|z| ZoneAccess {
                    final_index: z.demand.expect("loaded with a demand field"),
                    ring_values: (1..)
                        .map_while(|r| z.properties.get(&ring_field(r)).and_then(JsonValue::as_f64))
                        .collect(),
                })
                .collect();
            (zones, access)
        }
        DocumentFormat::Csv => output::read_results_csv::<f64>(&text)?
            .into_iter()
            .map(|row| {
                let zone = DemandZone::new(
                    row.zone_id,
                    ZoneGeometry::Point([0.0, 0.0]),
                    a.spatial.crs,
                    Some(row.final_index),
                );
                let access = ZoneAccess {
                    final_index: row.final_index,
                    ring_values: row.ring_values,
                };
                (zone, access)
            })
            .unzip(),
    };
    let rings = access.first().map_or(0, |z| z.ring_values.len());
    if access.iter().any(|z| z.ring_values.len() != rings) {
        return Err(fca_core::Error::Schema("zones carry different numbers of ring fields".into()).into());
    }
    let mut ids = BTreeSet::new();
    if let Some(z) = zones.iter().find(|z| !ids.insert(z.id.as_str())) {
        return Err(fca_core::Error::Validation(format!("duplicate ids: {}", z.id)).into());
    }
    let result = AccessResult {
        model: if rings > 0 { Model::Enhanced } else { Model::TwoStep },
        per_capita: 1.0,
        rings,
        zones: zones.iter().map(|z| z.id.clone()).zip(access).collect(),
        ratios: Vec::new(),
    };
    if result.zones.is_empty() {
        return Err(fca_core::Error::Contract("no scores to classify".into()).into());
    }
    let classification = classify_clamped(&result, a.classes)?.expect("classes >= 1");
    eprintln!(
        "fca classify: breaks={} gvf={}",
        list(&classification.breaks),
        classification.gvf
    );
    let doc = output::write_results(&zones, &result, Some(&classification), format, &a.zone_id)?;
    write_file(&a.output.out, &doc)?;
    print_summary(&result)
}
