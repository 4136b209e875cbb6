//! Dataset files, representative-day clustering and scenario transforms.
//!
//! A manifest names one JSON document per section (topology, catalog,
//! assets, policies, supply chain) plus the time series. Any section may be
//! given inline instead of as a path; paths resolve against the manifest's
//! directory. The JSON schema is documented in `docs/dataset-schema.md`.

mod cluster;
mod scenario;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{
    validate, AssetClass, Component, GeneratorAsset, PenaltyPrices, Product, Profile, ScenarioData,
    StorageSpec, SupplyChainData, SystemModel, TechType, Technology, TechnologyCatalog,
    TimeStructure, Topology, ValidationReport,
};

pub use cluster::{
    cluster_representative_days, days_in_year, is_leap, ClusterSettings, Clustering, InitMode,
    RawHourlySeries, SeriesKind, HOURS_PER_DAY,
};
pub use scenario::{apply_scenario, scale_material_supply, Scenario, UNLIMITED};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}:{column}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("{}: row {row}: {msg}", path.display())]
    Csv { path: PathBuf, row: u64, msg: String },
    #[error("validation failed\n{0}")]
    Validation(ValidationReport),
    #[error("clustering: {0}")]
    Cluster(String),
    #[error("{0}")]
    Config(String),
}

/// A scalar, one value per model year, or a year-keyed step series where
/// each entry holds until the next key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Series {
    Const(f64),
    List(Vec<f64>),
    ByYear(BTreeMap<String, f64>),
}

impl Series {
    pub fn expand(&self, years: &[i32], what: &str) -> Result<Vec<f64>, IngestError> {
        match self {
            Series::Const(v) => Ok(vec![*v; years.len()]),
            Series::List(v) if v.len() == years.len() => Ok(v.clone()),
            Series::List(v) => Err(IngestError::Config(format!(
                "{what}: {} values for {} years",
                v.len(),
                years.len()
            ))),
            Series::ByYear(map) => {
                let mut keyed = Vec::new();
                for (k, v) in map {
                    let y: i32 = k
                        .parse()
                        .map_err(|_| IngestError::Config(format!("{what}: bad year key {k:?}")))?;
                    keyed.push((y, *v));
                }
                keyed.sort_by_key(|&(y, _)| y);
                years
                    .iter()
                    .map(|&y| {
                        keyed
                            .iter()
                            .rev()
                            .find(|&&(k, _)| k <= y)
                            .map(|&(_, v)| v)
                            .ok_or_else(|| IngestError::Config(format!("{what}: no value for {y}")))
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
struct TechSpec {
    id: String,
    kind: TechType,
    #[serde(default)]
    capacity_density: Option<f64>,
    elcc: Series,
}

#[derive(Debug, Clone, Deserialize)]
struct CatalogFile {
    technologies: Vec<TechSpec>,
    #[serde(default)]
    materials: Vec<String>,
    #[serde(default)]
    components: Vec<Component>,
    #[serde(default)]
    products: Vec<Product>,
}

fn zero() -> Series {
    Series::Const(0.0)
}

#[derive(Debug, Clone, Deserialize)]
struct AssetSpec {
    id: String,
    zone: String,
    technology: String,
    class: AssetClass,
    capacity_mw: f64,
    #[serde(default)]
    product: Option<String>,
    #[serde(default)]
    storage: Option<StorageSpec>,
    #[serde(default)]
    lead_time: Option<u32>,
    #[serde(default)]
    lifetime: Option<u32>,
    #[serde(default)]
    retirement_year: Option<i32>,
    #[serde(default)]
    field: Option<String>,
    #[serde(default = "zero")]
    capex: Series,
    #[serde(default = "zero")]
    fixed_om: Series,
    #[serde(default)]
    var_cost: f64,
    #[serde(default)]
    recovery: BTreeMap<String, f64>,
}

fn default_reserve_margin() -> Series {
    Series::Const(0.15)
}

#[derive(Debug, Clone, Deserialize)]
struct PoliciesFile {
    first_year: i32,
    last_year: i32,
    #[serde(default)]
    discount_rate: f64,
    /// Compound annual load growth applied to the base-year profiles.
    #[serde(default)]
    load_growth: f64,
    #[serde(default)]
    peak_load: Option<Series>,
    #[serde(default = "default_reserve_margin")]
    reserve_margin: Series,
    #[serde(default)]
    rps: BTreeMap<String, Series>,
    #[serde(default)]
    penalties: PenaltyPrices,
}

#[derive(Debug, Clone, Deserialize)]
struct ScaledSupply {
    national: BTreeMap<String, Series>,
    state_share: f64,
    sector_shares: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
struct SupplyChainFile {
    #[serde(default)]
    supply: BTreeMap<String, Series>,
    #[serde(default)]
    scaled: Option<ScaledSupply>,
    #[serde(default)]
    initial_stock: BTreeMap<String, f64>,
    #[serde(default)]
    field_area: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Deserialize)]
struct DaySpec {
    id: String,
    weight: Series,
}

type DayProfiles = BTreeMap<String, Vec<f64>>;

#[derive(Debug, Clone, Deserialize)]
struct RepresentativeFile {
    hours: usize,
    days: Vec<DaySpec>,
    load: BTreeMap<String, DayProfiles>,
    #[serde(default)]
    availability: BTreeMap<String, DayProfiles>,
    #[serde(default)]
    imports: BTreeMap<String, DayProfiles>,
}

/// How hourly inputs are supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "lowercase")]
pub enum TimeSeriesSpec {
    /// Pre-clustered days: a JSON document (path or inline).
    Representative { source: Value },
    /// Full-year CSVs (`entity,year,h1..h8760`) clustered at load time.
    Hourly {
        load: String,
        #[serde(default)]
        availability: Option<String>,
        #[serde(default)]
        imports: Option<String>,
        #[serde(default)]
        clustering: ClusterSettings,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    #[serde(default)]
    pub name: String,
    pub topology: Value,
    pub catalog: Value,
    pub assets: Value,
    pub policies: Value,
    #[serde(default)]
    pub supply_chain: Value,
    pub time_series: TimeSeriesSpec,
    #[serde(default)]
    pub scenario: Scenario,
    /// Directory against which relative paths resolve.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// A validated model with the warnings raised while loading it.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub model: SystemModel,
    pub report: ValidationReport,
}

fn read(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, IngestError> {
    serde_json::from_str(text).map_err(|e| IngestError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

/// Reads a manifest; relative paths inside it resolve against its directory.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest, IngestError> {
    let mut m: DatasetManifest = parse_json(path, &read(path)?)?;
    m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(m)
}

impl DatasetManifest {
    fn resolve(&self, p: &str) -> PathBuf {
        self.base_dir.join(p)
    }

    fn section<T: DeserializeOwned>(&self, name: &str, v: &Value) -> Result<T, IngestError> {
        match v {
            Value::String(p) => {
                let path = self.resolve(p);
                parse_json(&path, &read(&path)?)
            }
            other => serde_json::from_value(other.clone()).map_err(|e| IngestError::Parse {
                path: PathBuf::from(format!("<manifest:{name}>")),
                line: e.line(),
                column: e.column(),
                msg: e.to_string(),
            }),
        }
    }

    /// Every file path the manifest references.
    pub fn referenced_paths(&self) -> Vec<PathBuf> {
        let mut out = Vec::new();
        for v in [&self.topology, &self.catalog, &self.assets, &self.policies, &self.supply_chain] {
            if let Value::String(p) = v {
                out.push(self.resolve(p));
            }
        }
        match &self.time_series {
            TimeSeriesSpec::Representative { source: Value::String(p) } => out.push(self.resolve(p)),
            TimeSeriesSpec::Representative { .. } => {}
            TimeSeriesSpec::Hourly {
                load,
                availability,
                imports,
                ..
            } => {
                out.push(self.resolve(load));
                out.extend(availability.iter().chain(imports).map(|p| self.resolve(p)));
            }
        }
        out
    }
}

/// Seed for clustering, taken from `SCGEP_SEED` (default 0).
pub fn seed_from_env() -> u64 {
    std::env::var("SCGEP_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0)
}

/// Reads an hourly CSV with header `entity,year,h1..hN`.
pub fn read_hourly_csv(path: &Path, kind: SeriesKind) -> Result<Vec<RawHourlySeries>, IngestError> {
    let text = read(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let csv_err = |row: u64, msg: String| IngestError::Csv {
        path: path.to_path_buf(),
        row,
        msg,
    };
    let headers = rdr.headers().map_err(|e| csv_err(1, e.to_string()))?.clone();
    if headers.get(0) != Some("entity") || headers.get(1) != Some("year") {
        return Err(csv_err(1, "header must start with entity,year".into()));
    }
    for (i, h) in headers.iter().skip(2).enumerate() {
        if h != format!("h{}", i + 1) {
            return Err(csv_err(1, format!("expected column h{}, found {h:?}", i + 1)));
        }
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line());
            csv_err(row, e.to_string())
        })?;
        let row = rec.position().map_or(0, |p| p.line());
        let entity = rec.get(0).unwrap_or_default().to_string();
        let year: i32 = rec
            .get(1)
            .and_then(|y| y.trim().parse().ok())
            .ok_or_else(|| csv_err(row, format!("bad year {:?}", rec.get(1).unwrap_or_default())))?;
        let mut values = Vec::with_capacity(rec.len().saturating_sub(2));
        for (j, field) in rec.iter().skip(2).enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| csv_err(row, format!("h{}: bad value {field:?}", j + 1)))?;
            values.push(v);
        }
        let expected = days_in_year(year) * HOURS_PER_DAY;
        if values.len() != expected {
            return Err(csv_err(
                row,
                format!("{entity} {year}: expected {expected} hourly values, got {}", values.len()),
            ));
        }
        out.push(RawHourlySeries {
            entity,
            kind,
            year,
            values,
        });
    }
    Ok(out)
}

/// Hourly inputs after day selection, in canonical `[year][day][hour]` form.
struct TimeData {
    days: Vec<String>,
    weights: Vec<Vec<f64>>,
    hours: usize,
    load: BTreeMap<String, Profile>,
    availability: BTreeMap<String, Profile>,
    imports: BTreeMap<String, Profile>,
}

fn growth(years: &[i32], base: i32, rate: f64) -> Vec<f64> {
    years.iter().map(|&y| (1.0 + rate).powi(y - base)).collect()
}

fn day_matrix(
    what: &str,
    profiles: &DayProfiles,
    days: &[String],
    hours: usize,
) -> Result<Vec<Vec<f64>>, IngestError> {
    days.iter()
        .map(|d| match profiles.get(d) {
            Some(v) if v.len() == hours => Ok(v.clone()),
            Some(v) => Err(IngestError::Config(format!(
                "{what} day {d}: {} values for {hours} hours",
                v.len()
            ))),
            None => Err(IngestError::Config(format!("{what}: no profile for day {d}"))),
        })
        .collect()
}

fn representative(file: RepresentativeFile, years: &[i32], load_growth: f64) -> Result<TimeData, IngestError> {
    let days: Vec<String> = file.days.iter().map(|d| d.id.clone()).collect();
    let per_day: Vec<Vec<f64>> = file
        .days
        .iter()
        .map(|d| d.weight.expand(years, &format!("day {} weight", d.id)))
        .collect::<Result<_, _>>()?;
    let weights = (0..years.len()).map(|y| per_day.iter().map(|w| w[y]).collect()).collect();
    let scale = growth(years, years[0], load_growth);
    let mut load = BTreeMap::new();
    for (zone, p) in &file.load {
        let base = day_matrix(&format!("load {zone}"), p, &days, file.hours)?;
        let prof = scale
            .iter()
            .map(|s| base.iter().map(|d| d.iter().map(|v| v * s).collect()).collect())
            .collect();
        load.insert(zone.clone(), prof);
    }
    let constant = |what: &str, map: &BTreeMap<String, DayProfiles>| -> Result<BTreeMap<String, Profile>, IngestError> {
        map.iter()
            .map(|(k, p)| {
                let m = day_matrix(&format!("{what} {k}"), p, &days, file.hours)?;
                Ok((k.clone(), vec![m; years.len()]))
            })
            .collect()
    };
    Ok(TimeData {
        availability: constant("availability", &file.availability)?,
        imports: constant("imports", &file.imports)?,
        days,
        weights,
        hours: file.hours,
        load,
    })
}

fn hourly(
    manifest: &DatasetManifest,
    load: &str,
    availability: Option<&String>,
    imports: Option<&String>,
    settings: &ClusterSettings,
    years: &[i32],
    load_growth: f64,
    seed: u64,
) -> Result<(TimeData, Vec<String>), IngestError> {
    let mut all = read_hourly_csv(&manifest.resolve(load), SeriesKind::Load)?;
    if let Some(p) = availability {
        all.extend(read_hourly_csv(&manifest.resolve(p), SeriesKind::Availability)?);
    }
    if let Some(p) = imports {
        all.extend(read_hourly_csv(&manifest.resolve(p), SeriesKind::Import)?);
    }
    let mut data_years: Vec<i32> = all.iter().map(|s| s.year).filter(|y| years.contains(y)).collect();
    data_years.sort();
    data_years.dedup();
    let Some(&first_data) = data_years.first() else {
        return Err(IngestError::Config(format!(
            "hourly series cover none of the model years {}..{}",
            years[0],
            years[years.len() - 1]
        )));
    };
    let mut notes = Vec::new();
    let mut by_year = BTreeMap::new();
    for &y in &data_years {
        let set: Vec<RawHourlySeries> = all.iter().filter(|s| s.year == y).cloned().collect();
        let c = cluster_representative_days(&set, settings, seed)?;
        if c.weights.len() < settings.days {
            return Err(IngestError::Cluster(format!(
                "{y}: only {} distinct days found for {} clusters",
                c.weights.len(),
                settings.days
            )));
        }
        by_year.insert(y, (set, c));
    }
    let k = settings.days;
    let days: Vec<String> = (1..=k).map(|i| format!("d{i}")).collect();
    let mut td = TimeData {
        days,
        weights: Vec::new(),
        hours: HOURS_PER_DAY,
        load: BTreeMap::new(),
        availability: BTreeMap::new(),
        imports: BTreeMap::new(),
    };
    for &y in years {
        // Years without data reuse the closest earlier clustered year (or the
        // first one) with load scaled by growth.
        let src = data_years.iter().rev().find(|&&d| d <= y).copied().unwrap_or(first_data);
        if src != y {
            notes.push(format!("time series: {y} reuses clustering of {src}"));
        }
        let (set, c) = &by_year[&src];
        let g = (1.0 + load_growth).powi(y - src);
        td.weights.push(c.weights.clone());
        for s in set {
            let prof = &c.profiles[&s.entity];
            let (target, scale) = match s.kind {
                SeriesKind::Load => (&mut td.load, g),
                SeriesKind::Availability => (&mut td.availability, 1.0),
                SeriesKind::Import => (&mut td.imports, 1.0),
            };
            let scaled = prof.iter().map(|d| d.iter().map(|v| v * scale).collect()).collect();
            target.entry(s.entity.clone()).or_insert_with(Vec::new).push(scaled);
        }
    }
    for (what, map) in [("load", &td.load), ("availability", &td.availability), ("imports", &td.imports)] {
        for (k, p) in map {
            if p.len() != years.len() {
                return Err(IngestError::Config(format!(
                    "{what} {k}: series missing for some clustered years"
                )));
            }
        }
    }
    Ok((td, notes))
}

/// Parses, expands and validates every section of `manifest`, then applies
/// its scenario transform.
pub fn load_dataset(manifest: &DatasetManifest) -> Result<Loaded, IngestError> {
    load_dataset_with(manifest, manifest.scenario, seed_from_env())
}

pub fn load_dataset_with(
    manifest: &DatasetManifest,
    scenario: Scenario,
    seed: u64,
) -> Result<Loaded, IngestError> {
    for p in manifest.referenced_paths() {
        if !p.exists() {
            return Err(IngestError::Io {
                path: p,
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "referenced file not found"),
            });
        }
    }
    let topology: Topology = manifest.section("topology", &manifest.topology)?;
    let catalog: CatalogFile = manifest.section("catalog", &manifest.catalog)?;
    let assets: Vec<AssetSpec> = manifest.section("assets", &manifest.assets)?;
    let policies: PoliciesFile = manifest.section("policies", &manifest.policies)?;
    let sc: SupplyChainFile = if manifest.supply_chain.is_null() {
        SupplyChainFile::default()
    } else {
        manifest.section("supply_chain", &manifest.supply_chain)?
    };
    if policies.last_year < policies.first_year {
        return Err(IngestError::Config("policies: last_year before first_year".into()));
    }
    let years: Vec<i32> = (policies.first_year..=policies.last_year).collect();
    let mut notes = Vec::new();

    let (td, ts_notes) = match &manifest.time_series {
        TimeSeriesSpec::Representative { source } => {
            let f: RepresentativeFile = manifest.section("time_series", source)?;
            (representative(f, &years, policies.load_growth)?, Vec::new())
        }
        TimeSeriesSpec::Hourly {
            load,
            availability,
            imports,
            clustering,
        } => hourly(
            manifest,
            load,
            availability.as_ref(),
            imports.as_ref(),
            clustering,
            &years,
            policies.load_growth,
            seed,
        )?,
    };
    notes.extend(ts_notes);

    let technologies = catalog
        .technologies
        .iter()
        .map(|t| {
            Ok(Technology {
                id: t.id.clone(),
                kind: t.kind,
                capacity_density: t.capacity_density,
                elcc: t.elcc.expand(&years, &format!("technology {} elcc", t.id))?,
            })
        })
        .collect::<Result<Vec<_>, IngestError>>()?;
    let catalog = TechnologyCatalog {
        technologies,
        materials: catalog.materials,
        components: catalog.components,
        products: catalog.products,
    };

    let mut availability = BTreeMap::new();
    let mut model_assets = Vec::new();
    for a in assets {
        let tech = catalog.technologies.iter().find(|t| t.id == a.technology);
        let land = tech.is_some_and(|t| t.capacity_density.is_some());
        let field = a.field.clone().or_else(|| land.then(|| a.technology.clone()));
        let product = a.product.clone().or_else(|| {
            let mut ps = catalog.products.iter().filter(|p| p.technology == a.technology);
            match (a.class, ps.next(), ps.next()) {
                (AssetClass::Candidate, Some(p), None) => Some(p.id.clone()),
                _ => None,
            }
        });
        if tech.is_some_and(|t| t.kind == TechType::Renewable) {
            let keys = [a.id.clone(), format!("{}:{}", a.technology, a.zone), a.technology.clone()];
            if let Some(p) = keys.iter().find_map(|k| td.availability.get(k)) {
                availability.insert(a.id.clone(), p.clone());
            }
        }
        model_assets.push(GeneratorAsset {
            capex: a.capex.expand(&years, &format!("asset {} capex", a.id))?,
            fixed_om: a.fixed_om.expand(&years, &format!("asset {} fixed_om", a.id))?,
            id: a.id,
            zone: a.zone,
            technology: a.technology,
            class: a.class,
            capacity_mw: a.capacity_mw,
            product,
            storage: a.storage,
            lead_time: a.lead_time,
            lifetime: a.lifetime,
            retirement_year: a.retirement_year,
            field,
            var_cost: a.var_cost,
            recovery: a.recovery,
        });
    }

    let mut supply = BTreeMap::new();
    if let Some(s) = &sc.scaled {
        let national = s
            .national
            .iter()
            .map(|(m, v)| Ok((m.clone(), v.expand(&years, &format!("national supply {m}"))?)))
            .collect::<Result<BTreeMap<_, _>, IngestError>>()?;
        supply = scale_material_supply(&national, s.state_share, &s.sector_shares)?;
    }
    for (m, v) in &sc.supply {
        supply.insert(m.clone(), v.expand(&years, &format!("supply {m}"))?);
    }

    let rps = policies
        .rps
        .iter()
        .map(|(k, v)| Ok((k.clone(), v.expand(&years, &format!("rps {k}"))?)))
        .collect::<Result<BTreeMap<_, _>, IngestError>>()?;

    let mut model = SystemModel {
        topology,
        catalog,
        assets: model_assets,
        time: TimeStructure {
            years: years.clone(),
            days: td.days,
            weights: td.weights,
            hours: td.hours,
            discount_rate: policies.discount_rate,
        },
        scenario: ScenarioData {
            load: td.load,
            peak_load: Vec::new(),
            availability,
            reserve_margin: policies.reserve_margin.expand(&years, "reserve margin")?,
            rps,
            imports: td.imports,
        },
        supply_chain: SupplyChainData {
            supply,
            initial_stock: sc.initial_stock,
            field_area: sc.field_area,
        },
        penalties: policies.penalties,
    };
    model.scenario.peak_load = match &policies.peak_load {
        Some(s) => s.expand(&years, "peak load")?,
        None => (0..years.len()).map(|y| model.max_system_load(y)).collect(),
    };

    apply_scenario(&mut model, scenario)?;
    let mut report = validate(&model);
    if !report.is_ok() {
        return Err(IngestError::Validation(report));
    }
    report.warnings.extend(notes);
    Ok(Loaded { model, report })
}

/// Reads the manifest at `path` and loads it.
pub fn load_path(path: &Path, scenario: Option<Scenario>) -> Result<Loaded, IngestError> {
    let m = load_manifest(path)?;
    load_dataset_with(&m, scenario.unwrap_or(m.scenario), seed_from_env())
}
