//! Plan reports: construction from solved variable values, serialization to
//! a directory of JSON and CSV files, run comparison and conservation
//! re-checks that need nothing but the report and the model.

mod invariants;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::builder::Formulation;
use crate::model::{GeneratorAsset, SystemModel, TechType, VarKey, VarKind};

pub use invariants::{check_invariants, InvariantViolation};

pub const SCHEMA_VERSION: u32 = 1;

pub const REPORT_FILES: [&str; 6] = [
    "plan.json",
    "capacity.csv",
    "materials.csv",
    "fields.csv",
    "reliability.csv",
    "costs.csv",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("horizons differ: {a:?} vs {b:?}")]
    HorizonMismatch { a: Vec<i32>, b: Vec<i32> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitYear {
    pub unit: String,
    pub year: i32,
    pub d: f64,
    pub b: f64,
    pub r: f64,
    pub o: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub year: i32,
    pub technology: String,
    pub zone: String,
    pub operating_mw: f64,
    pub built_mw: f64,
    pub retired_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialRow {
    pub year: i32,
    pub material: String,
    pub supply: f64,
    pub recovered: f64,
    pub stock: f64,
    pub used: f64,
    /// Supply plus recovery plus stock not used this year.
    pub remaining: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    pub year: i32,
    pub field: String,
    pub zone: String,
    pub available_km2: f64,
    pub committed_km2: f64,
    pub returned_km2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityRow {
    pub year: i32,
    pub load_shed_mwh: f64,
    pub reserve_shortfall_mw: f64,
    pub rps_shortfall_mwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchRow {
    pub year: i32,
    pub technology: String,
    pub energy_mwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub year: i32,
    pub investment: f64,
    pub operation: f64,
    pub penalty: f64,
    pub total: f64,
}

/// How the plan was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub mode: String,
    pub status: String,
    pub lower_bound: Option<f64>,
    pub iterations: usize,
}

impl RunInfo {
    pub fn new(mode: &str, status: &str) -> RunInfo {
        RunInfo {
            mode: mode.into(),
            status: status.into(),
            lower_bound: None,
            iterations: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub schema_version: u32,
    pub model_digest: String,
    pub run: RunInfo,
    pub years: Vec<i32>,
    pub objective: f64,
    pub units: Vec<UnitYear>,
    pub capacity: Vec<CapacityRow>,
    pub materials: Vec<MaterialRow>,
    pub fields: Vec<FieldRow>,
    pub reliability: Vec<ReliabilityRow>,
    pub rps: BTreeMap<String, Vec<f64>>,
    pub dispatch: Vec<DispatchRow>,
    pub costs: Vec<CostRow>,
    /// Every variable value by key.
    pub values: BTreeMap<String, f64>,
}

fn clean(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

struct Lookup<'a>(&'a BTreeMap<String, f64>);

impl Lookup<'_> {
    fn get(&self, kind: VarKind, idx: &[&str], y: i32) -> f64 {
        self.0
            .get(&VarKey::new(kind, idx, y).to_string())
            .copied()
            .unwrap_or(0.0)
    }
}

fn density(model: &SystemModel, g: &GeneratorAsset) -> f64 {
    model
        .technology(&g.technology)
        .and_then(|t| t.capacity_density)
        .unwrap_or(f64::INFINITY)
}

/// Builds the report for a solution given as variable values by key.
pub fn build_report(
    model: &SystemModel,
    formulation: &Formulation,
    values: &BTreeMap<String, f64>,
    objective: f64,
    run: RunInfo,
) -> PlanReport {
    let values: BTreeMap<String, f64> = values.iter().map(|(k, v)| (k.clone(), clean(*v))).collect();
    let v = Lookup(&values);
    let years = formulation.years.clone();
    let mut units = Vec::new();
    let mut capacity = Vec::new();
    let mut materials = Vec::new();
    let mut fields = Vec::new();
    let mut reliability = Vec::new();
    let mut rps: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut dispatch = Vec::new();
    let mut costs = Vec::new();

    for (yi, &y) in years.iter().enumerate() {
        let weights = &model.time.weights[yi];
        for g in &model.assets {
            units.push(UnitYear {
                unit: g.id.clone(),
                year: y,
                d: v.get(VarKind::Decision, &[&g.id], y),
                b: v.get(VarKind::Build, &[&g.id], y),
                r: v.get(VarKind::Retire, &[&g.id], y),
                o: v.get(VarKind::Operate, &[&g.id], y),
            });
        }

        let mut cap: BTreeMap<(String, String), [f64; 3]> = BTreeMap::new();
        let mut energy: BTreeMap<String, f64> = BTreeMap::new();
        for g in &model.assets {
            let e = cap.entry((g.technology.clone(), g.zone.clone())).or_default();
            e[0] += g.capacity_mw * v.get(VarKind::Operate, &[&g.id], y);
            e[1] += g.capacity_mw * v.get(VarKind::Build, &[&g.id], y);
            e[2] += g.capacity_mw * v.get(VarKind::Retire, &[&g.id], y);
            let mut mwh = 0.0;
            for (t, d) in model.time.days.iter().enumerate() {
                for h in 1..=model.time.hours {
                    let hs = h.to_string();
                    let out = if model.tech_type(g) == TechType::Storage {
                        v.get(VarKind::Discharge, &[&g.id, d, &hs], y)
                    } else {
                        v.get(VarKind::GenOutput, &[&g.id, d, &hs], y)
                    };
                    mwh += weights[t] * out;
                }
            }
            *energy.entry(g.technology.clone()).or_default() += mwh;
        }
        for ((technology, zone), [op, built, retired]) in cap {
            capacity.push(CapacityRow {
                year: y,
                technology,
                zone,
                operating_mw: clean(op),
                built_mw: clean(built),
                retired_mw: clean(retired),
            });
        }
        for (technology, energy_mwh) in energy {
            dispatch.push(DispatchRow {
                year: y,
                technology,
                energy_mwh: clean(energy_mwh),
            });
        }

        for mat in &model.catalog.materials {
            let supply = model.supply_chain.supply.get(mat).map_or(0.0, |s| s[yi]);
            let recovered: f64 = model
                .assets
                .iter()
                .filter_map(|g| {
                    g.recovery
                        .get(mat)
                        .map(|rate| rate * g.capacity_mw * v.get(VarKind::Retire, &[&g.id], y))
                })
                .sum();
            let stock = v.get(VarKind::Stock, &[mat], y);
            let used = v.get(VarKind::MaterialUse, &[mat], y);
            materials.push(MaterialRow {
                year: y,
                material: mat.clone(),
                supply,
                recovered: clean(recovered),
                stock,
                used,
                remaining: clean(supply + recovered + stock - used),
            });
        }

        for (k, i) in model.field_pools() {
            let mut committed = 0.0;
            let mut returned = 0.0;
            for g in model
                .assets
                .iter()
                .filter(|g| g.field.as_deref() == Some(k.as_str()) && g.zone == i)
            {
                let per = g.capacity_mw / density(model, g);
                if g.is_candidate() {
                    committed += per * v.get(VarKind::Decision, &[&g.id], y);
                }
                returned += per * v.get(VarKind::Retire, &[&g.id], y);
            }
            fields.push(FieldRow {
                year: y,
                available_km2: v.get(VarKind::Field, &[&k, &i], y),
                field: k,
                zone: i,
                committed_km2: clean(committed),
                returned_km2: clean(returned),
            });
        }

        let mut shed = 0.0;
        for i in &model.topology.zones {
            for (t, d) in model.time.days.iter().enumerate() {
                for h in 1..=model.time.hours {
                    shed += weights[t] * v.get(VarKind::LoadShed, &[i, d, &h.to_string()], y);
                }
            }
        }
        let mut rps_total = 0.0;
        for k in model.scenario.rps.keys() {
            let e = v.get(VarKind::RpsShortfall, &[k], y);
            rps_total += e;
            rps.entry(k.clone()).or_default().push(e);
        }
        reliability.push(ReliabilityRow {
            year: y,
            load_shed_mwh: clean(shed),
            reserve_shortfall_mw: v.get(VarKind::ReserveShortfall, &[], y),
            rps_shortfall_mwh: clean(rps_total),
        });

        let mut row = CostRow {
            year: y,
            investment: 0.0,
            operation: 0.0,
            penalty: 0.0,
            total: 0.0,
        };
        for (key, coef) in formulation.objective(y) {
            let x = values.get(&key).copied().unwrap_or(0.0);
            let slot = match key.split('[').next().and_then(VarKind::from_prefix) {
                Some(VarKind::Decision) => &mut row.investment,
                Some(VarKind::LoadShed | VarKind::ReserveShortfall | VarKind::RpsShortfall) => &mut row.penalty,
                _ => &mut row.operation,
            };
            *slot += coef * x;
        }
        row.total = row.investment + row.operation + row.penalty;
        row.investment = clean(row.investment);
        row.operation = clean(row.operation);
        row.penalty = clean(row.penalty);
        row.total = clean(row.total);
        costs.push(row);
    }

    PlanReport {
        schema_version: SCHEMA_VERSION,
        model_digest: model.digest(),
        run,
        years,
        objective: clean(objective),
        units,
        capacity,
        materials,
        fields,
        reliability,
        rps,
        dispatch,
        costs,
        values,
    }
}

impl PlanReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<PlanReport, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// SHA-256 of `plan.json` as written.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn cost_total(&self) -> f64 {
        self.costs.iter().map(|c| c.total).sum()
    }

    pub fn capacity_csv(&self) -> String {
        let mut t = Table::new(&["year", "technology", "zone", "operating_mw", "built_mw", "retired_mw"]);
        for r in &self.capacity {
            t.row(&[
                r.year.to_string(),
                r.technology.clone(),
                r.zone.clone(),
                num(r.operating_mw),
                num(r.built_mw),
                num(r.retired_mw),
            ]);
        }
        t.finish()
    }

    pub fn materials_csv(&self) -> String {
        let mut t = Table::new(&["year", "material", "supply", "recovered", "stock", "used", "remaining"]);
        for r in &self.materials {
            t.row(&[
                r.year.to_string(),
                r.material.clone(),
                num(r.supply),
                num(r.recovered),
                num(r.stock),
                num(r.used),
                num(r.remaining),
            ]);
        }
        t.finish()
    }

    pub fn fields_csv(&self) -> String {
        let mut t = Table::new(&["year", "field", "zone", "available_km2", "committed_km2", "returned_km2"]);
        for r in &self.fields {
            t.row(&[
                r.year.to_string(),
                r.field.clone(),
                r.zone.clone(),
                num(r.available_km2),
                num(r.committed_km2),
                num(r.returned_km2),
            ]);
        }
        t.finish()
    }

    pub fn reliability_csv(&self) -> String {
        let mut t = Table::new(&["year", "load_shed_mwh", "reserve_shortfall_mw", "rps_shortfall_mwh"]);
        for r in &self.reliability {
            t.row(&[
                r.year.to_string(),
                num(r.load_shed_mwh),
                num(r.reserve_shortfall_mw),
                num(r.rps_shortfall_mwh),
            ]);
        }
        t.finish()
    }

    pub fn costs_csv(&self) -> String {
        let mut t = Table::new(&["year", "investment", "operation", "penalty", "total"]);
        for r in &self.costs {
            t.row(&[
                r.year.to_string(),
                num(r.investment),
                num(r.operation),
                num(r.penalty),
                num(r.total),
            ]);
        }
        t.finish()
    }

    /// Plain-text tables for the terminal.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} run, status {}, objective {}",
            self.run.mode,
            self.run.status,
            num(self.objective)
        );
        if let Some(lb) = self.run.lower_bound {
            let _ = writeln!(out, "lower bound {}", num(lb));
        }
        for (title, csv) in [
            ("operational capacity", self.capacity_csv()),
            ("materials", self.materials_csv()),
            ("fields", self.fields_csv()),
            ("reliability", self.reliability_csv()),
            ("costs", self.costs_csv()),
        ] {
            let _ = writeln!(out, "\n{title}");
            out.push_str(&align(&csv));
        }
        out
    }
}

/// Shortest round-trip decimal, with negative zero printed as `0`.
pub fn num(x: f64) -> String {
    format!("{}", clean(x))
}

struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Table {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        Table { w }
    }

    fn row(&mut self, cells: &[String]) {
        self.w.write_record(cells).expect("in-memory write");
    }

    fn finish(self) -> String {
        String::from_utf8(self.w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

fn align(csv_text: &str) -> String {
    let rows: Vec<Vec<&str>> = csv_text.lines().map(|l| l.split(',').collect()).collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:>w$}", w = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes the six report files into `dir`, creating it if needed.
pub fn write_report(report: &PlanReport, dir: &Path) -> Result<Vec<std::path::PathBuf>, ReportError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let contents = [
        report.to_json(),
        report.capacity_csv(),
        report.materials_csv(),
        report.fields_csv(),
        report.reliability_csv(),
        report.costs_csv(),
    ];
    let mut written = Vec::new();
    for (name, text) in REPORT_FILES.iter().zip(contents) {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_report(dir: &Path) -> Result<PlanReport, ReportError> {
    let path = dir.join("plan.json");
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    PlanReport::from_json(&text).map_err(|e| ReportError::Parse {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityDelta {
    pub technology: String,
    pub year: i32,
    pub a_mw: f64,
    pub b_mw: f64,
    pub delta_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostDelta {
    pub year: i32,
    pub investment: f64,
    pub operation: f64,
    pub penalty: f64,
    pub total: f64,
}

/// Differences `b - a` between two runs over the same horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiff {
    pub years: Vec<i32>,
    /// New capacity coming online, by technology and year.
    pub planned: Vec<CapacityDelta>,
    pub operating: Vec<CapacityDelta>,
    pub costs: Vec<CostDelta>,
    pub objective_a: f64,
    pub objective_b: f64,
}

impl RunDiff {
    pub fn is_zero(&self) -> bool {
        self.planned.iter().all(|d| d.delta_mw == 0.0)
            && self.operating.iter().all(|d| d.delta_mw == 0.0)
            && self.costs.iter().all(|d| d.total == 0.0)
    }

    /// Planned-capacity cells whose delta is nonzero.
    pub fn nonzero_planned(&self) -> Vec<&CapacityDelta> {
        self.planned.iter().filter(|d| d.delta_mw != 0.0).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "objective {} -> {} (delta {})",
            num(self.objective_a),
            num(self.objective_b),
            num(self.objective_b - self.objective_a)
        );
        for (title, rows) in [("planned capacity", &self.planned), ("operational capacity", &self.operating)] {
            let mut t = Table::new(&["technology", "year", "a_mw", "b_mw", "delta_mw"]);
            for d in rows {
                t.row(&[
                    d.technology.clone(),
                    d.year.to_string(),
                    num(d.a_mw),
                    num(d.b_mw),
                    num(d.delta_mw),
                ]);
            }
            let _ = writeln!(out, "\n{title}");
            out.push_str(&align(&t.finish()));
        }
        let mut t = Table::new(&["year", "investment", "operation", "penalty", "total"]);
        for d in &self.costs {
            t.row(&[
                d.year.to_string(),
                num(d.investment),
                num(d.operation),
                num(d.penalty),
                num(d.total),
            ]);
        }
        let _ = writeln!(out, "\ncosts");
        out.push_str(&align(&t.finish()));
        out
    }
}

fn by_tech(report: &PlanReport, pick: fn(&CapacityRow) -> f64) -> BTreeMap<(String, i32), f64> {
    let mut out = BTreeMap::new();
    for r in &report.capacity {
        *out.entry((r.technology.clone(), r.year)).or_insert(0.0) += pick(r);
    }
    out
}

fn deltas(a: &BTreeMap<(String, i32), f64>, b: &BTreeMap<(String, i32), f64>) -> Vec<CapacityDelta> {
    let mut keys: Vec<&(String, i32)> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|k| {
            let a_mw = a.get(k).copied().unwrap_or(0.0);
            let b_mw = b.get(k).copied().unwrap_or(0.0);
            CapacityDelta {
                technology: k.0.clone(),
                year: k.1,
                a_mw,
                b_mw,
                delta_mw: clean(b_mw - a_mw),
            }
        })
        .collect()
}

pub fn compare_reports(a: &PlanReport, b: &PlanReport) -> Result<RunDiff, ReportError> {
    if a.years != b.years {
        return Err(ReportError::HorizonMismatch {
            a: a.years.clone(),
            b: b.years.clone(),
        });
    }
    let planned = deltas(&by_tech(a, |r| r.built_mw), &by_tech(b, |r| r.built_mw));
    let operating = deltas(&by_tech(a, |r| r.operating_mw), &by_tech(b, |r| r.operating_mw));
    let costs = a
        .costs
        .iter()
        .zip(&b.costs)
        .map(|(x, y)| CostDelta {
            year: x.year,
            investment: clean(y.investment - x.investment),
            operation: clean(y.operation - x.operation),
            penalty: clean(y.penalty - x.penalty),
            total: clean(y.total - x.total),
        })
        .collect();
    Ok(RunDiff {
        years: a.years.clone(),
        planned,
        operating,
        costs,
        objective_a: a.objective,
        objective_b: b.objective,
    })
}

pub fn compare_runs(dir_a: &Path, dir_b: &Path) -> Result<RunDiff, ReportError> {
    compare_reports(&read_report(dir_a)?, &read_report(dir_b)?)
}
