//! Translation of a [`SystemModel`] into solver problems.
//!
//! [`Formulation`] generates every column and row of the horizon once, each
//! tagged with its year. Problems are then assembled over a year range: any
//! reference to a column from before the range becomes a free duplicate
//! column `z[<key>]` pinned by an equality row `link[<key>]`, whose dual is
//! the sensitivity of the range's cost to that incoming state value. The
//! monolithic problem is the full range; a stage is a single year plus a
//! cost-to-go column `alpha[<year>]`.

mod explain;
mod gen;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{MilpError, Sense, SparseProblem};
use crate::model::{validate, SystemModel, VarKey};

pub use explain::{explain_row, RowExplanation};
pub use gen::{adjusted_investment_cost, BuildOptions};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("model is invalid:\n{0}")]
    Invalid(crate::model::ValidationReport),
    #[error("year {0} is outside the horizon")]
    YearOutOfRange(i32),
    #[error("row {row} references undeclared column {col}")]
    Dangling { row: String, col: String },
    #[error(transparent)]
    Milp(#[from] MilpError),
}

/// Row families, one per constraint kind of the formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RowFamily {
    Material,
    Component,
    Supply,
    Stock,
    Product,
    Land,
    Field,
    Lead,
    Life,
    Once,
    Balance,
    ThermalCap,
    RenewableCap,
    Status,
    Reserve,
    Rps,
    Charge,
    Discharge,
    SocMax,
    SocBalance,
    SocStart,
    SocEnd,
}

impl RowFamily {
    pub const ALL: [RowFamily; 22] = [
        RowFamily::Material,
        RowFamily::Component,
        RowFamily::Supply,
        RowFamily::Stock,
        RowFamily::Product,
        RowFamily::Land,
        RowFamily::Field,
        RowFamily::Lead,
        RowFamily::Life,
        RowFamily::Once,
        RowFamily::Balance,
        RowFamily::ThermalCap,
        RowFamily::RenewableCap,
        RowFamily::Status,
        RowFamily::Reserve,
        RowFamily::Rps,
        RowFamily::Charge,
        RowFamily::Discharge,
        RowFamily::SocMax,
        RowFamily::SocBalance,
        RowFamily::SocStart,
        RowFamily::SocEnd,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            RowFamily::Material => "mat",
            RowFamily::Component => "comp",
            RowFamily::Supply => "supply",
            RowFamily::Stock => "stock",
            RowFamily::Product => "prod",
            RowFamily::Land => "land",
            RowFamily::Field => "field",
            RowFamily::Lead => "lead",
            RowFamily::Life => "life",
            RowFamily::Once => "once",
            RowFamily::Balance => "bal",
            RowFamily::ThermalCap => "cap",
            RowFamily::RenewableCap => "avail",
            RowFamily::Status => "status",
            RowFamily::Reserve => "rsv",
            RowFamily::Rps => "rpsreq",
            RowFamily::Charge => "chg",
            RowFamily::Discharge => "dis",
            RowFamily::SocMax => "socmax",
            RowFamily::SocBalance => "socbal",
            RowFamily::SocStart => "soc1",
            RowFamily::SocEnd => "socend",
        }
    }

    pub fn from_prefix(p: &str) -> Option<RowFamily> {
        RowFamily::ALL.iter().copied().find(|f| f.prefix() == p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColSpec {
    pub key: VarKey,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowSpec {
    pub key: String,
    pub family: RowFamily,
    pub year: i32,
    pub sense: Sense,
    pub rhs: f64,
    pub terms: Vec<(VarKey, f64)>,
}

/// Values of the cross-stage variables, ordered by key string.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub keys: Vec<String>,
    pub values: Vec<f64>,
}

impl StateVector {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.keys.iter().position(|k| k == key).map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// One year of the decomposition (or a tail of years).
#[derive(Debug, Clone)]
pub struct StageProblem {
    pub year: i32,
    pub problem: SparseProblem,
    /// Incoming state keys, sorted by key string.
    pub state_in: Vec<String>,
    /// Column index of `z[<key>]` for each incoming state key.
    pub z_columns: Vec<usize>,
    /// Row index of `link[<key>]` for each incoming state key.
    pub link_rows: Vec<usize>,
    /// Keys handed to the next year, sorted by key string.
    pub state_out: Vec<String>,
    /// Cost-to-go column; absent in the final year and in tail problems.
    pub alpha: Option<usize>,
    pub cut_count: usize,
}

pub fn z_key(state: &str) -> String {
    format!("z[{state}]")
}

pub fn link_key(state: &str) -> String {
    format!("link[{state}]")
}

impl StageProblem {
    /// Pins the incoming state to `state` (keys must match `state_in`).
    pub fn set_state(&mut self, state: &StateVector) {
        debug_assert_eq!(state.keys, self.state_in);
        for (&r, &v) in self.link_rows.iter().zip(&state.values) {
            self.problem.set_rhs(r, v);
        }
    }

    /// Column index holding the value of `key` inside this stage, either a
    /// local column or the duplicate of an incoming one.
    pub fn column_of(&self, key: &str) -> Option<usize> {
        self.problem
            .column_index(key)
            .or_else(|| self.problem.column_index(&z_key(key)))
    }

    /// Outgoing state read from a primal vector of this stage.
    pub fn read_state_out(&self, x: &[f64]) -> StateVector {
        StateVector {
            keys: self.state_out.clone(),
            values: self
                .state_out
                .iter()
                .map(|k| self.column_of(k).map_or(0.0, |c| x[c]))
                .collect(),
        }
    }

    /// Adds `alpha >= intercept + slope'(m - trial)` over the outgoing state.
    pub fn add_cut(
        &mut self,
        intercept: f64,
        slope: &[f64],
        trial: &[f64],
    ) -> Result<(), BuildError> {
        let alpha = self.alpha.expect("stage without cost-to-go cannot take cuts");
        let mut terms = vec![(alpha, 1.0)];
        let mut rhs = intercept;
        for ((k, &mu), &m) in self.state_out.iter().zip(slope).zip(trial) {
            if mu == 0.0 {
                continue;
            }
            let c = self.column_of(k).ok_or_else(|| BuildError::Dangling {
                row: "cut".into(),
                col: k.clone(),
            })?;
            terms.push((c, -mu));
            rhs -= mu * m;
        }
        let key = format!("cut[{},{}]", self.year, self.cut_count);
        self.problem.add_row(key, Sense::Ge, rhs, &terms)?;
        self.problem.finalize();
        self.cut_count += 1;
        Ok(())
    }
}

/// All columns and rows of a model, generated once.
#[derive(Debug, Clone)]
pub struct Formulation {
    pub years: Vec<i32>,
    pub columns: Vec<ColSpec>,
    pub rows: Vec<RowSpec>,
    col_of: HashMap<VarKey, usize>,
    pub warnings: Vec<String>,
}

impl Formulation {
    pub fn new(model: &SystemModel, opts: BuildOptions) -> Result<Formulation, BuildError> {
        let report = validate(model);
        if !report.is_ok() {
            return Err(BuildError::Invalid(report));
        }
        let g = gen::Gen { m: model, opts };
        let mut columns = Vec::new();
        let mut rows = Vec::new();
        for yi in 0..model.time.years.len() {
            columns.extend(g.columns(yi));
            rows.extend(g.rows(yi));
        }
        let col_of: HashMap<VarKey, usize> =
            columns.iter().enumerate().map(|(i, c)| (c.key.clone(), i)).collect();
        for r in &rows {
            for (k, _) in &r.terms {
                if !col_of.contains_key(k) {
                    return Err(BuildError::Dangling {
                        row: r.key.clone(),
                        col: k.to_string(),
                    });
                }
            }
        }
        let mut warnings = report.warnings;
        let last = *model.time.years.last().unwrap();
        for a in model.assets.iter().filter(|a| a.is_candidate()) {
            if model.first_year() + a.lead_time.unwrap_or(0) as i32 > last {
                warnings.push(format!("candidate {} can never operate inside the horizon", a.id));
            }
        }
        Ok(Formulation {
            years: model.time.years.clone(),
            columns,
            rows,
            col_of,
            warnings,
        })
    }

    pub fn column(&self, key: &VarKey) -> Option<&ColSpec> {
        self.col_of.get(key).map(|&i| &self.columns[i])
    }

    fn year_index(&self, y: i32) -> Result<usize, BuildError> {
        self.years.iter().position(|&v| v == y).ok_or(BuildError::YearOutOfRange(y))
    }

    /// Keys from years before `y` referenced by rows of year `y` or later.
    pub fn state_in(&self, y: i32) -> Vec<String> {
        let mut keys: BTreeSet<String> = BTreeSet::new();
        for r in self.rows.iter().filter(|r| r.year >= y) {
            for (k, _) in &r.terms {
                if k.year < y {
                    keys.insert(k.to_string());
                }
            }
        }
        keys.into_iter().collect()
    }

    /// Assembles the problem over years `from..=to`.
    fn assemble(&self, from: i32, to: i32, with_alpha: bool) -> Result<StageProblem, BuildError> {
        let mut p = SparseProblem::new();
        let mut local: HashMap<&VarKey, usize> = HashMap::new();
        for c in self.columns.iter().filter(|c| c.key.year >= from && c.key.year <= to) {
            let idx = p.add_column(c.key.to_string(), c.lower, c.upper, c.cost, c.integer)?;
            local.insert(&c.key, idx);
        }
        let state_in = self.state_in(from);
        let mut z_columns = Vec::with_capacity(state_in.len());
        let mut z_of: HashMap<String, usize> = HashMap::new();
        for k in &state_in {
            let idx = p.add_column(z_key(k), f64::NEG_INFINITY, f64::INFINITY, 0.0, false)?;
            z_columns.push(idx);
            z_of.insert(k.clone(), idx);
        }
        let mut link_rows = Vec::with_capacity(state_in.len());
        for (k, &z) in state_in.iter().zip(&z_columns) {
            link_rows.push(p.add_row(link_key(k), Sense::Eq, 0.0, &[(z, 1.0)])?);
        }
        for r in self.rows.iter().filter(|r| r.year >= from && r.year <= to) {
            let terms: Vec<(usize, f64)> = r
                .terms
                .iter()
                .map(|(k, v)| {
                    let idx = if k.year < from {
                        z_of[&k.to_string()]
                    } else {
                        local[k]
                    };
                    (idx, *v)
                })
                .collect();
            p.add_row(r.key.clone(), r.sense, r.rhs, &terms)?;
        }
        let last = *self.years.last().unwrap();
        let state_out = if to < last { self.state_in(to + 1) } else { Vec::new() };
        let alpha = if with_alpha && to < last {
            Some(p.add_column(format!("alpha[{to}]"), 0.0, f64::INFINITY, 1.0, false)?)
        } else {
            None
        };
        p.finalize();
        Ok(StageProblem {
            year: from,
            problem: p,
            state_in,
            z_columns,
            link_rows,
            state_out,
            alpha,
            cut_count: 0,
        })
    }

    pub fn monolithic(&self) -> Result<SparseProblem, BuildError> {
        let (a, b) = (self.years[0], *self.years.last().unwrap());
        Ok(self.assemble(a, b, false)?.problem)
    }

    /// The single-year stage problem of year `y`.
    pub fn stage(&self, y: i32) -> Result<StageProblem, BuildError> {
        self.year_index(y)?;
        self.assemble(y, y, true)
    }

    /// Years `y..=last` as one problem with incoming state, no cost-to-go.
    pub fn tail(&self, y: i32) -> Result<StageProblem, BuildError> {
        self.year_index(y)?;
        self.assemble(y, *self.years.last().unwrap(), false)
    }

    /// Objective coefficients of the columns of year `y`, keyed by name.
    pub fn objective(&self, y: i32) -> BTreeMap<String, f64> {
        self.columns
            .iter()
            .filter(|c| c.key.year == y && c.cost != 0.0)
            .map(|c| (c.key.to_string(), c.cost))
            .collect()
    }

    pub fn rows_of(&self, y: i32, families: &[RowFamily]) -> Vec<&RowSpec> {
        self.rows
            .iter()
            .filter(|r| r.year == y && families.contains(&r.family))
            .collect()
    }
}

fn year_rows(model: &SystemModel, y: i32, f: impl Fn(&gen::Gen, usize) -> Vec<RowSpec>) -> Result<Vec<RowSpec>, BuildError> {
    let yi = model.year_index(y).ok_or(BuildError::YearOutOfRange(y))?;
    let g = gen::Gen {
        m: model,
        opts: BuildOptions::default(),
    };
    Ok(f(&g, yi))
}

/// Objective coefficients of every column of year `y`.
pub fn build_objective(model: &SystemModel, y: i32) -> Result<BTreeMap<String, f64>, BuildError> {
    let yi = model.year_index(y).ok_or(BuildError::YearOutOfRange(y))?;
    let g = gen::Gen {
        m: model,
        opts: BuildOptions::default(),
    };
    Ok(g.objective(yi))
}

/// Material, manufacturing, land, lead-time and lifetime rows of year `y`.
pub fn build_sc_constraints(model: &SystemModel, y: i32) -> Result<Vec<RowSpec>, BuildError> {
    year_rows(model, y, |g, yi| g.sc_rows(yi))
}

/// Balance, capacity, status, reserve and RPS rows of year `y`.
pub fn build_gep_constraints(model: &SystemModel, y: i32) -> Result<Vec<RowSpec>, BuildError> {
    year_rows(model, y, |g, yi| g.gep_rows(yi))
}

/// Storage rows of year `y`.
pub fn build_storage_constraints(model: &SystemModel, y: i32) -> Result<Vec<RowSpec>, BuildError> {
    year_rows(model, y, |g, yi| g.storage_rows(yi))
}

pub fn build_monolithic(model: &SystemModel) -> Result<SparseProblem, BuildError> {
    Formulation::new(model, BuildOptions::default())?.monolithic()
}

pub fn build_stage(model: &SystemModel, y: i32) -> Result<StageProblem, BuildError> {
    Formulation::new(model, BuildOptions::default())?.stage(y)
}
