//! Generic sparse LP/MILP kernel.
//!
//! [`solve_lp`] runs a bounded-variable primal simplex and reports row duals
//! as `d objective / d rhs`. [`solve_milp`] runs best-bound branch-and-bound
//! on top of it. External solvers can be plugged in through [`Backend`].

mod bnb;
pub mod lp_format;
mod problem;
mod simplex;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use problem::{Column, Row, Sense, SparseProblem};
pub use simplex::PivotRule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("column {key}: invalid bounds [{lower}, {upper}]")]
    InvalidBounds { key: String, lower: f64, upper: f64 },
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("duplicate column key {0}")]
    DuplicateColumn(String),
    #[error("duplicate row key {0}")]
    DuplicateRow(String),
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("problem must be finalized before solving")]
    NotFinalized,
    #[error("incumbent length {got} does not match {expected} columns")]
    IncumbentLength { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NodeLimit,
}

/// Proof attached to an infeasible or unbounded outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Row multipliers of the phase-one problem (one per row).
    Farkas(Vec<f64>),
    /// Improving direction over the columns.
    Ray(Vec<f64>),
}

/// How duals are recovered from a problem with integrality marks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DualMode {
    /// Drop integrality and solve the plain LP relaxation.
    Relaxed,
    /// Fix integer columns at the incumbent and solve the remaining LP.
    FixedIntegers,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub feasibility_tol: f64,
    /// Relative tolerance for the strong-duality check of LP solves.
    pub optimality_tol: f64,
    /// Relative gap at which branch-and-bound stops.
    pub mip_gap: f64,
    pub integrality_tol: f64,
    pub iteration_limit: usize,
    pub node_limit: usize,
    /// Use Bland's rule throughout (reproducible pivot sequences).
    pub deterministic: bool,
    pub dual_mode: DualMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feasibility_tol: 1e-6,
            optimality_tol: 1e-6,
            mip_gap: 1e-4,
            integrality_tol: 1e-6,
            iteration_limit: 200_000,
            node_limit: 100_000,
            deterministic: false,
            dual_mode: DualMode::Relaxed,
        }
    }
}

impl SolverOptions {
    pub(crate) fn lp_settings(&self) -> simplex::LpSettings {
        simplex::LpSettings {
            rule: if self.deterministic {
                PivotRule::Bland
            } else {
                PivotRule::Dantzig
            },
            feasibility_tol: self.feasibility_tol,
            iteration_limit: self.iteration_limit,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub nodes: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: f64,
    /// Best proven lower bound (equals `objective` for optimal LP solves).
    pub bound: f64,
    /// Primal values indexed like the problem's columns.
    pub primal: Vec<f64>,
    /// Row duals, present only when no integrality mark was active.
    pub duals: Option<Vec<f64>>,
    pub reduced_costs: Option<Vec<f64>>,
    pub certificate: Option<Certificate>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn value(&self, problem: &SparseProblem, key: &str) -> Option<f64> {
        problem.column_index(key).and_then(|i| self.primal.get(i).copied())
    }

    pub fn dual(&self, problem: &SparseProblem, key: &str) -> Option<f64> {
        let i = problem.row_index(key)?;
        self.duals.as_ref().map(|d| d[i])
    }

    pub fn primal_by_key(&self, problem: &SparseProblem) -> BTreeMap<String, f64> {
        problem
            .columns()
            .iter()
            .zip(&self.primal)
            .map(|(c, v)| (c.key.clone(), *v))
            .collect()
    }

    pub fn duals_by_key(&self, problem: &SparseProblem) -> Option<BTreeMap<String, f64>> {
        self.duals.as_ref().map(|d| {
            problem
                .rows()
                .iter()
                .zip(d)
                .map(|(r, v)| (r.key.clone(), *v))
                .collect()
        })
    }

    /// Relative gap between primal and dual objective of an LP solve.
    ///
    /// The dual objective is `b'y + sum_j d_j x_j` over columns resting at a
    /// bound, which equals the primal objective at an optimal basis.
    pub fn duality_gap(&self, problem: &SparseProblem) -> Option<f64> {
        let y = self.duals.as_ref()?;
        let d = self.reduced_costs.as_ref()?;
        let dual_obj = problem.objective_offset
            + problem.rows().iter().zip(y).map(|(r, y)| r.rhs * y).sum::<f64>()
            + d.iter().zip(&self.primal).map(|(d, x)| d * x).sum::<f64>();
        Some((self.objective - dual_obj).abs() / (1.0 + self.objective.abs()))
    }
}

/// Interface shared by the built-in kernel and external solver adapters.
pub trait Backend: Sync {
    fn solve_lp(&self, problem: &SparseProblem, options: &SolverOptions) -> SolveResult;
    fn solve_milp(&self, problem: &SparseProblem, options: &SolverOptions) -> SolveResult;
}

/// The built-in simplex / branch-and-bound kernel.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinBackend;

impl Backend for BuiltinBackend {
    fn solve_lp(&self, problem: &SparseProblem, options: &SolverOptions) -> SolveResult {
        solve_lp(problem, options)
    }

    fn solve_milp(&self, problem: &SparseProblem, options: &SolverOptions) -> SolveResult {
        solve_milp(problem, options)
    }
}

/// Solves the LP relaxation of `problem` (integrality marks are ignored).
pub fn solve_lp(problem: &SparseProblem, options: &SolverOptions) -> SolveResult {
    let start = Instant::now();
    let mut owned;
    let problem = if problem.is_finalized() {
        problem
    } else {
        owned = problem.clone();
        owned.finalize();
        &owned
    };
    let out = simplex::solve(problem, None, &options.lp_settings());
    let optimal = out.status == SolveStatus::Optimal;
    SolveResult {
        status: out.status,
        objective: out.objective,
        bound: out.objective,
        primal: out.x,
        duals: optimal.then_some(out.duals),
        reduced_costs: optimal.then_some(out.reduced_costs),
        certificate: out.certificate,
        stats: SolveStats {
            iterations: out.iterations,
            nodes: 0,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    }
}

/// Solves `problem` honoring integrality marks. Problems without integer
/// columns are passed to [`solve_lp`] and keep their duals.
pub fn solve_milp(problem: &SparseProblem, options: &SolverOptions) -> SolveResult {
    if !problem.has_integers() {
        return solve_lp(problem, options);
    }
    let mut owned;
    let problem = if problem.is_finalized() {
        problem
    } else {
        owned = problem.clone();
        owned.finalize();
        &owned
    };
    bnb::branch_and_bound(problem, options)
}

/// LP duals for a problem whose integer part has been decided.
///
/// Under [`DualMode::Relaxed`] the incumbent is ignored and the plain LP
/// relaxation is solved. Under [`DualMode::FixedIntegers`] integer columns
/// are fixed at the rounded incumbent values first.
pub fn extract_duals_at_fixed_integers(
    problem: &SparseProblem,
    incumbent: &[f64],
    options: &SolverOptions,
) -> Result<SolveResult, MilpError> {
    if incumbent.len() != problem.num_columns() {
        return Err(MilpError::IncumbentLength {
            got: incumbent.len(),
            expected: problem.num_columns(),
        });
    }
    let mut relaxed = problem.relaxed();
    if options.dual_mode == DualMode::FixedIntegers {
        for (j, col) in problem.columns().iter().enumerate() {
            if col.integer {
                let v = incumbent[j].round();
                relaxed.set_bounds(j, v, v);
            }
        }
    }
    Ok(solve_lp(&relaxed, options))
}
