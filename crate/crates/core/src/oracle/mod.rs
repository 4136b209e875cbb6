//! Reference solutions: the monolithic problem in one piece, and exhaustive
//! enumeration of integer investment schedules for tiny instances.

use rayon::prelude::*;
use thiserror::Error;

use crate::builder::{BuildError, BuildOptions, Formulation};
use crate::milp::{solve_lp, solve_milp, SolveResult, SolveStatus, SolverOptions};
use crate::model::SystemModel;
use crate::report::{build_report, PlanReport, RunInfo};

/// Most integer decision columns [`enumerate_tiny`] will take on.
pub const MAX_ENUMERATED_DECISIONS: usize = 12;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("monolithic problem is {0:?}")]
    Unsolved(SolveStatus),
    #[error("node limit reached with bound {bound} and {}", match incumbent {
        Some(v) => format!("incumbent {v}"),
        None => "no incumbent".to_string(),
    })]
    NodeLimit { incumbent: Option<f64>, bound: f64 },
    #[error("{got} integer decisions exceed the enumeration cap of {cap}")]
    TooManyDecisions { got: usize, cap: usize },
    #[error("no enumerated schedule is feasible")]
    NoFeasibleSchedule,
}

#[derive(Debug, Clone, Default)]
pub struct OracleOptions {
    pub solver: SolverOptions,
    pub build: BuildOptions,
}

pub fn solve_monolithic(model: &SystemModel, options: &OracleOptions) -> Result<(PlanReport, SolveResult), OracleError> {
    let formulation = Formulation::new(model, options.build)?;
    let problem = formulation.monolithic()?;
    let res = solve_milp(&problem, &options.solver);
    match res.status {
        SolveStatus::Optimal => {}
        SolveStatus::NodeLimit | SolveStatus::IterationLimit if problem.has_integers() => {
            let incumbent = (!res.primal.is_empty() && res.objective.is_finite()).then_some(res.objective);
            return Err(OracleError::NodeLimit {
                incumbent,
                bound: res.bound,
            });
        }
        s => return Err(OracleError::Unsolved(s)),
    }
    let values = res.primal_by_key(&problem);
    let mut run = RunInfo::new("monolithic", "optimal");
    run.lower_bound = Some(res.bound);
    run.iterations = res.stats.iterations;
    let report = build_report(model, &formulation, &values, res.objective, run);
    Ok((report, res))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub objective: f64,
    pub lp_solves: usize,
    /// Decision keys set to 1 in the best schedule.
    pub schedule: Vec<String>,
}

/// Exact optimum by fixing every integer decision column to each admissible
/// schedule (each candidate decided in one open year, or never) and solving
/// the remaining LP.
pub fn enumerate_tiny(model: &SystemModel, options: &OracleOptions) -> Result<Enumeration, OracleError> {
    let formulation = Formulation::new(model, options.build)?;
    let problem = formulation.monolithic()?;
    let integer: Vec<usize> = (0..problem.num_columns())
        .filter(|&j| problem.column(j).integer)
        .collect();
    if integer.len() > MAX_ENUMERATED_DECISIONS {
        return Err(OracleError::TooManyDecisions {
            got: integer.len(),
            cap: MAX_ENUMERATED_DECISIONS,
        });
    }

    // Integer decisions grouped by unit; at most one of each group is 1.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last_unit = None;
    let mut sorted = integer.clone();
    sorted.sort_by(|&a, &b| problem.column(a).key.cmp(&problem.column(b).key));
    for j in sorted {
        let unit = unit_of(&problem.column(j).key);
        if last_unit.as_deref() != Some(unit) {
            groups.push(Vec::new());
            last_unit = Some(unit.to_string());
        }
        groups.last_mut().unwrap().push(j);
    }

    let mut schedules: Vec<Vec<usize>> = vec![Vec::new()];
    for g in &groups {
        let mut next = Vec::with_capacity(schedules.len() * (g.len() + 1));
        for s in &schedules {
            next.push(s.clone());
            for &j in g {
                let mut t = s.clone();
                t.push(j);
                next.push(t);
            }
        }
        schedules = next;
    }

    let base = problem.relaxed();
    let results: Vec<Option<(f64, Vec<usize>)>> = schedules
        .par_iter()
        .map(|on| {
            let mut p = base.clone();
            for &j in &integer {
                let v = if on.contains(&j) { 1.0 } else { 0.0 };
                p.set_bounds(j, v, v);
            }
            let r = solve_lp(&p, &options.solver);
            r.is_optimal().then(|| (r.objective, on.clone()))
        })
        .collect();

    let lp_solves = results.len();
    let best = results
        .into_iter()
        .flatten()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or(OracleError::NoFeasibleSchedule)?;
    Ok(Enumeration {
        objective: best.0,
        lp_solves,
        schedule: best.1.iter().map(|&j| problem.column(j).key.clone()).collect(),
    })
}

fn unit_of(key: &str) -> &str {
    key.split_once('[')
        .and_then(|(_, rest)| rest.split(',').next())
        .unwrap_or(key)
}
