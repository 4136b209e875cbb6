//! Nested Benders decomposition over planning years.
//!
//! Each iteration runs a forward pass that solves the year stages in order
//! with the incoming state pinned to the previous stage's decisions, then a
//! backward pass that re-solves every stage's LP relaxation at that state
//! and turns the duals of the state-linking rows into an optimality cut for
//! the preceding stage. The lower bound is the first stage's value under its
//! cuts; the upper bound is the best true trajectory cost seen so far.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builder::{BuildError, BuildOptions, Formulation, StageProblem, StateVector};
use crate::milp::{Backend, BuiltinBackend, Certificate, SolveStatus, SolverOptions};
use crate::model::SystemModel;
use crate::report::{build_report, PlanReport, RunInfo};

#[derive(Debug, Error)]
pub enum NbdError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("stage {year} is {status:?} at the incoming state")]
    StageFailed {
        year: i32,
        status: SolveStatus,
        certificate: Option<Certificate>,
    },
    #[error("LP relaxation of stage {year} is {status:?}; every stage should be feasible at any state")]
    RelaxationFailed { year: i32, status: SolveStatus },
    #[error("cut checkpoint: {0}")]
    Checkpoint(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendersCut {
    /// Year whose cost-to-go the cut bounds (the cut lives in that stage).
    pub year: i32,
    /// Relaxed value of the following stage at the trial point.
    pub intercept: f64,
    /// Subgradient over the stage's outgoing state keys.
    pub slope: Vec<f64>,
    pub trial: Vec<f64>,
    pub iteration: usize,
}

impl BendersCut {
    /// Cut value at state `m`.
    pub fn eval(&self, m: &[f64]) -> f64 {
        self.intercept
            + self
                .slope
                .iter()
                .zip(m.iter().zip(&self.trial))
                .map(|(mu, (x, t))| mu * (x - t))
                .sum::<f64>()
    }

    fn constant(&self) -> f64 {
        self.intercept - self.slope.iter().zip(&self.trial).map(|(a, b)| a * b).sum::<f64>()
    }

    fn same_as(&self, other: &BendersCut) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        close(self.constant(), other.constant())
            && self.slope.len() == other.slope.len()
            && self.slope.iter().zip(&other.slope).all(|(a, b)| close(*a, *b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NbdStatus {
    Converged,
    GapRemaining,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub nu: usize,
    pub stage_objectives: Vec<f64>,
    /// Best upper bound so far; `None` while no trajectory exists.
    pub ub: Option<f64>,
    pub lb: f64,
    pub gap: Option<f64>,
    pub wall_time_s: f64,
    pub stage_times: Vec<f64>,
    pub cuts_added: usize,
}

#[derive(Debug, Clone)]
pub struct NbdOptions {
    pub epsilon: f64,
    /// Interpret `epsilon` relative to `max(1, |UB|)`.
    pub relative: bool,
    pub max_iters: usize,
    pub solver: SolverOptions,
    pub build: BuildOptions,
}

impl Default for NbdOptions {
    fn default() -> Self {
        NbdOptions {
            epsilon: 1e-6,
            relative: true,
            max_iters: 50,
            solver: SolverOptions::default(),
            build: BuildOptions::default(),
        }
    }
}

/// Result of one forward pass.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Incoming state of each stage.
    pub states: Vec<StateVector>,
    /// Stage objectives including the cost-to-go column.
    pub stage_objectives: Vec<f64>,
    /// Stage costs excluding the cost-to-go column.
    pub stage_costs: Vec<f64>,
    pub cost: f64,
    /// Every stage-local column value by key.
    pub values: BTreeMap<String, f64>,
    pub stage_times: Vec<f64>,
    /// Largest relative MILP gap among the stage solves.
    pub stage_gap: f64,
}

pub struct NbdEngine<'a> {
    pub formulation: Formulation,
    pub stages: Vec<StageProblem>,
    pub pools: Vec<Vec<BendersCut>>,
    backend: &'a dyn Backend,
    solver: SolverOptions,
}

static BUILTIN: BuiltinBackend = BuiltinBackend;

impl<'a> NbdEngine<'a> {
    pub fn new(model: &SystemModel, options: &NbdOptions) -> Result<NbdEngine<'static>, NbdError> {
        NbdEngine::with_backend(model, options, &BUILTIN)
    }

    pub fn with_backend(
        model: &SystemModel,
        options: &NbdOptions,
        backend: &'a dyn Backend,
    ) -> Result<NbdEngine<'a>, NbdError> {
        let formulation = Formulation::new(model, options.build)?;
        let stages = formulation
            .years
            .iter()
            .map(|&y| formulation.stage(y))
            .collect::<Result<Vec<_>, _>>()?;
        let pools = vec![Vec::new(); stages.len()];
        Ok(NbdEngine {
            formulation,
            stages,
            pools,
            backend,
            solver: options.solver.clone(),
        })
    }

    pub fn years(&self) -> &[i32] {
        &self.formulation.years
    }

    /// Solves the stages in order, each at the previous stage's state.
    pub fn forward_pass(&mut self) -> Result<Trajectory, NbdError> {
        let n = self.stages.len();
        let mut states = Vec::with_capacity(n);
        let mut stage_objectives = Vec::with_capacity(n);
        let mut stage_costs = Vec::with_capacity(n);
        let mut stage_times = Vec::with_capacity(n);
        let mut values = BTreeMap::new();
        let mut stage_gap: f64 = 0.0;
        let mut incoming = StateVector::default();
        for stage in &mut self.stages {
            stage.set_state(&incoming);
            let start = Instant::now();
            let res = self.backend.solve_milp(&stage.problem, &self.solver);
            stage_times.push(start.elapsed().as_secs_f64());
            let usable = res.is_optimal()
                || (matches!(res.status, SolveStatus::NodeLimit | SolveStatus::IterationLimit)
                    && stage.problem.has_integers()
                    && !res.primal.is_empty());
            if !usable {
                return Err(NbdError::StageFailed {
                    year: stage.year,
                    status: res.status,
                    certificate: res.certificate,
                });
            }
            stage_gap = stage_gap.max((res.objective - res.bound) / res.objective.abs().max(1.0));
            let alpha = stage.alpha.map_or(0.0, |a| res.primal[a]);
            stage_objectives.push(res.objective);
            stage_costs.push(res.objective - alpha);
            for (j, col) in stage.problem.columns().iter().enumerate() {
                if !col.key.starts_with("z[") && !col.key.starts_with("alpha[") {
                    values.insert(col.key.clone(), res.primal[j]);
                }
            }
            states.push(incoming);
            incoming = stage.read_state_out(&res.primal);
        }
        let cost = stage_costs.iter().sum();
        Ok(Trajectory {
            states,
            stage_objectives,
            stage_costs,
            cost,
            values,
            stage_times,
            stage_gap,
        })
    }

    /// Re-solves stages `Y..2` relaxed at the trajectory and adds one cut per
    /// stage to the pool of its predecessor. Returns the number of new cuts.
    pub fn backward_pass(&mut self, traj: &Trajectory, iteration: usize) -> Result<usize, NbdError> {
        let mut added = 0;
        for s in (1..self.stages.len()).rev() {
            let stage = &mut self.stages[s];
            stage.set_state(&traj.states[s]);
            let relaxed = stage.problem.relaxed();
            let res = self.backend.solve_lp(&relaxed, &self.solver);
            let Some(duals) = res.duals.as_ref().filter(|_| res.is_optimal()) else {
                return Err(NbdError::RelaxationFailed {
                    year: stage.year,
                    status: res.status,
                });
            };
            let slope: Vec<f64> = stage.link_rows.iter().map(|&r| duals[r]).collect();
            let cut = BendersCut {
                year: self.stages[s - 1].year,
                intercept: res.objective,
                slope,
                trial: traj.states[s].values.clone(),
                iteration,
            };
            if self.add_cut(s - 1, cut)? {
                added += 1;
            }
        }
        Ok(added)
    }

    /// Adds `cut` to stage `s` unless an identical one is present.
    pub fn add_cut(&mut self, s: usize, cut: BendersCut) -> Result<bool, NbdError> {
        if self.pools[s].iter().any(|c| c.same_as(&cut)) {
            return Ok(false);
        }
        self.stages[s].add_cut(cut.intercept, &cut.slope, &cut.trial)?;
        self.pools[s].push(cut);
        Ok(true)
    }

    /// Bound from the first stage under its current cuts.
    pub fn compute_lower_bound(&mut self) -> Result<f64, NbdError> {
        let stage = &mut self.stages[0];
        stage.set_state(&StateVector::default());
        let res = self.backend.solve_milp(&stage.problem, &self.solver);
        match res.status {
            SolveStatus::Optimal | SolveStatus::NodeLimit | SolveStatus::IterationLimit
                if res.bound.is_finite() =>
            {
                Ok(res.bound)
            }
            status => Err(NbdError::StageFailed {
                year: stage.year,
                status,
                certificate: res.certificate,
            }),
        }
    }

    pub fn cut_count(&self) -> usize {
        self.pools.iter().map(Vec::len).sum()
    }

    pub fn checkpoint(&self) -> CutCheckpoint {
        CutCheckpoint {
            years: self.years().to_vec(),
            state_keys: self.stages.iter().map(|s| s.state_out.clone()).collect(),
            pools: self.pools.clone(),
        }
    }

    /// Loads cuts from a checkpoint written for the same formulation.
    pub fn restore(&mut self, cp: &CutCheckpoint) -> Result<usize, NbdError> {
        if cp.years != self.years() {
            return Err(NbdError::Checkpoint("planning years differ".into()));
        }
        for (s, keys) in cp.state_keys.iter().enumerate() {
            if *keys != self.stages[s].state_out {
                return Err(NbdError::Checkpoint(format!(
                    "state keys of {} differ",
                    self.stages[s].year
                )));
            }
        }
        let mut n = 0;
        for (s, pool) in cp.pools.iter().enumerate() {
            for cut in pool {
                if self.add_cut(s, cut.clone())? {
                    n += 1;
                }
            }
        }
        Ok(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutCheckpoint {
    pub years: Vec<i32>,
    pub state_keys: Vec<Vec<String>>,
    pub pools: Vec<Vec<BendersCut>>,
}

impl CutCheckpoint {
    pub fn read(path: &Path) -> Result<CutCheckpoint, NbdError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| NbdError::Checkpoint(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<(), NbdError> {
        let text = serde_json::to_string(self).map_err(|e| NbdError::Checkpoint(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Everything a decomposition run produces.
#[derive(Debug, Clone)]
pub struct NbdRun {
    pub status: NbdStatus,
    pub ub: Option<f64>,
    pub lb: f64,
    pub log: Vec<IterationLog>,
    pub best: Option<Trajectory>,
    pub report: Option<PlanReport>,
    pub checkpoint: CutCheckpoint,
}

impl NbdRun {
    pub fn gap(&self) -> Option<f64> {
        self.ub.map(|ub| ub - self.lb)
    }
}

/// Hooks for streaming progress out of [`run_with`].
#[derive(Default)]
pub struct RunHooks<'w> {
    pub log: Option<&'w mut dyn Write>,
    pub warm_start: Option<&'w CutCheckpoint>,
}

pub fn run(model: &SystemModel, options: &NbdOptions) -> Result<NbdRun, NbdError> {
    run_with(model, options, RunHooks::default())
}

pub fn run_with(model: &SystemModel, options: &NbdOptions, mut hooks: RunHooks) -> Result<NbdRun, NbdError> {
    let mut engine = NbdEngine::new(model, options)?;
    if let Some(cp) = hooks.warm_start {
        engine.restore(cp)?;
    }
    let start = Instant::now();
    let mut best: Option<Trajectory> = None;
    let mut lb = f64::NEG_INFINITY;
    let mut log = Vec::new();
    let mut status = NbdStatus::GapRemaining;

    if options.max_iters == 0 {
        lb = engine.compute_lower_bound()?;
        let entry = IterationLog {
            nu: 0,
            stage_objectives: Vec::new(),
            ub: None,
            lb,
            gap: None,
            wall_time_s: start.elapsed().as_secs_f64(),
            stage_times: Vec::new(),
            cuts_added: 0,
        };
        emit(&mut hooks, &entry)?;
        log.push(entry);
    }

    for nu in 1..=options.max_iters {
        let traj = engine.forward_pass()?;
        if best.as_ref().is_none_or(|b| traj.cost < b.cost) {
            best = Some(traj.clone());
        }
        let added = engine.backward_pass(&traj, nu)?;
        lb = lb.max(engine.compute_lower_bound()?);
        let ub = best.as_ref().map(|b| b.cost).unwrap();
        let gap = ub - lb;
        let entry = IterationLog {
            nu,
            stage_objectives: traj.stage_objectives.clone(),
            ub: Some(ub),
            lb,
            gap: Some(gap),
            wall_time_s: start.elapsed().as_secs_f64(),
            stage_times: traj.stage_times.clone(),
            cuts_added: added,
        };
        emit(&mut hooks, &entry)?;
        log.push(entry);
        let tol = if options.relative {
            options.epsilon * ub.abs().max(1.0)
        } else {
            options.epsilon
        };
        if gap <= tol {
            status = NbdStatus::Converged;
            break;
        }
    }

    let report = best.as_ref().map(|b| {
        let run = RunInfo {
            mode: "nbd".into(),
            status: status_name(status).into(),
            lower_bound: Some(lb),
            iterations: log.len(),
        };
        build_report(model, &engine.formulation, &b.values, b.cost, run)
    });
    Ok(NbdRun {
        status,
        ub: best.as_ref().map(|b| b.cost),
        lb,
        log,
        best,
        report,
        checkpoint: engine.checkpoint(),
    })
}

pub fn status_name(status: NbdStatus) -> &'static str {
    match status {
        NbdStatus::Converged => "converged",
        NbdStatus::GapRemaining => "gap-remaining",
    }
}

fn emit(hooks: &mut RunHooks, entry: &IterationLog) -> Result<(), NbdError> {
    if let Some(w) = hooks.log.as_mut() {
        #[derive(Serialize)]
        struct Line<'a> {
            nu: usize,
            ub: Option<f64>,
            lb: f64,
            gap: Option<f64>,
            stage_times: &'a [f64],
            stage_objectives: &'a [f64],
            cuts_added: usize,
            wall_time_s: f64,
        }
        let line = Line {
            nu: entry.nu,
            ub: entry.ub,
            lb: entry.lb,
            gap: entry.gap,
            stage_times: &entry.stage_times,
            stage_objectives: &entry.stage_objectives,
            cuts_added: entry.cuts_added,
            wall_time_s: entry.wall_time_s,
        };
        let text = serde_json::to_string(&line).map_err(|e| NbdError::Checkpoint(e.to_string()))?;
        writeln!(w, "{text}")?;
    }
    Ok(())
}
