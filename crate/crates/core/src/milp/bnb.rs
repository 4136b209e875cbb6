//! Best-bound branch-and-bound over integer-marked columns.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::problem::SparseProblem;
use super::simplex;
use super::{SolveResult, SolveStats, SolveStatus, SolverOptions};

struct Node {
    bound: f64,
    id: usize,
    bounds: Vec<(f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn gap(incumbent: f64, bound: f64) -> f64 {
    (incumbent - bound) / incumbent.abs().max(1.0)
}

pub(crate) fn branch_and_bound(problem: &SparseProblem, options: &SolverOptions) -> SolveResult {
    let start = Instant::now();
    let settings = options.lp_settings();
    let int_cols: Vec<usize> = (0..problem.num_columns())
        .filter(|&j| problem.column(j).integer)
        .collect();
    let root_bounds: Vec<(f64, f64)> = problem
        .columns()
        .iter()
        .map(|c| {
            if c.integer {
                (c.lower.ceil(), c.upper.floor())
            } else {
                (c.lower, c.upper)
            }
        })
        .collect();

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        id: 0,
        bounds: root_bounds,
    });
    let mut next_id = 1;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut iterations = 0;
    let mut nodes = 0;
    let mut hit_limit = None;
    let mut unbounded = false;

    while let Some(node) = heap.pop() {
        if let Some((inc, _)) = &incumbent {
            if gap(*inc, node.bound) <= options.mip_gap {
                heap.push(node);
                break;
            }
        }
        if nodes >= options.node_limit {
            heap.push(node);
            hit_limit = Some(SolveStatus::NodeLimit);
            break;
        }
        nodes += 1;
        let out = simplex::solve(problem, Some(&node.bounds), &settings);
        iterations += out.iterations;
        match out.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => continue,
            SolveStatus::Unbounded => {
                unbounded = true;
                break;
            }
            _ => {
                heap.push(node);
                hit_limit = Some(SolveStatus::IterationLimit);
                break;
            }
        }
        if let Some((inc, _)) = &incumbent {
            if gap(*inc, out.objective) <= options.mip_gap || out.objective >= *inc {
                continue;
            }
        }
        // Most fractional column; ties go to the lowest key.
        let mut branch: Option<(usize, f64)> = None;
        for &j in &int_cols {
            let v = out.x[j];
            let frac = v - v.floor();
            if frac <= options.integrality_tol || frac >= 1.0 - options.integrality_tol {
                continue;
            }
            let score = (frac - 0.5).abs();
            let better = match branch {
                None => true,
                Some((b, bs)) => {
                    score < bs - 1e-12
                        || (score <= bs + 1e-12 && problem.column(j).key < problem.column(b).key)
                }
            };
            if better {
                branch = Some((j, score));
            }
        }
        match branch {
            None => {
                let mut x = out.x;
                for &j in &int_cols {
                    x[j] = x[j].round();
                }
                let obj = problem.objective_value(&x);
                if incumbent.as_ref().is_none_or(|(inc, _)| obj < *inc) {
                    incumbent = Some((obj, x));
                }
            }
            Some((j, _)) => {
                let v = out.x[j];
                let mut down = node.bounds.clone();
                down[j].1 = v.floor();
                let mut up = node.bounds;
                up[j].0 = v.ceil();
                for bounds in [down, up] {
                    heap.push(Node {
                        bound: out.objective,
                        id: next_id,
                        bounds,
                    });
                    next_id += 1;
                }
            }
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let stats = SolveStats {
        iterations,
        nodes,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    if unbounded {
        return SolveResult {
            status: SolveStatus::Unbounded,
            objective: f64::NEG_INFINITY,
            bound: f64::NEG_INFINITY,
            primal: Vec::new(),
            duals: None,
            reduced_costs: None,
            certificate: None,
            stats,
        };
    }
    match incumbent {
        Some((obj, x)) => SolveResult {
            status: hit_limit.unwrap_or(SolveStatus::Optimal),
            objective: obj,
            bound: open_bound.min(obj),
            primal: x,
            duals: None,
            reduced_costs: None,
            certificate: None,
            stats,
        },
        None => SolveResult {
            status: hit_limit.unwrap_or(SolveStatus::Infeasible),
            objective: f64::NAN,
            bound: open_bound,
            primal: Vec::new(),
            duals: None,
            reduced_costs: None,
            certificate: None,
            stats,
        },
    }
}
