//! Brute-force reference solvers used to check the simplex and
//! branch-and-bound kernels. They share no code with the kernels.

#![allow(dead_code)]

use rand::Rng;
use scgep_core::milp::{Sense, SparseProblem};

/// Dense view of a bounded problem: `(cost, lower, upper, rows)` where each
/// row is `(coefficients, sense, rhs)`.
pub struct Dense {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Sense, f64)>,
}

pub fn to_dense(p: &SparseProblem) -> Dense {
    let n = p.num_columns();
    let rows = (0..p.num_rows())
        .map(|i| {
            let mut a = vec![0.0; n];
            for &(c, v) in p.row_entries(i) {
                a[c] += v;
            }
            (a, p.row(i).sense, p.row(i).rhs)
        })
        .collect();
    Dense {
        cost: p.columns().iter().map(|c| c.cost).collect(),
        lower: p.columns().iter().map(|c| c.lower).collect(),
        upper: p.columns().iter().map(|c| c.upper).collect(),
        rows,
    }
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                if f != 0.0 {
                    for k in c..n {
                        a[r][k] -= f * a[c][k];
                    }
                    b[r] -= f * b[c];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn feasible(d: &Dense, x: &[f64], tol: f64) -> bool {
    for j in 0..x.len() {
        if x[j] < d.lower[j] - tol || x[j] > d.upper[j] + tol {
            return false;
        }
    }
    d.rows.iter().all(|(a, s, b)| {
        let act: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum();
        let t = tol * (1.0 + b.abs());
        match s {
            Sense::Le => act <= b + t,
            Sense::Ge => act >= b - t,
            Sense::Eq => (act - b).abs() <= t,
        }
    })
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), f);
}

/// Optimal objective of a box-bounded LP by enumerating every basic
/// solution. Returns `None` when no vertex is feasible.
pub fn vertex_enumeration(p: &SparseProblem) -> Option<f64> {
    let d = to_dense(p);
    let n = d.cost.len();
    if n == 0 {
        return if feasible(&d, &[], 1e-9) { Some(p.objective_offset) } else { None };
    }
    // Candidate active constraints: every row plus both bounds per column.
    let mut hyper: Vec<(Vec<f64>, f64)> = d.rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        hyper.push((e.clone(), d.lower[j]));
        hyper.push((e, d.upper[j]));
    }
    let mut best: Option<f64> = None;
    combinations(hyper.len(), n, &mut |idx| {
        let a = idx.iter().map(|&i| hyper[i].0.clone()).collect();
        let b = idx.iter().map(|&i| hyper[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&d, &x, 1e-9) {
                let obj: f64 = d.cost.iter().zip(&x).map(|(c, x)| c * x).sum::<f64>() + p.objective_offset;
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    });
    best
}

/// Exact optimum of a pure 0/1 problem by checking every assignment.
pub fn enumerate_binary(p: &SparseProblem) -> Option<(f64, Vec<f64>)> {
    let d = to_dense(p);
    let n = d.cost.len();
    assert!(n <= 16);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|j| ((mask >> j) & 1) as f64).collect();
        if !feasible(&d, &x, 1e-9) {
            continue;
        }
        let obj: f64 = d.cost.iter().zip(&x).map(|(c, x)| c * x).sum::<f64>() + p.objective_offset;
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, x));
        }
    }
    best
}

/// Random feasible, bounded LP with up to `max_n` columns and `max_m` rows.
pub fn random_lp(rng: &mut impl Rng, max_n: usize, max_m: usize) -> SparseProblem {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    let mut p = SparseProblem::new();
    let mut x0 = Vec::new();
    for j in 0..n {
        let l = rng.gen_range(-3..=0) as f64;
        let u = l + rng.gen_range(1..=5) as f64;
        let c = rng.gen_range(-6..=6) as f64;
        p.add_column(format!("x{j}"), l, u, c, false).unwrap();
        x0.push(rng.gen_range(l..=u));
    }
    for i in 0..m {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                terms.push((j, rng.gen_range(-4..=4) as f64));
            }
        }
        let act: f64 = terms.iter().map(|&(j, a)| a * x0[j]).sum();
        let (sense, rhs) = match rng.gen_range(0..5) {
            0 => (Sense::Eq, act),
            1 | 2 => (Sense::Le, (act + rng.gen_range(0.0..2.0)).round().max(act)),
            _ => (Sense::Ge, (act - rng.gen_range(0.0..2.0)).round().min(act)),
        };
        p.add_row(format!("r{i}"), sense, rhs, &terms).unwrap();
    }
    p.finalize();
    p
}

/// Random pure-binary MILP (may be infeasible).
pub fn random_binary_milp(rng: &mut impl Rng, max_n: usize) -> SparseProblem {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=5);
    let mut p = SparseProblem::new();
    for j in 0..n {
        let c = rng.gen_range(-9..=9) as f64;
        p.add_column(format!("b{j}"), 0.0, 1.0, c, true).unwrap();
    }
    for i in 0..m {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                terms.push((j, rng.gen_range(-5..=7) as f64));
            }
        }
        let sense = match rng.gen_range(0..4) {
            0 => Sense::Ge,
            _ => Sense::Le,
        };
        let rhs = rng.gen_range(-2..=8) as f64;
        p.add_row(format!("r{i}"), sense, rhs, &terms).unwrap();
    }
    p.finalize();
    p
}
