//! Two-phase primal simplex with bounded variables.
//!
//! Every row `a_i x (<=,=,>=) b_i` is turned into `a_i x + s_i = b_i` with a
//! bounded logical `s_i`. The basis inverse is kept as a dense matrix updated
//! with product-form pivots and rebuilt periodically. Duals are reported as
//! the sensitivity of the optimal objective to each right-hand side.

use super::problem::{Sense, SparseProblem};
use super::{Certificate, SolveStatus};

const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_SWITCH: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Most negative reduced cost; falls back to Bland's rule while stalling.
    Dantzig,
    /// Lowest eligible index for both entering and leaving variables.
    Bland,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    Lower,
    Upper,
    /// Free nonbasic variable resting at zero.
    Zero,
}

pub(crate) struct LpOutcome {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    pub certificate: Option<Certificate>,
}

pub(crate) struct LpSettings {
    pub rule: PivotRule,
    pub feasibility_tol: f64,
    pub iteration_limit: usize,
}

/// Solves the continuous relaxation of `problem`, overriding column bounds
/// with `bounds` when given.
pub(crate) fn solve(
    problem: &SparseProblem,
    bounds: Option<&[(f64, f64)]>,
    settings: &LpSettings,
) -> LpOutcome {
    let ncols = problem.num_columns();
    let nrows = problem.num_rows();
    let col_bounds: Vec<(f64, f64)> = match bounds {
        Some(b) => b.to_vec(),
        None => problem.columns().iter().map(|c| (c.lower, c.upper)).collect(),
    };

    // Presolve: fixed columns leave the problem, empty rows are checked.
    let mut fixed_value = vec![None; ncols];
    let mut offset = problem.objective_offset;
    for (j, &(l, u)) in col_bounds.iter().enumerate() {
        if l > u {
            return trivial_infeasible(problem);
        }
        if l == u {
            fixed_value[j] = Some(l);
            offset += problem.column(j).cost * l;
        }
    }
    let mut col_map = vec![usize::MAX; ncols];
    let mut kept_cols = Vec::new();
    for j in 0..ncols {
        if fixed_value[j].is_none() {
            col_map[j] = kept_cols.len();
            kept_cols.push(j);
        }
    }
    let mut kept_rows = Vec::new();
    let mut rhs = Vec::new();
    let mut senses = Vec::new();
    let mut row_terms: Vec<Vec<(usize, f64)>> = Vec::new();
    for r in 0..nrows {
        let row = problem.row(r);
        let mut b = row.rhs;
        let mut terms = Vec::new();
        for &(c, v) in problem.row_entries(r) {
            match fixed_value[c] {
                Some(val) => b -= v * val,
                None => terms.push((col_map[c], v)),
            }
        }
        if terms.is_empty() {
            let tol = settings.feasibility_tol * (1.0 + row.rhs.abs());
            let ok = match row.sense {
                Sense::Le => b >= -tol,
                Sense::Ge => b <= tol,
                Sense::Eq => b.abs() <= tol,
            };
            if !ok {
                let mut ray = vec![0.0; nrows];
                ray[r] = if b > 0.0 { 1.0 } else { -1.0 };
                return LpOutcome {
                    status: SolveStatus::Infeasible,
                    x: Vec::new(),
                    objective: f64::NAN,
                    duals: Vec::new(),
                    reduced_costs: Vec::new(),
                    iterations: 0,
                    certificate: Some(Certificate::Farkas(ray)),
                };
            }
            continue;
        }
        kept_rows.push(r);
        rhs.push(b);
        senses.push(row.sense);
        row_terms.push(terms);
    }

    let n = kept_cols.len();
    let m = kept_rows.len();
    let (row_scale, col_scale) = scale_factors(&row_terms, n);
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n + m];
    for (i, terms) in row_terms.iter().enumerate() {
        for &(c, v) in terms {
            cols[c].push((i, v * row_scale[i] * col_scale[c]));
        }
    }
    for (b, r) in rhs.iter_mut().zip(&row_scale) {
        *b *= r;
    }
    let mut lower = Vec::with_capacity(n + m);
    let mut upper = Vec::with_capacity(n + m);
    let mut cost = Vec::with_capacity(n + m);
    for (k, &j) in kept_cols.iter().enumerate() {
        lower.push(col_bounds[j].0 / col_scale[k]);
        upper.push(col_bounds[j].1 / col_scale[k]);
        cost.push(problem.column(j).cost * col_scale[k]);
    }
    for (i, sense) in senses.iter().enumerate() {
        cols[n + i].push((i, 1.0));
        let (l, u) = match sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
            Sense::Eq => (0.0, 0.0),
        };
        lower.push(l);
        upper.push(u);
        cost.push(0.0);
    }

    let unscale = |spx: &Simplex| -> Vec<f64> {
        (0..ncols)
            .map(|j| match fixed_value[j] {
                Some(v) => v,
                None => spx.x[col_map[j]] * col_scale[col_map[j]],
            })
            .collect()
    };
    let mut spx = Simplex::new(m, cols.clone(), lower.clone(), upper.clone(), rhs.clone(), settings);
    let mut outcome = spx.run(&cost);
    let mut x = unscale(&spx);
    if matches!(outcome, RunOutcome::Optimal(_)) && !primal_ok(problem, &x, &col_bounds, settings.feasibility_tol) {
        // Numerical drift: retry with the conservative rule and a basis
        // rebuilt after every pivot.
        let careful = LpSettings {
            rule: PivotRule::Bland,
            feasibility_tol: settings.feasibility_tol,
            iteration_limit: settings.iteration_limit,
        };
        let mut retry = Simplex::new(m, cols, lower, upper, rhs, &careful);
        retry.refactor_every = 1;
        let again = retry.run(&cost);
        let iters = spx.iterations + retry.iterations;
        spx = retry;
        spx.iterations = iters;
        outcome = again;
        x = unscale(&spx);
        if matches!(outcome, RunOutcome::Optimal(_)) && !primal_ok(problem, &x, &col_bounds, settings.feasibility_tol) {
            outcome = RunOutcome::IterationLimit;
        }
    }

    let mut duals = vec![0.0; nrows];
    match outcome {
        RunOutcome::Optimal(y) => {
            for (i, &r) in kept_rows.iter().enumerate() {
                duals[r] = y[i] * row_scale[i];
            }
            let mut reduced_costs: Vec<f64> =
                problem.columns().iter().map(|c| c.cost).collect();
            for r in 0..nrows {
                if duals[r] != 0.0 {
                    for &(c, v) in problem.row_entries(r) {
                        reduced_costs[c] -= duals[r] * v;
                    }
                }
            }
            let objective = offset
                + kept_cols
                    .iter()
                    .map(|&j| problem.column(j).cost * x[j])
                    .sum::<f64>();
            LpOutcome {
                status: SolveStatus::Optimal,
                x,
                objective,
                duals,
                reduced_costs,
                iterations: spx.iterations,
                certificate: None,
            }
        }
        RunOutcome::Infeasible(y) => {
            for (i, &r) in kept_rows.iter().enumerate() {
                duals[r] = y[i] * row_scale[i];
            }
            LpOutcome {
                status: SolveStatus::Infeasible,
                x,
                objective: f64::NAN,
                duals: Vec::new(),
                reduced_costs: Vec::new(),
                iterations: spx.iterations,
                certificate: Some(Certificate::Farkas(duals)),
            }
        }
        RunOutcome::Unbounded(dir) => {
            let mut ray = vec![0.0; ncols];
            for (k, &j) in kept_cols.iter().enumerate() {
                ray[j] = dir[k] * col_scale[k];
            }
            LpOutcome {
                status: SolveStatus::Unbounded,
                x,
                objective: f64::NEG_INFINITY,
                duals: Vec::new(),
                reduced_costs: Vec::new(),
                iterations: spx.iterations,
                certificate: Some(Certificate::Ray(ray)),
            }
        }
        RunOutcome::IterationLimit => LpOutcome {
            status: SolveStatus::IterationLimit,
            objective: problem.objective_value(&x),
            x,
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            iterations: spx.iterations,
            certificate: None,
        },
    }
}

/// Row and column multipliers (powers of two) from a few rounds of
/// geometric-mean scaling followed by row equilibration.
fn scale_factors(rows: &[Vec<(usize, f64)>], n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = rows.len();
    let mut r = vec![1.0; m];
    let mut c = vec![1.0; n];
    let pow2 = |x: f64| if x.is_finite() && x > 0.0 { x.log2().round().exp2() } else { 1.0 };
    for _ in 0..4 {
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![0.0f64; n];
        for (i, terms) in rows.iter().enumerate() {
            for &(j, v) in terms {
                let a = (v * r[i]).abs();
                lo[j] = lo[j].min(a);
                hi[j] = hi[j].max(a);
            }
        }
        for j in 0..n {
            if hi[j] > 0.0 {
                c[j] = pow2(1.0 / (lo[j] * hi[j]).sqrt());
            }
        }
        for (i, terms) in rows.iter().enumerate() {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for &(j, v) in terms {
                let a = (v * c[j]).abs();
                lo = lo.min(a);
                hi = hi.max(a);
            }
            if hi > 0.0 {
                r[i] = pow2(1.0 / (lo * hi).sqrt());
            }
        }
    }
    for (i, terms) in rows.iter().enumerate() {
        let hi = terms.iter().fold(0.0f64, |a, &(j, v)| a.max((v * r[i] * c[j]).abs()));
        if hi > 0.0 {
            r[i] *= pow2(1.0 / hi);
        }
    }
    (r, c)
}

/// Bound and row feasibility of `x` in the unscaled problem, relative to
/// the size of each row's terms.
fn primal_ok(problem: &SparseProblem, x: &[f64], bounds: &[(f64, f64)], tol: f64) -> bool {
    for (j, &(l, u)) in bounds.iter().enumerate() {
        let scale = 1.0 + x[j].abs();
        if x[j] < l - tol * scale || x[j] > u + tol * scale {
            return false;
        }
    }
    for r in 0..problem.num_rows() {
        let row = problem.row(r);
        let mut act = 0.0;
        let mut size = row.rhs.abs();
        for &(c, a) in problem.row_entries(r) {
            act += a * x[c];
            size = size.max((a * x[c]).abs());
        }
        let t = tol * (1.0 + size);
        let ok = match row.sense {
            Sense::Le => act <= row.rhs + t,
            Sense::Ge => act >= row.rhs - t,
            Sense::Eq => (act - row.rhs).abs() <= t,
        };
        if !ok {
            return false;
        }
    }
    true
}

fn trivial_infeasible(_problem: &SparseProblem) -> LpOutcome {
    LpOutcome {
        status: SolveStatus::Infeasible,
        x: Vec::new(),
        objective: f64::NAN,
        duals: Vec::new(),
        reduced_costs: Vec::new(),
        iterations: 0,
        certificate: None,
    }
}

enum RunOutcome {
    Optimal(Vec<f64>),
    Infeasible(Vec<f64>),
    Unbounded(Vec<f64>),
    IterationLimit,
}

struct Simplex {
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    head: Vec<usize>,
    binv: Vec<f64>,
    rule: PivotRule,
    feasibility_tol: f64,
    iteration_limit: usize,
    iterations: usize,
    since_refactor: usize,
    refactor_every: usize,
}

impl Simplex {
    fn new(
        m: usize,
        cols: Vec<Vec<(usize, f64)>>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        rhs: Vec<f64>,
        settings: &LpSettings,
    ) -> Self {
        let total = cols.len();
        Simplex {
            m,
            cols,
            lower,
            upper,
            rhs,
            x: vec![0.0; total],
            state: vec![VarState::Lower; total],
            head: Vec::new(),
            binv: Vec::new(),
            rule: settings.rule,
            feasibility_tol: settings.feasibility_tol,
            iteration_limit: settings.iteration_limit,
            iterations: 0,
            since_refactor: 0,
            refactor_every: REFACTOR_EVERY,
        }
    }

    fn run(&mut self, cost: &[f64]) -> RunOutcome {
        let n_struct = self.cols.len() - self.m;
        // Structural columns start nonbasic at a finite bound.
        for j in 0..n_struct {
            let (l, u) = (self.lower[j], self.upper[j]);
            let (v, s) = if l.is_finite() {
                (l, VarState::Lower)
            } else if u.is_finite() {
                (u, VarState::Upper)
            } else {
                (0.0, VarState::Zero)
            };
            self.x[j] = v;
            self.state[j] = s;
        }
        let mut residual = self.rhs.clone();
        for j in 0..n_struct {
            if self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    residual[i] -= a * self.x[j];
                }
            }
        }
        // Logicals absorb the residual where their bounds allow; otherwise an
        // artificial column carries the infeasibility.
        let mut phase1_cost = vec![0.0; self.cols.len()];
        let mut needs_phase1 = false;
        self.head = vec![usize::MAX; self.m];
        for i in 0..self.m {
            let s = n_struct + i;
            let r = residual[i];
            if r >= self.lower[s] && r <= self.upper[s] {
                self.x[s] = r;
                self.state[s] = VarState::Basic(i);
                self.head[i] = s;
            } else {
                let clamp = r.clamp(self.lower[s], self.upper[s]);
                self.x[s] = clamp;
                self.state[s] = if clamp == self.lower[s] {
                    VarState::Lower
                } else {
                    VarState::Upper
                };
                let sign = if r > clamp { 1.0 } else { -1.0 };
                let a = self.cols.len();
                self.cols.push(vec![(i, sign)]);
                self.lower.push(0.0);
                self.upper.push(f64::INFINITY);
                self.x.push((r - clamp).abs());
                self.state.push(VarState::Basic(i));
                phase1_cost.push(1.0);
                self.head[i] = a;
                needs_phase1 = true;
            }
        }
        self.refactor();

        if needs_phase1 {
            match self.iterate(&phase1_cost) {
                IterOutcome::Optimal => {}
                IterOutcome::Unbounded(_) => unreachable!("phase one is bounded below"),
                IterOutcome::IterationLimit => return RunOutcome::IterationLimit,
            }
            let infeas: f64 = (n_struct + self.m..self.cols.len())
                .map(|j| self.x[j])
                .sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if infeas > self.feasibility_tol * scale {
                return RunOutcome::Infeasible(self.duals(&phase1_cost));
            }
            for j in n_struct + self.m..self.cols.len() {
                self.upper[j] = 0.0;
                if !matches!(self.state[j], VarState::Basic(_)) {
                    self.x[j] = 0.0;
                    self.state[j] = VarState::Lower;
                }
            }
        }

        let mut full_cost = cost.to_vec();
        full_cost.resize(self.cols.len(), 0.0);
        match self.iterate(&full_cost) {
            IterOutcome::Optimal => {
                self.refactor();
                RunOutcome::Optimal(self.duals(&full_cost))
            }
            IterOutcome::Unbounded(dir) => {
                let mut ray = dir;
                ray.truncate(n_struct);
                RunOutcome::Unbounded(ray)
            }
            IterOutcome::IterationLimit => RunOutcome::IterationLimit,
        }
    }

    /// `y' = c_B' B^-1`.
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for k in 0..m {
            let cb = cost[self.head[k]];
            if cb != 0.0 {
                let row = &self.binv[k * m..(k + 1) * m];
                for i in 0..m {
                    y[i] += cb * row[i];
                }
            }
        }
        y
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(i, a) in &self.cols[j] {
            for k in 0..m {
                alpha[k] += self.binv[k * m + i] * a;
            }
        }
        alpha
    }

    /// Rebuilds the basis inverse and basic values from scratch.
    fn refactor(&mut self) {
        let m = self.m;
        let mut b = vec![0.0; m * m];
        for (k, &j) in self.head.iter().enumerate() {
            for &(i, a) in &self.cols[j] {
                b[i * m + k] = a;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        // Gauss-Jordan with partial pivoting.
        for c in 0..m {
            let mut piv = c;
            let mut best = b[c * m + c].abs();
            for r in c + 1..m {
                let v = b[r * m + c].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            assert!(best > 1e-14, "singular basis during refactorization");
            if piv != c {
                for k in 0..m {
                    b.swap(c * m + k, piv * m + k);
                    inv.swap(c * m + k, piv * m + k);
                }
            }
            let d = b[c * m + c];
            for k in 0..m {
                b[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                if r != c {
                    let f = b[r * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            b[r * m + k] -= f * b[c * m + k];
                            inv[r * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        // B^-1 maps rows to basis positions: inv = (B)^-1 with B[i][k] = a_{i,head[k]}.
        self.binv = inv;
        let mut residual = self.rhs.clone();
        for j in 0..self.cols.len() {
            if !matches!(self.state[j], VarState::Basic(_)) && self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    residual[i] -= a * self.x[j];
                }
            }
        }
        for k in 0..m {
            let row = &self.binv[k * m..(k + 1) * m];
            self.x[self.head[k]] = row.iter().zip(&residual).map(|(a, b)| a * b).sum();
        }
        self.since_refactor = 0;
    }

    fn iterate(&mut self, cost: &[f64]) -> IterOutcome {
        let m = self.m;
        let cmax = cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let dual_tol = 1e-9 * cmax.max(1.0);
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= self.iteration_limit {
                return IterOutcome::IterationLimit;
            }
            let rule = if self.rule == PivotRule::Bland || degenerate_run > DEGENERATE_SWITCH {
                PivotRule::Bland
            } else {
                PivotRule::Dantzig
            };
            let y = self.duals(cost);

            // Pricing.
            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..self.cols.len() {
                let st = self.state[j];
                if matches!(st, VarState::Basic(_)) || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = cost[j] - self.cols[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>();
                let dir = match st {
                    VarState::Lower if d < -dual_tol => 1.0,
                    VarState::Upper if d > dual_tol => -1.0,
                    VarState::Zero if d.abs() > dual_tol => -d.signum(),
                    _ => continue,
                };
                match rule {
                    PivotRule::Bland => {
                        entering = Some((j, dir));
                        break;
                    }
                    PivotRule::Dantzig => {
                        if d.abs() > best {
                            best = d.abs();
                            entering = Some((j, dir));
                        }
                    }
                }
            }
            let Some((j, dir)) = entering else {
                return IterOutcome::Optimal;
            };

            let alpha = self.ftran(j);
            // Ratio test. Basic k moves by -t * dir * alpha[k].
            let flip = match self.state[j] {
                VarState::Zero => f64::INFINITY,
                _ => self.upper[j] - self.lower[j],
            };
            let ratio_of = |k: usize, slack: f64, x: &[f64], head: &[usize], lo: &[f64], up: &[f64]| {
                let delta = dir * alpha[k];
                let b = head[k];
                if delta > 0.0 {
                    if lo[b].is_finite() {
                        Some(((x[b] - lo[b] + slack) / delta).max(0.0))
                    } else {
                        None
                    }
                } else if up[b].is_finite() {
                    Some(((up[b] - x[b] + slack) / -delta).max(0.0))
                } else {
                    None
                }
            };
            let mut leave: Option<usize> = None;
            let mut step = flip;
            match rule {
                PivotRule::Bland => {
                    let mut best_ratio = f64::INFINITY;
                    for k in 0..m {
                        if alpha[k].abs() <= PIVOT_TOL {
                            continue;
                        }
                        if let Some(r) = ratio_of(k, 0.0, &self.x, &self.head, &self.lower, &self.upper) {
                            let better = r < best_ratio - 1e-12
                                || (r <= best_ratio + 1e-12
                                    && leave.is_some_and(|l| self.head[k] < self.head[l]));
                            if better {
                                best_ratio = r;
                                leave = Some(k);
                            }
                        }
                    }
                    if best_ratio < step {
                        step = best_ratio;
                    } else {
                        leave = None;
                    }
                }
                PivotRule::Dantzig => {
                    // Harris two-pass: relaxed bound, then the largest pivot.
                    let tol = self.feasibility_tol * 1e-3;
                    let mut relaxed = f64::INFINITY;
                    for k in 0..m {
                        if alpha[k].abs() <= PIVOT_TOL {
                            continue;
                        }
                        if let Some(r) = ratio_of(k, tol, &self.x, &self.head, &self.lower, &self.upper) {
                            relaxed = relaxed.min(r);
                        }
                    }
                    if relaxed < step {
                        let mut best_piv = 0.0;
                        for k in 0..m {
                            if alpha[k].abs() <= PIVOT_TOL {
                                continue;
                            }
                            if let Some(r) = ratio_of(k, 0.0, &self.x, &self.head, &self.lower, &self.upper) {
                                if r <= relaxed && alpha[k].abs() > best_piv {
                                    best_piv = alpha[k].abs();
                                    leave = Some(k);
                                    step = r;
                                }
                            }
                        }
                        if leave.is_none() {
                            step = flip;
                        }
                    }
                }
            }

            if step.is_infinite() {
                let mut ray = vec![0.0; self.cols.len()];
                ray[j] = dir;
                for k in 0..m {
                    ray[self.head[k]] = -dir * alpha[k];
                }
                return IterOutcome::Unbounded(ray);
            }
            self.iterations += 1;
            if step <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }

            // Apply the step.
            self.x[j] += dir * step;
            for k in 0..m {
                if alpha[k] != 0.0 {
                    let b = self.head[k];
                    self.x[b] -= dir * step * alpha[k];
                }
            }
            match leave {
                None => {
                    // Bound flip of the entering variable.
                    if dir > 0.0 {
                        self.x[j] = self.upper[j];
                        self.state[j] = VarState::Upper;
                    } else {
                        self.x[j] = self.lower[j];
                        self.state[j] = VarState::Lower;
                    }
                }
                Some(r) => {
                    let out = self.head[r];
                    let delta = dir * alpha[r];
                    if delta > 0.0 {
                        self.x[out] = self.lower[out];
                        self.state[out] = VarState::Lower;
                    } else {
                        self.x[out] = self.upper[out];
                        self.state[out] = if self.lower[out] == self.upper[out] {
                            VarState::Lower
                        } else {
                            VarState::Upper
                        };
                    }
                    self.state[j] = VarState::Basic(r);
                    self.head[r] = j;
                    let piv = alpha[r];
                    let (before, rest) = self.binv.split_at_mut(r * m);
                    let (prow, after) = rest.split_at_mut(m);
                    for v in prow.iter_mut() {
                        *v /= piv;
                    }
                    for (k, row) in before.chunks_mut(m).chain(after.chunks_mut(m)).enumerate() {
                        let kk = if k < r { k } else { k + 1 };
                        let f = alpha[kk];
                        if f != 0.0 {
                            for (v, p) in row.iter_mut().zip(prow.iter()) {
                                *v -= f * p;
                            }
                        }
                    }
                    self.since_refactor += 1;
                    if self.since_refactor >= self.refactor_every {
                        self.refactor();
                    }
                }
            }
        }
    }
}

enum IterOutcome {
    Optimal,
    Unbounded(Vec<f64>),
    IterationLimit,
}
