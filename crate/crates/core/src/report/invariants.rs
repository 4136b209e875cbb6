//! Conservation re-checks computed from a serialized report.
//!
//! Every check here is a closed form (telescoped sums, shifted indicators)
//! rather than the year-to-year recursion the solver was given, so a report
//! that passes is consistent independently of how the rows were written.

use std::collections::BTreeMap;

use super::PlanReport;
use crate::model::{SystemModel, TechType, VarKey, VarKind};

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantViolation {
    pub invariant: &'static str,
    pub at: String,
    pub residual: f64,
}

impl std::fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} violated at {} (residual {:e})", self.invariant, self.at, self.residual)
    }
}

struct Checker<'a> {
    values: &'a BTreeMap<String, f64>,
    tol: f64,
    out: Vec<InvariantViolation>,
}

impl Checker<'_> {
    fn get(&self, kind: VarKind, idx: &[&str], y: i32) -> f64 {
        self.values
            .get(&VarKey::new(kind, idx, y).to_string())
            .copied()
            .unwrap_or(0.0)
    }

    fn expect(&mut self, invariant: &'static str, at: impl FnOnce() -> String, residual: f64) {
        if residual.abs() > self.tol {
            self.out.push(InvariantViolation {
                invariant,
                at: at(),
                residual,
            });
        }
    }
}

/// Re-validates the ledgers of `report` against `model` with absolute
/// tolerance `tol`; the cost identity uses `tol` relative to the objective.
pub fn check_invariants(model: &SystemModel, report: &PlanReport, tol: f64) -> Vec<InvariantViolation> {
    let mut c = Checker {
        values: &report.values,
        tol,
        out: Vec::new(),
    };
    let years = &report.years;
    let Some(&first) = years.first() else {
        return c.out;
    };

    for g in &model.assets {
        let id = g.id.as_str();
        let lead = g.lead_time.unwrap_or(0) as i32;
        let life = g.lifetime.unwrap_or(1) as i32;
        let retire_at = model.effective_retirement(g);
        let mut built = if g.is_candidate() { 0.0 } else { 1.0 };
        let mut retired = 0.0;
        for &y in years {
            let b = c.get(VarKind::Build, &[id], y);
            let r = c.get(VarKind::Retire, &[id], y);
            let o = c.get(VarKind::Operate, &[id], y);
            built += b;
            retired += r;
            c.expect("status algebra", || format!("{id},{y}"), o - (built - retired));
            c.expect("status bounds", || format!("{id},{y}"), o.min(0.0) + (o - 1.0).max(0.0));
            if g.is_candidate() {
                let d_src = if y - lead >= first { c.get(VarKind::Decision, &[id], y - lead) } else { 0.0 };
                c.expect("lead-time shift", || format!("{id},{y}"), b - d_src);
                let b_src = if y - life >= first { c.get(VarKind::Build, &[id], y - life) } else { 0.0 };
                c.expect("lifetime retirement", || format!("{id},{y}"), r - b_src);
            } else {
                let want = if retire_at == Some(y) { 1.0 } else { 0.0 };
                c.expect("lifetime retirement", || format!("{id},{y}"), r - want);
            }

            if model.tech_type(g) == TechType::Storage {
                let half = 0.5 * g.storage.as_ref().map_or(0.0, |s| s.energy_mwh) * o;
                let last = model.time.hours.to_string();
                for d in &model.time.days {
                    for h in ["1", last.as_str()] {
                        let soc = c.get(VarKind::Soc, &[id, d, h], y);
                        c.expect("soc boundary", || format!("{id},{d},{h},{y}"), soc - half);
                    }
                }
            }
        }
    }

    let mut by_material: BTreeMap<&str, Vec<&super::MaterialRow>> = BTreeMap::new();
    for r in &report.materials {
        by_material.entry(r.material.as_str()).or_default().push(r);
    }
    for (mat, rows) in by_material {
        let s0 = model.supply_chain.initial_stock.get(mat).copied().unwrap_or(0.0);
        let mut inflow = 0.0;
        for r in rows {
            c.expect("stock telescoping", || format!("{mat},{}", r.year), r.stock - (s0 + inflow));
            c.expect("stock nonnegative", || format!("{mat},{}", r.year), r.stock.min(0.0));
            inflow += r.supply + r.recovered - r.used;
        }
    }

    let mut by_pool: BTreeMap<(&str, &str), Vec<&super::FieldRow>> = BTreeMap::new();
    for r in &report.fields {
        by_pool.entry((r.field.as_str(), r.zone.as_str())).or_default().push(r);
    }
    for ((k, i), rows) in by_pool {
        let area = model.field_area(&(k.to_string(), i.to_string()));
        let mut committed_before = 0.0;
        let mut returned = 0.0;
        for r in rows {
            returned += r.returned_km2;
            let want = area - committed_before + returned;
            c.expect("field-area conservation", || format!("{k},{i},{}", r.year), r.available_km2 - want);
            c.expect(
                "field covers commitments",
                || format!("{k},{i},{}", r.year),
                (r.available_km2 - r.committed_km2).min(0.0),
            );
            committed_before += r.committed_km2;
        }
    }

    let total = report.cost_total();
    let scale = report.objective.abs().max(1.0);
    c.expect("cost breakdown", || "objective".into(), (total - report.objective) / scale);
    c.out
}
