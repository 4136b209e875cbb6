//! Column and row generation, one planning year at a time.

use std::collections::BTreeMap;

use super::{ColSpec, RowFamily, RowSpec};
use crate::milp::Sense;
use crate::model::{GeneratorAsset, Integrality, SystemModel, TechType, VarKey, VarKind};

/// Options that change the generated problem.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// Treat every decision column as continuous on [0, 1].
    pub relax_integrality: bool,
}

pub(crate) struct Gen<'a> {
    pub m: &'a SystemModel,
    pub opts: BuildOptions,
}

fn vk(kind: VarKind, idx: &[&str], year: i32) -> VarKey {
    VarKey::new(kind, idx, year)
}

fn row(family: RowFamily, idx: &[&str], year: i32, sense: Sense, rhs: f64, terms: Vec<(VarKey, f64)>) -> RowSpec {
    let mut key = format!("{}[", family.prefix());
    for i in idx {
        key.push_str(i);
        key.push(',');
    }
    key.push_str(&format!("{year}]"));
    RowSpec {
        key,
        family,
        year,
        sense,
        rhs,
        terms,
    }
}

/// Present value of investing in one MW of `g` in year `y`, prorated to the
/// part of the lifetime that falls inside the horizon.
pub fn adjusted_investment_cost(model: &SystemModel, g: &GeneratorAsset, y: i32) -> f64 {
    let Some(yi) = model.year_index(y) else {
        return 0.0;
    };
    let first = model.first_year();
    let last = *model.time.years.last().unwrap_or(&first);
    let lead = g.lead_time.unwrap_or(0) as i32;
    let life = g.lifetime.unwrap_or(1).max(1) as i32;
    let in_horizon = (last - (y + lead) + 1).clamp(0, life);
    let prorate = in_horizon as f64 / life as f64;
    let discount = (1.0 + model.time.discount_rate).powi(-(y - first));
    (g.capex[yi] * prorate * discount).max(0.0)
}

impl<'a> Gen<'a> {
    fn years(&self) -> &[i32] {
        &self.m.time.years
    }

    fn last_year(&self) -> i32 {
        *self.years().last().unwrap()
    }

    fn first_year(&self) -> i32 {
        self.years()[0]
    }

    fn kind(&self, g: &GeneratorAsset) -> TechType {
        self.m.tech_type(g)
    }

    fn day_hours(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nh = self.m.time.hours;
        (0..self.m.time.days.len()).flat_map(move |t| (0..nh).map(move |h| (t, h)))
    }

    fn th(&self, t: usize, h: usize) -> (&str, String) {
        (self.m.time.days[t].as_str(), (h + 1).to_string())
    }

    fn decision_is_open(&self, g: &GeneratorAsset, y: i32) -> bool {
        y + g.lead_time.unwrap_or(0) as i32 <= self.last_year()
    }

    fn tech_has_products(&self, tech: &str) -> bool {
        self.m.catalog.products.iter().any(|p| p.technology == tech)
    }

    fn density(&self, g: &GeneratorAsset) -> f64 {
        self.m
            .technology(&g.technology)
            .and_then(|t| t.capacity_density)
            .unwrap_or(f64::INFINITY)
    }

    /// Every column of year index `yi` with its bounds and cost.
    pub fn columns(&self, yi: usize) -> Vec<ColSpec> {
        let m = self.m;
        let y = self.years()[yi];
        let mut out = Vec::new();
        let mut col = |key: VarKey, lower: f64, upper: f64, cost: f64, integer: bool| {
            out.push(ColSpec {
                key,
                lower,
                upper,
                cost,
                integer,
            })
        };
        let weights = &m.time.weights[yi];

        for g in &m.assets {
            let id = g.id.as_str();
            let p = g.capacity_mw;
            match self.kind(g) {
                TechType::Storage => {
                    for (t, h) in self.day_hours() {
                        let (d, hs) = self.th(t, h);
                        let c = weights[t] * g.var_cost;
                        col(vk(VarKind::Charge, &[id, d, &hs], y), 0.0, f64::INFINITY, c, false);
                        col(vk(VarKind::Discharge, &[id, d, &hs], y), 0.0, f64::INFINITY, c, false);
                        col(vk(VarKind::Soc, &[id, d, &hs], y), 0.0, f64::INFINITY, 0.0, false);
                    }
                }
                _ => {
                    for (t, h) in self.day_hours() {
                        let (d, hs) = self.th(t, h);
                        col(
                            vk(VarKind::GenOutput, &[id, d, &hs], y),
                            0.0,
                            f64::INFINITY,
                            weights[t] * g.var_cost,
                            false,
                        );
                    }
                }
            }
            if g.is_candidate() {
                let integer = !self.opts.relax_integrality && m.integrality(g) == Integrality::Binary;
                let ub = if self.decision_is_open(g, y) { 1.0 } else { 0.0 };
                col(
                    vk(VarKind::Decision, &[id], y),
                    0.0,
                    ub,
                    adjusted_investment_cost(m, g, y) * p,
                    integer && ub > 0.0,
                );
                let lead = g.lead_time.unwrap_or(0) as i32;
                let b_ub = if y - lead >= self.first_year() { 1.0 } else { 0.0 };
                col(vk(VarKind::Build, &[id], y), 0.0, b_ub, 0.0, false);
                let life = g.lifetime.unwrap_or(1) as i32;
                let r_ub = if y - life >= self.first_year() { 1.0 } else { 0.0 };
                col(vk(VarKind::Retire, &[id], y), 0.0, r_ub, 0.0, false);
            } else {
                col(vk(VarKind::Build, &[id], y), 0.0, 0.0, 0.0, false);
                let r = if m.effective_retirement(g) == Some(y) { 1.0 } else { 0.0 };
                col(vk(VarKind::Retire, &[id], y), r, r, 0.0, false);
            }
            col(vk(VarKind::Operate, &[id], y), 0.0, 1.0, g.fixed_om[yi] * p, false);
        }

        for l in &m.topology.corridors {
            for (t, h) in self.day_hours() {
                let (d, hs) = self.th(t, h);
                col(vk(VarKind::Flow, &[&l.id, d, &hs], y), -l.capacity_mw, l.capacity_mw, 0.0, false);
            }
        }
        for i in &m.topology.zones {
            for (t, h) in self.day_hours() {
                let (d, hs) = self.th(t, h);
                let cap = m.load(i, yi, t, h) + (-m.import(i, yi, t, h)).max(0.0);
                col(
                    vk(VarKind::LoadShed, &[i, d, &hs], y),
                    0.0,
                    cap,
                    weights[t] * m.penalties.voll,
                    false,
                );
            }
        }
        col(vk(VarKind::ReserveShortfall, &[], y), 0.0, f64::INFINITY, m.penalties.reserve, false);
        for (k, mandate) in &m.scenario.rps {
            if mandate[yi] > 0.0 {
                col(vk(VarKind::RpsShortfall, &[k], y), 0.0, f64::INFINITY, m.penalties.rps, false);
            }
        }

        for mat in &m.catalog.materials {
            col(vk(VarKind::MaterialUse, &[mat], y), 0.0, f64::INFINITY, 0.0, false);
            let (lo, hi) = if yi == 0 {
                let s0 = m.supply_chain.initial_stock.get(mat).copied().unwrap_or(0.0);
                (s0, s0)
            } else {
                (0.0, f64::INFINITY)
            };
            col(vk(VarKind::Stock, &[mat], y), lo, hi, 0.0, false);
        }
        for c in &m.catalog.components {
            col(vk(VarKind::ComponentOutput, &[&c.id], y), 0.0, f64::INFINITY, 0.0, false);
        }
        for p in &m.catalog.products {
            col(vk(VarKind::ProductCapacity, &[&p.id], y), 0.0, f64::INFINITY, 0.0, false);
        }
        for (k, i) in m.field_pools() {
            col(vk(VarKind::Field, &[&k, &i], y), 0.0, f64::INFINITY, 0.0, false);
        }
        out
    }

    /// Material, manufacturing, land, lead-time and lifetime rows.
    pub fn sc_rows(&self, yi: usize) -> Vec<RowSpec> {
        let m = self.m;
        let y = self.years()[yi];
        let first = yi == 0;
        let mut out = Vec::new();

        for mat in &m.catalog.materials {
            let mut need = vec![(vk(VarKind::MaterialUse, &[mat], y), 1.0)];
            for c in &m.catalog.components {
                if let Some(&q) = c.materials.get(mat) {
                    need.push((vk(VarKind::ComponentOutput, &[&c.id], y), -q));
                }
            }
            out.push(row(RowFamily::Material, &[mat], y, Sense::Ge, 0.0, need));

            let supply = m.supply_chain.supply.get(mat).map_or(0.0, |s| s[yi]);
            let mut avail = vec![
                (vk(VarKind::MaterialUse, &[mat], y), 1.0),
                (vk(VarKind::Stock, &[mat], y), -1.0),
            ];
            for g in &m.assets {
                if let Some(&rate) = g.recovery.get(mat) {
                    avail.push((vk(VarKind::Retire, &[&g.id], y), -rate * g.capacity_mw));
                }
            }
            out.push(row(RowFamily::Supply, &[mat], y, Sense::Le, supply, avail));

            if !first {
                let py = y - 1;
                let prev_supply = m.supply_chain.supply.get(mat).map_or(0.0, |s| s[yi - 1]);
                let mut stock = vec![
                    (vk(VarKind::Stock, &[mat], y), 1.0),
                    (vk(VarKind::Stock, &[mat], py), -1.0),
                    (vk(VarKind::MaterialUse, &[mat], py), 1.0),
                ];
                for g in &m.assets {
                    if let Some(&rate) = g.recovery.get(mat) {
                        stock.push((vk(VarKind::Retire, &[&g.id], py), -rate * g.capacity_mw));
                    }
                }
                out.push(row(RowFamily::Stock, &[mat], y, Sense::Eq, prev_supply, stock));
            }
        }

        for c in &m.catalog.components {
            let mut terms = vec![(vk(VarKind::ComponentOutput, &[&c.id], y), 1.0)];
            for p in &m.catalog.products {
                if let Some(&q) = p.components.get(&c.id) {
                    terms.push((vk(VarKind::ProductCapacity, &[&p.id], y), -q));
                }
            }
            out.push(row(RowFamily::Component, &[&c.id], y, Sense::Ge, 0.0, terms));
        }

        for tech in &m.catalog.technologies {
            if !self.tech_has_products(&tech.id) {
                continue;
            }
            let mut terms: Vec<(VarKey, f64)> = m
                .assets
                .iter()
                .filter(|g| g.is_candidate() && g.technology == tech.id)
                .map(|g| (vk(VarKind::Decision, &[&g.id], y), g.capacity_mw))
                .collect();
            for p in m.catalog.products.iter().filter(|p| p.technology == tech.id) {
                terms.push((vk(VarKind::ProductCapacity, &[&p.id], y), -1.0));
            }
            out.push(row(RowFamily::Product, &[&tech.id], y, Sense::Le, 0.0, terms));
        }

        for (k, i) in m.field_pools() {
            let members: Vec<&GeneratorAsset> = m
                .assets
                .iter()
                .filter(|g| g.field.as_deref() == Some(k.as_str()) && g.zone == i)
                .collect();
            let f = vk(VarKind::Field, &[&k, &i], y);
            let mut land = vec![(f.clone(), -1.0)];
            for g in members.iter().filter(|g| g.is_candidate()) {
                land.push((vk(VarKind::Decision, &[&g.id], y), g.capacity_mw / self.density(g)));
            }
            if land.len() > 1 {
                out.push(row(RowFamily::Land, &[&k, &i], y, Sense::Le, 0.0, land));
            }
            let mut field = vec![(f, 1.0)];
            for g in &members {
                field.push((vk(VarKind::Retire, &[&g.id], y), -g.capacity_mw / self.density(g)));
            }
            let rhs = if first {
                m.field_area(&(k.clone(), i.clone()))
            } else {
                field.push((vk(VarKind::Field, &[&k, &i], y - 1), -1.0));
                for g in members.iter().filter(|g| g.is_candidate()) {
                    field.push((vk(VarKind::Decision, &[&g.id], y - 1), g.capacity_mw / self.density(g)));
                }
                0.0
            };
            out.push(row(RowFamily::Field, &[&k, &i], y, Sense::Eq, rhs, field));
        }

        for g in m.assets.iter().filter(|g| g.is_candidate()) {
            let id = g.id.as_str();
            let lead = g.lead_time.unwrap_or(0) as i32;
            if y - lead >= self.first_year() {
                out.push(row(
                    RowFamily::Lead,
                    &[id],
                    y,
                    Sense::Eq,
                    0.0,
                    vec![
                        (vk(VarKind::Build, &[id], y), 1.0),
                        (vk(VarKind::Decision, &[id], y - lead), -1.0),
                    ],
                ));
            }
            let life = g.lifetime.unwrap_or(1) as i32;
            if y - life >= self.first_year() {
                out.push(row(
                    RowFamily::Life,
                    &[id],
                    y,
                    Sense::Eq,
                    0.0,
                    vec![
                        (vk(VarKind::Retire, &[id], y), 1.0),
                        (vk(VarKind::Build, &[id], y - life), -1.0),
                    ],
                ));
            }
            let once = self.years()[..=yi]
                .iter()
                .map(|&yy| (vk(VarKind::Decision, &[id], yy), 1.0))
                .collect();
            out.push(row(RowFamily::Once, &[id], y, Sense::Le, 1.0, once));
        }
        out
    }

    /// Balance, capacity, status, reserve and RPS rows.
    pub fn gep_rows(&self, yi: usize) -> Vec<RowSpec> {
        let m = self.m;
        let y = self.years()[yi];
        let mut out = Vec::new();

        for (t, h) in self.day_hours() {
            let (d, hs) = self.th(t, h);
            for i in &m.topology.zones {
                let mut terms = Vec::new();
                for g in m.assets.iter().filter(|g| &g.zone == i) {
                    let id = g.id.as_str();
                    if self.kind(g) == TechType::Storage {
                        terms.push((vk(VarKind::Discharge, &[id, d, &hs], y), 1.0));
                        terms.push((vk(VarKind::Charge, &[id, d, &hs], y), -1.0));
                    } else {
                        terms.push((vk(VarKind::GenOutput, &[id, d, &hs], y), 1.0));
                    }
                }
                for l in &m.topology.corridors {
                    if &l.to == i {
                        terms.push((vk(VarKind::Flow, &[&l.id, d, &hs], y), 1.0));
                    }
                    if &l.from == i {
                        terms.push((vk(VarKind::Flow, &[&l.id, d, &hs], y), -1.0));
                    }
                }
                terms.push((vk(VarKind::LoadShed, &[i, d, &hs], y), 1.0));
                let rhs = m.load(i, yi, t, h) - m.import(i, yi, t, h);
                out.push(row(RowFamily::Balance, &[i, d, &hs], y, Sense::Eq, rhs, terms));
            }
            for g in &m.assets {
                let id = g.id.as_str();
                let o = vk(VarKind::Operate, &[id], y);
                let p = vk(VarKind::GenOutput, &[id, d, &hs], y);
                match self.kind(g) {
                    TechType::Thermal => out.push(row(
                        RowFamily::ThermalCap,
                        &[id, d, &hs],
                        y,
                        Sense::Le,
                        0.0,
                        vec![(p, 1.0), (o, -g.capacity_mw)],
                    )),
                    TechType::Renewable => {
                        let f = m.scenario.availability.get(id).map_or(0.0, |a| a[yi][t][h]);
                        out.push(row(
                            RowFamily::RenewableCap,
                            &[id, d, &hs],
                            y,
                            Sense::Le,
                            0.0,
                            vec![(p, 1.0), (o, -f * g.capacity_mw)],
                        ))
                    }
                    TechType::Storage => {}
                }
            }
        }

        for g in &m.assets {
            let id = g.id.as_str();
            let mut terms = vec![
                (vk(VarKind::Operate, &[id], y), 1.0),
                (vk(VarKind::Build, &[id], y), -1.0),
                (vk(VarKind::Retire, &[id], y), 1.0),
            ];
            let rhs = if yi == 0 {
                if g.is_candidate() {
                    0.0
                } else {
                    1.0
                }
            } else {
                terms.push((vk(VarKind::Operate, &[id], y - 1), -1.0));
                0.0
            };
            out.push(row(RowFamily::Status, &[id], y, Sense::Eq, rhs, terms));
        }

        let mut reserve: Vec<(VarKey, f64)> = m
            .assets
            .iter()
            .filter_map(|g| {
                let elcc = m.technology(&g.technology)?.elcc[yi];
                (elcc != 0.0).then(|| (vk(VarKind::Operate, &[&g.id], y), elcc * g.capacity_mw))
            })
            .collect();
        reserve.push((vk(VarKind::ReserveShortfall, &[], y), 1.0));
        let need = (1.0 + m.scenario.reserve_margin[yi]) * m.scenario.peak_load[yi];
        out.push(row(RowFamily::Reserve, &[], y, Sense::Ge, need, reserve));

        let weights = &m.time.weights[yi];
        for (k, mandate) in &m.scenario.rps {
            if mandate[yi] <= 0.0 {
                continue;
            }
            let mut terms = Vec::new();
            for g in m.assets.iter().filter(|g| &g.technology == k) {
                let kind = if self.kind(g) == TechType::Storage {
                    VarKind::Discharge
                } else {
                    VarKind::GenOutput
                };
                for (t, h) in self.day_hours() {
                    let (d, hs) = self.th(t, h);
                    terms.push((vk(kind, &[&g.id, d, &hs], y), weights[t]));
                }
            }
            terms.push((vk(VarKind::RpsShortfall, &[k], y), 1.0));
            let mut energy = 0.0;
            for (t, h) in self.day_hours() {
                for i in &m.topology.zones {
                    energy += weights[t] * m.load(i, yi, t, h);
                }
            }
            out.push(row(RowFamily::Rps, &[k], y, Sense::Ge, mandate[yi] * energy, terms));
        }
        out
    }

    /// Storage power, energy and state-of-charge rows.
    pub fn storage_rows(&self, yi: usize) -> Vec<RowSpec> {
        let m = self.m;
        let y = self.years()[yi];
        let nh = m.time.hours;
        let mut out = Vec::new();
        for g in m.assets.iter().filter(|g| self.kind(g) == TechType::Storage) {
            let Some(st) = &g.storage else { continue };
            let id = g.id.as_str();
            let o = vk(VarKind::Operate, &[id], y);
            let p = g.capacity_mw;
            for t in 0..m.time.days.len() {
                let d = m.time.days[t].as_str();
                for h in 0..nh {
                    let hs = (h + 1).to_string();
                    let c = vk(VarKind::Charge, &[id, d, &hs], y);
                    let dc = vk(VarKind::Discharge, &[id, d, &hs], y);
                    let soc = vk(VarKind::Soc, &[id, d, &hs], y);
                    let idx = [id, d, hs.as_str()];
                    out.push(row(RowFamily::Charge, &idx, y, Sense::Le, 0.0, vec![(c.clone(), 1.0), (o.clone(), -p)]));
                    out.push(row(RowFamily::Discharge, &idx, y, Sense::Le, 0.0, vec![(dc.clone(), 1.0), (o.clone(), -p)]));
                    out.push(row(
                        RowFamily::SocMax,
                        &idx,
                        y,
                        Sense::Le,
                        0.0,
                        vec![(soc.clone(), 1.0), (o.clone(), -st.energy_mwh)],
                    ));
                    // The first hour continues from the last one, closing the day.
                    let prev_h = if h == 0 { nh } else { h };
                    let prev = vk(VarKind::Soc, &[id, d, &prev_h.to_string()], y);
                    let bal = vec![
                        (soc.clone(), 1.0),
                        (prev, -1.0),
                        (c, -st.eff_charge),
                        (dc, 1.0 / st.eff_discharge),
                    ];
                    out.push(row(RowFamily::SocBalance, &idx, y, Sense::Eq, 0.0, bal));
                }
                let first = vk(VarKind::Soc, &[id, d, "1"], y);
                out.push(row(
                    RowFamily::SocStart,
                    &[id, d],
                    y,
                    Sense::Eq,
                    0.0,
                    vec![(first, 1.0), (o.clone(), -0.5 * st.energy_mwh)],
                ));
                if nh > 1 {
                    let last = vk(VarKind::Soc, &[id, d, &nh.to_string()], y);
                    out.push(row(
                        RowFamily::SocEnd,
                        &[id, d],
                        y,
                        Sense::Eq,
                        0.0,
                        vec![(last, 1.0), (o.clone(), -0.5 * st.energy_mwh)],
                    ));
                }
            }
        }
        out
    }

    pub fn rows(&self, yi: usize) -> Vec<RowSpec> {
        let mut rows = self.sc_rows(yi);
        rows.extend(self.gep_rows(yi));
        rows.extend(self.storage_rows(yi));
        rows
    }

    pub fn objective(&self, yi: usize) -> BTreeMap<String, f64> {
        self.columns(yi)
            .into_iter()
            .filter(|c| c.cost != 0.0)
            .map(|c| (c.key.to_string(), c.cost))
            .collect()
    }
}
