use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{AssetClass, Profile, SystemModel, TechType};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

struct Checker {
    report: ValidationReport,
}

impl Checker {
    fn err(&mut self, msg: String) {
        self.report.errors.push(msg);
    }

    fn warn(&mut self, msg: String) {
        self.report.warnings.push(msg);
    }

    fn id(&mut self, what: &str, id: &str) {
        if id.is_empty() || id.contains([',', '[', ']', ':']) || id.chars().any(char::is_whitespace) {
            self.err(format!("{what} {id:?}: invalid id"));
        }
    }

    fn unique<'a>(&mut self, what: &str, ids: impl Iterator<Item = &'a String>) -> BTreeSet<&'a str> {
        let mut seen = BTreeSet::new();
        for id in ids {
            self.id(what, id);
            if !seen.insert(id.as_str()) {
                self.err(format!("{what} {id}: duplicate id"));
            }
        }
        seen
    }

    fn series(&mut self, what: &str, v: &[f64], len: usize, lo: f64, hi: f64) {
        if v.len() != len {
            self.err(format!("{what}: expected {len} yearly values, got {}", v.len()));
        }
        if v.iter().any(|x| !x.is_finite() || *x < lo || *x > hi) {
            self.err(format!("{what}: value out of [{lo}, {hi}]"));
        }
    }

    fn profile(&mut self, what: &str, p: &Profile, dims: (usize, usize, usize), lo: f64, hi: f64) {
        let ok_shape = p.len() == dims.0
            && p.iter().all(|y| y.len() == dims.1 && y.iter().all(|d| d.len() == dims.2));
        if !ok_shape {
            self.err(format!(
                "{what}: profile shape must be {} years x {} days x {} hours",
                dims.0, dims.1, dims.2
            ));
            return;
        }
        if p.iter().flatten().flatten().any(|x| !x.is_finite() || *x < lo || *x > hi) {
            self.err(format!("{what}: value out of [{lo}, {hi}]"));
        }
    }
}

/// Checks every structural invariant of `model`. Errors make the model
/// unusable; warnings flag suspicious but legal data.
pub fn validate(model: &SystemModel) -> ValidationReport {
    let mut c = Checker {
        report: ValidationReport::default(),
    };
    let inf = f64::INFINITY;
    let ny = model.time.years.len();
    let nd = model.time.days.len();
    let nh = model.time.hours;

    // Topology.
    let zones = c.unique("zone", model.topology.zones.iter());
    c.unique("corridor", model.topology.corridors.iter().map(|l| &l.id));
    for l in &model.topology.corridors {
        for end in [&l.from, &l.to] {
            if !zones.contains(end.as_str()) {
                c.err(format!("corridor {}: unknown zone {end:?}", l.id));
            }
        }
        if l.from == l.to {
            c.err(format!("corridor {}: endpoints must differ", l.id));
        }
        if !(l.capacity_mw >= 0.0) || !l.capacity_mw.is_finite() {
            c.err(format!("corridor {}: transfer capacity must be >= 0", l.id));
        }
    }

    // Time structure.
    if ny == 0 {
        c.err("time: at least one year required".into());
    }
    if model.time.years.windows(2).any(|w| w[1] != w[0] + 1) {
        c.err("time: years must be consecutive".into());
    }
    c.unique("day", model.time.days.iter());
    if nd == 0 || nh == 0 {
        c.err("time: at least one day and one hour required".into());
    }
    if model.time.weights.len() != ny || model.time.weights.iter().any(|w| w.len() != nd) {
        c.err(format!("time: weights must be {ny} years x {nd} days"));
    } else {
        for (y, w) in model.time.years.iter().zip(&model.time.weights) {
            if w.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                c.err(format!("time: weights of {y} must be > 0"));
            }
            let total: f64 = w.iter().sum();
            if !(364.0..=366.0).contains(&total) {
                c.err(format!("time: weights of {y} sum to {total}, expected 364..366"));
            }
        }
    }
    if !(model.time.discount_rate > -1.0) || !model.time.discount_rate.is_finite() {
        c.err("time: discount rate must exceed -1".into());
    }

    // Catalog.
    let techs = c.unique("technology", model.catalog.technologies.iter().map(|t| &t.id));
    for t in &model.catalog.technologies {
        c.series(&format!("technology {} elcc", t.id), &t.elcc, ny, 0.0, 1.0);
        if let Some(r) = t.capacity_density {
            if !(r > 0.0) || !r.is_finite() {
                c.err(format!("technology {}: capacity density must be > 0", t.id));
            }
        }
    }
    let materials = c.unique("material", model.catalog.materials.iter());
    let components = c.unique("component", model.catalog.components.iter().map(|x| &x.id));
    let products = c.unique("product", model.catalog.products.iter().map(|x| &x.id));
    for comp in &model.catalog.components {
        for (m, v) in &comp.materials {
            if !materials.contains(m.as_str()) {
                c.err(format!("component {}: unknown material {m:?}", comp.id));
            }
            if !(*v >= 0.0) || !v.is_finite() {
                c.err(format!("component {}: negative material intensity", comp.id));
            }
        }
    }
    for p in &model.catalog.products {
        if !techs.contains(p.technology.as_str()) {
            c.err(format!("product {}: unknown technology {:?}", p.id, p.technology));
        }
        for (k, v) in &p.components {
            if !components.contains(k.as_str()) {
                c.err(format!("product {}: unknown component {k:?}", p.id));
            }
            if !(*v >= 0.0) || !v.is_finite() {
                c.err(format!("product {}: negative component intensity", p.id));
            }
        }
    }

    // Assets.
    c.unique("asset", model.assets.iter().map(|a| &a.id));
    for a in &model.assets {
        let what = format!("asset {}", a.id);
        if !zones.contains(a.zone.as_str()) {
            c.err(format!("{what}: unknown zone {:?}", a.zone));
        }
        let Some(tech) = model.technology(&a.technology) else {
            c.err(format!("{what}: unknown technology {:?}", a.technology));
            continue;
        };
        if !(a.capacity_mw > 0.0) || !a.capacity_mw.is_finite() {
            c.err(format!("{what}: capacity must be > 0"));
        }
        match (&a.storage, tech.kind == TechType::Storage) {
            (Some(s), true) => {
                for (name, e) in [("charge", s.eff_charge), ("discharge", s.eff_discharge)] {
                    if !(e > 0.0 && e <= 1.0) {
                        c.err(format!("{what}: {name} efficiency out of (0,1]"));
                    }
                }
                if !(s.energy_mwh >= 0.0) || !s.energy_mwh.is_finite() {
                    c.err(format!("{what}: storage energy must be >= 0"));
                }
            }
            (None, true) => c.err(format!("{what}: storage technology requires storage fields")),
            (Some(_), false) => c.err(format!("{what}: storage fields on non-storage technology")),
            (None, false) => {}
        }
        match a.class {
            AssetClass::Existing => {
                if a.retirement_year.is_none() {
                    c.err(format!("{what}: existing unit requires a retirement year"));
                }
                if a.product.is_some() || a.lead_time.is_some() {
                    c.err(format!("{what}: product and lead time apply to candidates only"));
                }
                if let Some(ry) = a.retirement_year {
                    if ry <= model.first_year() {
                        c.warn(format!("{what}: past design life, retires in {}", model.first_year() + 1));
                    }
                }
            }
            AssetClass::Candidate => {
                if a.retirement_year.is_some() {
                    c.err(format!("{what}: retirement year applies to existing units only"));
                }
                match (a.lead_time, a.lifetime) {
                    (Some(lead), Some(life)) => {
                        if life == 0 {
                            c.err(format!("{what}: lifetime must be >= 1"));
                        }
                        if lead as usize >= ny {
                            c.warn(format!("{what}: lead time {lead} exceeds horizon, never buildable"));
                        }
                    }
                    _ => c.err(format!("{what}: candidate requires lead time and lifetime")),
                }
                let tech_products: Vec<&str> = model
                    .catalog
                    .products
                    .iter()
                    .filter(|p| p.technology == a.technology)
                    .map(|p| p.id.as_str())
                    .collect();
                match &a.product {
                    Some(p) if !products.contains(p.as_str()) => {
                        c.err(format!("{what}: unknown product {p:?}"))
                    }
                    Some(p) if !tech_products.contains(&p.as_str()) => {
                        c.err(format!("{what}: product {p} does not belong to {}", a.technology))
                    }
                    None if !tech_products.is_empty() => {
                        c.err(format!("{what}: candidate of {} requires a product", a.technology))
                    }
                    _ => {}
                }
                if tech.capacity_density.is_some() && a.field.is_none() {
                    c.err(format!("{what}: land-using candidate requires a field"));
                }
            }
        }
        if a.field.is_some() && tech.capacity_density.is_none() {
            c.err(format!("{what}: field set but technology has no capacity density"));
        }
        if let Some(f) = &a.field {
            c.id("field", f);
        }
        c.series(&format!("{what} capex"), &a.capex, ny, 0.0, inf);
        c.series(&format!("{what} fixed O&M"), &a.fixed_om, ny, 0.0, inf);
        if !(a.var_cost >= 0.0) || !a.var_cost.is_finite() {
            c.err(format!("{what}: variable cost must be >= 0"));
        }
        for (m, v) in &a.recovery {
            if !materials.contains(m.as_str()) {
                c.err(format!("{what}: recovery of unknown material {m:?}"));
            }
            if !(*v >= 0.0) || !v.is_finite() {
                c.err(format!("{what}: recovery rate must be >= 0"));
            }
        }
        if tech.kind == TechType::Renewable {
            match model.scenario.availability.get(&a.id) {
                None => c.err(format!("{what}: renewable unit without availability profile")),
                Some(p) => {
                    c.profile(&format!("{what} availability"), p, (ny, nd, nh), 0.0, 1.0);
                    if p.iter().flatten().flatten().all(|x| *x == 0.0) {
                        c.warn(format!("{what}: availability identically zero"));
                    }
                }
            }
        }
    }
    for id in model.scenario.availability.keys() {
        match model.asset(id) {
            Some(a) if model.tech_type(a) == TechType::Renewable => {}
            Some(_) => c.err(format!("availability {id}: not a renewable asset")),
            None => c.err(format!("availability {id}: unknown asset")),
        }
    }

    // Scenario.
    for (zone, p) in &model.scenario.load {
        if !zones.contains(zone.as_str()) {
            c.err(format!("load: unknown zone {zone:?}"));
        }
        c.profile(&format!("load {zone}"), p, (ny, nd, nh), 0.0, inf);
    }
    for (zone, p) in &model.scenario.imports {
        if !zones.contains(zone.as_str()) {
            c.err(format!("imports: unknown zone {zone:?}"));
            continue;
        }
        c.profile(&format!("imports {zone}"), p, (ny, nd, nh), -inf, inf);
        if c.report.errors.is_empty() {
            let exceeds = (0..ny).any(|y| {
                (0..nd).any(|t| (0..nh).any(|h| p[y][t][h] > model.load(zone, y, t, h) + 1e-9))
            });
            if exceeds {
                c.err(format!("imports {zone}: import exceeds load"));
            }
        }
    }
    c.series("peak load", &model.scenario.peak_load, ny, 0.0, inf);
    c.series("reserve margin", &model.scenario.reserve_margin, ny, 0.0, inf);
    if c.report.errors.is_empty() {
        for (y, year) in model.time.years.iter().enumerate() {
            let max = model.max_system_load(y);
            if model.scenario.peak_load[y] + 1e-9 < max {
                c.warn(format!(
                    "peak load {year}: {} below largest modeled system load {max}",
                    model.scenario.peak_load[y]
                ));
            }
        }
    }
    for (k, v) in &model.scenario.rps {
        if !techs.contains(k.as_str()) {
            c.err(format!("rps: unknown technology {k:?}"));
        }
        c.series(&format!("rps {k}"), v, ny, 0.0, 1.0);
    }

    // Supply chain.
    for (m, v) in &model.supply_chain.supply {
        if !materials.contains(m.as_str()) {
            c.err(format!("supply: unknown material {m:?}"));
        }
        c.series(&format!("supply {m}"), v, ny, 0.0, inf);
    }
    for (m, v) in &model.supply_chain.initial_stock {
        if !materials.contains(m.as_str()) {
            c.err(format!("initial stock: unknown material {m:?}"));
        }
        if !(*v >= 0.0) || !v.is_finite() {
            c.err(format!("initial stock {m}: must be >= 0"));
        }
    }
    for (k, by_zone) in &model.supply_chain.field_area {
        c.id("field", k);
        for (zone, v) in by_zone {
            if !zones.contains(zone.as_str()) {
                c.err(format!("field {k}: unknown zone {zone:?}"));
            }
            if !(*v >= 0.0) || !v.is_finite() {
                c.err(format!("field {k} {zone}: area must be >= 0"));
            }
        }
    }

    let p = &model.penalties;
    for (name, v) in [("voll", p.voll), ("reserve", p.reserve), ("rps", p.rps)] {
        if !(v >= 0.0) || !v.is_finite() {
            c.err(format!("penalty {name}: must be >= 0"));
        }
    }
    c.report
}
