//! Problem sizes from closed-form index-space counts, written against the
//! model alone (no builder code). `docs/index-space.md` has the formulas.

use scgep_core::model::{SystemModel, TechType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub columns: usize,
    pub rows: usize,
}

fn kind(m: &SystemModel, tech: &str) -> TechType {
    m.technology(tech).map_or(TechType::Thermal, |t| t.kind)
}

/// Columns and rows belonging to year index `yi`.
pub fn year_counts(m: &SystemModel, yi: usize) -> Counts {
    let y = m.time.years[yi];
    let y0 = m.time.years[0];
    let dh = m.time.days.len() * m.time.hours;
    let n_zone = m.topology.zones.len();
    let n_mat = m.catalog.materials.len();
    let n_comp = m.catalog.components.len();
    let n_prod = m.catalog.products.len();
    let pools = m.field_pools();
    let cands: Vec<_> = m.assets.iter().filter(|g| g.is_candidate()).collect();
    let mandates = m.scenario.rps.values().filter(|v| v[yi] > 0.0).count();

    let mut cols = 0;
    for g in &m.assets {
        cols += if kind(m, &g.technology) == TechType::Storage { 3 * dh } else { dh };
        cols += if g.is_candidate() { 4 } else { 3 };
    }
    cols += m.topology.corridors.len() * dh + n_zone * dh + 1 + mandates;
    cols += 2 * n_mat + n_comp + n_prod + pools.len();

    let mut rows = 2 * n_mat + if yi > 0 { n_mat } else { 0 } + n_comp;
    rows += m
        .catalog
        .technologies
        .iter()
        .filter(|t| m.catalog.products.iter().any(|p| p.technology == t.id))
        .count();
    rows += pools.len();
    rows += pools
        .iter()
        .filter(|(k, i)| cands.iter().any(|g| g.field.as_deref() == Some(k.as_str()) && &g.zone == i))
        .count();
    for g in &cands {
        rows += 1;
        if y - g.lead_time.unwrap_or(0) as i32 >= y0 {
            rows += 1;
        }
        if y - g.lifetime.unwrap_or(1) as i32 >= y0 {
            rows += 1;
        }
    }
    rows += n_zone * dh + m.assets.len() + 1 + mandates;
    for g in &m.assets {
        match kind(m, &g.technology) {
            TechType::Storage if g.storage.is_some() => {
                let days = m.time.days.len();
                rows += 4 * dh + days + if m.time.hours > 1 { days } else { 0 };
            }
            TechType::Storage => {}
            _ => rows += dh,
        }
    }
    Counts { columns: cols, rows }
}

pub fn monolithic_counts(m: &SystemModel) -> Counts {
    (0..m.time.years.len()).fold(Counts::default(), |acc, yi| {
        let c = year_counts(m, yi);
        Counts {
            columns: acc.columns + c.columns,
            rows: acc.rows + c.rows,
        }
    })
}

/// Size of the incoming state of year index `yi >= 1`.
pub fn state_size(m: &SystemModel, yi: usize) -> usize {
    let y = m.time.years[yi];
    let y0 = m.time.years[0];
    let last = *m.time.years.last().unwrap();
    let mut n = 2 * m.catalog.materials.len();
    n += m.assets.iter().filter(|g| !g.recovery.is_empty() && !m.catalog.materials.is_empty()).count();
    n += m.field_pools().len();
    n += m.assets.len();
    for g in m.assets.iter().filter(|g| g.is_candidate()) {
        // Every earlier decision is referenced by the at-most-once rows.
        n += yi;
        let life = g.lifetime.unwrap_or(1) as i32;
        // Lifetime rows of years y..=last reaching back before y.
        n += (y0..y).filter(|&yb| (y..=last).contains(&(yb + life))).count();
    }
    n
}
