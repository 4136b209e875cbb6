//! Material supply scaling and supply-chain scenario transforms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::model::SystemModel;

/// Stand-in for unlimited supply (tonnes) and land (km²).
pub const UNLIMITED: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    #[default]
    Baseline,
    /// Unlimited materials and land, zero lead times.
    WithoutSc,
    /// Primary supply multiplied by `factor`.
    LimitedSc { factor: f64 },
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Scenario::Baseline),
            "without-sc" | "wo-sc" => Ok(Scenario::WithoutSc),
            _ => {
                let f = s
                    .strip_prefix("limited-sc:")
                    .and_then(|f| f.parse::<f64>().ok())
                    .ok_or_else(|| {
                        format!("unknown scenario {s:?} (baseline, without-sc, limited-sc:<factor>)")
                    })?;
                Ok(Scenario::LimitedSc { factor: f })
            }
        }
    }
}

/// Primary supply as `national × state_share × sector_share[m]`, element-wise.
pub fn scale_material_supply(
    national: &BTreeMap<String, Vec<f64>>,
    state_share: f64,
    sector_shares: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, Vec<f64>>, IngestError> {
    let bad = |what: String| IngestError::Config(format!("material scaling: {what}"));
    if !(0.0..=1.0).contains(&state_share) {
        return Err(bad(format!("state share {state_share} outside [0, 1]")));
    }
    let mut out = BTreeMap::new();
    for (m, series) in national {
        let sector = *sector_shares
            .get(m)
            .ok_or_else(|| bad(format!("no sector share for {m}")))?;
        if !(0.0..=1.0).contains(&sector) {
            return Err(bad(format!("sector share {sector} of {m} outside [0, 1]")));
        }
        if series.iter().any(|v| !(*v >= 0.0)) {
            return Err(bad(format!("negative national supply for {m}")));
        }
        out.insert(m.clone(), series.iter().map(|v| v * state_share * sector).collect());
    }
    Ok(out)
}

pub fn apply_scenario(model: &mut SystemModel, scenario: Scenario) -> Result<(), IngestError> {
    let ny = model.time.years.len();
    match scenario {
        Scenario::Baseline => {}
        Scenario::WithoutSc => {
            for m in &model.catalog.materials {
                model.supply_chain.supply.insert(m.clone(), vec![UNLIMITED; ny]);
            }
            for a in &mut model.assets {
                if a.lead_time.is_some() {
                    a.lead_time = Some(0);
                }
            }
            for (k, zone) in model.field_pools() {
                model
                    .supply_chain
                    .field_area
                    .entry(k)
                    .or_default()
                    .insert(zone, UNLIMITED);
            }
        }
        Scenario::LimitedSc { factor } => {
            if !(factor >= 0.0) || !factor.is_finite() {
                return Err(IngestError::Config(format!("limited-sc factor {factor} must be >= 0")));
            }
            for v in model.supply_chain.supply.values_mut() {
                for x in v {
                    *x *= factor;
                }
            }
        }
    }
    Ok(())
}
