//! Validated input data for the planning model.
//!
//! Every series is stored densely in canonical form: per-year vectors are
//! aligned with [`TimeStructure::years`] and hourly profiles are indexed
//! `[year][day][hour]`. File formats with defaults, growth rates and
//! clustering live in [`crate::ingest`]; the model itself carries no
//! defaults.

mod keys;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use keys::{variable_key, KeyError, VarKey, VarKind, ALL_KINDS};
pub use validate::{validate, ValidationReport};

/// Hourly values indexed `[year][day][hour]`.
pub type Profile = Vec<Vec<Vec<f64>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    pub id: String,
    pub from: String,
    pub to: String,
    /// Transfer capacity in MW, usable in both directions.
    pub capacity_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub zones: Vec<String>,
    #[serde(default)]
    pub corridors: Vec<Corridor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TechType {
    Thermal,
    Renewable,
    Storage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Technology {
    pub id: String,
    pub kind: TechType,
    /// MW per km². Present exactly for land-using technologies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_density: Option<f64>,
    /// ELCC factor per year.
    pub elcc: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    /// Tonnes of each material per component unit.
    pub materials: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Product {
    pub id: String,
    pub technology: String,
    /// Component units per MW of product.
    pub components: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TechnologyCatalog {
    pub technologies: Vec<Technology>,
    #[serde(default)]
    pub materials: Vec<String>,
    #[serde(default)]
    pub components: Vec<Component>,
    #[serde(default)]
    pub products: Vec<Product>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssetClass {
    Existing,
    Candidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrality {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageSpec {
    pub energy_mwh: f64,
    pub eff_charge: f64,
    pub eff_discharge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorAsset {
    pub id: String,
    pub zone: String,
    pub technology: String,
    pub class: AssetClass,
    pub capacity_mw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub storage: Option<StorageSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lead_time: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retirement_year: Option<i32>,
    /// Land pool the unit occupies. `None` means the unit holds no land.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    /// Investment cost per year, $/MW.
    pub capex: Vec<f64>,
    /// Fixed O&M per year, $/MW-year.
    pub fixed_om: Vec<f64>,
    /// Variable cost, $/MWh.
    pub var_cost: f64,
    /// Recovered tonnes per MW at retirement, by material.
    #[serde(default)]
    pub recovery: BTreeMap<String, f64>,
}

impl GeneratorAsset {
    pub fn is_candidate(&self) -> bool {
        self.class == AssetClass::Candidate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStructure {
    /// Consecutive planning years.
    pub years: Vec<i32>,
    /// Representative day ids.
    pub days: Vec<String>,
    /// Occurrence weight N per `[year][day]`, in days.
    pub weights: Vec<Vec<f64>>,
    pub hours: usize,
    pub discount_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioData {
    /// MW by zone.
    pub load: BTreeMap<String, Profile>,
    /// System peak per year, MW.
    pub peak_load: Vec<f64>,
    /// Availability factor by asset id (renewables only).
    #[serde(default)]
    pub availability: BTreeMap<String, Profile>,
    /// Fraction per year.
    pub reserve_margin: Vec<f64>,
    /// RPS mandate fraction per year, by technology.
    #[serde(default)]
    pub rps: BTreeMap<String, Vec<f64>>,
    /// Signed exogenous injection by zone, MW. Missing zones inject nothing.
    #[serde(default)]
    pub imports: BTreeMap<String, Profile>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SupplyChainData {
    /// Primary supply per year, tonnes.
    #[serde(default)]
    pub supply: BTreeMap<String, Vec<f64>>,
    /// Stock before the first year, tonnes.
    #[serde(default)]
    pub initial_stock: BTreeMap<String, f64>,
    /// Initial available area in km² by field pool, then zone.
    #[serde(default)]
    pub field_area: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenaltyPrices {
    /// $/MWh of unserved load.
    pub voll: f64,
    /// $/MW-year of reserve shortfall.
    pub reserve: f64,
    /// $/MWh of RPS shortfall.
    pub rps: f64,
}

impl Default for PenaltyPrices {
    fn default() -> Self {
        PenaltyPrices {
            voll: 10_000.0,
            reserve: 263_000.0,
            rps: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemModel {
    pub topology: Topology,
    pub catalog: TechnologyCatalog,
    pub assets: Vec<GeneratorAsset>,
    pub time: TimeStructure,
    pub scenario: ScenarioData,
    pub supply_chain: SupplyChainData,
    pub penalties: PenaltyPrices,
}

/// `(field pool, zone)` pair identifying one land account.
pub type FieldPool = (String, String);

impl SystemModel {
    pub fn technology(&self, id: &str) -> Option<&Technology> {
        self.catalog.technologies.iter().find(|t| t.id == id)
    }

    pub fn asset(&self, id: &str) -> Option<&GeneratorAsset> {
        self.assets.iter().find(|a| a.id == id)
    }

    pub fn tech_type(&self, asset: &GeneratorAsset) -> TechType {
        self.technology(&asset.technology)
            .map(|t| t.kind)
            .unwrap_or(TechType::Thermal)
    }

    /// Binary for thermal candidates, continuous on [0, 1] otherwise.
    pub fn integrality(&self, asset: &GeneratorAsset) -> Integrality {
        if self.tech_type(asset) == TechType::Thermal {
            Integrality::Binary
        } else {
            Integrality::Continuous
        }
    }

    pub fn first_year(&self) -> i32 {
        self.time.years.first().copied().unwrap_or(0)
    }

    pub fn year_index(&self, year: i32) -> Option<usize> {
        self.time.years.iter().position(|&y| y == year)
    }

    /// Retirement year of an existing unit, no earlier than the second year.
    pub fn effective_retirement(&self, asset: &GeneratorAsset) -> Option<i32> {
        asset.retirement_year.map(|y| y.max(self.first_year() + 1))
    }

    /// Land pools in use: declared areas plus pools referenced by assets.
    pub fn field_pools(&self) -> Vec<FieldPool> {
        let mut pools: Vec<FieldPool> = self
            .supply_chain
            .field_area
            .iter()
            .flat_map(|(k, zones)| zones.keys().map(move |i| (k.clone(), i.clone())))
            .collect();
        for a in &self.assets {
            if let Some(k) = &a.field {
                pools.push((k.clone(), a.zone.clone()));
            }
        }
        pools.sort();
        pools.dedup();
        pools
    }

    pub fn field_area(&self, pool: &FieldPool) -> f64 {
        self.supply_chain
            .field_area
            .get(&pool.0)
            .and_then(|z| z.get(&pool.1))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn load(&self, zone: &str, y: usize, t: usize, h: usize) -> f64 {
        self.scenario.load.get(zone).map_or(0.0, |p| p[y][t][h])
    }

    pub fn import(&self, zone: &str, y: usize, t: usize, h: usize) -> f64 {
        self.scenario.imports.get(zone).map_or(0.0, |p| p[y][t][h])
    }

    /// Largest system load over all representative hours of year index `y`.
    pub fn max_system_load(&self, y: usize) -> f64 {
        let mut best: f64 = 0.0;
        for t in 0..self.time.days.len() {
            for h in 0..self.time.hours {
                let total: f64 = self.topology.zones.iter().map(|i| self.load(i, y, t, h)).sum();
                best = best.max(total);
            }
        }
        best
    }

    /// SHA-256 of the canonical JSON serialization, hex encoded.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("model serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
