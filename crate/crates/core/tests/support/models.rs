//! Small models built in code, plus a seeded generator of random ones.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scgep_core::model::*;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn load_fixture(rel: &str) -> SystemModel {
    scgep_core::ingest::load_path(&fixture(rel), None)
        .unwrap_or_else(|e| panic!("{rel}: {e}"))
        .model
}

pub fn tech(id: &str, kind: TechType, density: Option<f64>, elcc: f64, years: usize) -> Technology {
    Technology {
        id: id.into(),
        kind,
        capacity_density: density,
        elcc: vec![elcc; years],
    }
}

pub fn asset(id: &str, zone: &str, technology: &str, class: AssetClass, mw: f64, years: usize) -> GeneratorAsset {
    GeneratorAsset {
        id: id.into(),
        zone: zone.into(),
        technology: technology.into(),
        class,
        capacity_mw: mw,
        product: None,
        storage: None,
        lead_time: (class == AssetClass::Candidate).then_some(0),
        lifetime: (class == AssetClass::Candidate).then_some(20),
        retirement_year: (class == AssetClass::Existing).then_some(2100),
        field: None,
        capex: vec![0.0; years],
        fixed_om: vec![0.0; years],
        var_cost: 0.0,
        recovery: BTreeMap::new(),
    }
}

/// One zone, `years` years from 2025, one day of weight 365 with the given
/// hourly load, no assets.
pub fn bare(years: usize, load: &[f64]) -> SystemModel {
    let ys: Vec<i32> = (0..years as i32).map(|i| 2025 + i).collect();
    let peak = load.iter().cloned().fold(0.0, f64::max);
    SystemModel {
        topology: Topology {
            zones: vec!["Z1".into()],
            corridors: vec![],
        },
        catalog: TechnologyCatalog::default(),
        assets: vec![],
        time: TimeStructure {
            years: ys,
            days: vec!["d1".into()],
            weights: vec![vec![365.0]; years],
            hours: load.len(),
            discount_rate: 0.0,
        },
        scenario: ScenarioData {
            load: BTreeMap::from([("Z1".into(), vec![vec![load.to_vec()]; years])]),
            peak_load: vec![peak; years],
            availability: BTreeMap::new(),
            reserve_margin: vec![0.0; years],
            rps: BTreeMap::new(),
            imports: BTreeMap::new(),
        },
        supply_chain: SupplyChainData::default(),
        penalties: PenaltyPrices::default(),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GenSettings {
    pub max_years: usize,
    pub allow_binary: bool,
}

impl Default for GenSettings {
    fn default() -> Self {
        GenSettings {
            max_years: 3,
            allow_binary: false,
        }
    }
}

/// A random but valid model: 1-2 zones, up to `max_years` years, 1-2 days
/// of 2-4 hours, existing thermal units, renewable, storage and optionally
/// binary thermal candidates, with materials, components and land.
pub fn random_model(seed: u64, s: GenSettings) -> SystemModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ny = rng.gen_range(1..=s.max_years);
    let nz = rng.gen_range(1..=2);
    let nd = rng.gen_range(1..=2);
    let nh = rng.gen_range(2..=4);
    let years: Vec<i32> = (0..ny as i32).map(|i| 2025 + i).collect();
    let zones: Vec<String> = (1..=nz).map(|i| format!("Z{i}")).collect();
    let days: Vec<String> = (1..=nd).map(|i| format!("d{i}")).collect();
    let weights = if nd == 1 { vec![365.0] } else { vec![180.0, 185.0] };

    let catalog = TechnologyCatalog {
        technologies: vec![
            tech("gas", TechType::Thermal, None, 0.95, ny),
            tech("coal", TechType::Thermal, None, 0.9, ny),
            tech("spv", TechType::Renewable, Some(36.0), 0.3, ny),
            tech("lbw", TechType::Renewable, Some(3.09), 0.2, ny),
            tech("bss", TechType::Storage, None, 0.9, ny),
        ],
        materials: vec!["si".into(), "steel".into()],
        components: vec![
            Component {
                id: "module".into(),
                materials: BTreeMap::from([("si".into(), 0.005)]),
            },
            Component {
                id: "tower".into(),
                materials: BTreeMap::from([("steel".into(), 50.0)]),
            },
        ],
        products: vec![
            Product {
                id: "spv_panel".into(),
                technology: "spv".into(),
                components: BTreeMap::from([("module".into(), 3000.0)]),
            },
            Product {
                id: "lbw_turbine".into(),
                technology: "lbw".into(),
                components: BTreeMap::from([("tower".into(), 0.333)]),
            },
        ],
    };

    let mut assets = Vec::new();
    let mut load = BTreeMap::new();
    let mut availability = BTreeMap::new();
    let mut field_area: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    let profile = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| -> Profile {
        let base: Vec<Vec<f64>> = (0..nd)
            .map(|_| (0..nh).map(|_| (rng.gen_range(lo..hi) * 100.0_f64).round() / 100.0).collect())
            .collect();
        (0..ny).map(|_| base.clone()).collect()
    };
    for z in &zones {
        load.insert(z.clone(), profile(&mut rng, 20.0, 100.0));
        let n_exist = rng.gen_range(1..=2);
        for e in 0..n_exist {
            let id = format!("E{z}{e}");
            let mut g = asset(&id, z, if e == 0 { "gas" } else { "coal" }, AssetClass::Existing, rng.gen_range(20.0..80.0_f64).round(), ny);
            g.retirement_year = Some(years[0] + rng.gen_range(0..=ny as i32 + 1));
            g.fixed_om = vec![rng.gen_range(5000.0..30000.0_f64).round(); ny];
            g.var_cost = rng.gen_range(20.0..60.0_f64).round();
            if rng.gen_bool(0.5) {
                g.recovery.insert("steel".into(), rng.gen_range(0.1..2.0_f64));
            }
            assets.push(g);
        }

        let spv = format!("S{z}");
        let mut g = asset(&spv, z, "spv", AssetClass::Candidate, rng.gen_range(20.0..60.0_f64).round(), ny);
        g.product = Some("spv_panel".into());
        g.field = Some("spv".into());
        g.lead_time = Some(rng.gen_range(0..=1));
        g.lifetime = Some(rng.gen_range(1..=25));
        g.capex = (0..ny).map(|_| rng.gen_range(5e5..1.2e6_f64).round()).collect();
        g.fixed_om = vec![10000.0; ny];
        availability.insert(spv.clone(), profile(&mut rng, 0.0, 1.0));
        field_area.entry("spv".into()).or_default().insert(z.clone(), rng.gen_range(0.2..3.0_f64));
        assets.push(g);

        let lbw = format!("W{z}");
        let mut g = asset(&lbw, z, "lbw", AssetClass::Candidate, rng.gen_range(20.0..60.0_f64).round(), ny);
        g.product = Some("lbw_turbine".into());
        g.field = Some("lbw".into());
        g.lead_time = Some(rng.gen_range(0..=2));
        g.lifetime = Some(25);
        g.capex = vec![rng.gen_range(8e5..1.6e6_f64).round(); ny];
        g.fixed_om = vec![30000.0; ny];
        g.recovery.insert("steel".into(), rng.gen_range(1.0..20.0_f64));
        availability.insert(lbw.clone(), profile(&mut rng, 0.0, 1.0));
        field_area.entry("lbw".into()).or_default().insert(z.clone(), rng.gen_range(2.0..30.0_f64));
        assets.push(g);

        if rng.gen_bool(0.6) {
            let id = format!("B{z}");
            let mut g = asset(&id, z, "bss", AssetClass::Candidate, rng.gen_range(10.0..40.0_f64).round(), ny);
            g.storage = Some(StorageSpec {
                energy_mwh: rng.gen_range(40.0..160.0_f64).round(),
                eff_charge: rng.gen_range(0.8..1.0),
                eff_discharge: rng.gen_range(0.8..1.0),
            });
            g.lifetime = Some(15);
            g.capex = vec![rng.gen_range(3e5..9e5_f64).round(); ny];
            g.fixed_om = vec![8000.0; ny];
            g.var_cost = 1.0;
            assets.push(g);
        }
        if s.allow_binary && rng.gen_bool(0.7) {
            let id = format!("G{z}");
            let mut g = asset(&id, z, "gas", AssetClass::Candidate, rng.gen_range(20.0..60.0_f64).round(), ny);
            g.lifetime = Some(30);
            g.capex = vec![rng.gen_range(5e5..1e6_f64).round(); ny];
            g.fixed_om = vec![12000.0; ny];
            g.var_cost = 45.0;
            assets.push(g);
        }
    }

    let corridors = if nz == 2 {
        vec![Corridor {
            id: "L1".into(),
            from: "Z1".into(),
            to: "Z2".into(),
            capacity_mw: rng.gen_range(0.0..60.0_f64).round(),
        }]
    } else {
        vec![]
    };

    let mut peak = Vec::new();
    for yi in 0..ny {
        let mut best: f64 = 0.0;
        for t in 0..nd {
            for h in 0..nh {
                let total: f64 = zones.iter().map(|z| load[z][yi][t][h]).sum();
                best = best.max(total);
            }
        }
        peak.push(best);
    }
    let rps = if rng.gen_bool(0.5) {
        BTreeMap::from([("spv".to_string(), (0..ny).map(|i| 0.02 * i as f64).collect())])
    } else {
        BTreeMap::new()
    };

    SystemModel {
        topology: Topology { zones, corridors },
        catalog,
        assets,
        time: TimeStructure {
            years,
            days,
            weights: vec![weights; ny],
            hours: nh,
            discount_rate: 0.05,
        },
        scenario: ScenarioData {
            load,
            peak_load: peak,
            availability,
            reserve_margin: vec![0.15; ny],
            rps,
            imports: BTreeMap::new(),
        },
        supply_chain: SupplyChainData {
            supply: BTreeMap::from([
                ("si".into(), (0..ny).map(|_| rng.gen_range(0.0..600.0_f64).round()).collect()),
                ("steel".into(), (0..ny).map(|_| rng.gen_range(0.0..1500.0_f64).round()).collect()),
            ]),
            initial_stock: BTreeMap::from([("steel".into(), rng.gen_range(0.0..200.0_f64).round())]),
            field_area,
        },
        penalties: PenaltyPrices::default(),
    }
}
