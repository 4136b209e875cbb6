mod support;

use std::collections::BTreeMap;

use proptest::prelude::*;
use scgep_core::builder::*;
use scgep_core::milp::{solve_milp, SolveResult, SolverOptions, SparseProblem};
use scgep_core::model::*;
use scgep_core::oracle::{solve_monolithic, OracleOptions};
use scgep_core::report::check_invariants;
use support::counts::{monolithic_counts, state_size, year_counts};
use support::models::{asset, bare, load_fixture, random_model, tech, GenSettings};

fn solve(p: &SparseProblem) -> SolveResult {
    let r = solve_milp(p, &SolverOptions::default());
    assert!(r.is_optimal(), "{:?}", r.status);
    r
}

fn val(p: &SparseProblem, r: &SolveResult, key: &str) -> f64 {
    r.value(p, key).unwrap_or_else(|| panic!("no column {key}"))
}

fn fix(p: &mut SparseProblem, key: &str, v: f64) {
    let j = p.column_index(key).unwrap_or_else(|| panic!("no column {key}"));
    p.set_bounds(j, v, v);
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn with_weight(mut m: SystemModel, w: f64) -> SystemModel {
    for ws in &mut m.time.weights {
        ws[0] = w;
    }
    m
}

fn storage_unit(id: &str, class: AssetClass, mw: f64, e: f64, years: usize) -> GeneratorAsset {
    let mut g = asset(id, "Z1", "bss", class, mw, years);
    g.storage = Some(StorageSpec {
        energy_mwh: e,
        eff_charge: 0.9,
        eff_discharge: 0.9,
    });
    g
}

#[test]
fn objective_coefficients_follow_weights_and_prices() {
    let mut m = with_weight(bare(1, &[50.0]), 91.0);
    m.catalog.technologies.push(tech("gas", TechType::Thermal, None, 0.9, 1));
    m.catalog.technologies.push(tech("bss", TechType::Storage, None, 0.9, 1));
    let mut u = asset("U1", "Z1", "gas", AssetClass::Existing, 80.0, 1);
    u.var_cost = 30.0;
    u.fixed_om = vec![1000.0];
    m.assets.push(u);
    let mut b = storage_unit("B1", AssetClass::Candidate, 10.0, 40.0, 1);
    b.var_cost = 30.0;
    m.assets.push(b);

    let obj = build_objective(&m, 2025).unwrap();
    assert_eq!(obj["p[U1,d1,1,2025]"], 2730.0);
    assert_eq!(obj["c[B1,d1,1,2025]"], 2730.0);
    assert_eq!(obj["dc[B1,d1,1,2025]"], 2730.0);
    assert_eq!(obj["ls[Z1,d1,1,2025]"], 910000.0);
    assert_eq!(obj["o[U1,2025]"], 80_000.0);
    assert_eq!(obj["rm[2025]"], m.penalties.reserve);
    assert!(!obj.contains_key("soc[B1,d1,1,2025]"));
    assert!(matches!(build_objective(&m, 2031), Err(BuildError::YearOutOfRange(2031))));
}

fn capex_model(years: usize, life: u32, rate: f64) -> (SystemModel, GeneratorAsset) {
    let mut m = bare(years, &[10.0]);
    m.time.discount_rate = rate;
    m.catalog.technologies.push(tech("gas", TechType::Thermal, None, 0.9, years));
    let mut g = asset("C1", "Z1", "gas", AssetClass::Candidate, 10.0, years);
    g.capex = vec![100.0; years];
    g.lifetime = Some(life);
    m.assets.push(g.clone());
    (m, g)
}

#[test]
fn adjusted_investment_cost_examples() {
    let (m, g) = capex_model(10, 10, 0.0);
    assert_eq!(adjusted_investment_cost(&m, &g, 2025), 100.0);

    // Five of ten lifetime years fall inside the horizon. Cross-check: the
    // undiscounted annualized cost 100/10 summed over the effective years.
    let (m, g) = capex_model(5, 10, 0.0);
    let annualized: f64 = (2025..=2029).map(|_| 100.0 / 10.0).sum();
    assert_eq!(adjusted_investment_cost(&m, &g, 2025), 50.0);
    assert!(close(annualized, 50.0, 1e-12));

    let (m, g) = capex_model(10, 8, 0.05);
    let got = adjusted_investment_cost(&m, &g, 2027);
    assert!(close(got, 100.0 * 1.05_f64.powi(-2), 1e-12), "{got}");

    // A decision whose unit would come online after the horizon has no value.
    let mut late = g.clone();
    late.lead_time = Some(20);
    assert_eq!(adjusted_investment_cost(&m, &late, 2025), 0.0);
    assert_eq!(adjusted_investment_cost(&m, &g, 1999), 0.0);
}

#[test]
fn lead_time_shifts_build_by_three_years() {
    let mut m = bare(4, &[10.0]);
    m.catalog.technologies.push(tech("lbw", TechType::Renewable, None, 0.2, 4));
    let mut g = asset("C1", "Z1", "lbw", AssetClass::Candidate, 50.0, 4);
    g.lead_time = Some(3);
    m.assets.push(g);
    m.scenario.availability.insert("C1".into(), vec![vec![vec![0.5]]; 4]);

    let rows = build_sc_constraints(&m, 2028).unwrap();
    let lead = rows.iter().find(|r| r.key == "lead[C1,2028]").unwrap();
    let terms: Vec<(String, f64)> = lead.terms.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    assert_eq!(terms, vec![("b[C1,2028]".to_string(), 1.0), ("d[C1,2025]".to_string(), -1.0)]);

    let mut p = build_monolithic(&m).unwrap();
    fix(&mut p, "d[C1,2025]", 1.0);
    let r = solve(&p);
    for (y, want) in [(2025, 0.0), (2026, 0.0), (2027, 0.0), (2028, 1.0)] {
        assert!(close(val(&p, &r, &format!("b[C1,{y}]")), want, 1e-9), "b in {y}");
        assert!(close(val(&p, &r, &format!("o[C1,{y}]")), want, 1e-9), "o in {y}");
    }
}

fn spv_model(years: usize) -> SystemModel {
    let mut m = bare(years, &[10.0]);
    m.catalog.technologies.push(tech("spv", TechType::Renewable, Some(36.0), 0.3, years));
    let mut g = asset("C1", "Z1", "spv", AssetClass::Candidate, 36.0, years);
    g.field = Some("spv".into());
    m.assets.push(g);
    m.scenario.availability.insert("C1".into(), vec![vec![vec![0.5]]; years]);
    m.supply_chain.field_area.insert("spv".into(), BTreeMap::from([("Z1".into(), 5.0)]));
    m
}

#[test]
fn spv_block_uses_one_square_kilometre() {
    let m = spv_model(2);
    let rows = build_sc_constraints(&m, 2025).unwrap();
    let land = rows.iter().find(|r| r.key == "land[spv,Z1,2025]").unwrap();
    let coef = land.terms.iter().find(|(k, _)| k.to_string() == "d[C1,2025]").unwrap().1;
    assert_eq!(coef, 1.0);

    let mut p = build_monolithic(&m).unwrap();
    fix(&mut p, "d[C1,2025]", 1.0);
    let r = solve(&p);
    assert!(close(val(&p, &r, "f[spv,Z1,2025]"), 5.0, 1e-9));
    assert!(close(val(&p, &r, "f[spv,Z1,2026]"), 4.0, 1e-9));
}

#[test]
fn stock_carries_unused_supply() {
    let mut m = bare(2, &[10.0]);
    m.catalog.materials.push("si".into());
    m.supply_chain.supply.insert("si".into(), vec![100.0, 0.0]);
    let mut p = build_monolithic(&m).unwrap();
    fix(&mut p, "u[si,2025]", 40.0);
    let r = solve(&p);
    assert_eq!(val(&p, &r, "s[si,2025]"), 0.0);
    assert!(close(val(&p, &r, "s[si,2026]"), 60.0, 1e-9));
}

#[test]
fn unmet_load_is_shed() {
    let mut m = bare(1, &[100.0]);
    m.catalog.technologies.push(tech("gas", TechType::Thermal, None, 0.9, 1));
    m.assets.push(asset("U1", "Z1", "gas", AssetClass::Existing, 60.0, 1));
    let p = build_monolithic(&m).unwrap();
    let r = solve(&p);
    assert!(val(&p, &r, "ls[Z1,d1,1,2025]") >= 40.0 - 1e-9);
}

#[test]
fn renewable_output_is_bounded_by_availability() {
    let mut m = bare(1, &[100.0]);
    m.catalog.technologies.push(tech("spv", TechType::Renewable, None, 0.3, 1));
    m.assets.push(asset("R1", "Z1", "spv", AssetClass::Existing, 100.0, 1));
    m.scenario.availability.insert("R1".into(), vec![vec![vec![0.25]]]);
    let rows = build_gep_constraints(&m, 2025).unwrap();
    let avail = rows.iter().find(|r| r.key == "avail[R1,d1,1,2025]").unwrap();
    assert_eq!(avail.terms[1].1, -25.0);
    let p = build_monolithic(&m).unwrap();
    let r = solve(&p);
    assert!(close(val(&p, &r, "p[R1,d1,1,2025]"), 25.0, 1e-9));
    assert!(close(val(&p, &r, "ls[Z1,d1,1,2025]"), 75.0, 1e-9));
}

#[test]
fn reserve_shortfall_matches_hand_arithmetic() {
    let mut m = bare(1, &[1000.0]);
    m.scenario.reserve_margin = vec![0.15];
    m.catalog.technologies.push(tech("gas", TechType::Thermal, None, 1.0, 1));
    m.assets.push(asset("U1", "Z1", "gas", AssetClass::Existing, 1100.0, 1));
    let p = build_monolithic(&m).unwrap();
    let r = solve(&p);
    let want = 1.15 * 1000.0 - 1100.0;
    assert!(close(val(&p, &r, "rm[2025]"), want, 1e-9));
}

#[test]
fn state_of_charge_follows_efficiencies() {
    let mut m = bare(1, &[10.0; 4]);
    m.catalog.technologies.push(tech("gas", TechType::Thermal, None, 0.9, 1));
    m.catalog.technologies.push(tech("bss", TechType::Storage, None, 0.9, 1));
    m.assets.push(asset("U1", "Z1", "gas", AssetClass::Existing, 50.0, 1));
    m.assets.push(storage_unit("B1", AssetClass::Existing, 20.0, 100.0, 1));
    let mut p = build_monolithic(&m).unwrap();
    for (h, c, dc) in [(2, 10.0, 0.0), (3, 0.0, 9.0)] {
        fix(&mut p, &format!("c[B1,d1,{h},2025]"), c);
        fix(&mut p, &format!("dc[B1,d1,{h},2025]"), dc);
    }
    let r = solve(&p);
    let soc: Vec<f64> = (1..=4).map(|h| val(&p, &r, &format!("soc[B1,d1,{h},2025]"))).collect();
    for (got, want) in soc.iter().zip([50.0, 59.0, 49.0, 50.0]) {
        assert!(close(*got, want, 1e-9), "{soc:?}");
    }
}

#[test]
fn mini2z_counts_match_index_space_formulas() {
    let m = load_fixture("mini2z/manifest.json");
    let p = build_monolithic(&m).unwrap();
    let want = monolithic_counts(&m);
    assert_eq!((p.num_columns(), p.num_rows()), (want.columns, want.rows));

    let text = std::fs::read_to_string(support::models::fixture("mini2z/expected_counts.json")).unwrap();
    let recorded: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(recorded["columns"], p.num_columns());
    assert_eq!(recorded["rows"], p.num_rows());
    assert_eq!(recorded["nonzeros"], p.num_nonzeros());

    let f = Formulation::new(&m, Default::default()).unwrap();
    for (yi, &y) in f.years.iter().enumerate() {
        let c = year_counts(&m, yi);
        assert_eq!(f.columns.iter().filter(|col| col.key.year == y).count(), c.columns, "{y}");
        assert_eq!(f.rows.iter().filter(|r| r.year == y).count(), c.rows, "{y}");
    }
}

#[test]
fn one_year_model_is_its_own_stage() {
    let m = load_fixture("tiny/single.json");
    let mono = build_monolithic(&m).unwrap();
    let st = build_stage(&m, 2025).unwrap();
    assert!(st.state_in.is_empty() && st.alpha.is_none() && st.state_out.is_empty());
    let p = &st.problem;
    assert_eq!(p.columns(), mono.columns());
    assert_eq!(p.rows(), mono.rows());
    for i in 0..p.num_rows() {
        assert_eq!(p.row_entries(i), mono.row_entries(i));
    }
}

#[test]
fn no_candidates_means_no_decisions() {
    let mut m = load_fixture("mini2z/manifest.json");
    m.assets.retain(|g| !g.is_candidate());
    let ids: Vec<String> = m.assets.iter().map(|g| g.id.clone()).collect();
    m.scenario.availability.retain(|id, _| ids.contains(id));
    let p = build_monolithic(&m).unwrap();
    assert!(p.columns().iter().all(|c| !c.key.starts_with("d[")));
    for g in &m.assets {
        let ry = m.effective_retirement(g).unwrap();
        for &y in &m.time.years {
            let b = p.column(p.column_index(&format!("b[{},{y}]", g.id)).unwrap());
            assert_eq!((b.lower, b.upper), (0.0, 0.0));
            let r = p.column(p.column_index(&format!("r[{},{y}]", g.id)).unwrap());
            let want = if y == ry { 1.0 } else { 0.0 };
            assert_eq!((r.lower, r.upper), (want, want), "r[{},{y}]", g.id);
        }
    }
}

#[test]
fn first_stage_takes_initial_conditions_as_constants() {
    let m = load_fixture("mini2z/manifest.json");
    let f = Formulation::new(&m, Default::default()).unwrap();
    let y0 = f.years[0];
    let st = f.stage(y0).unwrap();
    assert!(st.state_in.is_empty() && st.z_columns.is_empty());
    let p = &st.problem;
    for g in &m.assets {
        let row = p.row(p.row_index(&format!("status[{},{y0}]", g.id)).unwrap());
        assert_eq!(row.rhs, if g.is_candidate() { 0.0 } else { 1.0 });
    }
    for mat in &m.catalog.materials {
        let s = p.column(p.column_index(&format!("s[{mat},{y0}]")).unwrap());
        let s0 = m.supply_chain.initial_stock.get(mat).copied().unwrap_or(0.0);
        assert_eq!((s.lower, s.upper), (s0, s0));
    }
    for pool in m.field_pools() {
        let row = p.row(p.row_index(&format!("field[{},{},{y0}]", pool.0, pool.1)).unwrap());
        assert_eq!(row.rhs, m.field_area(&pool));
    }
}

#[test]
fn stage_shapes() {
    let m = load_fixture("mini2z/manifest.json");
    let f = Formulation::new(&m, Default::default()).unwrap();
    let last = *f.years.last().unwrap();
    for (yi, &y) in f.years.iter().enumerate() {
        let st = f.stage(y).unwrap();
        assert_eq!(st.alpha.is_none(), y == last, "{y}");
        if let Some(a) = st.alpha {
            let c = st.problem.column(a);
            assert_eq!((c.lower, c.cost), (0.0, 1.0));
        }
        assert_eq!(st.link_rows.len(), st.state_in.len());
        if yi > 0 {
            assert_eq!(st.state_in.len(), state_size(&m, yi), "{y}");
            let mut sorted = st.state_in.clone();
            sorted.sort();
            assert_eq!(sorted, st.state_in);
            for (&r, k) in st.link_rows.iter().zip(&st.state_in) {
                let row = st.problem.row(r);
                assert_eq!(row.key, link_key(k));
                assert_eq!(st.problem.row_entries(r), &[(st.problem.column_index(&z_key(k)).unwrap(), 1.0)]);
            }
        }
        if y < last {
            assert_eq!(st.state_out, f.stage(y + 1).unwrap().state_in);
        }
    }
    assert!(matches!(f.stage(1900), Err(BuildError::YearOutOfRange(1900))));
}

/// Cost of `x` restricted to the columns of year `y`.
fn year_cost(f: &Formulation, x: &BTreeMap<String, f64>, y: i32) -> f64 {
    f.objective(y).iter().map(|(k, c)| c * x[k]).sum()
}

/// Fixes a stage's incoming state and every local column to the monolithic
/// optimum `x`; the point must be feasible and cost the same.
fn check_stage_at(f: &Formulation, x: &BTreeMap<String, f64>, y: i32) -> Result<(), TestCaseError> {
    let mut st = f.stage(y).unwrap();
    let state = StateVector {
        keys: st.state_in.clone(),
        values: st.state_in.iter().map(|k| x[k]).collect(),
    };
    st.set_state(&state);
    let p = &st.problem;
    let point: Vec<f64> = p
        .columns()
        .iter()
        .map(|c| {
            let key = c.key.strip_prefix("z[").and_then(|s| s.strip_suffix(']')).unwrap_or(&c.key);
            x.get(key).copied().unwrap_or(0.0)
        })
        .collect();
    let viol = p.max_violation(&point);
    prop_assert!(viol <= 1e-6, "stage {} violation {}", y, viol);
    let cost = p.objective_value(&point);
    prop_assert!((cost - year_cost(f, x, y)).abs() <= 1e-6 * (1.0 + cost.abs()));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn counts_match_index_space_formulas(seed in any::<u64>()) {
        let m = random_model(seed, GenSettings { max_years: 4, allow_binary: true });
        let f = Formulation::new(&m, Default::default()).unwrap();
        let p = f.monolithic().unwrap();
        let want = monolithic_counts(&m);
        prop_assert_eq!((p.num_columns(), p.num_rows()), (want.columns, want.rows));
        for yi in 1..f.years.len() {
            prop_assert_eq!(f.state_in(f.years[yi]).len(), state_size(&m, yi));
        }
    }

    #[test]
    fn extensive_form_equivalence(seed in any::<u64>()) {
        let m = random_model(seed, GenSettings { max_years: 3, allow_binary: false });
        let f = Formulation::new(&m, Default::default()).unwrap();
        let mono = f.monolithic().unwrap();
        let r = solve(&mono);
        let x = r.primal_by_key(&mono);
        let mut total = 0.0;
        for &y in &f.years {
            check_stage_at(&f, &x, y)?;
            total += year_cost(&f, &x, y);
        }
        prop_assert!((total - r.objective).abs() <= 1e-6 * (1.0 + r.objective.abs()));
        // Optimal tails: re-solving years y.. with the optimal incoming state
        // recovers the remaining optimal cost.
        for &y in f.years.iter().skip(1) {
            let mut tail = f.tail(y).unwrap();
            let state = StateVector {
                keys: tail.state_in.clone(),
                values: tail.state_in.iter().map(|k| x[k]).collect(),
            };
            tail.set_state(&state);
            let t = solve(&tail.problem);
            let rest: f64 = f.years.iter().filter(|&&v| v >= y).map(|&v| year_cost(&f, &x, v)).sum();
            prop_assert!((t.objective - rest).abs() <= 1e-6 * (1.0 + rest.abs()), "tail {}: {} vs {}", y, t.objective, rest);
        }
    }

    #[test]
    fn monolithic_optima_satisfy_invariants(seed in any::<u64>()) {
        let m = random_model(seed, GenSettings { max_years: 3, allow_binary: true });
        let (report, _) = solve_monolithic(&m, &OracleOptions::default()).unwrap();
        let v = check_invariants(&m, &report, 1e-6);
        prop_assert!(v.is_empty(), "{}", v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n"));
    }
}
