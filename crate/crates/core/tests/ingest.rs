mod support;

use std::collections::BTreeMap;
use std::path::Path;

use proptest::prelude::*;
use scgep_core::ingest::*;
use support::models::fixture;

fn copy_dir(from: &Path, to: &Path) {
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), to.join(entry.file_name())).unwrap();
    }
}

#[test]
fn mini2z_loads() {
    let loaded = load_path(&fixture("mini2z/manifest.json"), None).unwrap();
    let m = &loaded.model;
    assert_eq!(m.assets.len(), 5);
    assert_eq!(m.topology.zones.len(), 2);
    assert_eq!(m.time.years, vec![2025, 2026, 2027]);
    assert_eq!(m.time.days.len(), 2);
    assert_eq!(m.time.hours, 4);
    assert!(loaded.report.errors.is_empty());
    for w in &m.time.weights {
        assert_eq!(w.iter().sum::<f64>(), 365.0);
    }
}

#[test]
fn missing_assets_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&fixture("mini2z"), dir.path());
    std::fs::remove_file(dir.path().join("assets.json")).unwrap();
    let err = load_path(&dir.path().join("manifest.json"), None).unwrap_err();
    match &err {
        IngestError::Io { path, source } => {
            assert!(path.ends_with("assets.json"), "{err}");
            assert_eq!(source.kind(), std::io::ErrorKind::NotFound);
        }
        other => panic!("expected an I/O error, got {other}"),
    }
    assert!(err.to_string().contains("assets.json"));
}

#[test]
fn corrupted_csv_row_reports_its_row_number() {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&fixture("hourly1z"), dir.path());
    let path = dir.path().join("availability.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    // Line 3 is the second data row; break one of its values.
    let mut cells: Vec<&str> = lines[2].split(',').collect();
    cells[100] = "n/a";
    lines[2] = cells.join(",");
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();

    let err = load_path(&dir.path().join("manifest.json"), None).unwrap_err();
    match &err {
        IngestError::Csv { path, row, .. } => {
            assert_eq!(*row, 3);
            assert!(path.ends_with("availability.csv"));
        }
        other => panic!("expected a CSV error, got {other}"),
    }
    assert!(err.to_string().contains("row 3"), "{err}");
}

#[test]
fn short_csv_row_is_rejected_with_row_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("load.csv");
    let header: Vec<String> = (1..=8760).map(|h| format!("h{h}")).collect();
    let full = vec!["1"; 8760].join(",");
    std::fs::write(
        &path,
        format!("entity,year,{}\nZ1,2025,{full}\nZ2,2025,1,2,3\n", header.join(",")),
    )
    .unwrap();
    match read_hourly_csv(&path, SeriesKind::Load) {
        Err(IngestError::Csv { row, msg, .. }) => {
            assert_eq!(row, 3);
            assert!(msg.contains("expected 8760"), "{msg}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn hourly_fixture_weights_cover_the_year() {
    let loaded = load_path(&fixture("hourly1z/manifest.json"), None).unwrap();
    let m = loaded.model;
    assert_eq!(m.time.days.len(), 4);
    assert_eq!(m.time.hours, 24);
    for w in &m.time.weights {
        assert_eq!(w.iter().sum::<f64>(), 365.0);
        assert!(w.iter().all(|&x| x > 0.0));
    }
}

#[test]
fn reloading_gives_identical_digest() {
    for rel in ["mini2z/manifest.json", "hourly1z/manifest.json"] {
        let manifest = load_manifest(&fixture(rel)).unwrap();
        let a = load_dataset_with(&manifest, Scenario::Baseline, 11).unwrap().model;
        let b = load_dataset_with(&manifest, Scenario::Baseline, 11).unwrap().model;
        assert_eq!(a.digest(), b.digest(), "{rel}");
    }
}

fn series(entity: &str, kind: SeriesKind, values: Vec<f64>) -> RawHourlySeries {
    RawHourlySeries {
        entity: entity.into(),
        kind,
        year: 2025,
        values,
    }
}

fn daily_levels(levels: &[f64]) -> Vec<f64> {
    levels.iter().flat_map(|&l| std::iter::repeat_n(l, 24)).collect()
}

#[test]
fn constant_series_gives_one_full_year_day() {
    let s = series("Z1", SeriesKind::Load, vec![42.0; 8760]);
    let c = cluster_representative_days(&[s], &ClusterSettings { days: 1, ..Default::default() }, 0).unwrap();
    assert_eq!(c.weights, vec![365.0]);
    assert_eq!(c.profiles["Z1"].len(), 1);
    assert!(c.profiles["Z1"][0].iter().all(|v| (v - 42.0).abs() < 1e-9));
}

#[test]
fn two_level_series_splits_180_185() {
    // Alternating blocks so that the levels are interleaved in the calendar.
    let mut levels = Vec::new();
    for d in 0..365 {
        let low = if d < 360 { d % 2 == 0 } else { false };
        levels.push(if low { 10.0 } else { 50.0 });
    }
    assert_eq!(levels.iter().filter(|&&l| l == 10.0).count(), 180);
    let s = series("Z1", SeriesKind::Load, daily_levels(&levels));
    for seed in [0, 1, 99] {
        let c = cluster_representative_days(std::slice::from_ref(&s), &ClusterSettings { days: 2, ..Default::default() }, seed)
            .unwrap();
        let mut got: Vec<(f64, f64)> = c
            .weights
            .iter()
            .zip(&c.profiles["Z1"])
            .map(|(w, p)| (*w, p[0]))
            .collect();
        got.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!((got[0].0, got[1].0), (180.0, 185.0), "seed {seed}");
        assert!((got[0].1 - 10.0).abs() < 1e-9 && (got[1].1 - 50.0).abs() < 1e-9, "seed {seed}: {got:?}");
    }
}

/// Smallest within-cluster sum of squares over all 2-partitions of 1-D
/// points (optimal partitions of a line are contiguous after sorting).
fn best_two_partition(points: &[f64]) -> f64 {
    let mut p = points.to_vec();
    p.sort_by(f64::total_cmp);
    let sse = |xs: &[f64]| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
    };
    (1..p.len()).map(|i| sse(&p[..i]) + sse(&p[i..])).fold(f64::INFINITY, f64::min)
}

#[test]
fn seasonal_sine_with_four_days_beats_best_two_partition() {
    let levels: Vec<f64> = (0..365)
        .map(|d| 100.0 + 40.0 * (2.0 * std::f64::consts::PI * d as f64 / 365.0).sin())
        .collect();
    let s = series("Z1", SeriesKind::Load, daily_levels(&levels));
    for init in [InitMode::Farthest, InitMode::Seasonal] {
        let settings = ClusterSettings {
            days: 4,
            init,
            ..Default::default()
        };
        let c = cluster_representative_days(std::slice::from_ref(&s), &settings, 0).unwrap();
        assert_eq!(c.weights.len(), 4);
        assert_eq!(c.weights.iter().sum::<f64>(), 365.0);
        // Within-cluster variance of the daily levels (each day has 24 equal
        // hours, so the 24-dim problem is 1-D up to a factor of 24).
        let mut sums = [0.0; 4];
        let mut counts = [0.0; 4];
        for (d, &k) in c.assignment.iter().enumerate() {
            sums[k] += levels[d];
            counts[k] += 1.0;
        }
        let wcss: f64 = c
            .assignment
            .iter()
            .enumerate()
            .map(|(d, &k)| (levels[d] - sums[k] / counts[k]).powi(2))
            .sum();
        assert!(wcss <= best_two_partition(&levels), "{init:?}: {wcss}");
    }
}

#[test]
fn clusters_are_labelled_by_earliest_member() {
    let levels: Vec<f64> = (0..365).map(|d| ((d * 37) % 11) as f64).collect();
    let s = series("Z1", SeriesKind::Load, daily_levels(&levels));
    let c = cluster_representative_days(&[s], &ClusterSettings { days: 3, ..Default::default() }, 5).unwrap();
    let mut first_seen = Vec::new();
    for &k in &c.assignment {
        if !first_seen.contains(&k) {
            first_seen.push(k);
        }
    }
    assert_eq!(first_seen, vec![0, 1, 2]);
}

#[test]
fn clustering_is_deterministic_per_seed() {
    let levels: Vec<f64> = (0..365).map(|d| ((d * 7919) % 101) as f64).collect();
    let s = series("Z1", SeriesKind::Load, daily_levels(&levels));
    let k = ClusterSettings { days: 5, ..Default::default() };
    let a = cluster_representative_days(std::slice::from_ref(&s), &k, 3).unwrap();
    let b = cluster_representative_days(&[s], &k, 3).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wcss_never_increases(seed in any::<u64>(), k in 1usize..7, amp in 1.0f64..50.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let load: Vec<f64> = (0..8760).map(|_| 50.0 + rng.gen_range(-amp..amp)).collect();
        let avail: Vec<f64> = (0..8760).map(|_| rng.gen_range(0.0..1.0)).collect();
        let input = [
            series("Z1", SeriesKind::Load, load),
            series("spv", SeriesKind::Availability, avail),
        ];
        let c = cluster_representative_days(&input, &ClusterSettings { days: k, ..Default::default() }, seed).unwrap();
        for w in c.wcss_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{:?}", c.wcss_history);
        }
        prop_assert_eq!(c.weights.iter().sum::<f64>(), 365.0);
    }
}

#[test]
fn material_scaling_examples() {
    let national = BTreeMap::from([("steel".to_string(), vec![1000.0])]);
    let shares = BTreeMap::from([("steel".to_string(), 0.30)]);
    let out = scale_material_supply(&national, 0.016, &shares).unwrap();
    assert!((out["steel"][0] - 4.8).abs() < 1e-12);

    let out = scale_material_supply(&national, 0.0, &shares).unwrap();
    assert_eq!(out["steel"], vec![0.0]);

    let national = BTreeMap::from([("a".to_string(), vec![100.0]), ("b".to_string(), vec![100.0])]);
    let shares = BTreeMap::from([("a".to_string(), 0.1), ("b".to_string(), 0.3)]);
    let out = scale_material_supply(&national, 0.016, &shares).unwrap();
    assert!((out["a"][0] - 0.16).abs() < 1e-12);
    assert!((out["b"][0] - 0.48).abs() < 1e-12);

    let national = BTreeMap::from([("a".to_string(), vec![-1.0])]);
    assert!(scale_material_supply(&national, 0.5, &shares).is_err());
}

#[test]
fn scenarios_transform_the_dataset() {
    let manifest = load_manifest(&fixture("mini2z/manifest.json")).unwrap();
    let base = load_dataset_with(&manifest, Scenario::Baseline, 0).unwrap().model;
    let wo = load_dataset_with(&manifest, Scenario::WithoutSc, 0).unwrap().model;
    let lim = load_dataset_with(&manifest, Scenario::LimitedSc { factor: 0.5 }, 0).unwrap().model;
    for m in &base.catalog.materials {
        assert!(wo.supply_chain.supply[m].iter().all(|&v| v >= 1e6));
        for (a, b) in base.supply_chain.supply[m].iter().zip(&lim.supply_chain.supply[m]) {
            assert_eq!(*b, 0.5 * a);
        }
    }
    assert!(wo.assets.iter().filter(|g| g.is_candidate()).all(|g| g.lead_time == Some(0)));
    for pool in wo.field_pools() {
        assert!(wo.field_area(&pool) >= 1e6);
    }
    assert_ne!(base.digest(), wo.digest());
    assert_eq!("limited-sc:0.5".parse::<Scenario>().unwrap(), Scenario::LimitedSc { factor: 0.5 });
}
