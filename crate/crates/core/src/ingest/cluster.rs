//! k-means selection of representative days from hourly series.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::IngestError;

pub const HOURS_PER_DAY: usize = 24;
const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Load,
    Availability,
    Import,
}

/// One calendar year of hourly values for one entity.
#[derive(Debug, Clone, PartialEq)]
pub struct RawHourlySeries {
    pub entity: String,
    pub kind: SeriesKind,
    pub year: i32,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Seeded first center, then farthest point.
    Farthest,
    /// Means of k equal calendar windows.
    Seasonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterSettings {
    pub days: usize,
    pub load_weight: f64,
    pub availability_weight: f64,
    pub init: InitMode,
}

impl Default for ClusterSettings {
    fn default() -> Self {
        ClusterSettings {
            days: 4,
            load_weight: 1.0,
            availability_weight: 1.0,
            init: InitMode::Farthest,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Number of member days per representative day.
    pub weights: Vec<f64>,
    /// Cluster of each calendar day.
    pub assignment: Vec<usize>,
    /// Mean day per entity: `profiles[entity][day][hour]`.
    pub profiles: BTreeMap<String, Vec<Vec<f64>>>,
    /// Within-cluster sum of squares after initialization and each iteration.
    pub wcss_history: Vec<f64>,
    pub iterations: usize,
}

pub fn is_leap(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_year(year: i32) -> usize {
    if is_leap(year) {
        366
    } else {
        365
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = dist2(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn mean_of(points: &[Vec<f64>], members: impl Iterator<Item = usize>) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; points.first().map_or(0, Vec::len)];
    let mut n = 0usize;
    for i in members {
        for (s, v) in sum.iter_mut().zip(&points[i]) {
            *s += v;
        }
        n += 1;
    }
    (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect())
}

/// Farthest point from its nearest center; ties go to the lowest day.
fn farthest(points: &[Vec<f64>], centers: &[Vec<f64>]) -> usize {
    let mut best = (0, -1.0);
    for (i, p) in points.iter().enumerate() {
        let d = nearest(p, centers).1;
        if d > best.1 {
            best = (i, d);
        }
    }
    best.0
}

fn wcss(points: &[Vec<f64>], centers: &[Vec<f64>], assignment: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignment)
        .map(|(p, &c)| dist2(p, &centers[c]))
        .sum()
}

/// Groups the days of one year into `settings.days` clusters.
///
/// Features are each series' daily 24-hour vector divided by the series'
/// largest magnitude and multiplied by its kind weight. Import series are
/// averaged into the profiles but do not shape the clusters. Output days
/// are ordered by their earliest member day.
pub fn cluster_representative_days(
    series: &[RawHourlySeries],
    settings: &ClusterSettings,
    seed: u64,
) -> Result<Clustering, IngestError> {
    let k = settings.days;
    let Some(first) = series.first() else {
        return Err(IngestError::Cluster("no series to cluster".into()));
    };
    let year = first.year;
    let ndays = days_in_year(year);
    for s in series {
        if s.year != year {
            return Err(IngestError::Cluster(format!(
                "series {} covers {} but clustering year is {year}",
                s.entity, s.year
            )));
        }
        if s.values.len() != ndays * HOURS_PER_DAY || s.values.iter().any(|v| !v.is_finite()) {
            return Err(IngestError::Cluster(format!(
                "series {} {}: expected {} finite hourly values, got {}",
                s.entity,
                s.year,
                ndays * HOURS_PER_DAY,
                s.values.len()
            )));
        }
    }
    if k == 0 || k > ndays {
        return Err(IngestError::Cluster(format!(
            "cannot form {k} representative days from {ndays} days"
        )));
    }

    let mut points = vec![Vec::new(); ndays];
    for s in series {
        let w = match s.kind {
            SeriesKind::Load => settings.load_weight,
            SeriesKind::Availability => settings.availability_weight,
            SeriesKind::Import => continue,
        };
        let scale = s.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let f = if scale > 0.0 { w / scale } else { 0.0 };
        for (d, p) in points.iter_mut().enumerate() {
            p.extend(s.values[d * HOURS_PER_DAY..(d + 1) * HOURS_PER_DAY].iter().map(|v| v * f));
        }
    }

    let mut centers: Vec<Vec<f64>> = match settings.init {
        InitMode::Farthest => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c = vec![points[rng.gen_range(0..ndays)].clone()];
            while c.len() < k {
                let i = farthest(&points, &c);
                c.push(points[i].clone());
            }
            c
        }
        InitMode::Seasonal => (0..k)
            .map(|j| {
                let (lo, hi) = (j * ndays / k, (j + 1) * ndays / k);
                mean_of(&points, lo..hi).expect("k <= days gives non-empty windows")
            })
            .collect(),
    };

    let mut assignment: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
    let mut history = vec![wcss(&points, &centers, &assignment)];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        for c in 0..k {
            match mean_of(&points, (0..ndays).filter(|&i| assignment[i] == c)) {
                Some(m) => centers[c] = m,
                None => {
                    // Move the worst-served day into the empty cluster.
                    let mut worst = (0, -1.0);
                    for (i, p) in points.iter().enumerate() {
                        let d = dist2(p, &centers[assignment[i]]);
                        if d > worst.1 {
                            worst = (i, d);
                        }
                    }
                    centers[c] = points[worst.0].clone();
                    assignment[worst.0] = c;
                }
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
        let changed = next != assignment;
        assignment = next;
        history.push(wcss(&points, &centers, &assignment));
        if !changed {
            break;
        }
    }

    // Relabel clusters by earliest member day and drop any left empty.
    let mut order: Vec<usize> = Vec::new();
    for &c in &assignment {
        if !order.contains(&c) {
            order.push(c);
        }
    }
    let relabel: BTreeMap<usize, usize> = order.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    let assignment: Vec<usize> = assignment.iter().map(|c| relabel[c]).collect();
    let nk = order.len();
    let mut weights = vec![0.0; nk];
    for &c in &assignment {
        weights[c] += 1.0;
    }
    let mut profiles = BTreeMap::new();
    for s in series {
        let mut days = vec![vec![0.0; HOURS_PER_DAY]; nk];
        for (d, &c) in assignment.iter().enumerate() {
            for h in 0..HOURS_PER_DAY {
                days[c][h] += s.values[d * HOURS_PER_DAY + h] / weights[c];
            }
        }
        profiles.insert(s.entity.clone(), days);
    }
    Ok(Clustering {
        weights,
        assignment,
        profiles,
        wcss_history: history,
        iterations,
    })
}
