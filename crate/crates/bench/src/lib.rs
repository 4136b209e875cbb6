//! Workloads shared by the benches.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scgep_core::ingest::load_path;
use scgep_core::milp::{Sense, SparseProblem};
use scgep_core::model::SystemModel;

pub fn fixture(rel: &str) -> SystemModel {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel);
    load_path(&path, None).expect("fixture loads").model
}

/// Dense random LP with `n` columns and `m` rows, feasible by construction
/// around a random interior point.
pub fn random_lp(seed: u64, n: usize, m: usize) -> SparseProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = SparseProblem::new();
    let mut x0 = Vec::with_capacity(n);
    for j in 0..n {
        let u = rng.gen_range(1.0..10.0);
        p.add_column(format!("x{j}"), 0.0, u, rng.gen_range(-5.0..5.0), false).unwrap();
        x0.push(rng.gen_range(0.0..u));
    }
    for i in 0..m {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.3) {
                terms.push((j, rng.gen_range(-3.0..3.0)));
            }
        }
        let act: f64 = terms.iter().map(|&(j, a)| a * x0[j]).sum();
        if rng.gen_bool(0.5) {
            p.add_row(format!("r{i}"), Sense::Le, act + 1.0, &terms).unwrap();
        } else {
            p.add_row(format!("r{i}"), Sense::Ge, act - 1.0, &terms).unwrap();
        }
    }
    p.finalize();
    p
}
