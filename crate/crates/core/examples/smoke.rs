//! Solves a dataset monolithically and by decomposition and prints both.
//!
//! cargo run --example smoke -- fixtures/mini2z/manifest.json

use scgep_core::{ingest, nbd, oracle};

fn main() {
    let path = std::env::args().nth(1).expect("manifest path");
    let loaded = ingest::load_path(path.as_ref(), None).expect("load");
    let model = loaded.model;
    let (mono, res) = oracle::solve_monolithic(&model, &Default::default()).expect("monolithic");
    println!(
        "monolithic {} ({} iterations, {} nodes, {:.3}s)",
        mono.objective, res.stats.iterations, res.stats.nodes, res.stats.wall_time_s
    );
    let en = oracle::enumerate_tiny(&model, &Default::default()).expect("enumerate");
    println!("enumerated {} over {} LPs, schedule {:?}", en.objective, en.lp_solves, en.schedule);
    for w in &loaded.report.warnings {
        println!("warning: {w}");
    }
    for r in &mono.reliability {
        println!("{} shed {} rm {} rps {}", r.year, r.load_shed_mwh, r.reserve_shortfall_mw, r.rps_shortfall_mwh);
    }
    let opts = nbd::NbdOptions::default();
    let run = nbd::run(&model, &opts).expect("nbd");
    for l in &run.log {
        println!("nu {:>3} ub {:?} lb {} gap {:?} cuts {}", l.nu, l.ub, l.lb, l.gap, l.cuts_added);
    }
    println!("nbd {:?} ub {:?} lb {}", run.status, run.ub, run.lb);
}
