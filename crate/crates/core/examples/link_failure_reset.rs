//! A spanning-tree link of the backbone fails. Every router wakes its links, waits out the reset
//! timer and settles on the tree of the surviving links.

use gospf::engine::{run, EngineConfig, LinkFailure, Scenario};
use gospf::graph::compute_mcst;
use gospf::scenarios::{garr48, garr48_config};

fn main() {
    let topology = garr48();
    let failed = *compute_mcst(&topology).unwrap().links().iter().next_back().unwrap();
    let config = EngineConfig {
        horizon: Some(20.0),
        failures: vec![LinkFailure { link: failed, at: 5.0 }],
        ..garr48_config()
    };
    let out = run(&Scenario::new(topology.clone(), Vec::new(), config).unwrap()).unwrap();
    let mut last = None;
    for r in &out.metrics.rows {
        if last != Some(r.active_links) {
            println!("{:>5.1} s  {} links powered", r.t, r.active_links);
            last = Some(r.active_links);
        }
    }
    let tree = out.trees.values().next().unwrap();
    println!("link {failed} failed; new tree has {} links, contains it: {}", tree.len(), tree.contains(failed));
}
