use gospf::engine::{run, run_with, EngineConfig, LinkFailure, Mode, RunOptions, Scenario};
use gospf::gospf::EventKind;
use gospf::graph::{compute_mcst, compute_mcst_over, is_connected, ActiveLinkSet};
use gospf::scenarios::{six_router, garr48, garr48_config, link_named};

#[test]
fn backbone_rebuilds_its_tree_after_a_tree_link_fails() {
    let topology = garr48();
    let tree = compute_mcst(&topology).unwrap();
    let failed = tree
        .links()
        .iter()
        .copied()
        .find(|l| is_connected(&topology, &topology.link_ids().filter(|x| x != l).collect()))
        .unwrap();
    let config = EngineConfig {
        horizon: Some(30.0),
        failures: vec![LinkFailure { link: failed, at: 10.0 }],
        ..garr48_config()
    };
    let out = run(&Scenario::new(topology.clone(), Vec::new(), config).unwrap()).unwrap();
    let surviving: ActiveLinkSet = topology.link_ids().filter(|l| *l != failed).collect();
    let expected = compute_mcst_over(&topology, &surviving).unwrap();
    assert_eq!(expected.len(), 47);
    assert!(!expected.contains(failed));
    for (node, t) in &out.trees {
        assert_eq!(t, &expected, "node {node}");
    }
    assert!(out.events.iter().any(|e| e.kind == EventKind::Reset && e.link == failed));
    let last = out.metrics.rows.last().unwrap();
    assert_eq!(last.active_links, 47);
    // every link wakes while the reset holds
    assert!(out.metrics.rows.iter().any(|r| r.t > 10.0 && r.active_links == 77));
}

#[test]
fn baseline_ignores_the_protocol() {
    let out = run(&six_router(Mode::Baseline).unwrap()).unwrap();
    assert!(out.events.is_empty());
    assert!(out.metrics.rows.iter().all(|r| r.active_links == 8));
    assert_eq!(out.metrics.summary.ctrl_bytes, 0);
}

#[test]
fn graft_example_restores_the_nearest_sleeping_link() {
    let scenario = six_router(Mode::Gospf).unwrap();
    let t = scenario.topology.clone();
    let out = run_with(&scenario, RunOptions { record_windows: true, ..RunOptions::default() }).unwrap();
    let ca = link_named(&t, "C", "A").unwrap();
    let bf = link_named(&t, "B", "F").unwrap();
    let grafted = |link| out.events.iter().filter(|e| e.kind == EventKind::Graft && e.link == link).count();
    // both ends of the congested B-C link restore their nearest sleeping link
    assert_eq!(out.events.iter().filter(|e| e.kind == EventKind::Graft).count(), 2);
    assert_eq!((grafted(ca), grafted(bf)), (1, 1));
    // B-F carries nothing, so it goes back to sleep once its safeguard lapses
    let recut = out.events.iter().find(|e| e.kind == EventKind::Cut && e.link == bf && e.time.as_secs() > 1.2).unwrap();
    assert!(recut.time.as_secs() >= 1.2 + 2.0);
    assert_eq!(out.metrics.summary.loss_pct(), 0.0);
    assert!(out.windows.iter().all(|w| w.connected));
}
