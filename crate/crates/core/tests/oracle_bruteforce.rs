mod common;

use std::collections::BTreeSet;

use common::cmnd::{all_paths, brute_force, random_instance};
use common::{build, rng};
use gospf::graph::PowerRating;
use gospf::oracle::{
    check_feasibility, solve_static, solve_time_expanded, CmndInstance, Demand, Guardrail,
    OracleError,
};
use gospf::traffic::DirectedHop;
use gospf::{LinkId, NodeId};
use proptest::prelude::*;
use rand::Rng;

fn check(inst: &CmndInstance) -> Result<(), TestCaseError> {
    match (solve_static(inst, Guardrail::default()), brute_force(inst)) {
        (Ok(s), Some(b)) => {
            prop_assert_eq!(s.objective(), b);
            prop_assert_eq!(check_feasibility(inst, &s.active, &s.paths), Ok(()));
            prop_assert_eq!(s.power, s.active.iter().fold(0.0, |acc, l| acc + inst.power[l]));
            let routing: u128 = inst.demands.iter().zip(&s.paths)
                .map(|(d, p)| p.iter().map(|h| inst.cost[&h.link] as u128 * d.bps as u128).sum::<u128>())
                .sum();
            prop_assert_eq!(s.routing, routing);
        }
        (Err(OracleError::Infeasible), None) => {}
        (s, b) => prop_assert!(false, "solver {:?} vs brute force {:?}", s, b),
    }
    Ok(())
}

#[test]
fn five_nodes_seven_links_three_demands() {
    let t = build(5, &[(0, 1, 20), (1, 2, 20), (2, 3, 10), (3, 4, 50), (4, 0, 10), (1, 3, 50), (0, 2, 20)]);
    let d = |s, t, bps| Demand { src: NodeId(s), dst: NodeId(t), bps, period: 0 };
    let mut inst = CmndInstance::new(t, vec![d(0, 3, 12), d(4, 2, 7), d(1, 4, 15)], 0.8, PowerRating::default(), 100).unwrap();
    for (i, p) in inst.power.values_mut().enumerate() {
        *p = [40.0, 10.0, 70.0, 5.0, 25.0, 60.0, 15.0][i];
    }
    check(&inst).unwrap();
}

#[test]
fn two_periods_match_per_period_brute_force() {
    let t = build(4, &[(0, 1, 20), (1, 2, 20), (2, 3, 20), (3, 0, 50), (0, 2, 10)]);
    let d = |s, t, bps, period| Demand { src: NodeId(s), dst: NodeId(t), bps, period };
    let mut inst = CmndInstance::new(
        t,
        vec![d(0, 2, 14, 0), d(1, 3, 9, 0), d(0, 2, 3, 1), d(3, 1, 16, 1)],
        0.8,
        PowerRating::default(),
        100,
    )
    .unwrap();
    for (i, p) in inst.power.values_mut().enumerate() {
        *p = [30.0, 30.0, 30.0, 80.0, 10.0][i];
    }
    let s = solve_time_expanded(&inst, Guardrail::default()).unwrap();
    let expected: f64 = (0..2).map(|t| brute_force(&inst.period(t)).unwrap()).sum();
    assert_eq!(s.periods.len(), 2);
    assert_ne!(s.periods[0].active, s.periods[1].active);
    assert_eq!(s.objective(), expected);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn static_optimum_matches_brute_force(seed in any::<u64>()) {
        check(&random_instance(seed, 6, 9, 4, 1))?;
    }

    #[test]
    fn time_expanded_is_sum_of_periods(seed in any::<u64>()) {
        let inst = random_instance(seed, 5, 7, 4, 3);
        match solve_time_expanded(&inst, Guardrail::default()) {
            Ok(s) => {
                let per: Vec<f64> = (0..inst.periods())
                    .map(|t| solve_static(&inst.period(t), Guardrail::default()).unwrap().objective())
                    .collect();
                prop_assert_eq!(s.objective(), per.iter().sum::<f64>());
                for t in 0..inst.periods() {
                    prop_assert_eq!(Some(s.periods[t as usize].objective()), brute_force(&inst.period(t)));
                }
            }
            Err(e) => prop_assert_eq!(e, OracleError::Infeasible),
        }
    }

    #[test]
    fn random_feasible_solutions_are_never_better(seed in any::<u64>()) {
        let inst = random_instance(seed, 8, 12, 3, 1);
        let Ok(opt) = solve_static(&inst, Guardrail::default()) else { return Ok(()) };
        let mut r = rng(seed ^ 0x5eed);
        for _ in 0..50 {
            let paths: Vec<Vec<DirectedHop>> = inst.demands.iter().map(|d| {
                if d.bps == 0 { return Vec::new(); }
                let all = all_paths(&inst.topology, d.src, d.dst);
                all[r.gen_range(0..all.len())].clone()
            }).collect();
            let mut active: BTreeSet<LinkId> = paths.iter().flatten().map(|h| h.link).collect();
            for l in inst.topology.link_ids() {
                if r.gen_bool(0.2) {
                    active.insert(l);
                }
            }
            if check_feasibility(&inst, &active, &paths).is_ok() {
                let routing: u128 = inst.demands.iter().zip(&paths)
                    .map(|(d, p)| p.iter().map(|h| inst.cost[&h.link] as u128 * d.bps as u128).sum::<u128>())
                    .sum();
                let objective = inst.power_of(&active) + routing as f64;
                prop_assert!(opt.objective() <= objective);
            }
        }
    }
}

