use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{check_feasibility, demand_bps, solve_static, CmndInstance, Demand, Guardrail, OracleError};
use crate::engine::{run_with, RunOptions, Scenario, WindowRecord};
use crate::error::{content_lines, parse_field, ParseError};
use crate::traffic::DirectedHop;
use crate::types::{LinkId, NodeId};

pub const GAP_HEADER: &str = "window,heuristic_power,optimal_power,gap_ratio,feasible";

/// Heuristic against optimum for one quiesced window.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub window: usize,
    pub heuristic_power: f64,
    pub optimal_power: f64,
    /// Infinite when the optimum powers nothing but the heuristic does.
    pub gap_ratio: f64,
    pub feasible: bool,
}

/// Aggregates the window's flows per node pair, with the path the engine routed them on.
fn window_instance(scenario: &Scenario, w: &WindowRecord) -> Result<(CmndInstance, Vec<Vec<DirectedHop>>), OracleError> {
    let mut pairs: BTreeMap<(NodeId, NodeId), (f64, Vec<DirectedHop>)> = BTreeMap::new();
    for d in w.demands.iter().filter(|d| d.rate > 0.0) {
        let path = w.paths.get(&d.flow).cloned().flatten().unwrap_or_default();
        let entry = pairs.entry((d.src, d.dst)).or_insert((0.0, path));
        entry.0 += d.rate;
    }
    let (demands, paths) = pairs
        .into_iter()
        .map(|((src, dst), (rate, path))| {
            (Demand { src, dst, bps: demand_bps(rate), period: 0 }, path)
        })
        .unzip();
    let cfg = &scenario.config;
    let instance = CmndInstance::new(
        scenario.topology.as_ref().clone(),
        demands,
        cfg.alpha,
        cfg.power,
        cfg.reference_bandwidth,
    )?;
    Ok((instance, paths))
}

/// Runs the scenario and, for every quiesced window, checks the powered link set and the routed
/// paths against the design model and compares their power with the optimum for the same demands.
pub fn heuristic_gap(scenario: &Scenario, guardrail: Guardrail) -> Result<Vec<GapRow>, OracleError> {
    let pairs: BTreeSet<(NodeId, NodeId)> = scenario.traffic.flows().iter().map(|f| (f.src, f.dst)).collect();
    guardrail.check(scenario.topology.link_count(), pairs.len())?;
    let out = run_with(
        scenario,
        RunOptions {
            record_windows: true,
            ..RunOptions::default()
        },
    )?;
    let mut optimum: BTreeMap<Vec<Demand>, f64> = BTreeMap::new();
    let mut rows = Vec::new();
    for w in out.windows.iter().filter(|w| w.quiesced) {
        let (instance, paths) = window_instance(scenario, w)?;
        let powered: BTreeSet<LinkId> = w.active.iter().collect();
        let usable: BTreeSet<LinkId> = w.usable.iter().collect();
        let heuristic_power = instance.power_of(&powered);
        let feasible = check_feasibility(&instance, &usable, &paths).is_ok();
        let optimal_power = match optimum.get(&instance.demands) {
            Some(p) => *p,
            None => {
                let p = solve_static(&instance, guardrail)?.power;
                optimum.insert(instance.demands.clone(), p);
                p
            }
        };
        let gap_ratio = if optimal_power > 0.0 {
            heuristic_power / optimal_power
        } else if heuristic_power > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        rows.push(GapRow {
            window: w.index,
            heuristic_power,
            optimal_power,
            gap_ratio,
            feasible,
        });
    }
    Ok(rows)
}

pub fn write_gap_csv(rows: &[GapRow]) -> String {
    let mut out = format!("{GAP_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.window, r.heuristic_power, r.optimal_power, r.gap_ratio, r.feasible
        )
        .unwrap();
    }
    out
}

pub fn parse_gap_csv(text: &str) -> Result<Vec<GapRow>, ParseError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, h)) if h == GAP_HEADER => {}
        Some((line, _)) => return Err(ParseError::new(line, format!("expected header `{GAP_HEADER}`"))),
        None => return Err(ParseError::new(1, "missing header")),
    }
    lines
        .map(|(line, content)| {
            let f: Vec<&str> = content.split(',').collect();
            if f.len() != 5 {
                return Err(ParseError::new(line, "expected 5 comma-separated fields"));
            }
            Ok(GapRow {
                window: parse_field(line, "window", f[0])?,
                heuristic_power: parse_field(line, "heuristic power", f[1])?,
                optimal_power: parse_field(line, "optimal power", f[2])?,
                gap_ratio: parse_field(line, "gap ratio", f[3])?,
                feasible: parse_field(line, "feasible flag", f[4])?,
            })
        })
        .collect()
}
