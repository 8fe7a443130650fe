//! Exact minimum-power design for a small instance file, one optimum per period.

use gospf::engine::EngineConfig;
use gospf::oracle::{parse_instance, solve_time_expanded, Guardrail};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/diamond.cmnd").to_string());
    let text = std::fs::read_to_string(&path).unwrap();
    let instance = parse_instance(&text, &EngineConfig::default()).unwrap();
    let solution = solve_time_expanded(&instance, Guardrail::default()).unwrap();
    for (t, s) in solution.periods.iter().enumerate() {
        let links: Vec<String> = s.active.iter().map(|l| l.to_string()).collect();
        println!("period {t}: links {} power {} routing {}", links.join(","), s.power, s.routing);
        for (d, path) in instance.period(t as u32).demands.iter().zip(&s.paths) {
            let hops: Vec<String> = path.iter().map(|h| h.to.to_string()).collect();
            println!("  {} -> {} {} bit/s via {} {}", d.src, d.dst, d.bps, d.src, hops.join(" "));
        }
    }
    println!("objective {}", solution.objective());
}
