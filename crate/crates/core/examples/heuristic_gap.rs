//! How far the powered link set of GOSPF is from the minimum-power design, window by window, on
//! the six-router example.

use gospf::engine::Mode;
use gospf::oracle::{heuristic_gap, Guardrail};
use gospf::scenarios::six_router;

fn main() {
    let rows = heuristic_gap(&six_router(Mode::Gospf).unwrap(), Guardrail::default()).unwrap();
    let mut last = None;
    for r in &rows {
        let key = (r.heuristic_power.to_bits(), r.optimal_power.to_bits(), r.feasible);
        if last != Some(key) {
            println!(
                "from window {:>3}: heuristic {} optimum {} ratio {} feasible {}",
                r.window, r.heuristic_power, r.optimal_power, r.gap_ratio, r.feasible
            );
            last = Some(key);
        }
    }
    println!("{} quiesced windows", rows.len());
}
