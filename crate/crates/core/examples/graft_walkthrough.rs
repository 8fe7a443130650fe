//! Six routers whose spanning tree overloads B-C. Prints the protocol events and the final
//! powered links.

use gospf::engine::{run_with, Mode, RunOptions};
use gospf::gospf::EventKind;
use gospf::scenarios::six_router;

fn main() {
    let scenario = six_router(Mode::Gospf).unwrap();
    let t = scenario.topology.clone();
    let name = |l| {
        let link = t.link(l).unwrap();
        format!("{}-{}", t.node(link.a).unwrap().name, t.node(link.b).unwrap().name)
    };
    let out = run_with(&scenario, RunOptions { record_windows: true, ..RunOptions::default() }).unwrap();
    for e in out.events.iter().filter(|e| e.kind != EventKind::Flood) {
        println!("{:>6.3} s  {}  {:<6} {}", e.time.as_secs(), t.node(e.node).unwrap().name, e.kind.as_str(), name(e.link));
    }
    let last = out.windows.last().unwrap();
    let powered: Vec<String> = last.active.iter().map(name).collect();
    println!("powered at the end: {}", powered.join(" "));
    println!("loss {}%", out.metrics.summary.loss_pct());
}
