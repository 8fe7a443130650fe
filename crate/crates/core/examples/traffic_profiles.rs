//! Aggregate offered load of the generated daily and weekly profiles, hour by hour.

use gospf::scenarios::garr48_traffic;
use gospf::traffic::profile::{ProfileKind, ProtocolMix};

fn main() {
    let day = 1440.0;
    let daily = garr48_traffic(ProfileKind::Daily, ProtocolMix::Udp);
    let weekly = garr48_traffic(ProfileKind::Weekly, ProtocolMix::Udp);
    let load = |flows: &[gospf::traffic::Flow], t: f64| flows.iter().map(|f| f.rate_at(t)).sum::<f64>() / 1e9;
    println!("hour  daily Gbit/s");
    for h in (0..24).step_by(2) {
        let t = day * (h as f64 + 0.5) / 24.0;
        println!("{h:>4}  {:>6.2} {}", load(&daily, t), "#".repeat((load(&daily, t) * 4.0) as usize));
    }
    println!("day   weekly Gbit/s at 13:00");
    for d in 0..7 {
        println!("{d:>4}  {:>6.2}", load(&weekly, day * (d as f64 + 13.0 / 24.0)));
    }
}
