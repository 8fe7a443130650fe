//! One simulated day on the bundled backbone, GOSPF against plain OSPF, with the saving per
//! quarter of the day.

use gospf::engine::{compare, run, Mode};
use gospf::scenarios::garr48_scenario;
use gospf::traffic::profile::{ProfileKind, ProtocolMix};

fn main() {
    let gospf = garr48_scenario(ProfileKind::Daily, ProtocolMix::Udp, Mode::Gospf);
    let baseline = gospf.clone().with_mode(Mode::Baseline);
    let a = run(&gospf).unwrap();
    let b = run(&baseline).unwrap();
    let report = compare(&a.metrics, &b.metrics).unwrap();
    let day = gospf.horizon();
    for q in 0..4 {
        let (from, to) = (day * q as f64 / 4.0, day * (q + 1) as f64 / 4.0);
        println!("{:02}:00-{:02}:00  saving {:5.1}%", q * 6, (q + 1) * 6, report.saving_between(from, to).unwrap());
    }
    println!(
        "day: saving {:.1}%, {:.1} links on average against {}, loss {}%, overhead {:.4}%",
        report.saving_pct,
        a.metrics.summary.avg_active_links,
        b.metrics.summary.avg_active_links,
        a.metrics.summary.loss_pct(),
        a.metrics.summary.overhead_pct()
    );
}
