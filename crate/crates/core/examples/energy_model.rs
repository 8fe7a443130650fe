//! Energy of one link over a minute spent in each power state, and how utilization is classified.

use gospf::energy::{utilization, EnergyAccount, OperState, Thresholds};
use gospf::graph::PowerRating;

fn main() {
    let rating = PowerRating { e_c: 0.5, ..PowerRating::default() };
    let mut link = EnergyAccount::new(rating);
    link.accrue(OperState::Active, 20.0).unwrap();
    link.accrue(OperState::Idle, 20.0).unwrap();
    link.accrue(OperState::Sleep, 20.0).unwrap();
    link.record_wakeup(OperState::Sleep).unwrap();
    println!(
        "active {} s, idle {} s, asleep {} s, {} wake-up: {:.3} J",
        link.t_active(),
        link.t_idle(),
        link.t_sleep(),
        link.switches(),
        link.energy()
    );

    let mut always_on = EnergyAccount::new(rating);
    always_on.accrue(OperState::Idle, 60.0).unwrap();
    println!("the same minute idle: {:.3} J", always_on.energy());

    let thresholds = Thresholds::new(0.2, 0.8).unwrap();
    for bits in [1e6, 40e6, 95e6] {
        let u = utilization(bits, 100e6, 1.0).unwrap();
        println!("{:>5.0} Mbit in 1 s on 100 Mbit/s: {:.2} {:?}", bits / 1e6, u, thresholds.classify(u));
    }
}
