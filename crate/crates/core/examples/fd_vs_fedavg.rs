//! Federated distillation against FedAvg on the same i.i.d. federation.
//!
//! `cargo run --release --example fd_vs_fedavg -- [seed]`

use fedsim::engine::{run, Algorithm, ExperimentConfig};

fn main() -> fedsim::Result<()> {
    let seed = std::env::args().nth(1).map_or(0, |s| s.parse().expect("seed must be an integer"));
    let mut fd = ExperimentConfig::default();
    fd.seed = seed;
    let mut avg = fd.clone();
    avg.algorithm = Algorithm::Fedavg;

    let a = run(&fd)?;
    let b = run(&avg)?;
    println!("round   fd_acc  fedavg_acc   fd_uplink  fedavg_uplink");
    for (x, y) in a.metrics.iter().zip(&b.metrics) {
        if x.round % 5 == 0 || x.round == 1 {
            println!(
                "{:5} {:8.4} {:11.4} {:11} {:14}",
                x.round, x.server_acc, y.server_acc, x.uplink_scalars, y.uplink_scalars
            );
        }
    }
    let (ta, tb) = (a.ledger.total(), b.ledger.total());
    println!(
        "total scalars: fd up {} / down {}, fedavg up {} / down {}",
        ta.uplink_scalars, ta.downlink_scalars, tb.uplink_scalars, tb.downlink_scalars
    );
    Ok(())
}
