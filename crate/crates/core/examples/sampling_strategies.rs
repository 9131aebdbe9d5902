//! The four public-data selection strategies on a skewed federation.

use fedsim::engine::{run, ExperimentConfig};
use fedsim::sampling::Strategy;

fn main() -> fedsim::Result<()> {
    println!("strategy      final_acc  teacher_rows  uplink/round");
    for strategy in Strategy::ALL {
        let mut cfg = ExperimentConfig::default();
        cfg.data.alpha = 0.1;
        cfg.sampling.strategy = strategy;
        cfg.sampling.budget = 400;
        let r = run(&cfg)?;
        let last = r.metrics.last().unwrap();
        println!(
            "{:12} {:10.4} {:13} {:13}",
            strategy.as_str(),
            last.server_acc,
            last.union_size,
            last.uplink_scalars
        );
    }
    Ok(())
}
