//! How the Dirichlet concentration controls label skew across clients.

use fedsim::data::{dirichlet_partition, make_blobs, PartitionSpec};
use fedsim::numerics::RngStream;

fn main() -> fedsim::Result<()> {
    let ds = make_blobs(4, 16, 0.9, 4000, &mut RngStream::new(0, "example/partition"))?;
    for alpha in [100.0, 1.0, 0.1] {
        let shards = dirichlet_partition(&ds, &PartitionSpec { n_clients: 20, alpha, seed: 0 })?;
        let mut top2 = 0.0;
        let mut nonempty = 0;
        println!("alpha = {alpha}");
        for (c, shard) in shards.iter().enumerate() {
            let counts = shard.class_counts();
            if c < 5 {
                println!("  client {c:2}: {:4} samples, per class {counts:?}", shard.len());
            }
            if !shard.is_empty() {
                let mut sorted = counts.clone();
                sorted.sort_unstable_by(|a, b| b.cmp(a));
                top2 += (sorted[0] + sorted[1]) as f64 / shard.len() as f64;
                nonempty += 1;
            }
        }
        println!("  mean top-2 class share over {nonempty} non-empty clients: {:.3}", top2 / nonempty as f64);
    }
    Ok(())
}
