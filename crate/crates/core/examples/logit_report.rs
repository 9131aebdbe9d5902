//! Upload packets: binary round trip, union aggregation and cost accounting.

use fedsim::protocol::{account, aggregate_average, read_report, write_report, LogitReport};

fn main() -> fedsim::Result<()> {
    let a = LogitReport { client_id: 3, n_classes: 2, indices: vec![10, 11], rows: vec![vec![0.9, 0.1], vec![0.6, 0.4]] };
    let b = LogitReport { client_id: 5, n_classes: 2, indices: vec![11, 12], rows: vec![vec![0.2, 0.8], vec![0.5, 0.5]] };

    let mut bytes = Vec::new();
    write_report(&a, &mut bytes).expect("writing to memory");
    println!("client 3 packet: {} bytes", bytes.len());
    assert_eq!(read_report(bytes.as_slice())?, a);

    let teacher = aggregate_average(&[a.clone(), b.clone()])?;
    for ((i, row), c) in teacher.indices.iter().zip(&teacher.rows).zip(&teacher.contributors) {
        println!("index {i}: {row:?} from {c} client(s)");
    }
    let cost = account(&[a, b], &[(3, 34), (5, 34)]);
    println!(
        "uplink {} scalars (+{} indices), downlink {} scalars, per client {:?}",
        cost.uplink_scalars, cost.uplink_index_overhead, cost.downlink_scalars, cost.per_client
    );
    Ok(())
}
