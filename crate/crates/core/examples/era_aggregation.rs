//! Averaging versus entropy-reduction aggregation of teacher rows, and the
//! effect on a non-i.i.d. federation.

use fedsim::engine::{run, Aggregation, ExperimentConfig};
use fedsim::numerics::entropy;
use fedsim::protocol::{aggregate_average, era_sharpen, LogitReport};

fn main() -> fedsim::Result<()> {
    let reports = vec![
        LogitReport { client_id: 0, n_classes: 3, indices: vec![7], rows: vec![vec![0.70, 0.20, 0.10]] },
        LogitReport { client_id: 1, n_classes: 3, indices: vec![7], rows: vec![vec![0.30, 0.40, 0.30]] },
    ];
    let avg = aggregate_average(&reports)?;
    println!("average row {:?}  H = {:.4}", avg.rows[0], entropy(&avg.rows[0])?);
    for t in [1.0, 0.5, 0.1] {
        let s = era_sharpen(&avg, t)?;
        println!("ERA T={t:<4} row {:?}  H = {:.4}", s.rows[0].iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(), entropy(&s.rows[0])?);
    }
    // softmax(row / T) applied to probabilities flattens confident rows
    let peaked = aggregate_average(&[LogitReport { client_id: 0, n_classes: 3, indices: vec![0], rows: vec![vec![0.98, 0.01, 0.01]] }])?;
    let s = era_sharpen(&peaked, 0.5)?;
    println!("peaked row H = {:.4} -> ERA T=0.5 H = {:.4}", entropy(&peaked.rows[0])?, entropy(&s.rows[0])?);

    for alpha in [100.0, 0.1] {
        let mut cfg = ExperimentConfig::default();
        cfg.data.alpha = alpha;
        let a = run(&cfg)?;
        cfg.aggregation.method = Aggregation::Era;
        let e = run(&cfg)?;
        let (la, le) = (a.metrics.last().unwrap(), e.metrics.last().unwrap());
        println!(
            "alpha={alpha:<5} average: acc {:.4}, teacher H {:.3} | ERA: acc {:.4}, teacher H {:.3}",
            la.server_acc, la.teacher_mean_entropy, le.server_acc, le.teacher_mean_entropy
        );
    }
    Ok(())
}
