//! Closed-form self-training limit versus Monte Carlo on a parameter grid.
//!
//! `cargo run --release --example theory_check -- [p] [trials]`

use std::time::Instant;

use fedsim::theory::{closed_form_cot_with, LambdaNorm, TheoryGrid};

fn main() -> fedsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut grid = TheoryGrid::default();
    if let Some(p) = args.next() {
        grid.p = p.parse().expect("p must be an integer");
    }
    if let Some(t) = args.next() {
        grid.trials = t.parse().expect("trials must be an integer");
    }
    let start = Instant::now();
    let mut worst = (0.0f64, 0.0f64);
    println!("alpha sigma Gamma u_bar   closed   mc_mean  mc_se   rel_err  (2π variant)");
    for (tp, row) in grid.evaluate() {
        let row = row?;
        let alt = closed_form_cot_with(&tp, LambdaNorm::TwoPi)?;
        let alt_err = (row.mc_mean - alt).abs() / alt.abs();
        worst = (worst.0.max(row.relative_error()), worst.1.max(alt_err));
        println!(
            "{:5} {:5} {:5} {:5} {:8.4} {:8.4} {:6.4} {:8.4} {:8.4}",
            tp.alpha, tp.sigma, tp.gamma, tp.u_bar, row.closed_form, row.mc_mean, row.mc_se,
            row.relative_error(), alt_err
        );
    }
    println!(
        "worst relative error: adopted {:.4}, 1/(2πρ) variant {:.4}  ({:.1?})",
        worst.0,
        worst.1,
        start.elapsed()
    );
    Ok(())
}
