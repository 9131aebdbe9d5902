//! Labeled shards, server aggregation, then self-training on unlabeled data,
//! compared with the large-dimension prediction.

use fedsim::numerics::RngStream;
use fedsim::theory::{federated_self_training_trial, closed_form_cot, GmmSpec, TheoremParams};

fn main() -> fedsim::Result<()> {
    let p = 100;
    let gmm = GmmSpec::axis(p, 1.0)?;
    let shards = [10usize; 5];
    let n_unlabeled = 2000;
    println!("trial  cot(initial)  cot(self-trained)  predicted");
    for trial in 0..10u64 {
        let mut rng = RngStream::new(trial, "example/self_training");
        let o = federated_self_training_trial(&gmm, &shards, n_unlabeled, 0.0, &mut rng)?;
        // the prediction conditions on the observed initial alignment
        let alpha = o.cot_initial / (1.0 + o.cot_initial * o.cot_initial).sqrt();
        let predicted = closed_form_cot(&TheoremParams {
            alpha,
            sigma: 1.0,
            gamma: 0.0,
            u_bar: n_unlabeled as f64 / p as f64,
        })?;
        println!("{trial:5} {:13.3} {:18.3} {:10.3}", o.cot_initial, o.cot_self_trained, predicted);
    }
    Ok(())
}
