//! Analytic gradients against central finite differences.

use fedsim::model::{backward, init_params, loss, Batch, ModelParams, ModelSpec};
use fedsim::numerics::{norm, softmax, RngStream};
use rand::Rng;

fn main() -> fedsim::Result<()> {
    let mut rng = RngStream::new(0, "example/gradcheck");
    let h = 1e-5;
    for spec in [ModelSpec::linear(5, 3), ModelSpec::mlp(5, 7, 3)] {
        let p = init_params(spec, &mut rng)?;
        let xs_owned: Vec<Vec<f64>> = (0..6).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let xs: Vec<&[f64]> = xs_owned.iter().map(Vec::as_slice).collect();
        let ys = [0, 1, 2, 0, 1, 2];
        let t_owned: Vec<Vec<f64>> = (0..6)
            .map(|_| softmax(&[rng.random(), rng.random(), rng.random()], 0.5))
            .collect::<fedsim::Result<_>>()?;
        let teacher: Vec<&[f64]> = t_owned.iter().map(Vec::as_slice).collect();
        for (name, batch, t) in [
            ("cross-entropy", Batch::Labeled { xs: &xs, ys: &ys }, 1.0),
            ("distillation T=3", Batch::Soft { xs: &xs, teacher: &teacher }, 3.0),
        ] {
            let g = backward(&p, &batch, t)?.to_vec();
            let theta = p.to_vec();
            let mut diff = Vec::with_capacity(theta.len());
            for k in 0..theta.len() {
                let (mut a, mut b) = (theta.clone(), theta.clone());
                a[k] += h;
                b[k] -= h;
                let fd = (loss(&ModelParams::from_vec(spec, &a)?, &batch, t)?
                    - loss(&ModelParams::from_vec(spec, &b)?, &batch, t)?)
                    / (2.0 * h);
                diff.push(g[k] - fd);
            }
            println!("{:?} {name}: {} params, relative error {:.2e}", spec.arch, theta.len(), norm(&diff) / norm(&g));
        }
    }
    Ok(())
}
