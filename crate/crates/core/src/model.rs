//! Softmax classifiers trained from scratch: a linear model and a
//! one-hidden-layer ReLU MLP, with cross-entropy and distillation losses.
//!
//! Both losses share one gradient path. For a target distribution `t` over
//! classes and student probabilities `p = softmax(s / T)`, the loss
//! `-Σ t_n log p_n` has score gradient `(p - t) / T`; cross-entropy is the
//! special case of a one-hot target.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::numerics::{argmax, Mat, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "arch", rename_all = "snake_case", deny_unknown_fields)]
pub enum Architecture {
    Linear,
    Mlp { hidden: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub arch: Architecture,
    pub input_dim: usize,
    pub n_classes: usize,
}

impl ModelSpec {
    pub fn linear(input_dim: usize, n_classes: usize) -> Self {
        Self {
            arch: Architecture::Linear,
            input_dim,
            n_classes,
        }
    }

    pub fn mlp(input_dim: usize, hidden: usize, n_classes: usize) -> Self {
        Self {
            arch: Architecture::Mlp { hidden },
            input_dim,
            n_classes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::invalid("model input dimension must be at least 1"));
        }
        if self.n_classes < 2 {
            return Err(Error::invalid(format!(
                "model needs at least 2 classes, got {}",
                self.n_classes
            )));
        }
        if let Architecture::Mlp { hidden: 0 } = self.arch {
            return Err(Error::invalid("mlp hidden width must be at least 1"));
        }
        Ok(())
    }

    /// `(out, in)` shape of every dense layer, input side first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        match self.arch {
            Architecture::Linear => vec![(self.n_classes, self.input_dim)],
            Architecture::Mlp { hidden } => {
                vec![(hidden, self.input_dim), (self.n_classes, hidden)]
            }
        }
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes().iter().map(|(o, i)| o * i + o).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weights: Mat,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(out: usize, inp: usize) -> Self {
        Self {
            weights: Mat::zeros(out, inp),
            bias: vec![0.0; out],
        }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.bias.clone();
        for (o, row) in out.iter_mut().zip(self.weights.as_slice().chunks_exact(self.weights.cols())) {
            *o += crate::numerics::dot(row, x);
        }
        out
    }
}

/// Weights and biases of one model, layer by layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    spec: ModelSpec,
    layers: Vec<Dense>,
}

/// Same layout as [`ModelParams`]; holds `∂L/∂θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    layers: Vec<Dense>,
}

impl Gradient {
    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn to_vec(&self) -> Vec<f64> {
        flatten(&self.layers)
    }
}

fn flatten(layers: &[Dense]) -> Vec<f64> {
    let mut out = Vec::new();
    for l in layers {
        out.extend_from_slice(l.weights.as_slice());
        out.extend_from_slice(&l.bias);
    }
    out
}

impl ModelParams {
    pub fn zeros(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        let layers = spec
            .layer_shapes()
            .into_iter()
            .map(|(o, i)| Dense::zeros(o, i))
            .collect();
        Ok(Self { spec, layers })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.spec.param_count()
    }

    /// All parameters in layer order (weights row-major, then bias).
    pub fn to_vec(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn from_vec(spec: ModelSpec, values: &[f64]) -> Result<Self> {
        let mut params = Self::zeros(spec)?;
        if values.len() != spec.param_count() {
            return Err(Error::invalid(format!(
                "{} values for a model with {} parameters",
                values.len(),
                spec.param_count()
            )));
        }
        let mut cursor = 0;
        for l in &mut params.layers {
            let w = l.weights.as_mut_slice();
            w.copy_from_slice(&values[cursor..cursor + w.len()]);
            cursor += w.len();
            let n = l.bias.len();
            l.bias.copy_from_slice(&values[cursor..cursor + n]);
            cursor += n;
        }
        Ok(params)
    }

    fn for_each_pair(&mut self, other: &[Dense], mut f: impl FnMut(&mut f64, f64)) {
        for (l, g) in self.layers.iter_mut().zip(other) {
            for (a, b) in l.weights.as_mut_slice().iter_mut().zip(g.weights.as_slice()) {
                f(a, *b);
            }
            for (a, b) in l.bias.iter_mut().zip(&g.bias) {
                f(a, *b);
            }
        }
    }

    /// `θ ← θ - lr · g`
    pub fn descend(&mut self, lr: f64, grad: &Gradient) {
        self.for_each_pair(&grad.layers, |a, g| *a -= lr * g);
    }

    /// `a·self + b·other` for two parameter sets of the same spec.
    pub fn affine(&self, a: f64, other: &ModelParams, b: f64) -> Result<ModelParams> {
        if self.spec != other.spec {
            return Err(Error::invalid("affine combination of different model specs"));
        }
        let mut out = self.clone();
        out.for_each_pair(&other.layers, |x, y| *x = a * *x + b * y);
        Ok(out)
    }

    /// Uniform average of parameter sets sharing one spec.
    pub fn average(all: &[&ModelParams]) -> Result<ModelParams> {
        let first = all
            .first()
            .ok_or_else(|| Error::invalid("average of zero models"))?;
        // first + mean(p - first): exact when all inputs are identical
        let mut delta = ModelParams::zeros(first.spec)?;
        for p in all {
            if p.spec != first.spec {
                return Err(Error::invalid("cannot average models with different specs"));
            }
            let mut diff = (*p).clone();
            diff.for_each_pair(&first.layers, |d, f| *d -= f);
            delta.for_each_pair(&diff.layers, |s, v| *s += v);
        }
        let n = all.len() as f64;
        let mut out = (*first).clone();
        out.for_each_pair(&delta.layers, |o, d| *o += d / n);
        Ok(out)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.spec.input_dim {
            return Err(Error::invalid(format!(
                "input has dimension {}, model expects {}",
                x.len(),
                self.spec.input_dim
            )));
        }
        Ok(())
    }

    /// Raw class scores before softmax.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.forward_trace(x).scores)
    }

    fn forward_trace(&self, x: &[f64]) -> Trace {
        match self.layers.as_slice() {
            [out] => Trace {
                hidden_pre: None,
                hidden: None,
                scores: out.forward(x),
            },
            [hid, out] => {
                let pre = hid.forward(x);
                let h: Vec<f64> = pre.iter().map(|v| v.max(0.0)).collect();
                let scores = out.forward(&h);
                Trace {
                    hidden_pre: Some(pre),
                    hidden: Some(h),
                    scores,
                }
            }
            _ => unreachable!("specs only produce one or two layers"),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.scores(x)?))
    }
}

struct Trace {
    hidden_pre: Option<Vec<f64>>,
    hidden: Option<Vec<f64>>,
    scores: Vec<f64>,
}

/// Zero-mean Gaussian weights with standard deviation `1/√fan_in`, zero biases.
pub fn init_params(spec: ModelSpec, rng: &mut RngStream) -> Result<ModelParams> {
    let mut params = ModelParams::zeros(spec)?;
    for l in &mut params.layers {
        let scale = 1.0 / (l.weights.cols() as f64).sqrt();
        for w in l.weights.as_mut_slice() {
            *w = scale * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(params)
}

/// Class probabilities `softmax(scores(x) / t)`.
pub fn forward_logits(params: &ModelParams, x: &[f64], t: f64) -> Result<Vec<f64>> {
    let mut s = params.scores(x)?;
    crate::numerics::softmax_in_place(&mut s, t)?;
    Ok(s)
}

/// `log softmax(s / t)`, stable for any finite scores.
fn log_softmax(s: &[f64], t: f64) -> Vec<f64> {
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = s.iter().map(|v| (v - max) / t).collect();
    let lse = shifted.iter().map(|v| v.exp()).sum::<f64>().ln();
    shifted.into_iter().map(|v| v - lse).collect()
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("temperature must be positive, got {t}")));
    }
    Ok(())
}

/// A minibatch with either hard labels or teacher probability rows.
#[derive(Clone, Copy, Debug)]
pub enum Batch<'a> {
    Labeled {
        xs: &'a [&'a [f64]],
        ys: &'a [usize],
    },
    Soft {
        xs: &'a [&'a [f64]],
        teacher: &'a [&'a [f64]],
    },
}

impl<'a> Batch<'a> {
    fn xs(&self) -> &'a [&'a [f64]] {
        match *self {
            Batch::Labeled { xs, .. } | Batch::Soft { xs, .. } => xs,
        }
    }

    fn validate(&self, spec: &ModelSpec) -> Result<()> {
        let n = self.xs().len();
        if n == 0 {
            return Err(Error::invalid("empty batch"));
        }
        match *self {
            Batch::Labeled { ys, .. } => {
                if ys.len() != n {
                    return Err(Error::invalid(format!("{n} inputs but {} labels", ys.len())));
                }
                if let Some(y) = ys.iter().find(|&&y| y >= spec.n_classes) {
                    return Err(Error::invalid(format!("label {y} out of range")));
                }
            }
            Batch::Soft { teacher, .. } => {
                if teacher.len() != n {
                    return Err(Error::invalid(format!(
                        "{n} inputs but {} teacher rows",
                        teacher.len()
                    )));
                }
                for row in teacher {
                    if row.len() != spec.n_classes {
                        return Err(Error::invalid(format!(
                            "teacher row has {} classes, model has {}",
                            row.len(),
                            spec.n_classes
                        )));
                    }
                    let total: f64 = row.iter().sum();
                    if (total - 1.0).abs() > 1e-9 || row.iter().any(|&v| !(v >= 0.0)) {
                        return Err(Error::invalid("teacher row is not a probability vector"));
                    }
                }
            }
        }
        for x in self.xs() {
            if x.len() != spec.input_dim {
                return Err(Error::invalid(format!(
                    "input has dimension {}, model expects {}",
                    x.len(),
                    spec.input_dim
                )));
            }
        }
        Ok(())
    }

    /// `-Σ_n target_n · log_p_n` for sample `i`.
    fn sample_loss(&self, i: usize, log_p: &[f64]) -> f64 {
        match *self {
            Batch::Labeled { ys, .. } => -log_p[ys[i]],
            Batch::Soft { teacher, .. } => -teacher[i]
                .iter()
                .zip(log_p)
                .filter(|(t, _)| **t > 0.0)
                .map(|(t, l)| t * l)
                .sum::<f64>(),
        }
    }

    fn subtract_target(&self, i: usize, p: &mut [f64]) {
        match *self {
            Batch::Labeled { ys, .. } => p[ys[i]] -= 1.0,
            Batch::Soft { teacher, .. } => {
                for (pn, tn) in p.iter_mut().zip(teacher[i]) {
                    *pn -= tn;
                }
            }
        }
    }
}

/// Mean loss over the batch at temperature `t`.
pub fn loss(params: &ModelParams, batch: &Batch<'_>, t: f64) -> Result<f64> {
    check_temperature(t)?;
    batch.validate(&params.spec)?;
    let xs = batch.xs();
    let total: f64 = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let s = params.forward_trace(x).scores;
            batch.sample_loss(i, &log_softmax(&s, t))
        })
        .sum();
    Ok(total / xs.len() as f64)
}

/// Mean cross-entropy `-(1/B) Σ log p_{y}`.
pub fn ce_loss(params: &ModelParams, xs: &[&[f64]], ys: &[usize], t: f64) -> Result<f64> {
    loss(params, &Batch::Labeled { xs, ys }, t)
}

/// Mean distillation cross-entropy `-(1/B) Σ_b Σ_n teacher_bn · log student_bn`,
/// with the student evaluated at temperature `t`.
pub fn distill_loss(teacher: &[&[f64]], params: &ModelParams, xs: &[&[f64]], t: f64) -> Result<f64> {
    loss(params, &Batch::Soft { xs, teacher }, t)
}

/// Mean loss and its exact gradient.
pub fn loss_and_gradient(params: &ModelParams, batch: &Batch<'_>, t: f64) -> Result<(f64, Gradient)> {
    check_temperature(t)?;
    batch.validate(&params.spec)?;
    let xs = batch.xs();
    let inv_n = 1.0 / xs.len() as f64;
    let mut grad: Vec<Dense> = params
        .spec
        .layer_shapes()
        .into_iter()
        .map(|(o, i)| Dense::zeros(o, i))
        .collect();
    let mut total = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let trace = params.forward_trace(x);
        let log_p = log_softmax(&trace.scores, t);
        total += batch.sample_loss(i, &log_p);
        // δ = (p - target) / (T·B)
        let mut delta: Vec<f64> = log_p.iter().map(|l| l.exp()).collect();
        batch.subtract_target(i, &mut delta);
        delta.iter_mut().for_each(|d| *d *= inv_n / t);

        let last = grad.len() - 1;
        let out_input: &[f64] = trace.hidden.as_deref().unwrap_or(x);
        accumulate_outer(&mut grad[last], &delta, out_input);

        if let (Some(pre), true) = (trace.hidden_pre.as_ref(), last == 1) {
            let w_out = &params.layers[1].weights;
            let mut d_hidden = vec![0.0; pre.len()];
            for (c, dc) in delta.iter().enumerate() {
                crate::numerics::axpy(*dc, w_out.row(c), &mut d_hidden);
            }
            for (dh, z) in d_hidden.iter_mut().zip(pre) {
                if *z <= 0.0 {
                    *dh = 0.0;
                }
            }
            accumulate_outer(&mut grad[0], &d_hidden, x);
        }
    }
    Ok((total * inv_n, Gradient { layers: grad }))
}

fn accumulate_outer(layer: &mut Dense, delta: &[f64], input: &[f64]) {
    for (r, d) in delta.iter().enumerate() {
        if *d != 0.0 {
            crate::numerics::axpy(*d, input, layer.weights.row_mut(r));
        }
        layer.bias[r] += d;
    }
}

/// Exact analytic gradient of the batch loss.
pub fn backward(params: &ModelParams, batch: &Batch<'_>, t: f64) -> Result<Gradient> {
    loss_and_gradient(params, batch, t).map(|(_, g)| g)
}

/// Training data for [`sgd_epochs`].
#[derive(Clone, Copy, Debug)]
pub enum TrainSet<'a> {
    Labeled(&'a LabeledDataset),
    Soft {
        xs: &'a [&'a [f64]],
        teacher: &'a [&'a [f64]],
    },
}

impl TrainSet<'_> {
    fn len(&self) -> usize {
        match self {
            TrainSet::Labeled(ds) => ds.len(),
            TrainSet::Soft { xs, .. } => xs.len(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub temperature: f64,
}

/// Plain minibatch SGD; the sample order is reshuffled from `rng` every epoch.
pub fn sgd_epochs(
    params: &ModelParams,
    data: TrainSet<'_>,
    cfg: &SgdConfig,
    rng: &mut RngStream,
) -> Result<ModelParams> {
    if !(cfg.lr >= 0.0) || !cfg.lr.is_finite() {
        return Err(Error::invalid(format!("learning rate must be nonnegative, got {}", cfg.lr)));
    }
    if cfg.batch_size == 0 {
        return Err(Error::invalid("batch size must be positive"));
    }
    check_temperature(cfg.temperature)?;
    let mut out = params.clone();
    let n = data.len();
    if n == 0 {
        return Ok(out);
    }
    let (labeled_xs, labeled_ys): (Vec<&[f64]>, Vec<usize>) = match data {
        TrainSet::Labeled(ds) => ds.samples().iter().map(|s| (s.x.as_slice(), s.y)).unzip(),
        TrainSet::Soft { .. } => (Vec::new(), Vec::new()),
    };
    let mut order: Vec<usize> = (0..n).collect();
    let mut bx: Vec<&[f64]> = Vec::with_capacity(cfg.batch_size);
    let mut by: Vec<usize> = Vec::with_capacity(cfg.batch_size);
    let mut bt: Vec<&[f64]> = Vec::with_capacity(cfg.batch_size);
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(cfg.batch_size) {
            bx.clear();
            by.clear();
            bt.clear();
            let grad = match data {
                TrainSet::Labeled(_) => {
                    for &i in chunk {
                        bx.push(labeled_xs[i]);
                        by.push(labeled_ys[i]);
                    }
                    backward(&out, &Batch::Labeled { xs: &bx, ys: &by }, cfg.temperature)?
                }
                TrainSet::Soft { xs, teacher } => {
                    for &i in chunk {
                        bx.push(xs[i]);
                        bt.push(teacher[i]);
                    }
                    backward(&out, &Batch::Soft { xs: &bx, teacher: &bt }, cfg.temperature)?
                }
            };
            if cfg.lr != 0.0 {
                out.descend(cfg.lr, &grad);
            }
        }
    }
    Ok(out)
}
