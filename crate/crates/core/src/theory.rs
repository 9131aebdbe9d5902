//! Binary Gaussian-mixture view of federated distillation.
//!
//! Clients fit averaging estimators `β_k = (1/n_k) Σ y x` on private shards,
//! the server combines their linear logits with weights `n_k / n` (which is
//! exactly the pooled averaging estimator), and distillation on unlabeled
//! data becomes self-training with an acceptance threshold `Γ`. Estimator
//! quality is the cotangent of the angle to the true mean `u`, and the
//! large-`p` limit of that cotangent has a closed form that this module
//! checks against Monte Carlo.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::numerics::{dot, norm, q_tail, RngStream};

/// Binary GMM parameters: unit mean `u` (dimension `p = u.len()`) and noise std `sigma`.
#[derive(Clone, Debug, PartialEq)]
pub struct GmmSpec {
    u: Vec<f64>,
    sigma: f64,
}

impl GmmSpec {
    pub fn new(u: Vec<f64>, sigma: f64) -> Result<Self> {
        if (norm(&u) - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("GMM mean must be a unit vector, |u| = {}", norm(&u))));
        }
        if !(sigma > 0.0) {
            return Err(Error::invalid(format!("GMM sigma must be positive, got {sigma}")));
        }
        Ok(Self { u, sigma })
    }

    /// `u = e₁` in `p` dimensions.
    pub fn axis(p: usize, sigma: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid("GMM dimension must be positive"));
        }
        let mut u = vec![0.0; p];
        u[0] = 1.0;
        Self::new(u, sigma)
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn p(&self) -> usize {
        self.u.len()
    }

    /// `n` labeled draws with `y ∈ {-1, +1}`.
    pub fn sample_signed(&self, n: usize, rng: &mut RngStream) -> Vec<SignedSample> {
        (0..n)
            .map(|_| {
                let y = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let x = self
                    .u
                    .iter()
                    .map(|&ui| y * ui + self.sigma * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                SignedSample { x, y }
            })
            .collect()
    }
}

/// A labeled point with `y = ±1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedSample {
    pub x: Vec<f64>,
    pub y: f64,
}

/// Convert a two-class dataset (classes `{0, 1}`) to `y ∈ {-1, +1}`.
pub fn signed_samples(ds: &LabeledDataset) -> Result<Vec<SignedSample>> {
    if ds.n_classes() != 2 {
        return Err(Error::invalid("signed samples need a two-class dataset"));
    }
    Ok(ds
        .samples()
        .iter()
        .map(|s| SignedSample {
            x: s.x.clone(),
            y: if s.y == 1 { 1.0 } else { -1.0 },
        })
        .collect())
}

/// A linear estimator `β` of the mixture mean.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimator {
    pub beta: Vec<f64>,
}

impl Estimator {
    pub fn new(beta: Vec<f64>) -> Self {
        Self { beta }
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.beta.iter().map(|b| c * b).collect())
    }
}

/// `β = (1/n) Σ y_i x_i`.
pub fn averaging_estimator(samples: &[SignedSample]) -> Result<Estimator> {
    let first = samples
        .first()
        .ok_or_else(|| Error::invalid("averaging estimator of an empty sample"))?;
    let mut sum = vec![0.0; first.x.len()];
    for s in samples {
        if s.x.len() != sum.len() {
            return Err(Error::invalid("samples of mixed dimension"));
        }
        crate::numerics::axpy(s.y, &s.x, &mut sum);
    }
    let n = samples.len() as f64;
    Ok(Estimator::new(sum.into_iter().map(|v| v / n).collect()))
}

/// Server-side combination `β_s = Σ (n_k / n) β_k` of local averaging estimators.
pub fn federated_aggregate(local: &[(Estimator, usize)]) -> Result<Estimator> {
    let total: usize = local.iter().map(|(_, n)| n).sum();
    if total == 0 {
        return Err(Error::invalid("federated aggregate needs at least one sample"));
    }
    let dim = local[0].0.dim();
    let mut beta = vec![0.0; dim];
    for (est, n_k) in local {
        if est.dim() != dim {
            return Err(Error::invalid("local estimators of mixed dimension"));
        }
        crate::numerics::axpy(*n_k as f64 / total as f64, &est.beta, &mut beta);
    }
    Ok(Estimator::new(beta))
}

/// Streaming form of [`self_train`], for callers that generate samples on the fly.
#[derive(Clone, Debug)]
pub struct SelfTrainAccumulator<'a> {
    beta_s: &'a [f64],
    gamma: f64,
    sum: Vec<f64>,
    accepted: usize,
}

impl<'a> SelfTrainAccumulator<'a> {
    pub fn new(beta_s: &'a Estimator, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(Error::invalid(format!("acceptance threshold must be nonnegative, got {gamma}")));
        }
        Ok(Self {
            beta_s: &beta_s.beta,
            gamma,
            sum: vec![0.0; beta_s.dim()],
            accepted: 0,
        })
    }

    /// Pseudo-label `x` with `sign(β_s·x)` and keep it if `|β_s·x| > Γ`.
    pub fn push(&mut self, x: &[f64]) {
        let score = dot(self.beta_s, x);
        if score.abs() > self.gamma {
            crate::numerics::axpy(score.signum(), x, &mut self.sum);
            self.accepted += 1;
        }
    }

    pub fn accepted(&self) -> usize {
        self.accepted
    }

    pub fn finish(self) -> Result<Estimator> {
        if self.accepted == 0 {
            return Err(Error::DegenerateThreshold(format!(
                "no unlabeled sample passes |β_s·x| > {}",
                self.gamma
            )));
        }
        let k = self.accepted as f64;
        Ok(Estimator::new(self.sum.into_iter().map(|v| v / k).collect()))
    }
}

/// `β̂ = Σ 1(|β_s·x| > Γ) sign(β_s·x) x / Σ 1(|β_s·x| > Γ)`.
pub fn self_train(beta_s: &Estimator, unlabeled: &[Vec<f64>], gamma: f64) -> Result<Estimator> {
    let mut acc = SelfTrainAccumulator::new(beta_s, gamma)?;
    for x in unlabeled {
        if x.len() != beta_s.dim() {
            return Err(Error::invalid("unlabeled sample dimension differs from the estimator"));
        }
        acc.push(x);
    }
    acc.finish()
}

/// `cot ∠(β, u) = ρ / √(1 - ρ²)` with `ρ` the cosine similarity.
///
/// Perfect alignment (`1 - ρ ≤ 1e-12`) returns `f64::INFINITY`; exact
/// anti-alignment returns `f64::NEG_INFINITY`.
pub fn cot_metric(beta: &Estimator, u: &[f64]) -> Result<f64> {
    if beta.dim() != u.len() {
        return Err(Error::invalid("estimator and mean differ in dimension"));
    }
    let nb = norm(&beta.beta);
    let nu = norm(u);
    if nb == 0.0 || nu == 0.0 {
        return Err(Error::invalid("cotangent of a zero vector"));
    }
    let rho = (dot(&beta.beta, u) / (nb * nu)).clamp(-1.0, 1.0);
    if 1.0 - rho <= 1e-12 {
        return Ok(f64::INFINITY);
    }
    if 1.0 + rho <= 1e-12 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(rho / (1.0 - rho * rho).sqrt())
}

/// Parameters of the large-dimension self-training limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremParams {
    /// Correlation between the initial estimator and `u`, in `(0, 1)`.
    pub alpha: f64,
    pub sigma: f64,
    /// Acceptance threshold `Γ ≥ 0`.
    pub gamma: f64,
    /// Unlabeled samples per dimension, `u / p`.
    pub u_bar: f64,
}

impl TheoremParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::invalid(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::invalid(format!("Gamma must be nonnegative, got {}", self.gamma)));
        }
        if !(self.u_bar > 0.0) {
            return Err(Error::invalid(format!("u_bar must be positive, got {}", self.u_bar)));
        }
        Ok(())
    }
}

/// Prefactor of `Λ`.
///
/// `SqrtTwoPi` gives `Λ = (φ(Γ̄₊) + φ(Γ̄₋)) / ρ`, the conditional mean of
/// `sign·z` over accepted samples; `TwoPi` is the `1/(2πρ)` form. Only the
/// first agrees with simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaNorm {
    SqrtTwoPi,
    TwoPi,
}

pub const ADOPTED_LAMBDA_NORM: LambdaNorm = LambdaNorm::SqrtTwoPi;

impl LambdaNorm {
    fn prefactor(self) -> f64 {
        match self {
            LambdaNorm::SqrtTwoPi => 1.0 / (2.0 * PI).sqrt(),
            LambdaNorm::TwoPi => 1.0 / (2.0 * PI),
        }
    }
}

/// Intermediate quantities of the closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitTerms {
    /// Acceptance probability `Q(Γ̄₊) + Q(Γ̄₋)`.
    pub rho: f64,
    /// Fraction of accepted samples that get the wrong pseudo-label.
    pub nu: f64,
    pub lambda: f64,
}

pub fn limit_terms(tp: &TheoremParams, norm: LambdaNorm) -> Result<LimitTerms> {
    tp.validate()?;
    let g_minus = (tp.alpha + tp.gamma) / tp.sigma;
    let g_plus = (tp.gamma - tp.alpha) / tp.sigma;
    let q_minus = q_tail(g_minus);
    let rho = q_tail(g_plus) + q_minus;
    if !(rho > f64::MIN_POSITIVE) {
        return Err(Error::DegenerateThreshold(format!(
            "acceptance probability underflows at Gamma = {} (sigma = {}, alpha = {})",
            tp.gamma, tp.sigma, tp.alpha
        )));
    }
    let lambda = norm.prefactor() / rho * ((-0.5 * g_plus * g_plus).exp() + (-0.5 * g_minus * g_minus).exp());
    Ok(LimitTerms {
        rho,
        nu: q_minus / rho,
        lambda,
    })
}

/// Limit of `cot(β̂, u)` as `p → ∞` at fixed `u/p`, with the adopted `Λ`.
pub fn closed_form_cot(tp: &TheoremParams) -> Result<f64> {
    closed_form_cot_with(tp, ADOPTED_LAMBDA_NORM)
}

/// `(1 + σαΛ - 2ν) / (σ √((1 - α²)Λ² + 1/(ū ρ)))`.
pub fn closed_form_cot_with(tp: &TheoremParams, norm: LambdaNorm) -> Result<f64> {
    let LimitTerms { rho, nu, lambda } = limit_terms(tp, norm)?;
    let a = tp.alpha;
    let num = 1.0 + tp.sigma * a * lambda - 2.0 * nu;
    let den = tp.sigma * ((1.0 - a * a) * lambda * lambda + 1.0 / (tp.u_bar * rho)).sqrt();
    Ok(num / den)
}

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub trials: usize,
}

impl McEstimate {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            se: (var / n).sqrt(),
            trials: values.len(),
        }
    }
}

/// Initial estimator with correlation exactly `alpha` to `u = e₁`:
/// `α e₁ + √(1-α²) v` for a random unit `v ⟂ e₁`.
pub fn correlated_initializer(alpha: f64, p: usize, rng: &mut RngStream) -> Result<Estimator> {
    if p < 2 {
        return Err(Error::invalid("need p ≥ 2 to build an orthogonal direction"));
    }
    let mut v: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
    v[0] = 0.0;
    let nv = norm(&v);
    let s = (1.0 - alpha * alpha).sqrt() / nv;
    let mut beta: Vec<f64> = v.into_iter().map(|c| c * s).collect();
    beta[0] = alpha;
    Ok(Estimator::new(beta))
}

/// One simulated self-training trial of [`monte_carlo_cot`].
pub fn monte_carlo_trial(tp: &TheoremParams, p: usize, rng: &mut RngStream) -> Result<f64> {
    let gmm = GmmSpec::axis(p, tp.sigma)?;
    let beta_s = correlated_initializer(tp.alpha, p, rng)?;
    let m = (tp.u_bar * p as f64).round().max(1.0) as usize;
    let mut acc = SelfTrainAccumulator::new(&beta_s, tp.gamma)?;
    let mut x = vec![0.0; p];
    for _ in 0..m {
        let y = if rng.random::<bool>() { 1.0 } else { -1.0 };
        for xi in x.iter_mut() {
            *xi = tp.sigma * rng.sample::<f64, _>(StandardNormal);
        }
        x[0] += y;
        acc.push(&x);
    }
    cot_metric(&acc.finish()?, gmm.u())
}

/// Empirical `cot(β̂, u)` over independent trials at finite `p`.
///
/// Each trial fixes `u = e₁`, builds `β_s` with correlation exactly `α`,
/// draws `round(ū·p)` unlabeled mixture samples and self-trains. Trials run in
/// parallel on streams `trial/<t>` split from `rng` and are reduced in order.
pub fn monte_carlo_cot(tp: &TheoremParams, p: usize, trials: usize, rng: &RngStream) -> Result<McEstimate> {
    tp.validate()?;
    if p < 100 {
        return Err(Error::invalid(format!("Monte Carlo needs p ≥ 100, got {p}")));
    }
    if trials < 10 {
        return Err(Error::invalid(format!("Monte Carlo needs at least 10 trials, got {trials}")));
    }
    let values = (0..trials)
        .into_par_iter()
        .map(|t| monte_carlo_trial(tp, p, &mut rng.split(format!("trial/{t}"))))
        .collect::<Result<Vec<f64>>>()?;
    Ok(McEstimate::from_values(&values))
}

/// Outcome of the full pipeline for one draw: labeled shards, local
/// averaging estimators, server aggregation, then self-training.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineOutcome {
    pub cot_initial: f64,
    pub cot_self_trained: f64,
}

pub fn federated_self_training_trial(
    gmm: &GmmSpec,
    shard_sizes: &[usize],
    n_unlabeled: usize,
    gamma: f64,
    rng: &mut RngStream,
) -> Result<PipelineOutcome> {
    let local = shard_sizes
        .iter()
        .map(|&n| {
            let shard = gmm.sample_signed(n, rng);
            Ok((averaging_estimator(&shard)?, n))
        })
        .collect::<Result<Vec<_>>>()?;
    let beta_s = federated_aggregate(&local)?;
    let unlabeled: Vec<Vec<f64>> = gmm.sample_signed(n_unlabeled, rng).into_iter().map(|s| s.x).collect();
    let beta_hat = self_train(&beta_s, &unlabeled, gamma)?;
    Ok(PipelineOutcome {
        cot_initial: cot_metric(&beta_s, gmm.u())?,
        cot_self_trained: cot_metric(&beta_hat, gmm.u())?,
    })
}

/// One cell of a closed-form versus Monte Carlo comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub alpha: f64,
    pub sigma: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    pub u_bar: f64,
    pub closed_form: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub p: usize,
    pub trials: usize,
}

impl GridRow {
    pub fn relative_error(&self) -> f64 {
        (self.mc_mean - self.closed_form).abs() / self.closed_form.abs()
    }
}

pub const GRID_HEADER: [&str; 9] = ["alpha", "sigma", "Gamma", "u_bar", "closed_form", "mc_mean", "mc_se", "p", "trials"];

/// Axes of a theory grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryGrid {
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub sigma: Vec<f64>,
    pub u_bar: Vec<f64>,
    pub p: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for TheoryGrid {
    fn default() -> Self {
        Self {
            alpha: vec![0.3, 0.5, 0.7],
            gamma: vec![0.0, 0.5, 1.0],
            sigma: vec![0.5, 1.0],
            u_bar: vec![0.5, 1.0, 2.0],
            p: 2000,
            trials: 50,
            seed: 0,
        }
    }
}

impl TheoryGrid {
    pub fn cells(&self) -> Vec<TheoremParams> {
        let mut out = Vec::new();
        for &alpha in &self.alpha {
            for &gamma in &self.gamma {
                for &sigma in &self.sigma {
                    for &u_bar in &self.u_bar {
                        out.push(TheoremParams {
                            alpha,
                            sigma,
                            gamma,
                            u_bar,
                        });
                    }
                }
            }
        }
        out
    }

    /// Evaluate every cell; a failing cell (e.g. degenerate threshold) is
    /// reported in place without affecting the others.
    pub fn evaluate(&self) -> Vec<(TheoremParams, Result<GridRow>)> {
        self.cells()
            .into_iter()
            .map(|tp| (tp, self.evaluate_cell(&tp)))
            .collect()
    }

    pub fn evaluate_cell(&self, tp: &TheoremParams) -> Result<GridRow> {
        let closed_form = closed_form_cot(tp)?;
        let stream = RngStream::new(
            self.seed,
            format!("theory/alpha={}/sigma={}/gamma={}/u_bar={}", tp.alpha, tp.sigma, tp.gamma, tp.u_bar),
        );
        let mc = monte_carlo_cot(tp, self.p, self.trials, &stream)?;
        Ok(GridRow {
            alpha: tp.alpha,
            sigma: tp.sigma,
            gamma: tp.gamma,
            u_bar: tp.u_bar,
            closed_form,
            mc_mean: mc.mean,
            mc_se: mc.se,
            p: self.p,
            trials: self.trials,
        })
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn tp(alpha: f64, sigma: f64, gamma: f64, u_bar: f64) -> TheoremParams {
        TheoremParams {
            alpha,
            sigma,
            gamma,
            u_bar,
        }
    }

    #[test]
    fn averaging_estimator_small_cases() {
        let x = vec![0.5, -1.0, 2.0];
        let one = averaging_estimator(&[SignedSample { x: x.clone(), y: 1.0 }]).unwrap();
        assert_eq!(one.beta, x);
        let cancel = averaging_estimator(&[
            SignedSample { x: x.clone(), y: 1.0 },
            SignedSample { x, y: -1.0 },
        ])
        .unwrap();
        assert!(cancel.beta.iter().all(|&v| v == 0.0));
        assert!(averaging_estimator(&[]).is_err());
    }

    #[test]
    fn averaging_estimator_aligns_with_mean() {
        // ρ ≈ 1/√(1 + p/n) ≈ 0.988 for p=50, n=2000
        let gmm = GmmSpec::axis(50, 1.0).unwrap();
        let s = gmm.sample_signed(2000, &mut RngStream::new(1, "avg"));
        let beta = averaging_estimator(&s).unwrap();
        let rho = beta.beta[0] / norm(&beta.beta);
        assert!(rho > 0.8, "{rho}");
    }

    #[test]
    fn federated_equals_pooled_on_equal_shards() {
        let gmm = GmmSpec::axis(20, 1.0).unwrap();
        let all = gmm.sample_signed(400, &mut RngStream::new(2, "fed"));
        let pooled = averaging_estimator(&all).unwrap();
        let local: Vec<(Estimator, usize)> = all
            .chunks(100)
            .map(|c| (averaging_estimator(c).unwrap(), c.len()))
            .collect();
        let fed = federated_aggregate(&local).unwrap();
        for (a, b) in fed.beta.iter().zip(&pooled.beta) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        let single = federated_aggregate(&[(pooled.clone(), 400)]).unwrap();
        assert_eq!(single, pooled);
        assert!(federated_aggregate(&[(pooled, 0)]).is_err());
    }

    #[test]
    fn self_train_small_cases() {
        let beta = Estimator::new(vec![1.0, 0.0]);
        let x = vec![0.3, 0.7];
        assert_eq!(self_train(&beta, &[x.clone()], 0.0).unwrap().beta, x);
        assert!(matches!(
            self_train(&beta, &[x], 5.0),
            Err(Error::DegenerateThreshold(_))
        ));
    }

    #[test]
    fn self_train_sign_and_scale_behaviour() {
        let gmm = GmmSpec::axis(30, 1.0).unwrap();
        let mut rng = RngStream::new(3, "st");
        let beta_s = averaging_estimator(&gmm.sample_signed(40, &mut rng)).unwrap();
        let xs: Vec<Vec<f64>> = gmm.sample_signed(300, &mut rng).into_iter().map(|s| s.x).collect();
        let base = self_train(&beta_s, &xs, 0.0).unwrap();
        let flipped = self_train(&beta_s.scaled(-1.0), &xs, 0.0).unwrap();
        for (a, b) in base.beta.iter().zip(&flipped.beta) {
            assert_eq!(*a, -*b);
        }
        // Γ = 0: positive rescaling changes nothing
        assert_eq!(self_train(&beta_s.scaled(3.7), &xs, 0.0).unwrap(), base);
        // Γ > 0: invariant only when Γ scales with β_s
        let g = self_train(&beta_s, &xs, 1.5).unwrap();
        assert_eq!(self_train(&beta_s.scaled(4.0), &xs, 6.0).unwrap(), g);
        assert_ne!(self_train(&beta_s.scaled(4.0), &xs, 1.5).unwrap(), g);
    }

    #[test]
    fn cot_reference_angles() {
        let u = [1.0, 0.0, 0.0];
        assert_eq!(cot_metric(&Estimator::new(u.to_vec()), &u).unwrap(), f64::INFINITY);
        assert_eq!(cot_metric(&Estimator::new(vec![0.0, 2.0, 0.0]), &u).unwrap(), 0.0);
        let c = cot_metric(&Estimator::new(vec![1.0, 1.0, 0.0]), &u).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
        assert!(cot_metric(&Estimator::new(vec![0.0; 3]), &u).is_err());
        // scale-invariant in both arguments
        let b = Estimator::new(vec![0.3, -0.2, 0.9]);
        let d = [0.6, 0.8, 0.0];
        let c1 = cot_metric(&b, &d).unwrap();
        let c2 = cot_metric(&b.scaled(7.0), &[0.06, 0.08, 0.0]).unwrap();
        assert!((c1 - c2).abs() < 1e-12);
    }

    #[test]
    fn closed_form_threshold_free_terms() {
        let terms = limit_terms(&tp(0.4, 0.8, 0.0, 1.0), LambdaNorm::SqrtTwoPi).unwrap();
        assert!((terms.rho - 1.0).abs() < 1e-15);
        assert!((terms.nu - q_tail(0.4 / 0.8)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_vanishes_for_uninformative_start() {
        let c = closed_form_cot(&tp(1e-9, 1.0, 0.0, 1.0)).unwrap();
        assert!(c.abs() < 1e-8);
        assert!(closed_form_cot(&tp(0.0, 1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn closed_form_reports_threshold_underflow() {
        assert!(matches!(
            closed_form_cot(&tp(0.6, 1.0, 50.0, 1.0)),
            Err(Error::DegenerateThreshold(_))
        ));
    }

    #[test]
    fn closed_form_reference_value() {
        // scipy: α=0.6, σ=1, Γ=0, ū=1 with Λ = (φ(Γ̄₊)+φ(Γ̄₋))/ρ
        let c = closed_form_cot(&tp(0.6, 1.0, 0.0, 1.0)).unwrap();
        assert!((c - 0.751_257_162_177_064).abs() < 1e-12, "{c}");
    }

    #[test]
    fn closed_form_grows_with_unlabeled_data() {
        for alpha in [0.3, 0.5, 0.7] {
            for gamma in [0.0, 0.5, 1.0] {
                for sigma in [0.5, 1.0] {
                    let v: Vec<f64> = [0.5, 1.0, 2.0]
                        .iter()
                        .map(|&u| closed_form_cot(&tp(alpha, sigma, gamma, u)).unwrap())
                        .collect();
                    assert!(v[0] <= v[1] && v[1] <= v[2]);
                }
            }
        }
    }

    #[test]
    fn correlated_initializer_has_exact_correlation() {
        let b = correlated_initializer(0.35, 500, &mut RngStream::new(4, "init")).unwrap();
        assert!((norm(&b.beta) - 1.0).abs() < 1e-12);
        assert!((b.beta[0] - 0.35).abs() < 1e-15);
    }

    #[test]
    fn near_perfect_initializer_gives_large_cot() {
        // almost every pseudo-label is right, so cot ≈ √ū/σ = 10
        let t = tp(0.99, 0.1, 0.0, 1.0);
        let est = monte_carlo_cot(&t, 1000, 10, &RngStream::new(5, "mc")).unwrap();
        let cf = closed_form_cot(&t).unwrap();
        assert!((cf - 10.0).abs() < 1e-6, "{cf}");
        assert!((est.mean - cf).abs() < 0.05 * cf, "{} vs {cf}", est.mean);
    }

    #[test]
    fn monte_carlo_rejects_small_problems() {
        let rng = RngStream::new(0, "mc");
        assert!(monte_carlo_cot(&tp(0.5, 1.0, 0.0, 1.0), 50, 10, &rng).is_err());
        assert!(monte_carlo_cot(&tp(0.5, 1.0, 0.0, 1.0), 200, 5, &rng).is_err());
    }

    #[test]
    fn standard_error_shrinks_with_trials() {
        let t = tp(0.5, 1.0, 0.0, 1.0);
        let few = monte_carlo_cot(&t, 200, 10, &RngStream::new(6, "se")).unwrap();
        let many = monte_carlo_cot(&t, 200, 100, &RngStream::new(6, "se")).unwrap();
        assert!(many.se < few.se);
    }
}
