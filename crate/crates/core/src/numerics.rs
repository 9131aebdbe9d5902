//! Scalar and vector primitives shared by every other module.
//!
//! Everything here is `f64`. Vectors are plain slices / `Vec<f64>`; the only
//! owned container with extra structure is [`Mat`], a row-major dense matrix.

use std::f64::consts::PI;
use std::fmt;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Row-major dense matrix with fixed dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `out = self · x`.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.cols || out.len() != self.rows {
            return Err(Error::invalid(format!(
                "matvec shape mismatch: {}x{} · {} -> {}",
                self.rows,
                self.cols,
                x.len(),
                out.len()
            )));
        }
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = dot(row, x);
        }
        Ok(())
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out)?;
        Ok(out)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a * x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Index of the first maximal entry.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Tempered softmax `exp(z_i / t) / Σ_j exp(z_j / t)`, computed with max subtraction.
pub fn softmax(z: &[f64], t: f64) -> Result<Vec<f64>> {
    let mut out = z.to_vec();
    softmax_in_place(&mut out, t)?;
    Ok(out)
}

pub fn softmax_in_place(z: &mut [f64], t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("temperature must be positive, got {t}")));
    }
    if z.is_empty() {
        return Err(Error::invalid("softmax of an empty vector"));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("softmax input has a non-finite score"));
    }
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = ((*v - max) / t).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
    Ok(())
}

/// Tolerance on `Σ p = 1` accepted by [`entropy`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Shannon entropy in nats. `0 · ln 0` is taken as 0.
pub fn entropy(p: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::invalid("entropy of an empty distribution"));
    }
    if p.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::invalid("entropy input has a negative or non-finite entry"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::invalid(format!(
            "entropy input sums to {total}, not 1"
        )));
    }
    let h: f64 = p
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum();
    Ok(h.clamp(0.0, (p.len() as f64).ln()))
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Upper tail of the standard normal, `Q(x) = 1 - Φ(x)`.
///
/// Power series of `Φ(x) - 1/2` for `|x| ≤ 3`, Laplace continued fraction for
/// the Mills ratio beyond. Relative error is below 1e-12 on `[-8, 8]`.
pub fn q_tail(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 1.0 - q_tail(-x);
    }
    if x <= 3.0 {
        // Φ(x) - 1/2 = φ(x) Σ x^(2n+1) / (2n+1)!!
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 0u32;
        while term > 1e-18 * sum {
            n += 1;
            term *= x2 / f64::from(2 * n + 1);
            sum += term;
        }
        0.5 - normal_pdf(x) * sum
    } else if x > 40.0 {
        0.0
    } else {
        // Q(x) = φ(x) / (x + 1/(x + 2/(x + 3/(x + ...))))
        let mut t = x;
        for k in (1..=400).rev() {
            t = x + f64::from(k) / t;
        }
        normal_pdf(x) / t
    }
}

/// Deterministic labelled random stream.
///
/// The ChaCha8 key is derived by hashing `(seed, label)`, so a stream depends
/// only on those two values. [`RngStream::split`] derives a child by extending
/// the label and never consumes draws from the parent.
#[derive(Clone)]
pub struct RngStream {
    seed: u64,
    label: String,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        let label = label.into();
        let mut hasher = Sha256::new();
        hasher.update(b"fedsim-rng-v1\0");
        hasher.update(seed.to_le_bytes());
        hasher.update(label.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        Self {
            seed,
            label,
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn split(&self, child: impl fmt::Display) -> Self {
        Self::new(self.seed, format!("{}/{}", self.label, child))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for RngStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RngStream")
            .field("seed", &self.seed)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn softmax_of_equal_scores_is_uniform() {
        let p = softmax(&[0.0, 0.0, 0.0], 1.0).unwrap();
        for v in p {
            assert!(close(v, 1.0 / 3.0, 1e-15));
        }
    }

    #[test]
    fn softmax_reference_values() {
        // exp(1.0), exp(0.6), exp(0.4) normalised, evaluated independently in Python.
        let p = softmax(&[1.0, 0.6, 0.4], 1.0).unwrap();
        let expected = [0.450_626_705_955_689_7, 0.302_064_114_281_106_4, 0.247_309_179_763_203_88];
        for (a, b) in p.iter().zip(expected) {
            assert!(close(*a, b, 1e-14), "{a} vs {b}");
        }
    }

    #[test]
    fn softmax_rejects_bad_temperature() {
        assert!(softmax(&[1.0, 2.0], 0.0).is_err());
        assert!(softmax(&[1.0, 2.0], -1.0).is_err());
    }

    #[test]
    fn softmax_survives_huge_scores() {
        let p = softmax(&[1e300, 0.0, -1e300], 1.0).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn cold_softmax_concentrates() {
        let p = softmax(&[0.3, 0.1, 0.2], 1e-4).unwrap();
        assert!(p[0] >= 1.0 - 1e-6);
    }

    #[test]
    fn entropy_edge_cases() {
        assert_eq!(entropy(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(close(entropy(&[0.25; 4]).unwrap(), 4f64.ln(), 1e-15));
        assert!(close(entropy(&[0.5, 0.5, 0.0, 0.0]).unwrap(), 2f64.ln(), 1e-15));
        assert!(entropy(&[0.5, 0.4]).is_err());
        assert!(entropy(&[1.5, -0.5]).is_err());
    }

    #[test]
    fn q_tail_reference_points() {
        assert_eq!(q_tail(0.0), 0.5);
        // Φ⁻¹(0.975)
        assert!(close(q_tail(1.959_963_984_540_054), 0.025, 1e-14));
        assert!(close(q_tail(1.959964), 0.025, 1e-8));
        // scipy.stats.norm.sf
        let reference = [
            (1.0, 0.158_655_253_931_457_05),
            (3.0, 0.001_349_898_031_630_093_3),
            (5.0, 2.866_515_718_791_933e-7),
            (8.0, 6.220_960_574_271_74e-16),
        ];
        for (x, q) in reference {
            let rel = (q_tail(x) - q).abs() / q;
            assert!(rel < 1e-10, "Q({x}) rel err {rel}");
        }
    }

    #[test]
    fn q_tail_matches_trapezoid_integration() {
        // Q(x) = ∫_x^∞ φ, integrate over [x, 12] on a fine grid (tail beyond 12 < 1e-32).
        let integrate = |a: f64| {
            let b = 12.0;
            let n = 200_000;
            let h = (b - a) / n as f64;
            let mut s = 0.5 * (normal_pdf(a) + normal_pdf(b));
            for i in 1..n {
                s += normal_pdf(a + i as f64 * h);
            }
            s * h
        };
        let mut x = -6.0;
        while x <= 6.0 {
            let q = integrate(x);
            assert!((q_tail(x) - q).abs() < 1e-8, "x={x}: {} vs {q}", q_tail(x));
            x += 0.25;
        }
    }

    #[test]
    fn q_tail_is_monotone_near_branch_switch() {
        let mut prev = q_tail(2.9);
        let mut x = 2.9;
        while x < 3.1 {
            x += 1e-3;
            let q = q_tail(x);
            assert!(q < prev);
            prev = q;
        }
    }

    #[test]
    fn rng_streams_are_reproducible_and_labelled() {
        let mut a = RngStream::new(7, "clients");
        let mut b = RngStream::new(7, "clients");
        let mut c = RngStream::new(7, "server");
        let xs: Vec<u64> = (0..64).map(|_| a.random()).collect();
        let ys: Vec<u64> = (0..64).map(|_| b.random()).collect();
        let zs: Vec<u64> = (0..64).map(|_| c.random()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }

    #[test]
    fn split_does_not_perturb_parent() {
        let mut a = RngStream::new(1, "root");
        let mut b = RngStream::new(1, "root");
        let _child = a.split("x");
        assert_eq!(a.next_u64(), b.next_u64());
        assert_eq!(a.split("x").label(), "root/x");
    }

    #[test]
    fn matvec_checks_shapes() {
        let m = Mat::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(m.matvec(&[1.0, 0.0, 1.0]).unwrap(), vec![4.0, 10.0]);
        assert!(m.matvec(&[1.0, 0.0]).is_err());
        assert!(Mat::from_vec(2, 2, vec![0.0; 3]).is_err());
    }

    proptest! {
        #[test]
        fn softmax_normalized_and_shift_invariant(
            z in prop::collection::vec(-50.0f64..50.0, 1..12),
            shift in -100.0f64..100.0,
            t in 0.05f64..20.0,
        ) {
            let p = softmax(&z, t).unwrap();
            let total: f64 = p.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
            let shifted: Vec<f64> = z.iter().map(|v| v + shift).collect();
            let q = softmax(&shifted, t).unwrap();
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn entropy_bounded_and_permutation_invariant(
            w in prop::collection::vec(0.0f64..1.0, 2..10),
            rot in 0usize..10,
        ) {
            let total: f64 = w.iter().sum();
            prop_assume!(total > 1e-6);
            let p: Vec<f64> = w.iter().map(|v| v / total).collect();
            let h = entropy(&p).unwrap();
            prop_assert!(h >= 0.0 && h <= (p.len() as f64).ln() + 1e-12);
            let mut r = p.clone();
            r.rotate_left(rot % p.len());
            prop_assert!((entropy(&r).unwrap() - h).abs() < 1e-12);
        }

        #[test]
        fn q_tail_symmetry(x in -8.0f64..8.0) {
            prop_assert!((q_tail(x) + q_tail(-x) - 1.0).abs() < 1e-15);
        }
    }
}
