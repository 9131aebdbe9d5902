//! Synthetic datasets, the private/public split and Dirichlet client partitioning.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{norm, RngStream};

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    /// Global, universal sample index.
    pub index: usize,
    pub x: Vec<f64>,
    pub y: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    dim: usize,
    n_classes: usize,
    samples: Vec<Sample>,
}

impl LabeledDataset {
    pub fn new(dim: usize, n_classes: usize, samples: Vec<Sample>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(samples.len());
        for s in &samples {
            if s.x.len() != dim {
                return Err(Error::invalid(format!(
                    "sample {} has dimension {}, expected {dim}",
                    s.index,
                    s.x.len()
                )));
            }
            if s.y >= n_classes {
                return Err(Error::invalid(format!(
                    "sample {} has label {} outside 0..{n_classes}",
                    s.index, s.y
                )));
            }
            if !seen.insert(s.index) {
                return Err(Error::invalid(format!("duplicate sample index {}", s.index)));
            }
        }
        Ok(Self {
            dim,
            n_classes,
            samples,
        })
    }

    pub fn empty(dim: usize, n_classes: usize) -> Self {
        Self {
            dim,
            n_classes,
            samples: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn indices(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.index).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for s in &self.samples {
            counts[s.y] += 1;
        }
        counts
    }

    /// Inputs without labels, indices preserved.
    pub fn to_unlabeled(&self) -> UnlabeledDataset {
        UnlabeledDataset {
            dim: self.dim,
            samples: self
                .samples
                .iter()
                .map(|s| PublicSample {
                    index: s.index,
                    x: s.x.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PublicSample {
    pub index: usize,
    pub x: Vec<f64>,
}

/// Unlabeled pool addressed by universal sample index.
#[derive(Clone, Debug, PartialEq)]
pub struct UnlabeledDataset {
    dim: usize,
    samples: Vec<PublicSample>,
}

impl UnlabeledDataset {
    pub fn new(dim: usize, samples: Vec<PublicSample>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(samples.len());
        for s in &samples {
            if s.x.len() != dim {
                return Err(Error::invalid(format!(
                    "public sample {} has dimension {}, expected {dim}",
                    s.index,
                    s.x.len()
                )));
            }
            if !seen.insert(s.index) {
                return Err(Error::invalid(format!("duplicate public index {}", s.index)));
            }
        }
        Ok(Self { dim, samples })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[PublicSample] {
        &self.samples
    }

    pub fn indices(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.index).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub n_clients: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl PartitionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_clients == 0 {
            return Err(Error::invalid("partition needs at least one client"));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::invalid(format!(
                "Dirichlet concentration must be positive, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Binary Gaussian mixture: `y` Rademacher, `x ~ N(y·u, σ²I)`.
///
/// Labels are stored as classes `{0, 1}` for `y ∈ {-1, +1}`.
pub fn sample_gmm(u: &[f64], sigma: f64, n: usize, rng: &mut RngStream) -> Result<LabeledDataset> {
    if (norm(u) - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("GMM mean must be a unit vector, |u| = {}", norm(u))));
    }
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("GMM sigma must be positive, got {sigma}")));
    }
    let samples = (0..n)
        .map(|index| {
            let positive: bool = rng.random();
            let sign = if positive { 1.0 } else { -1.0 };
            let x = u
                .iter()
                .map(|&ui| {
                    let g: f64 = rng.sample(StandardNormal);
                    sign * ui + sigma * g
                })
                .collect();
            Sample {
                index,
                x,
                y: usize::from(positive),
            }
        })
        .collect();
    LabeledDataset::new(u.len(), 2, samples)
}

/// Class means on the unit sphere; samples are isotropic Gaussians around them.
#[derive(Clone, Debug, PartialEq)]
pub struct BlobModel {
    pub means: Vec<Vec<f64>>,
}

impl BlobModel {
    pub fn random(n_classes: usize, dim: usize, rng: &mut RngStream) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::invalid(format!("blobs need at least 2 classes, got {n_classes}")));
        }
        if dim == 0 {
            return Err(Error::invalid("blob dimension must be positive"));
        }
        let means = (0..n_classes)
            .map(|_| loop {
                let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                let r = norm(&v);
                if r > 1e-12 {
                    break v.into_iter().map(|c| c / r).collect();
                }
            })
            .collect();
        Ok(Self { means })
    }

    pub fn n_classes(&self) -> usize {
        self.means.len()
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    /// `n` samples with labels cycling `0, 1, …, C-1` so every class gets
    /// `⌊n/C⌋` or `⌈n/C⌉` samples. Indices are `first_index..first_index + n`.
    pub fn sample(
        &self,
        n: usize,
        spread: f64,
        first_index: usize,
        rng: &mut RngStream,
    ) -> Result<LabeledDataset> {
        if !(spread > 0.0) {
            return Err(Error::invalid(format!("blob spread must be positive, got {spread}")));
        }
        let k = self.n_classes();
        let samples = (0..n)
            .map(|i| {
                let y = i % k;
                let x = self.means[y]
                    .iter()
                    .map(|&m| m + spread * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                Sample {
                    index: first_index + i,
                    x,
                    y,
                }
            })
            .collect();
        LabeledDataset::new(self.dim(), k, samples)
    }
}

/// Balanced multiclass Gaussian blobs.
pub fn make_blobs(
    n_classes: usize,
    dim: usize,
    spread: f64,
    n: usize,
    rng: &mut RngStream,
) -> Result<LabeledDataset> {
    if n < n_classes {
        return Err(Error::invalid(format!(
            "need at least one sample per class: n={n} < {n_classes} classes"
        )));
    }
    let model = BlobModel::random(n_classes, dim, rng)?;
    model.sample(n, spread, 0, rng)
}

/// Random disjoint split into a labeled private part of `n_private` samples and
/// an unlabeled public pool holding the rest. Both parts keep index order.
pub fn split_public_private(
    ds: &LabeledDataset,
    n_private: usize,
    rng: &mut RngStream,
) -> Result<(LabeledDataset, UnlabeledDataset)> {
    if n_private >= ds.len() {
        return Err(Error::invalid(format!(
            "private size {n_private} leaves no public samples out of {}",
            ds.len()
        )));
    }
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(rng);
    let mut private_pos = order[..n_private].to_vec();
    let mut public_pos = order[n_private..].to_vec();
    private_pos.sort_unstable();
    public_pos.sort_unstable();
    let private = LabeledDataset {
        dim: ds.dim,
        n_classes: ds.n_classes,
        samples: private_pos.iter().map(|&i| ds.samples[i].clone()).collect(),
    };
    let public = UnlabeledDataset {
        dim: ds.dim,
        samples: public_pos
            .iter()
            .map(|&i| PublicSample {
                index: ds.samples[i].index,
                x: ds.samples[i].x.clone(),
            })
            .collect(),
    };
    Ok((private, public))
}

/// Round `weights · total` to integers summing to `total`.
///
/// Floors first, then hands the leftover units to the largest fractional
/// parts; ties go to the lower position.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() {
        return Vec::new();
    }
    if !(sum > 0.0) {
        let mut out = vec![0; weights.len()];
        out[0] = total;
        return out;
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

fn dirichlet(alpha: f64, k: usize, rng: &mut RngStream) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("alpha validated positive");
    let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 && total.is_finite() {
        draws.into_iter().map(|g| g / total).collect()
    } else {
        // every draw underflowed: all mass to one uniformly chosen component
        let mut p = vec![0.0; k];
        p[rng.random_range(0..k)] = 1.0;
        p
    }
}

/// Class-conditional Dirichlet split of `ds` across `spec.n_clients` clients.
///
/// For each class a proportion vector is drawn from `Dir(α·1)`, the class's
/// samples are shuffled, and consecutive runs are dealt to clients in
/// proportion (largest-remainder rounding). Every sample lands in exactly one
/// shard; shards keep ascending index order and may be empty.
pub fn dirichlet_partition(ds: &LabeledDataset, spec: &PartitionSpec) -> Result<Vec<LabeledDataset>> {
    spec.validate()?;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.n_classes];
    for (pos, s) in ds.samples.iter().enumerate() {
        by_class[s.y].push(pos);
    }
    if let Some(c) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::invalid(format!("class {c} has no samples to partition")));
    }
    let mut rng = RngStream::new(spec.seed, "dirichlet_partition");
    let mut shards: Vec<Vec<usize>> = vec![Vec::new(); spec.n_clients];
    for members in &mut by_class {
        let props = dirichlet(spec.alpha, spec.n_clients, &mut rng);
        let counts = largest_remainder(&props, members.len());
        members.shuffle(&mut rng);
        let mut cursor = 0;
        for (shard, count) in shards.iter_mut().zip(counts) {
            shard.extend_from_slice(&members[cursor..cursor + count]);
            cursor += count;
        }
    }
    Ok(shards
        .into_iter()
        .map(|mut positions| {
            positions.sort_unstable();
            LabeledDataset {
                dim: ds.dim,
                n_classes: ds.n_classes,
                samples: positions.iter().map(|&p| ds.samples[p].clone()).collect(),
            }
        })
        .collect())
}

const TABLE_MAGIC: &str = "# fedsim-dataset v1";

/// Write a labeled dataset as a text table.
///
/// Format: a header line `# fedsim-dataset v1 dim=<d> classes=<C> rows=<n>`
/// followed by one comma-separated row per sample: `index,label,x_0,…,x_{d-1}`.
/// Floats use Rust's shortest round-trip representation.
pub fn write_table(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let mut out = format!(
        "{TABLE_MAGIC} dim={} classes={} rows={}\n",
        ds.dim,
        ds.n_classes,
        ds.len()
    );
    for s in &ds.samples {
        write!(out, "{},{}", s.index, s.y).unwrap();
        for v in &s.x {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_table(path: &Path) -> Result<LabeledDataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let rest = header
        .strip_prefix(TABLE_MAGIC)
        .ok_or_else(|| bad(format!("missing '{TABLE_MAGIC}' header")))?;
    let mut dim = None;
    let mut classes = None;
    let mut rows = None;
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| bad(format!("bad header field '{field}'")))?;
        let value: usize = value
            .parse()
            .map_err(|_| bad(format!("bad header value '{field}'")))?;
        match key {
            "dim" => dim = Some(value),
            "classes" => classes = Some(value),
            "rows" => rows = Some(value),
            _ => return Err(bad(format!("unknown header key '{key}'"))),
        }
    }
    let (dim, classes, rows) = match (dim, classes, rows) {
        (Some(d), Some(c), Some(r)) => (d, c, r),
        _ => return Err(bad("header must carry dim, classes and rows".into())),
    };
    let mut samples = Vec::with_capacity(rows);
    for (lineno, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let mut next_usize = |what: &str| -> Result<usize> {
            fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| bad(format!("line {}: bad {what}", lineno + 2)))
        };
        let index = next_usize("index")?;
        let y = next_usize("label")?;
        let x: Vec<f64> = fields
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(format!("line {}: bad float", lineno + 2)))?;
        samples.push(Sample { index, x, y });
    }
    if samples.len() != rows {
        return Err(bad(format!("header says {rows} rows, found {}", samples.len())));
    }
    LabeledDataset::new(dim, classes, samples).map_err(|e| bad(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(p: usize) -> Vec<f64> {
        let mut u = vec![0.0; p];
        u[0] = 1.0;
        u
    }

    #[test]
    fn gmm_rejects_non_unit_mean() {
        let mut rng = RngStream::new(0, "gmm");
        assert!(sample_gmm(&[1.0, 1.0], 1.0, 10, &mut rng).is_err());
    }

    #[test]
    fn gmm_degenerate_noise_hits_the_means() {
        let mut rng = RngStream::new(0, "gmm");
        let u = [0.6, 0.8, 0.0];
        let ds = sample_gmm(&u, 1e-6, 200, &mut rng).unwrap();
        for s in ds.samples() {
            let sign = if s.y == 1 { 1.0 } else { -1.0 };
            for (x, m) in s.x.iter().zip(u) {
                assert!((x - sign * m).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn gmm_label_balance_and_signal() {
        let p = 10;
        let u: Vec<f64> = (0..p).map(|_| 1.0 / (p as f64).sqrt()).collect();
        let mut rng = RngStream::new(3, "gmm");
        let ds = sample_gmm(&u, 1.0, 10_000, &mut rng).unwrap();
        let counts = ds.class_counts();
        for c in counts {
            assert!((c as f64 / 10_000.0 - 0.5).abs() < 0.02);
        }
        // independent accumulation of y·x
        let mut acc = vec![0.0; p];
        for s in ds.samples() {
            let y = if s.y == 1 { 1.0 } else { -1.0 };
            for (a, x) in acc.iter_mut().zip(&s.x) {
                *a += y * x;
            }
        }
        for (a, ui) in acc.iter().zip(&u) {
            assert!((a / 10_000.0 - ui).abs() < 0.05);
        }
    }

    #[test]
    fn gmm_per_coordinate_variance() {
        let sigma = 0.7;
        let mut rng = RngStream::new(11, "gmm");
        let ds = sample_gmm(&unit(5), sigma, 20_000, &mut rng).unwrap();
        for j in 0..5 {
            // variance of x_j - y·u_j around zero
            let var: f64 = ds
                .samples()
                .iter()
                .map(|s| {
                    let y = if s.y == 1 { 1.0 } else { -1.0 };
                    let r = s.x[j] - y * unit(5)[j];
                    r * r
                })
                .sum::<f64>()
                / 20_000.0;
            assert!((var / (sigma * sigma) - 1.0).abs() < 0.1, "coord {j}: {var}");
        }
    }

    #[test]
    fn generators_are_reproducible() {
        let a = make_blobs(3, 4, 0.5, 30, &mut RngStream::new(5, "b")).unwrap();
        let b = make_blobs(3, 4, 0.5, 30, &mut RngStream::new(5, "b")).unwrap();
        assert_eq!(a, b);
        let g1 = sample_gmm(&unit(3), 1.0, 30, &mut RngStream::new(5, "g")).unwrap();
        let g2 = sample_gmm(&unit(3), 1.0, 30, &mut RngStream::new(5, "g")).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn blobs_are_balanced() {
        let ds = make_blobs(4, 8, 1.0, 4000, &mut RngStream::new(1, "b")).unwrap();
        assert_eq!(ds.class_counts(), vec![1000; 4]);
        let ds = make_blobs(3, 8, 1.0, 10, &mut RngStream::new(1, "b")).unwrap();
        assert_eq!(ds.class_counts(), vec![4, 3, 3]);
        assert!(make_blobs(4, 8, 1.0, 3, &mut RngStream::new(1, "b")).is_err());
    }

    #[test]
    fn separable_blobs_nearest_mean_is_perfect() {
        let mut rng = RngStream::new(9, "b");
        let model = BlobModel::random(5, 6, &mut rng).unwrap();
        let ds = model.sample(500, 1e-6, 0, &mut rng).unwrap();
        for s in ds.samples() {
            let nearest = (0..5)
                .min_by(|&a, &b| {
                    let da: f64 = s.x.iter().zip(&model.means[a]).map(|(x, m)| (x - m).powi(2)).sum();
                    let db: f64 = s.x.iter().zip(&model.means[b]).map(|(x, m)| (x - m).powi(2)).sum();
                    da.total_cmp(&db)
                })
                .unwrap();
            assert_eq!(nearest, s.y);
        }
    }

    #[test]
    fn public_private_split_boundaries() {
        let ds = make_blobs(2, 3, 1.0, 40_000, &mut RngStream::new(2, "b")).unwrap();
        let (private, public) = split_public_private(&ds, 20_000, &mut RngStream::new(2, "s")).unwrap();
        assert_eq!((private.len(), public.len()), (20_000, 20_000));
        let mut all: Vec<usize> = private.indices();
        all.extend(public.indices());
        all.sort_unstable();
        assert_eq!(all, ds.indices());

        let small = make_blobs(2, 3, 1.0, 10, &mut RngStream::new(2, "b")).unwrap();
        let (_, public) = split_public_private(&small, 9, &mut RngStream::new(0, "s")).unwrap();
        assert_eq!(public.len(), 1);
        assert!(split_public_private(&small, 10, &mut RngStream::new(0, "s")).is_err());
    }

    #[test]
    fn largest_remainder_sums_exactly() {
        assert_eq!(largest_remainder(&[0.5, 0.5], 3), vec![2, 1]);
        assert_eq!(largest_remainder(&[0.2, 0.3, 0.5], 10), vec![2, 3, 5]);
        assert_eq!(largest_remainder(&[1.0, 1.0, 1.0], 2), vec![1, 1, 0]);
        assert_eq!(largest_remainder(&[0.0, 0.0], 4), vec![4, 0]);
    }

    fn tv(a: &[f64], b: &[f64]) -> f64 {
        0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
    }

    #[test]
    fn high_alpha_partition_is_near_iid() {
        let ds = make_blobs(4, 4, 1.0, 8000, &mut RngStream::new(4, "b")).unwrap();
        let global: Vec<f64> = ds.class_counts().iter().map(|&c| c as f64 / 8000.0).collect();
        let spec = PartitionSpec {
            n_clients: 20,
            alpha: 100.0,
            seed: 4,
        };
        for shard in dirichlet_partition(&ds, &spec).unwrap() {
            let hist: Vec<f64> = shard
                .class_counts()
                .iter()
                .map(|&c| c as f64 / shard.len() as f64)
                .collect();
            assert!(tv(&hist, &global) < 0.1);
        }
    }

    #[test]
    fn low_alpha_partition_is_skewed() {
        // Monte Carlo over 100 draws; observed mean top-2 share at α=0.1 is ≈0.866.
        let ds = make_blobs(10, 2, 1.0, 2000, &mut RngStream::new(4, "b")).unwrap();
        let mut total = 0.0;
        let mut count = 0;
        for seed in 0..100 {
            let spec = PartitionSpec {
                n_clients: 20,
                alpha: 0.1,
                seed,
            };
            for shard in dirichlet_partition(&ds, &spec).unwrap() {
                if shard.is_empty() {
                    continue;
                }
                let mut counts = shard.class_counts();
                counts.sort_unstable_by(|a, b| b.cmp(a));
                total += (counts[0] + counts[1]) as f64 / shard.len() as f64;
                count += 1;
            }
        }
        let mean = total / count as f64;
        assert!(mean > 0.6);
    }

    #[test]
    fn partition_rejects_missing_class() {
        let samples = vec![Sample {
            index: 0,
            x: vec![0.0],
            y: 0,
        }];
        let ds = LabeledDataset::new(1, 2, samples).unwrap();
        let spec = PartitionSpec {
            n_clients: 2,
            alpha: 1.0,
            seed: 0,
        };
        assert!(dirichlet_partition(&ds, &spec).is_err());
        let bad = PartitionSpec { alpha: 0.0, ..spec };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn table_round_trip() {
        let ds = make_blobs(3, 5, 0.3, 17, &mut RngStream::new(8, "b")).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        write_table(&ds, &path).unwrap();
        assert_eq!(read_table(&path).unwrap(), ds);
        fs::write(&path, "index,label\n").unwrap();
        assert!(read_table(&path).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn partition_covers_every_sample_once(
            alpha in 0.05f64..200.0,
            n_clients in 1usize..25,
            seed in any::<u64>(),
        ) {
            let ds = make_blobs(4, 2, 1.0, 200, &mut RngStream::new(1, "b")).unwrap();
            let spec = PartitionSpec { n_clients, alpha, seed };
            let shards = dirichlet_partition(&ds, &spec).unwrap();
            prop_assert_eq!(shards.len(), n_clients);
            let mut all: Vec<usize> = shards.iter().flat_map(|s| s.indices()).collect();
            all.sort_unstable();
            prop_assert_eq!(all, ds.indices());
        }
    }
}
