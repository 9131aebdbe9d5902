//! Client-side selection of which public-pool samples to upload logits for.
//!
//! Every strategy returns exactly `budget` distinct universal indices in
//! ascending order.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample as sample_without_replacement;
use serde::{Deserialize, Serialize};

use crate::data::{largest_remainder, LabeledDataset, UnlabeledDataset};
use crate::error::{Error, Result};
use crate::model::{forward_logits, ModelParams};
use crate::numerics::{argmax, entropy, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Every client uploads the same per-round subset.
    None,
    Random,
    LowEntropy,
    /// Half distribution-matched low-entropy, half random.
    Mixed,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::None,
        Strategy::Random,
        Strategy::LowEntropy,
        Strategy::Mixed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::Random => "random",
            Strategy::LowEntropy => "low_entropy",
            Strategy::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown sampling strategy '{s}', expected one of none, random, low_entropy, mixed"
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub strategy: Strategy,
    /// Logits uploaded per client per round.
    pub budget: usize,
}

impl SamplingConfig {
    pub fn validate(&self, pool_size: usize) -> Result<()> {
        check_budget(self.budget, pool_size)?;
        if self.strategy == Strategy::Mixed && (self.budget < 2 || self.budget % 2 != 0) {
            return Err(Error::invalid(format!(
                "mixed sampling needs an even budget of at least 2, got {}",
                self.budget
            )));
        }
        Ok(())
    }
}

fn check_budget(budget: usize, pool: usize) -> Result<()> {
    if budget > pool {
        return Err(Error::invalid(format!(
            "budget {budget} exceeds public pool of {pool}"
        )));
    }
    Ok(())
}

/// Class proportions of a client's private labels.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalLabelHistogram(Vec<f64>);

impl LocalLabelHistogram {
    pub fn from_dataset(ds: &LabeledDataset) -> Result<Self> {
        if ds.is_empty() {
            return Err(Error::invalid("label histogram of an empty dataset"));
        }
        let n = ds.len() as f64;
        Ok(Self(ds.class_counts().into_iter().map(|c| c as f64 / n).collect()))
    }

    pub fn from_proportions(p: Vec<f64>) -> Result<Self> {
        let total: f64 = p.iter().sum();
        if p.is_empty() || p.iter().any(|v| !(*v >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("histogram proportions must be nonnegative and sum to 1"));
        }
        Ok(Self(p))
    }

    pub fn proportions(&self) -> &[f64] {
        &self.0
    }
}

fn random_subset(pool: &UnlabeledDataset, budget: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut out: Vec<usize> = sample_without_replacement(rng, pool.len(), budget)
        .into_iter()
        .map(|pos| pool.samples()[pos].index)
        .collect();
    out.sort_unstable();
    out
}

/// The round's shared subset; every client calls this with the same stream.
pub fn select_none(pool: &UnlabeledDataset, shared: &RngStream, budget: usize) -> Result<Vec<usize>> {
    check_budget(budget, pool.len())?;
    let mut rng = shared.clone();
    Ok(random_subset(pool, budget, &mut rng))
}

/// Uniform sample without replacement from the client's own stream.
pub fn select_random(pool: &UnlabeledDataset, rng: &mut RngStream, budget: usize) -> Result<Vec<usize>> {
    check_budget(budget, pool.len())?;
    Ok(random_subset(pool, budget, rng))
}

/// Pool scored by the local model: `(universal index, entropy, pseudo-label)`,
/// sorted by ascending entropy with index as tie-break.
fn score_pool(pool: &UnlabeledDataset, params: &ModelParams) -> Result<Vec<(usize, f64, usize)>> {
    let mut scored = pool
        .samples()
        .iter()
        .map(|s| {
            let p = forward_logits(params, &s.x, 1.0)?;
            Ok((s.index, entropy(&p)?, argmax(&p)))
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(scored)
}

/// The `budget` pool samples whose T=1 predictions have the lowest entropy.
pub fn select_low_entropy(pool: &UnlabeledDataset, params: &ModelParams, budget: usize) -> Result<Vec<usize>> {
    check_budget(budget, pool.len())?;
    let scored = score_pool(pool, params)?;
    let mut out: Vec<usize> = scored.iter().take(budget).map(|s| s.0).collect();
    out.sort_unstable();
    Ok(out)
}

/// Both halves of a mixed selection, before merging.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedSelection {
    pub entropy_half: Vec<usize>,
    pub random_half: Vec<usize>,
}

impl MixedSelection {
    pub fn merged(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.entropy_half.iter().chain(&self.random_half).copied().collect();
        out.sort_unstable();
        out
    }
}

/// Mixed active selection.
///
/// 1. Pseudo-label the pool with the local model (argmax at T=1).
/// 2. Fill `budget/2` slots with per-pseudo-class quotas proportional to the
///    local label histogram, taking the lowest-entropy samples of each class;
///    quota a class cannot fill spills over to the global entropy order.
/// 3. Fill the other `budget/2` slots uniformly from the remaining pool.
pub fn select_mixed_halves(
    pool: &UnlabeledDataset,
    params: &ModelParams,
    hist: &LocalLabelHistogram,
    rng: &mut RngStream,
    budget: usize,
) -> Result<MixedSelection> {
    SamplingConfig {
        strategy: Strategy::Mixed,
        budget,
    }
    .validate(pool.len())?;
    let n_classes = params.spec().n_classes;
    if hist.proportions().len() != n_classes {
        return Err(Error::invalid(format!(
            "histogram has {} classes, model has {n_classes}",
            hist.proportions().len()
        )));
    }
    let half = budget / 2;
    let scored = score_pool(pool, params)?;
    let quotas = largest_remainder(hist.proportions(), half);

    let mut taken = vec![0usize; n_classes];
    let mut chosen: HashSet<usize> = HashSet::with_capacity(budget);
    let mut entropy_half = Vec::with_capacity(half);
    for &(idx, _, label) in &scored {
        if taken[label] < quotas[label] {
            taken[label] += 1;
            chosen.insert(idx);
            entropy_half.push(idx);
        }
    }
    for &(idx, _, _) in &scored {
        if entropy_half.len() >= half {
            break;
        }
        if chosen.insert(idx) {
            entropy_half.push(idx);
        }
    }
    entropy_half.sort_unstable();

    let rest: Vec<usize> = pool
        .samples()
        .iter()
        .map(|s| s.index)
        .filter(|i| !chosen.contains(i))
        .collect();
    let mut random_half: Vec<usize> = sample_without_replacement(rng, rest.len(), budget - half)
        .into_iter()
        .map(|pos| rest[pos])
        .collect();
    random_half.sort_unstable();
    Ok(MixedSelection {
        entropy_half,
        random_half,
    })
}

pub fn select_mixed(
    pool: &UnlabeledDataset,
    params: &ModelParams,
    hist: &LocalLabelHistogram,
    rng: &mut RngStream,
    budget: usize,
) -> Result<Vec<usize>> {
    select_mixed_halves(pool, params, hist, rng, budget).map(|m| m.merged())
}
