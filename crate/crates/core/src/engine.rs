//! Experiment orchestration: the federated-distillation round loop, the
//! FedAvg baseline, client selection, evaluation and run directories.
//!
//! Every random draw comes from a stream labelled by `(round, client,
//! purpose)` under the run seed, so results do not depend on the order in
//! which clients are processed.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample as sample_without_replacement;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{dirichlet_partition, split_public_private, BlobModel, LabeledDataset, PartitionSpec, UnlabeledDataset};
use crate::error::{Error, Result};
use crate::model::{init_params, Architecture, ModelParams, ModelSpec, SgdConfig, TrainSet};
use crate::numerics::RngStream;
use crate::protocol::{account, aggregate_average, era_sharpen, CommEntry, CommLedger, LogitReport};
use crate::sampling::{
    select_low_entropy, select_mixed, select_none, select_random, LocalLabelHistogram, SamplingConfig, Strategy,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Fd,
    Fedavg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Average,
    Era,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub n_classes: usize,
    pub dim: usize,
    pub spread: f64,
    pub n_private: usize,
    pub n_public: usize,
    pub n_test: usize,
    /// Dirichlet concentration of the client partition.
    pub alpha: f64,
    /// When set, the public pool is drawn around the same class means with
    /// this (typically larger) spread instead of sharing the private distribution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub public_spread: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelsConfig {
    /// One entry for all clients, or one per client.
    pub clients: Vec<Architecture>,
    pub server: Architecture,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub local_epochs: usize,
    pub local_lr: f64,
    pub local_batch: usize,
    pub distill_epochs: usize,
    pub distill_lr: f64,
    pub distill_batch: usize,
    /// Softmax temperature for uploaded logits and for the distillation student.
    pub upload_temperature: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregationConfig {
    pub method: Aggregation,
    pub era_temperature: f64,
    #[serde(default = "one")]
    pub min_contributors: usize,
}

fn one() -> usize {
    1
}

/// Full declarative description of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub rounds: usize,
    pub n_clients: usize,
    pub clients_per_round: usize,
    pub data: DataConfig,
    pub models: ModelsConfig,
    pub training: TrainingConfig,
    pub aggregation: AggregationConfig,
    pub sampling: SamplingConfig,
}

impl Default for ExperimentConfig {
    /// Desk-scale setup: 20 clients, 8 per round, 4-class 16-d blobs.
    fn default() -> Self {
        Self {
            seed: 0,
            algorithm: Algorithm::Fd,
            rounds: 30,
            n_clients: 20,
            clients_per_round: 8,
            data: DataConfig {
                n_classes: 4,
                dim: 16,
                spread: 0.9,
                n_private: 4000,
                n_public: 2000,
                n_test: 2000,
                alpha: 100.0,
                public_spread: None,
            },
            models: ModelsConfig {
                clients: vec![Architecture::Linear],
                server: Architecture::Linear,
            },
            training: TrainingConfig {
                local_epochs: 2,
                local_lr: 0.1,
                local_batch: 32,
                distill_epochs: 5,
                distill_lr: 0.1,
                distill_batch: 64,
                upload_temperature: 1.0,
            },
            aggregation: AggregationConfig {
                method: Aggregation::Average,
                era_temperature: 0.5,
                min_contributors: 1,
            },
            sampling: SamplingConfig {
                strategy: Strategy::None,
                budget: 1000,
            },
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Canonical serialized form.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn client_spec(&self, client: usize) -> ModelSpec {
        let arch = if self.models.clients.len() == 1 {
            self.models.clients[0]
        } else {
            self.models.clients[client]
        };
        self.spec_for(arch)
    }

    pub fn server_spec(&self) -> ModelSpec {
        self.spec_for(self.models.server)
    }

    fn spec_for(&self, arch: Architecture) -> ModelSpec {
        ModelSpec {
            arch,
            input_dim: self.data.dim,
            n_classes: self.data.n_classes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        if self.n_clients == 0 {
            return cfg_err("n_clients must be at least 1".into());
        }
        if self.clients_per_round == 0 || self.clients_per_round > self.n_clients {
            return cfg_err(format!(
                "clients_per_round must lie in 1..={}, got {}",
                self.n_clients, self.clients_per_round
            ));
        }
        let n_archs = self.models.clients.len();
        if n_archs != 1 && n_archs != self.n_clients {
            return cfg_err(format!(
                "models.clients must list 1 or {} architectures, got {n_archs}",
                self.n_clients
            ));
        }
        for c in 0..self.n_clients {
            self.client_spec(c).validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        self.server_spec().validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.algorithm == Algorithm::Fedavg {
            let server = self.server_spec();
            if (0..self.n_clients).any(|c| self.client_spec(c) != server) {
                return cfg_err("fedavg requires every client and the server to share one model spec".into());
            }
        }
        let d = &self.data;
        if d.n_private < d.n_classes {
            return cfg_err(format!("data.n_private must be at least n_classes ({})", d.n_classes));
        }
        if d.n_public == 0 || d.n_test == 0 {
            return cfg_err("data.n_public and data.n_test must be positive".into());
        }
        if !(d.spread > 0.0) || d.public_spread.is_some_and(|s| !(s > 0.0)) {
            return cfg_err("blob spreads must be positive".into());
        }
        PartitionSpec {
            n_clients: self.n_clients,
            alpha: d.alpha,
            seed: self.seed,
        }
        .validate()
        .map_err(|e| Error::Config(e.to_string()))?;
        let t = &self.training;
        for (name, v) in [
            ("training.local_lr", t.local_lr),
            ("training.distill_lr", t.distill_lr),
            ("training.upload_temperature", t.upload_temperature),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return cfg_err(format!("{name} must be positive, got {v}"));
            }
        }
        if t.local_batch == 0 || t.distill_batch == 0 {
            return cfg_err("batch sizes must be positive".into());
        }
        let a = &self.aggregation;
        if !(a.era_temperature > 0.0 && a.era_temperature <= 1.0) {
            return cfg_err(format!(
                "aggregation.era_temperature must lie in (0, 1], got {}",
                a.era_temperature
            ));
        }
        if a.min_contributors == 0 {
            return cfg_err("aggregation.min_contributors must be at least 1".into());
        }
        if self.algorithm == Algorithm::Fd {
            self.sampling
                .validate(d.n_public)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }
}

/// Datasets of one run: per-client private shards, the public pool and a test set.
#[derive(Clone, Debug)]
pub struct Federation {
    pub shards: Vec<LabeledDataset>,
    pub public: UnlabeledDataset,
    pub test: LabeledDataset,
}

impl Federation {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let d = &cfg.data;
        let root = RngStream::new(cfg.seed, "data");
        let blobs = BlobModel::random(d.n_classes, d.dim, &mut root.split("means"))?;
        let (private, public) = match d.public_spread {
            None => {
                let all = blobs.sample(d.n_private + d.n_public, d.spread, 0, &mut root.split("pool"))?;
                split_public_private(&all, d.n_private, &mut root.split("split"))?
            }
            Some(wide) => {
                let private = blobs.sample(d.n_private, d.spread, 0, &mut root.split("pool"))?;
                let public = blobs
                    .sample(d.n_public, wide, d.n_private, &mut root.split("public"))?
                    .to_unlabeled();
                (private, public)
            }
        };
        let test = blobs.sample(d.n_test, d.spread, d.n_private + d.n_public, &mut root.split("test"))?;
        let shards = dirichlet_partition(
            &private,
            &PartitionSpec {
                n_clients: cfg.n_clients,
                alpha: d.alpha,
                seed: cfg.seed,
            },
        )?;
        Ok(Self { shards, public, test })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    /// 1-based round number.
    pub round: usize,
    pub server_acc: f64,
    pub mean_client_acc: f64,
    pub uplink_scalars: usize,
    pub downlink_scalars: usize,
    pub teacher_mean_entropy: f64,
    pub union_size: usize,
}

pub const METRICS_HEADER: [&str; 7] = [
    "round",
    "server_acc",
    "mean_client_acc",
    "uplink_scalars",
    "downlink_scalars",
    "teacher_mean_entropy",
    "union_size",
];

#[derive(Clone, Debug)]
pub struct RunResult {
    pub metrics: Vec<RoundMetrics>,
    pub ledger: CommLedger,
    pub server: ModelParams,
}

impl RunResult {
    pub fn final_accuracy(&self) -> Option<f64> {
        self.metrics.last().map(|m| m.server_acc)
    }
}

/// Uniformly choose `k` of `n` clients without replacement; sorted ids.
pub fn select_clients(n_clients: usize, k: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut ids = sample_without_replacement(rng, n_clients, k.min(n_clients)).into_vec();
    ids.sort_unstable();
    ids
}

/// Fraction of `test` whose argmax prediction equals the label.
pub fn evaluate(params: &ModelParams, test: &LabeledDataset) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::invalid("evaluation on an empty test set"));
    }
    let mut correct = 0usize;
    for s in test.samples() {
        if params.predict(&s.x)? == s.y {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.len() as f64)
}

/// Stream for one `(round, client, purpose)` triple of a run.
pub fn client_stream(seed: u64, round: usize, client: usize, purpose: &str) -> RngStream {
    RngStream::new(seed, format!("run/round/{round}/client/{client}/{purpose}"))
}

fn round_stream(seed: u64, round: usize, purpose: &str) -> RngStream {
    RngStream::new(seed, format!("run/round/{round}/{purpose}"))
}

fn local_sgd(cfg: &ExperimentConfig) -> SgdConfig {
    SgdConfig {
        epochs: cfg.training.local_epochs,
        lr: cfg.training.local_lr,
        batch_size: cfg.training.local_batch,
        temperature: 1.0,
    }
}

struct ClientUpdate {
    client: usize,
    params: ModelParams,
    report: LogitReport,
    downloaded: usize,
    test_acc: f64,
}

/// Per-round callback; returning an error aborts the run.
pub type Observer<'a> = dyn FnMut(&RoundMetrics) -> Result<()> + 'a;

/// Federated distillation on datasets generated from `cfg`.
pub fn run_fd(cfg: &ExperimentConfig) -> Result<RunResult> {
    let fed = Federation::from_config(cfg)?;
    run_fd_on(cfg, &fed, &mut |_| Ok(()))
}

/// Federated distillation on caller-supplied datasets.
///
/// Each round: selected clients receive the server model when their spec
/// matches the server's (otherwise they continue from their own previous
/// parameters), train locally, choose public indices, and upload
/// probability rows; the server averages them (optionally ERA-sharpens) and
/// distills its previous model towards the teacher.
pub fn run_fd_on(cfg: &ExperimentConfig, fed: &Federation, observe: &mut Observer<'_>) -> Result<RunResult> {
    cfg.validate()?;
    if cfg.algorithm != Algorithm::Fd {
        return Err(Error::Config("run_fd called with a non-fd config".into()));
    }
    check_federation(cfg, fed)?;
    cfg.sampling.validate(fed.public.len()).map_err(|e| Error::Config(e.to_string()))?;

    let server_spec = cfg.server_spec();
    let mut server = init_params(server_spec, &mut RngStream::new(cfg.seed, "run/init/server"))?;
    let mut clients: Vec<ModelParams> = (0..cfg.n_clients)
        .map(|c| init_params(cfg.client_spec(c), &mut RngStream::new(cfg.seed, format!("run/init/client/{c}"))))
        .collect::<Result<_>>()?;
    let hists: Vec<Option<LocalLabelHistogram>> = fed
        .shards
        .iter()
        .map(|s| LocalLabelHistogram::from_dataset(s).ok())
        .collect();
    let eligible: Vec<usize> = (0..cfg.n_clients).filter(|&c| !fed.shards[c].is_empty()).collect();
    if eligible.is_empty() {
        return Err(Error::Config("every client shard is empty".into()));
    }
    let pool_x: HashMap<usize, &[f64]> = fed.public.samples().iter().map(|s| (s.index, s.x.as_slice())).collect();

    let mut metrics = Vec::with_capacity(cfg.rounds);
    let mut ledger = CommLedger::default();
    for round in 0..cfg.rounds {
        let picks = select_clients(eligible.len(), cfg.clients_per_round, &mut round_stream(cfg.seed, round, "select"));
        let selected: Vec<usize> = picks.into_iter().map(|p| eligible[p]).collect();
        let shared = round_stream(cfg.seed, round, "shared_subset");

        let updates: Vec<ClientUpdate> = selected
            .par_iter()
            .map(|&c| {
                let spec = cfg.client_spec(c);
                let (start, downloaded) = if spec == server_spec {
                    (server.clone(), server.param_count())
                } else {
                    (clients[c].clone(), 0)
                };
                let mut local_rng = client_stream(cfg.seed, round, c, "local");
                let params = crate::model::sgd_epochs(&start, TrainSet::Labeled(&fed.shards[c]), &local_sgd(cfg), &mut local_rng)?;
                let budget = cfg.sampling.budget;
                let indices = match cfg.sampling.strategy {
                    Strategy::None => select_none(&fed.public, &shared, budget)?,
                    Strategy::Random => {
                        select_random(&fed.public, &mut client_stream(cfg.seed, round, c, "sample"), budget)?
                    }
                    Strategy::LowEntropy => select_low_entropy(&fed.public, &params, budget)?,
                    Strategy::Mixed => select_mixed(
                        &fed.public,
                        &params,
                        hists[c].as_ref().expect("eligible clients have data"),
                        &mut client_stream(cfg.seed, round, c, "sample"),
                        budget,
                    )?,
                };
                let rows = indices
                    .iter()
                    .map(|i| crate::model::forward_logits(&params, pool_x[i], cfg.training.upload_temperature))
                    .collect::<Result<Vec<_>>>()?;
                let test_acc = evaluate(&params, &fed.test)?;
                Ok(ClientUpdate {
                    client: c,
                    report: LogitReport {
                        client_id: c,
                        n_classes: cfg.data.n_classes,
                        indices,
                        rows,
                    },
                    params,
                    downloaded,
                    test_acc,
                })
            })
            .collect::<Result<_>>()?;

        let reports: Vec<LogitReport> = updates.iter().map(|u| u.report.clone()).collect();
        let downlinks: Vec<(usize, usize)> = updates
            .iter()
            .filter(|u| u.downloaded > 0)
            .map(|u| (u.client, u.downloaded))
            .collect();
        let entry = account(&reports, &downlinks);

        let mut teacher = aggregate_average(&reports)?.retain_min_contributors(cfg.aggregation.min_contributors);
        if cfg.aggregation.method == Aggregation::Era {
            teacher = era_sharpen(&teacher, cfg.aggregation.era_temperature)?;
        }
        if !teacher.is_empty() {
            let xs: Vec<&[f64]> = teacher.indices.iter().map(|i| pool_x[i]).collect();
            let rows: Vec<&[f64]> = teacher.rows.iter().map(Vec::as_slice).collect();
            let distill = SgdConfig {
                epochs: cfg.training.distill_epochs,
                lr: cfg.training.distill_lr,
                batch_size: cfg.training.distill_batch,
                temperature: cfg.training.upload_temperature,
            };
            server = crate::model::sgd_epochs(
                &server,
                TrainSet::Soft { xs: &xs, teacher: &rows },
                &distill,
                &mut round_stream(cfg.seed, round, "distill"),
            )?;
        }

        let mean_client_acc = updates.iter().map(|u| u.test_acc).sum::<f64>() / updates.len() as f64;
        for u in updates {
            clients[u.client] = u.params;
        }
        let m = RoundMetrics {
            round: round + 1,
            server_acc: evaluate(&server, &fed.test)?,
            mean_client_acc,
            uplink_scalars: entry.uplink_scalars,
            downlink_scalars: entry.downlink_scalars,
            teacher_mean_entropy: teacher.mean_entropy(),
            union_size: teacher.len(),
        };
        ledger.push(entry);
        observe(&m)?;
        metrics.push(m);
    }
    Ok(RunResult { metrics, ledger, server })
}

/// FedAvg baseline on datasets generated from `cfg`.
pub fn run_fedavg(cfg: &ExperimentConfig) -> Result<RunResult> {
    let fed = Federation::from_config(cfg)?;
    run_fedavg_on(cfg, &fed, &mut |_| Ok(()))
}

/// FedAvg: selected clients start from the server model, train locally, and
/// the server takes the uniform average of their parameters. Both directions
/// cost `|θ|` scalars per selected client.
pub fn run_fedavg_on(cfg: &ExperimentConfig, fed: &Federation, observe: &mut Observer<'_>) -> Result<RunResult> {
    cfg.validate()?;
    if cfg.algorithm != Algorithm::Fedavg {
        return Err(Error::Config("run_fedavg called with a non-fedavg config".into()));
    }
    check_federation(cfg, fed)?;
    let spec = cfg.server_spec();
    let mut server = init_params(spec, &mut RngStream::new(cfg.seed, "run/init/server"))?;
    let eligible: Vec<usize> = (0..cfg.n_clients).filter(|&c| !fed.shards[c].is_empty()).collect();
    if eligible.is_empty() {
        return Err(Error::Config("every client shard is empty".into()));
    }
    let size = spec.param_count();
    let mut metrics = Vec::with_capacity(cfg.rounds);
    let mut ledger = CommLedger::default();
    for round in 0..cfg.rounds {
        let picks = select_clients(eligible.len(), cfg.clients_per_round, &mut round_stream(cfg.seed, round, "select"));
        let selected: Vec<usize> = picks.into_iter().map(|p| eligible[p]).collect();
        let locals: Vec<(ModelParams, f64)> = selected
            .par_iter()
            .map(|&c| {
                let mut rng = client_stream(cfg.seed, round, c, "local");
                let p = crate::model::sgd_epochs(&server, TrainSet::Labeled(&fed.shards[c]), &local_sgd(cfg), &mut rng)?;
                let acc = evaluate(&p, &fed.test)?;
                Ok((p, acc))
            })
            .collect::<Result<_>>()?;
        let refs: Vec<&ModelParams> = locals.iter().map(|(p, _)| p).collect();
        server = ModelParams::average(&refs)?;
        let entry = CommEntry {
            uplink_scalars: size * selected.len(),
            uplink_index_overhead: 0,
            downlink_scalars: size * selected.len(),
            per_client: selected.iter().map(|&c| (c, size, size)).collect(),
        };
        let m = RoundMetrics {
            round: round + 1,
            server_acc: evaluate(&server, &fed.test)?,
            mean_client_acc: locals.iter().map(|(_, a)| a).sum::<f64>() / locals.len() as f64,
            uplink_scalars: entry.uplink_scalars,
            downlink_scalars: entry.downlink_scalars,
            teacher_mean_entropy: 0.0,
            union_size: 0,
        };
        ledger.push(entry);
        observe(&m)?;
        metrics.push(m);
    }
    Ok(RunResult { metrics, ledger, server })
}

fn check_federation(cfg: &ExperimentConfig, fed: &Federation) -> Result<()> {
    if fed.shards.len() != cfg.n_clients {
        return Err(Error::Config(format!(
            "federation has {} shards for {} clients",
            fed.shards.len(),
            cfg.n_clients
        )));
    }
    if fed.public.dim() != cfg.data.dim || fed.test.dim() != cfg.data.dim {
        return Err(Error::Config("federation dimension does not match config".into()));
    }
    Ok(())
}

/// Dispatch on `cfg.algorithm`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunResult> {
    let fed = Federation::from_config(cfg)?;
    run_observed(cfg, &fed, &mut |_| Ok(()))
}

pub fn run_observed(cfg: &ExperimentConfig, fed: &Federation, observe: &mut Observer<'_>) -> Result<RunResult> {
    match cfg.algorithm {
        Algorithm::Fd => run_fd_on(cfg, fed, observe),
        Algorithm::Fedavg => run_fedavg_on(cfg, fed, observe),
    }
}

/// Final record of a run, written as `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub rounds: usize,
    pub final_server_acc: Option<f64>,
    pub best_server_acc: Option<f64>,
    pub final_mean_client_acc: Option<f64>,
    pub total_uplink_scalars: usize,
    pub total_uplink_index_overhead: usize,
    pub total_downlink_scalars: usize,
    pub bytes_per_scalar: usize,
    pub total_uplink_bytes: usize,
    pub total_downlink_bytes: usize,
}

pub const BYTES_PER_SCALAR: usize = 4;

impl RunSummary {
    pub fn from_result(cfg: &ExperimentConfig, result: &RunResult) -> Self {
        let total = result.ledger.total();
        let (up_bytes, down_bytes) = total.bytes(BYTES_PER_SCALAR);
        Self {
            algorithm: cfg.algorithm,
            rounds: result.metrics.len(),
            final_server_acc: result.final_accuracy(),
            best_server_acc: result.metrics.iter().map(|m| m.server_acc).reduce(f64::max),
            final_mean_client_acc: result.metrics.last().map(|m| m.mean_client_acc),
            total_uplink_scalars: total.uplink_scalars,
            total_uplink_index_overhead: total.uplink_index_overhead,
            total_downlink_scalars: total.downlink_scalars,
            bytes_per_scalar: BYTES_PER_SCALAR,
            total_uplink_bytes: up_bytes,
            total_downlink_bytes: down_bytes,
        }
    }
}

/// Files of one run directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunFiles {
    pub config: PathBuf,
    pub metrics: PathBuf,
    pub summary: PathBuf,
}

impl RunFiles {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            config: dir.join("config.toml"),
            metrics: dir.join("metrics.csv"),
            summary: dir.join("summary.json"),
        }
    }
}

/// Execute a run into `dir`: `config.toml` (canonical resolved config),
/// `metrics.csv` (one row per round, flushed as rounds finish) and
/// `summary.json`. On failure the rows written so far stay on disk.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<(RunResult, RunFiles)> {
    cfg.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = RunFiles::in_dir(dir);
    fs::write(&files.config, cfg.to_toml()).map_err(|e| Error::io(&files.config, e))?;
    let fed = Federation::from_config(cfg)?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(&files.metrics).map_err(|e| csv_err(&files.metrics, e))?;
    writer.write_record(METRICS_HEADER).map_err(|e| csv_err(&files.metrics, e))?;
    writer.flush().map_err(|e| Error::io(&files.metrics, e))?;
    let metrics_path = files.metrics.clone();
    let result = run_observed(cfg, &fed, &mut |m| {
        writer.serialize(m).map_err(|e| csv_err(&metrics_path, e))?;
        writer.flush().map_err(|e| Error::io(&metrics_path, e))
    })?;
    let summary = RunSummary::from_result(cfg, &result);
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&files.summary, json + "\n").map_err(|e| Error::io(&files.summary, e))?;
    Ok((result, files))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

/// Serialize metrics exactly as `metrics.csv` holds them.
pub fn metrics_csv(metrics: &[RoundMetrics]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(METRICS_HEADER).unwrap();
    for m in metrics {
        w.serialize(m).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}
