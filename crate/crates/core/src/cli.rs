//! Command-line front end: `run`, `sweep`, `theory` and `validate-config`.
//!
//! Each command is also callable as a plain function so tests and examples
//! can drive it without spawning a process.
//!
//! Output layout:
//! - `run`: `<out>/{config.toml, metrics.csv, summary.json, manifest.json}`
//! - `sweep`: one such directory per cell plus `<out>/sweep_summary.csv`
//! - `theory`: `<out>/theory.csv` with columns [`GRID_HEADER`](crate::theory::GRID_HEADER)

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_to_dir, ExperimentConfig, RunFiles, RunSummary};
use crate::error::{Error, Result};
use crate::theory::{GridRow, TheoremParams, TheoryGrid, GRID_HEADER};

pub const ENV_OUT: &str = "FEDSIM_OUT";
pub const ENV_JOBS: &str = "FEDSIM_JOBS";
pub const MANIFEST_VERSION: &str = "fedsim-run-manifest/1";

#[derive(Debug, Parser)]
#[command(name = "fedsim", version, about = "Federated distillation simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment from a TOML config.
    Run(RunArgs),
    /// Run the cross product of config overrides.
    Sweep(SweepArgs),
    /// Compare the closed-form self-training limit with Monte Carlo.
    Theory(TheoryArgs),
    /// Parse and validate a config, then print its canonical form.
    ValidateConfig(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub config: PathBuf,
    #[arg(long, env = ENV_OUT, default_value = "fedsim-out")]
    pub out: PathBuf,
    /// Replace the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub config: PathBuf,
    #[arg(long, env = ENV_OUT, default_value = "fedsim-out")]
    pub out: PathBuf,
    /// `FIELD=V1,V2,...`; repeatable. Unknown fields are rejected with the allowed list.
    #[arg(long = "axis", value_name = "FIELD=VALUES")]
    pub axes: Vec<String>,
    #[arg(long, env = ENV_JOBS, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// Optional TOML grid file; missing keys take the default grid.
    pub config: Option<PathBuf>,
    #[arg(long, env = ENV_OUT, default_value = "fedsim-out")]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub sigma: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub u_bar: Option<Vec<f64>>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fail unless every cell's relative error is within `--tolerance`.
    #[arg(long)]
    pub check: bool,
    #[arg(long, default_value_t = 0.10)]
    pub tolerance: f64,
    #[arg(long, env = ENV_JOBS)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub config: PathBuf,
}

/// Record of a finished run, written last and atomically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub crate_version: String,
    pub config: ExperimentConfig,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub files: RunFiles,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Write via a sibling temp file and rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Read, parse and validate an experiment config. Parse errors carry the
/// path and the line/column of the offending key.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg = ExperimentConfig::from_toml(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}

/// Run `cfg` into `out_dir` and write its manifest.
pub fn run_config(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(RunManifest, RunSummary)> {
    let started = now_ms();
    let (result, files) = run_to_dir(cfg, out_dir)?;
    let manifest = RunManifest {
        version: MANIFEST_VERSION.to_string(),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        files,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_atomic(&manifest_path(out_dir), json.as_bytes())?;
    Ok((manifest, RunSummary::from_result(cfg, &result)))
}

pub fn cmd_run(config_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<RunManifest> {
    let mut cfg = load_config(config_path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(run_config(&cfg, out_dir)?.0)
}

pub fn cmd_validate(config_path: &Path) -> Result<ExperimentConfig> {
    load_config(config_path)
}

/// Fields a sweep axis may name, with their short aliases.
pub const SWEEPABLE: &[(&str, &str)] = &[
    ("seed", "seed"),
    ("algorithm", "algorithm"),
    ("rounds", "rounds"),
    ("n_clients", "n_clients"),
    ("clients_per_round", "clients_per_round"),
    ("alpha", "data.alpha"),
    ("data.alpha", "data.alpha"),
    ("data.spread", "data.spread"),
    ("data.n_public", "data.n_public"),
    ("data.public_spread", "data.public_spread"),
    ("strategy", "sampling.strategy"),
    ("sampling.strategy", "sampling.strategy"),
    ("n_logit", "sampling.budget"),
    ("sampling.budget", "sampling.budget"),
    ("aggregation", "aggregation.method"),
    ("aggregation.method", "aggregation.method"),
    ("era_temperature", "aggregation.era_temperature"),
    ("aggregation.era_temperature", "aggregation.era_temperature"),
    ("aggregation.min_contributors", "aggregation.min_contributors"),
    ("training.local_epochs", "training.local_epochs"),
    ("training.distill_epochs", "training.distill_epochs"),
    ("training.upload_temperature", "training.upload_temperature"),
];

/// One sweep axis: a config field and the values it takes.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    /// Name as the user wrote it; used for directory names and CSV columns.
    pub name: String,
    pub path: String,
    pub values: Vec<String>,
}

impl Axis {
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("axis `{spec}` is not of the form FIELD=V1,V2")))?;
        let name = name.trim();
        let path = SWEEPABLE
            .iter()
            .find(|(alias, _)| *alias == name)
            .map(|(_, p)| p.to_string())
            .ok_or_else(|| {
                let allowed: Vec<&str> = SWEEPABLE.iter().map(|(a, _)| *a).collect();
                Error::Config(format!("field `{name}` is not sweepable; allowed: {}", allowed.join(", ")))
            })?;
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
        if values.iter().any(|v| v.is_empty()) {
            return Err(Error::Config(format!("axis `{name}` has an empty value")));
        }
        Ok(Self {
            name: name.to_string(),
            path,
            values,
        })
    }
}

fn scalar(text: &str) -> toml::Value {
    if let Ok(i) = text.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = text.parse::<f64>() {
        toml::Value::Float(f)
    } else if let Ok(b) = text.parse::<bool>() {
        toml::Value::Boolean(b)
    } else {
        toml::Value::String(text.to_string())
    }
}

/// Apply `path = value` to a config, re-validating the result.
pub fn with_override(cfg: &ExperimentConfig, path: &str, value: &str) -> Result<ExperimentConfig> {
    let mut doc = toml::Value::try_from(cfg).expect("config is serializable");
    let mut node = &mut doc;
    let parts: Vec<&str> = path.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        node = node
            .get_mut(*part)
            .ok_or_else(|| Error::Config(format!("no config section `{part}`")))?;
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| Error::Config(format!("`{path}` is not inside a table")))?;
    let mut v = scalar(value);
    // floats written as integers ("100") must still land in float fields
    if let (Some(toml::Value::Float(_)), toml::Value::Integer(i)) = (table.get(parts[parts.len() - 1]), &v) {
        v = toml::Value::Float(*i as f64);
    }
    table.insert(parts[parts.len() - 1].to_string(), v);
    let out: ExperimentConfig = doc
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(format!("{path} = {value}: {}", e.message())))?;
    out.validate()?;
    Ok(out)
}

/// A resolved sweep cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub assignments: Vec<(String, String)>,
    pub config: ExperimentConfig,
    pub dir: PathBuf,
}

/// Expand axes into the cross product of configs (last axis varies fastest).
/// With no axes the single cell runs directly in `out_dir`.
pub fn expand_sweep(base: &ExperimentConfig, axes: &[Axis], out_dir: &Path) -> Result<Vec<SweepCell>> {
    let mut cells = vec![(Vec::<(String, String)>::new(), base.clone())];
    for axis in axes {
        let mut next = Vec::with_capacity(cells.len() * axis.values.len());
        for (assign, cfg) in &cells {
            for v in &axis.values {
                let mut a = assign.clone();
                a.push((axis.name.clone(), v.clone()));
                next.push((a, with_override(cfg, &axis.path, v)?));
            }
        }
        cells = next;
    }
    Ok(cells
        .into_iter()
        .map(|(assignments, config)| {
            let dir = if assignments.is_empty() {
                out_dir.to_path_buf()
            } else {
                let name: Vec<String> = assignments.iter().map(|(k, v)| format!("{k}={v}")).collect();
                out_dir.join(name.join("__"))
            };
            SweepCell {
                assignments,
                config,
                dir,
            }
        })
        .collect())
}

/// Outcome of a sweep: per-cell summaries, or the error that stopped the cell.
#[derive(Debug)]
pub struct SweepReport {
    pub cells: Vec<(SweepCell, Result<RunSummary>)>,
    pub summary_csv: PathBuf,
}

impl SweepReport {
    pub fn all_ok(&self) -> bool {
        self.cells.iter().all(|(_, r)| r.is_ok())
    }
}

pub const SWEEP_SUMMARY_COLUMNS: [&str; 7] = [
    "final_server_acc",
    "best_server_acc",
    "final_mean_client_acc",
    "total_uplink_scalars",
    "total_downlink_scalars",
    "status",
    "dir",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn cmd_sweep(config_path: &Path, axes: &[String], out_dir: &Path, jobs: usize, seed: Option<u64>) -> Result<SweepReport> {
    let mut base = load_config(config_path)?;
    if let Some(s) = seed {
        base.seed = s;
    }
    let axes = axes.iter().map(|a| Axis::parse(a)).collect::<Result<Vec<_>>>()?;
    let cells = expand_sweep(&base, &axes, out_dir)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {jobs} workers: {e}")))?;
    let results: Vec<Result<RunSummary>> =
        pool.install(|| cells.par_iter().map(|c| run_config(&c.config, &c.dir).map(|(_, s)| s)).collect());

    let summary_csv = out_dir.join("sweep_summary.csv");
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = axes.iter().map(|a| a.name.clone()).collect();
    header.extend(SWEEP_SUMMARY_COLUMNS.iter().map(|s| s.to_string()));
    w.write_record(&header).expect("in-memory csv");
    for (cell, res) in cells.iter().zip(&results) {
        let mut row: Vec<String> = cell.assignments.iter().map(|(_, v)| v.clone()).collect();
        match res {
            Ok(s) => row.extend([
                opt(s.final_server_acc),
                opt(s.best_server_acc),
                opt(s.final_mean_client_acc),
                s.total_uplink_scalars.to_string(),
                s.total_downlink_scalars.to_string(),
                "ok".to_string(),
            ]),
            Err(e) => row.extend(["".into(), "".into(), "".into(), "".into(), "".into(), format!("error: {e}")]),
        }
        row.push(cell.dir.display().to_string());
        w.write_record(&row).expect("in-memory csv");
    }
    let bytes = w.into_inner().expect("in-memory csv");
    write_atomic(&summary_csv, &bytes)?;
    Ok(SweepReport {
        cells: cells.into_iter().zip(results).collect(),
        summary_csv,
    })
}

/// Outcome of a theory grid evaluation.
#[derive(Debug)]
pub struct TheoryReport {
    pub cells: Vec<(TheoremParams, Result<GridRow>)>,
    pub csv: PathBuf,
    pub tolerance: f64,
}

impl TheoryReport {
    /// Cells that produced a row whose relative error exceeds the tolerance.
    pub fn out_of_tolerance(&self) -> Vec<&GridRow> {
        self.cells
            .iter()
            .filter_map(|(_, r)| r.as_ref().ok())
            .filter(|r| !(r.relative_error() <= self.tolerance))
            .collect()
    }

    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|(_, r)| r.is_err()).count()
    }
}

pub fn theory_csv(rows: &[&GridRow]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(GRID_HEADER).expect("in-memory csv");
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

pub fn cmd_theory(grid: &TheoryGrid, out_dir: &Path, tolerance: f64) -> Result<TheoryReport> {
    if grid.p < 100 || grid.trials < 10 {
        return Err(Error::Config("theory grid needs p ≥ 100 and trials ≥ 10".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let cells = grid.evaluate();
    let rows: Vec<&GridRow> = cells.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
    let csv = out_dir.join("theory.csv");
    write_atomic(&csv, theory_csv(&rows).as_bytes())?;
    Ok(TheoryReport { cells, csv, tolerance })
}

fn theory_grid(args: &TheoryArgs) -> Result<TheoryGrid> {
    let mut grid = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => TheoryGrid::default(),
    };
    if let Some(v) = &args.alpha {
        grid.alpha = v.clone();
    }
    if let Some(v) = &args.gamma {
        grid.gamma = v.clone();
    }
    if let Some(v) = &args.sigma {
        grid.sigma = v.clone();
    }
    if let Some(v) = &args.u_bar {
        grid.u_bar = v.clone();
    }
    if let Some(p) = args.p {
        grid.p = p;
    }
    if let Some(t) = args.trials {
        grid.trials = t;
    }
    if let Some(s) = args.seed {
        grid.seed = s;
    }
    Ok(grid)
}

/// Run a parsed command line; returns the process exit code.
///
/// 0: everything completed (and every `--check` passed); 1: some requested
/// work failed or a check was out of tolerance; 2: bad input.
pub fn execute(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(a) => {
            let m = cmd_run(&a.config, &a.out, a.seed)?;
            println!("wrote {}", m.files.metrics.display());
            Ok(0)
        }
        Command::Sweep(a) => {
            let report = cmd_sweep(&a.config, &a.axes, &a.out, a.jobs, a.seed)?;
            for (cell, res) in &report.cells {
                match res {
                    Ok(s) => println!("{}: final server acc {}", cell.dir.display(), opt(s.final_server_acc)),
                    Err(e) => eprintln!("{}: error: {e}", cell.dir.display()),
                }
            }
            println!("wrote {}", report.summary_csv.display());
            Ok(if report.all_ok() { 0 } else { 1 })
        }
        Command::Theory(a) => {
            let grid = theory_grid(&a)?;
            if let Some(j) = a.jobs {
                // only the first global-pool configuration in a process wins
                let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
            }
            let report = cmd_theory(&grid, &a.out, a.tolerance)?;
            for (tp, res) in &report.cells {
                let cell = format!("alpha={} sigma={} Gamma={} u_bar={}", tp.alpha, tp.sigma, tp.gamma, tp.u_bar);
                match res {
                    Ok(r) => println!(
                        "{cell}: closed_form={:.4} mc={:.4}±{:.4} rel_err={:.4}",
                        r.closed_form,
                        r.mc_mean,
                        r.mc_se,
                        r.relative_error()
                    ),
                    Err(e) => eprintln!("{cell}: {e}"),
                }
            }
            println!("wrote {}", report.csv.display());
            let bad = report.out_of_tolerance();
            let mut ok = report.failed_cells() == 0;
            if a.check && !bad.is_empty() {
                eprintln!("{} cell(s) exceed relative tolerance {}", bad.len(), a.tolerance);
                ok = false;
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::ValidateConfig(a) => {
            let cfg = cmd_validate(&a.config)?;
            print!("{}", cfg.to_toml());
            Ok(0)
        }
    }
}
