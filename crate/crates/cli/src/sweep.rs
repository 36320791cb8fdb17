use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use binldp::rng::derive_seed;
use binldp::ExperimentConfig;
use rayon::prelude::*;
use serde::Serialize;
use statrs::statistics::{Data, Median, OrderStatistics};

use crate::output::join;
use crate::pipeline::execute;
use crate::{config_hash, load_config, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    SnrDb,
    EpsBudget,
    Rounds,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Self::SnrDb => "snr_db",
            Self::EpsBudget => "eps_budget",
            Self::Rounds => "rounds",
        }
    }

    fn apply(self, config: &mut ExperimentConfig, value: f64) -> Result<(), String> {
        match self {
            Self::SnrDb => {
                config.snr_db = Some(value);
                config.power = None;
            }
            Self::EpsBudget => config.eps_budget = value,
            Self::Rounds => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= i64::MAX as f64) {
                    return Err(format!("rounds must be a positive integer, got {value}"));
                }
                config.rounds = value as i64;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "snr_db" => Ok(Self::SnrDb),
            "eps_budget" => Ok(Self::EpsBudget),
            "rounds" => Ok(Self::Rounds),
            other => Err(format!("unknown axis {other:?}; expected snr_db, eps_budget or rounds")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    axis: Axis,
    values: Vec<f64>,
    repeats: usize,
}

impl SweepSpec {
    pub fn new(axis: Axis, values: Vec<f64>, repeats: usize) -> Result<Self, CliError> {
        if values.is_empty() {
            return Err(CliError::Runtime("sweep needs at least one value".into()));
        }
        if repeats == 0 {
            return Err(CliError::Runtime("sweep needs at least one repeat".into()));
        }
        Ok(Self { axis, values, repeats })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn repeats(&self) -> usize {
        self.repeats
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PointStatus {
    Ok,
    /// Exit code the same run would give under `train`, and the message.
    Failed { code: i32, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub repeat: usize,
    pub seed: u64,
    pub status: PointStatus,
    pub losses: Vec<f64>,
    pub gaps: Vec<f64>,
    pub epsilon: f64,
    pub levels: Vec<u64>,
    pub trials: Vec<u64>,
    pub convergence_bound: f64,
    pub clipping_activated: bool,
}

impl RunResult {
    pub fn ok(&self) -> bool {
        self.status == PointStatus::Ok
    }

    pub fn final_loss(&self) -> f64 {
        self.losses.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_gap(&self) -> f64 {
        self.gaps.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    pub fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self {
                q1: f64::NAN,
                median: f64::NAN,
                q3: f64::NAN,
            };
        }
        let mut data = Data::new(xs.to_vec());
        Self {
            q1: data.lower_quartile(),
            median: data.median(),
            q3: data.upper_quartile(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub runs: Vec<RunResult>,
}

impl SweepPoint {
    fn successes(&self) -> impl Iterator<Item = &RunResult> {
        self.runs.iter().filter(|r| r.ok())
    }

    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| !r.ok()).count()
    }

    pub fn final_loss(&self) -> Quartiles {
        Quartiles::of(&self.successes().map(RunResult::final_loss).collect::<Vec<_>>())
    }

    pub fn final_gap(&self) -> Quartiles {
        Quartiles::of(&self.successes().map(RunResult::final_gap).collect::<Vec<_>>())
    }

    /// Per-iteration quartiles of the loss over successful repeats.
    pub fn loss_curve(&self) -> Vec<Quartiles> {
        let rounds = self.successes().map(|r| r.losses.len()).max().unwrap_or(0);
        (0..rounds)
            .map(|t| {
                Quartiles::of(
                    &self
                        .successes()
                        .filter_map(|r| r.losses.get(t).copied())
                        .collect::<Vec<_>>(),
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: Axis,
    pub base_seed: u64,
    pub config_hash: String,
    pub points: Vec<SweepPoint>,
}

fn run_one(base: &ExperimentConfig, axis: Axis, value: f64, repeat: usize, seed: u64) -> RunResult {
    let mut result = RunResult {
        repeat,
        seed,
        status: PointStatus::Ok,
        losses: Vec::new(),
        gaps: Vec::new(),
        epsilon: f64::NAN,
        levels: Vec::new(),
        trials: Vec::new(),
        convergence_bound: f64::NAN,
        clipping_activated: false,
    };
    let mut config = base.clone();
    config.seed = seed;
    let outcome = axis
        .apply(&mut config, value)
        .map_err(CliError::Runtime)
        .and_then(|()| execute(&config));
    match outcome {
        Ok(o) => {
            result.losses = o.run.records.iter().map(|r| r.loss).collect();
            result.gaps = o.run.records.iter().map(|r| r.gap).collect();
            result.epsilon = o.prepared.allocation.epsilon;
            result.levels = o.prepared.allocation.levels.clone();
            result.trials = o.prepared.allocation.trials.clone();
            result.convergence_bound = o.bound;
            result.clipping_activated = o.run.clipping_activated;
        }
        Err(e) => {
            result.status = PointStatus::Failed {
                code: e.exit_code(),
                message: e.to_string(),
            }
        }
    }
    result
}

/// One run per (value, repeat); repeat `r` at value index `k` uses seed
/// `derive_seed(config.seed, [k, r])`. Failures are recorded, not raised.
pub fn run_sweep(config: &ExperimentConfig, spec: &SweepSpec) -> SweepResult {
    let jobs: Vec<(usize, f64, usize)> = spec
        .values
        .iter()
        .enumerate()
        .flat_map(|(k, &v)| (0..spec.repeats).map(move |r| (k, v, r)))
        .collect();
    let runs: Vec<RunResult> = jobs
        .par_iter()
        .map(|&(k, v, r)| run_one(config, spec.axis, v, r, derive_seed(config.seed, &[k as u64, r as u64])))
        .collect();
    let mut runs = runs.into_iter();
    let points = spec
        .values
        .iter()
        .enumerate()
        .map(|(index, &value)| SweepPoint {
            index,
            value,
            runs: runs.by_ref().take(spec.repeats).collect(),
        })
        .collect();
    SweepResult {
        axis: spec.axis,
        base_seed: config.seed,
        config_hash: config_hash(config),
        points,
    }
}

#[derive(Serialize)]
struct PointRow<'a> {
    config_hash: &'a str,
    seed: u64,
    axis: &'static str,
    value: f64,
    runs: usize,
    failed: usize,
    final_loss_q1: f64,
    final_loss_median: f64,
    final_loss_q3: f64,
    final_gap_median: f64,
    status: &'a str,
}

#[derive(Serialize)]
struct RunRow<'a> {
    config_hash: &'a str,
    seed: u64,
    axis: &'static str,
    value: f64,
    repeat: usize,
    status: &'a str,
    exit_code: i32,
    final_loss: f64,
    final_gap: f64,
    epsilon: f64,
    levels: String,
    trials: String,
    convergence_bound: f64,
    clipping_activated: bool,
    message: &'a str,
}

#[derive(Serialize)]
struct CurveRow<'a> {
    config_hash: &'a str,
    seed: u64,
    axis: &'static str,
    value: f64,
    t: usize,
    loss_q1: f64,
    loss_median: f64,
    loss_q3: f64,
}

#[derive(Debug, Clone)]
pub struct SweepFiles {
    pub points: PathBuf,
    pub runs: PathBuf,
    pub curves: PathBuf,
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::write(path, e))
}

impl SweepResult {
    pub fn write(&self, out_dir: &Path) -> Result<SweepFiles, CliError> {
        std::fs::create_dir_all(out_dir).map_err(|e| CliError::write(out_dir, e))?;
        let stem = format!("sweep_{}_s{}_{}", self.axis, self.base_seed, self.config_hash);
        let files = SweepFiles {
            points: out_dir.join(format!("{stem}.csv")),
            runs: out_dir.join(format!("{stem}_runs.csv")),
            curves: out_dir.join(format!("{stem}_curves.csv")),
        };
        let hash = self.config_hash.as_str();
        let axis = self.axis.name();

        let mut w = writer(&files.points)?;
        for p in &self.points {
            let loss = p.final_loss();
            let failed = p.failures();
            let status = match failed {
                0 => "ok",
                f if f == p.runs.len() => "failed",
                _ => "partial",
            };
            w.serialize(PointRow {
                config_hash: hash,
                seed: self.base_seed,
                axis,
                value: p.value,
                runs: p.runs.len(),
                failed,
                final_loss_q1: loss.q1,
                final_loss_median: loss.median,
                final_loss_q3: loss.q3,
                final_gap_median: p.final_gap().median,
                status,
            })
            .map_err(|e| CliError::write(&files.points, e))?;
        }
        w.flush().map_err(|e| CliError::write(&files.points, e))?;

        let mut w = writer(&files.runs)?;
        for p in &self.points {
            for r in &p.runs {
                let (status, code, message) = match &r.status {
                    PointStatus::Ok => ("ok", 0, ""),
                    PointStatus::Failed { code, message } => ("failed", *code, message.as_str()),
                };
                w.serialize(RunRow {
                    config_hash: hash,
                    seed: r.seed,
                    axis,
                    value: p.value,
                    repeat: r.repeat,
                    status,
                    exit_code: code,
                    final_loss: r.final_loss(),
                    final_gap: r.final_gap(),
                    epsilon: r.epsilon,
                    levels: join(&r.levels),
                    trials: join(&r.trials),
                    convergence_bound: r.convergence_bound,
                    clipping_activated: r.clipping_activated,
                    message,
                })
                .map_err(|e| CliError::write(&files.runs, e))?;
            }
        }
        w.flush().map_err(|e| CliError::write(&files.runs, e))?;

        let mut w = writer(&files.curves)?;
        for p in &self.points {
            for (i, q) in p.loss_curve().iter().enumerate() {
                w.serialize(CurveRow {
                    config_hash: hash,
                    seed: self.base_seed,
                    axis,
                    value: p.value,
                    t: i + 1,
                    loss_q1: q.q1,
                    loss_median: q.median,
                    loss_q3: q.q3,
                })
                .map_err(|e| CliError::write(&files.curves, e))?;
            }
        }
        w.flush().map_err(|e| CliError::write(&files.curves, e))?;
        Ok(files)
    }
}

pub fn cmd_sweep(
    config_path: &Path,
    spec: &SweepSpec,
    out_dir: &Path,
    seed: Option<u64>,
) -> Result<(SweepResult, SweepFiles), CliError> {
    let mut config = load_config(config_path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let result = run_sweep(&config, spec);
    let files = result.write(out_dir)?;
    Ok((result, files))
}
