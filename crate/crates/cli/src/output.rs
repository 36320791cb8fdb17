use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use binldp::allocator::Allocation;
use binldp::privacy::MechanismConstants;
use binldp::trainer::RoundRecord;
use serde::Serialize;

use crate::pipeline::RunOutcome;
use crate::CliError;

#[derive(Serialize)]
struct RoundRow<'a> {
    config_hash: &'a str,
    seed: u64,
    t: usize,
    loss: f64,
    gap: f64,
    grad_norm: f64,
    mse_empirical: f64,
    mse_bound: f64,
    epsilon: f64,
    gamma_t: f64,
    clipped: bool,
}

pub(crate) fn write_rounds(path: &Path, hash: &str, seed: u64, records: &[RoundRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::write(path, e))?;
    for r in records {
        w.serialize(RoundRow {
            config_hash: hash,
            seed,
            t: r.t,
            loss: r.loss,
            gap: r.gap,
            grad_norm: r.grad_norm,
            mse_empirical: r.mse_empirical,
            mse_bound: r.mse_bound,
            epsilon: r.epsilon,
            gamma_t: r.gamma,
            clipped: r.clipped,
        })
        .map_err(|e| CliError::write(path, e))?;
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

pub(crate) fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

pub(crate) fn write_allocation(path: &Path, hash: &str, seed: u64, a: &Allocation) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::write(path, e))?;
    let mut header: Vec<String> = ["config_hash", "seed", "levels", "trials", "objective", "epsilon", "feasible"]
        .map(String::from)
        .to_vec();
    header.extend(a.slack.iter().map(|s| format!("slack_{}", s.subset)));
    let mut row = vec![
        hash.to_string(),
        seed.to_string(),
        join(&a.levels),
        join(&a.trials),
        a.objective.to_string(),
        a.epsilon.to_string(),
        a.feasible.to_string(),
    ];
    row.extend(a.slack.iter().map(|s| s.slack().to_string()));
    w.write_record(&header).map_err(|e| CliError::write(path, e))?;
    w.write_record(&row).map_err(|e| CliError::write(path, e))?;
    w.flush().map_err(|e| CliError::write(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::write(path, e))
}

/// Human-readable allocation: one line per field, then one per subset.
pub fn allocation_record(a: &Allocation) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "levels    {:?}", a.levels);
    let _ = writeln!(s, "trials    {:?}", a.trials);
    let _ = writeln!(s, "objective {}", a.objective);
    let _ = writeln!(s, "epsilon   {}", a.epsilon);
    let _ = writeln!(s, "rates     {:?}", a.rates.as_slice());
    let _ = writeln!(s, "subset            load      capacity  slack");
    for sl in &a.slack {
        let _ = writeln!(
            s,
            "{:<16}  {:<8.5}  {:<8.5}  {:.5}",
            sl.subset.to_string(),
            sl.load,
            sl.capacity,
            sl.slack()
        );
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub config_hash: String,
    pub seed: u64,
    pub rounds: usize,
    pub final_loss: f64,
    pub final_gap: f64,
    pub optimum_loss: f64,
    pub epsilon: f64,
    pub delta_total: f64,
    pub constants: MechanismConstants,
    pub levels: Vec<u64>,
    pub trials: Vec<u64>,
    pub objective: f64,
    pub lambda: f64,
    pub mu: f64,
    pub convergence_bound: f64,
    pub clipping_activated: bool,
    pub csv: PathBuf,
}

impl TrainSummary {
    pub(crate) fn new(o: &RunOutcome, hash: &str, csv: &Path) -> Self {
        let p = &o.prepared;
        Self {
            config_hash: hash.to_string(),
            seed: p.experiment.seed,
            rounds: p.experiment.rounds,
            final_loss: o.run.final_loss(),
            final_gap: o.run.final_gap(),
            optimum_loss: o.run.optimum_loss,
            epsilon: p.allocation.epsilon,
            delta_total: 2.0 * p.experiment.delta,
            constants: p.experiment.consts,
            levels: p.allocation.levels.clone(),
            trials: p.allocation.trials.clone(),
            objective: p.allocation.objective,
            lambda: p.lambda,
            mu: p.mu,
            convergence_bound: o.bound,
            clipping_activated: o.run.clipping_activated,
            csv: csv.to_path_buf(),
        }
    }
}
