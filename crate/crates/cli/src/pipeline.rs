use std::path::Path;

use binldp::allocator::{solve_pruned, Allocation, AllocationProblem, Verdict};
use binldp::trainer::{convergence_bound, synthesize_data, RidgeTask, RoundPlan, Trainer, TrainerConfig, TrainingRun};
use binldp::{Experiment, ExperimentConfig};

use crate::output::{self, TrainSummary};
use crate::{config_hash, load_config, CliError};

/// Runs the pruned solver; an infeasible verdict becomes [`CliError::Infeasible`]
/// naming the binding constraint family.
pub fn solve(e: &Experiment) -> Result<(AllocationProblem, Allocation), CliError> {
    let problem = AllocationProblem::from_experiment(e)?;
    match solve_pruned(&problem)?.verdict {
        Verdict::Optimal(a) => Ok((problem, a)),
        Verdict::Infeasible { binding } => Err(CliError::Infeasible(format!(
            "no allocation satisfies all constraints; binding family: {binding}"
        ))),
    }
}

pub struct PreparedRun {
    pub experiment: Experiment,
    pub problem: AllocationProblem,
    pub allocation: Allocation,
    pub trainer: Trainer,
    pub lambda: f64,
    pub mu: f64,
}

impl PreparedRun {
    pub fn plan(&self) -> RoundPlan {
        RoundPlan::from_allocation(self.experiment.bound, self.experiment.clip, &self.allocation)
    }

    /// Right-hand side of the convergence guarantee for this run.
    pub fn convergence_bound(&self) -> Result<f64, CliError> {
        let e = &self.experiment;
        Ok(convergence_bound(
            e.rounds,
            e.n,
            e.d,
            &self.trainer.config().full_schedule(),
            e.p,
            self.lambda,
            self.mu,
        )?)
    }
}

/// Validates, allocates, synthesizes data and builds the trainer.
pub fn prepare(config: &ExperimentConfig) -> Result<PreparedRun, CliError> {
    let experiment = config.validate().map_err(CliError::Config)?;
    let (problem, allocation) = solve(&experiment)?;
    let e = &experiment;
    let data = synthesize_data(e.n, e.d, &e.client_sizes(), e.seed)?;
    let task = RidgeTask::new(data, e.beta)?;
    let (lo, hi) = task.curvature();
    let lambda = e.lambda.unwrap_or(lo);
    let mu = e.mu.unwrap_or(hi);
    let cfg = TrainerConfig {
        rounds: e.rounds,
        lambda,
        mu,
        p: e.p,
        seed: e.seed,
        schedule: vec![RoundPlan::from_allocation(e.bound, e.clip, &allocation)],
    };
    let trainer = Trainer::new(task, cfg, &e.channel, &problem.accountant)?;
    Ok(PreparedRun {
        experiment,
        problem,
        allocation,
        trainer,
        lambda,
        mu,
    })
}

pub struct RunOutcome {
    pub prepared: PreparedRun,
    pub run: TrainingRun,
    pub bound: f64,
}

pub fn execute(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let prepared = prepare(config)?;
    let run = prepared.trainer.run()?;
    let bound = prepared.convergence_bound()?;
    Ok(RunOutcome { prepared, run, bound })
}

/// Runs one training job and writes its per-round CSV and JSON summary into
/// `out_dir`. `seed` overrides the configured seed.
pub fn cmd_train(config_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<TrainSummary, CliError> {
    let mut config = load_config(config_path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let outcome = execute(&config)?;
    let hash = config_hash(&config);
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::write(out_dir, e))?;
    let stem = format!("train_s{}_{hash}", config.seed);
    let csv_path = out_dir.join(format!("{stem}.csv"));
    output::write_rounds(&csv_path, &hash, config.seed, &outcome.run.records)?;
    let summary = TrainSummary::new(&outcome, &hash, &csv_path);
    output::write_json(&out_dir.join(format!("summary_s{}_{hash}.json", config.seed)), &summary)?;
    Ok(summary)
}

#[derive(Debug)]
pub struct AllocateOutput {
    pub problem: AllocationProblem,
    pub allocation: Allocation,
    pub csv: Option<std::path::PathBuf>,
}

/// Solves the allocation for a config; with `out_dir`, also writes a one-row CSV.
pub fn cmd_allocate(
    config_path: &Path,
    out_dir: Option<&Path>,
    seed: Option<u64>,
) -> Result<AllocateOutput, CliError> {
    let mut config = load_config(config_path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let e = config.validate().map_err(CliError::Config)?;
    let (problem, allocation) = solve(&e)?;
    let csv = match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|err| CliError::write(dir, err))?;
            let hash = config_hash(&config);
            let path = dir.join(format!("allocate_s{}_{hash}.csv", config.seed));
            output::write_allocation(&path, &hash, config.seed, &allocation)?;
            Some(path)
        }
        None => None,
    };
    Ok(AllocateOutput {
        problem,
        allocation,
        csv,
    })
}
