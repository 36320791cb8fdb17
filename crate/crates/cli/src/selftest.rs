use binldp::allocator::{solve_exhaustive, solve_pruned, AllocationProblem};
use binldp::privacy::{Accountant, MechanismConstants};
use binldp::quantizer::QuantizerConfig;
use binldp::trainer::{empirical_mse, synthesize_data, Pipeline, RidgeTask, RoundPlan};
use binldp::{ChannelConfig, ExperimentConfig, ModelVector};

use crate::pipeline::execute;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestLine {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn line(name: &'static str, check: Result<(bool, String), CliError>) -> SelftestLine {
    match check {
        Ok((passed, detail)) => SelftestLine { name, passed, detail },
        Err(e) => SelftestLine {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn quantizer_mean() -> Result<(bool, String), CliError> {
    let mut worst = 0.0f64;
    for l in [2, 3, 5, 9, 17] {
        let q = QuantizerConfig::new(4.0, l)?;
        for k in 0..=200 {
            let g = -4.0 + 8.0 * k as f64 / 200.0;
            worst = worst.max((q.two_point_law(g)?.mean() - g).abs());
        }
    }
    Ok((worst <= 1e-12, format!("max |E[Q(g)] - g| = {worst:e}")))
}

fn gate_threshold() -> Result<(bool, String), CliError> {
    let acc = Accountant::new(10, 0.01, 0.5, 4.0, 4.0, MechanismConstants::for_p(0.5))?;
    let below = acc.gate(2, 847)?.ok;
    let at = acc.gate(2, 848)?.ok;
    Ok((!below && at, format!("m = 847 passes: {below}, m = 848 passes: {at}")))
}

fn allocator_agreement() -> Result<(bool, String), CliError> {
    let mut agree = 0;
    let cases = [(30, 0.5, 6, 400), (24, 0.4, 5, 380), (60, 0.6, 8, 500)];
    for &(uses, delta, l_max, m_max) in &cases {
        let ch = ChannelConfig::new(uses, vec![3.0, 3.0])?;
        let acc = Accountant::new(1, delta, 0.5, 1.0, 1.0, MechanismConstants::for_p(0.5))?;
        let problem = AllocationProblem::with_bounds(1, ch, acc, 6.0, l_max, m_max)?;
        if solve_pruned(&problem)?.verdict == solve_exhaustive(&problem)?.verdict {
            agree += 1;
        }
    }
    Ok((agree == cases.len(), format!("{agree}/{} instances agree", cases.len())))
}

fn mse_ceiling() -> Result<(bool, String), CliError> {
    let data = synthesize_data(2, 10, &[500, 500], 3)?;
    let task = RidgeTask::new(data, 1e-3)?;
    let plan = RoundPlan {
        bound: 4.0,
        clip: 4.0,
        levels: vec![5, 5],
        trials: vec![900, 900],
    };
    let w = ModelVector::zeros(10);
    let est = empirical_mse(&task, &w, &plan, 0.5, 11, 2000, Pipeline::Full)?;
    let ceiling = plan.mse_bound(0.5, 10) + 3.0 * est.std_error;
    Ok((est.mean <= ceiling, format!("{:.4} <= {:.4}", est.mean, ceiling)))
}

fn determinism() -> Result<(bool, String), CliError> {
    let mut c = ExperimentConfig::section4();
    c.channel_uses = 256;
    c.rounds = 5;
    c.samples = Some(200);
    let a = execute(&c)?.run.records;
    let b = execute(&c)?.run.records;
    Ok((a == b, format!("{} rounds compared", a.len())))
}

/// Fast versions of the invariant suites.
pub fn cmd_selftest() -> Vec<SelftestLine> {
    vec![
        line("quantizer expectation", quantizer_mean()),
        line("accountant gate", gate_threshold()),
        line("allocator pruned = exhaustive", allocator_agreement()),
        line("mse below analytic ceiling", mse_ceiling()),
        line("seeded run determinism", determinism()),
    ]
}
