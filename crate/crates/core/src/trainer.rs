//! Federated ridge regression with quantized, binomially perturbed gradients.
//!
//! Per round `t`, every client computes its full local gradient at `w^{t-1}`,
//! clips it (norm to `D`, then coordinates to `[-G, G]`), quantizes it to
//! `l_i` levels and adds binomial noise with `m_i` trials. The server averages
//! the messages and steps `w^t = w^{t-1} - γ_t·ḡ` with `γ_t = 1/(λt)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocator::Allocation;
use crate::channel::{feasible, rate_of, ChannelConfig, RateVector};
use crate::error::{invalid, Error, Result};
use crate::privacy::{perturb, Accountant, BinomialMechanism};
use crate::quantizer::{quantize_vector, QuantizerConfig};
use crate::rng::{Purpose, RngSeed};
use crate::types::{dot, norm_sq, ClientDataset, DataSample, GradientVector, ModelVector};

/// Fewer resamples than this flag an MSE estimate as unreliable.
pub const MIN_MSE_SAMPLES: usize = 100;

/// Mean over `samples` of `(wᵀd - v)² + (β/2)‖w‖²`.
pub fn ridge_loss(w: &ModelVector, samples: &[DataSample], beta: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let reg = 0.5 * beta * norm_sq(w.as_slice());
    let mut total = 0.0;
    for s in samples {
        if s.dim() != w.dim() {
            return Err(Error::DimensionMismatch {
                expected: w.dim(),
                actual: s.dim(),
            });
        }
        let r = dot(w.as_slice(), &s.point) - s.label;
        total += r * r;
    }
    Ok(total / samples.len() as f64 + reg)
}

/// `(1/|D_i|) Σ_k [2(wᵀd_k - v_k)·d_k + β·w]`
pub fn local_gradient(w: &ModelVector, data: &ClientDataset, beta: f64) -> Result<GradientVector> {
    if data.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            actual: data.dim(),
        });
    }
    let mut g = vec![0.0; w.dim()];
    for s in data.samples() {
        let r = 2.0 * (dot(w.as_slice(), &s.point) - s.label);
        for (gj, dj) in g.iter_mut().zip(&s.point) {
            *gj += r * dj;
        }
    }
    let inv = 1.0 / data.len() as f64;
    for (gj, wj) in g.iter_mut().zip(w.as_slice()) {
        *gj = *gj * inv + beta * wj;
    }
    Ok(GradientVector::from_raw(g))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clipped {
    pub gradient: GradientVector,
    pub norm_scaled: bool,
    pub clamped: bool,
}

impl Clipped {
    pub fn active(&self) -> bool {
        self.norm_scaled || self.clamped
    }
}

/// Scales to `‖g‖₂ ≤ D`, then clamps every coordinate into `[-G, G]`.
pub fn clip(g: &GradientVector, bound: f64, clip_norm: f64) -> Clipped {
    let norm = g.norm();
    let norm_scaled = norm > clip_norm;
    let scale = if norm_scaled { clip_norm / norm } else { 1.0 };
    let mut clamped = false;
    let values = g
        .as_slice()
        .iter()
        .map(|&x| {
            let y = x * scale;
            if y.abs() > bound {
                clamped = true;
                y.clamp(-bound, bound)
            } else {
                y
            }
        })
        .collect();
    Clipped {
        gradient: GradientVector::from_raw(values),
        norm_scaled,
        clamped,
    }
}

/// `|D|` i.i.d. draws from `N(0, I_{d+1})`: the first `d` coordinates form the
/// point, the last is the label. Split into consecutive client shards.
pub fn synthesize_data(n: usize, d: usize, sizes: &[usize], seed: u64) -> Result<Vec<ClientDataset>> {
    if sizes.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: sizes.len(),
        });
    }
    if d == 0 {
        return Err(invalid("d", "dimension must be positive"));
    }
    let mut rng = RngSeed::new(seed, 0, 0, Purpose::Data).rng();
    sizes
        .iter()
        .enumerate()
        .map(|(client, &size)| {
            let samples = (0..size)
                .map(|_| {
                    let point: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let label: f64 = StandardNormal.sample(&mut rng);
                    DataSample { point, label }
                })
                .collect();
            ClientDataset::new(client, samples)
        })
        .collect()
}

/// The global ridge objective over the union of client datasets.
#[derive(Debug, Clone)]
pub struct RidgeTask {
    datasets: Vec<ClientDataset>,
    all: Vec<DataSample>,
    beta: f64,
}

impl RidgeTask {
    pub fn new(datasets: Vec<ClientDataset>, beta: f64) -> Result<Self> {
        let Some(first) = datasets.first() else {
            return Err(Error::EmptyDataset);
        };
        let d = first.dim();
        if let Some(bad) = datasets.iter().find(|ds| ds.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: bad.dim(),
            });
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(invalid("beta", format!("must be finite and >= 0, got {beta}")));
        }
        let all = datasets.iter().flat_map(|ds| ds.samples().iter().cloned()).collect();
        Ok(Self { datasets, all, beta })
    }

    pub fn dim(&self) -> usize {
        self.datasets[0].dim()
    }

    pub fn clients(&self) -> usize {
        self.datasets.len()
    }

    pub fn datasets(&self) -> &[ClientDataset] {
        &self.datasets
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn loss(&self, w: &ModelVector) -> Result<f64> {
        ridge_loss(w, &self.all, self.beta)
    }

    /// `2·XXᵀ/|D| + βI`
    pub fn hessian(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut h = DMatrix::<f64>::zeros(d, d);
        for s in &self.all {
            let x = DVector::from_column_slice(&s.point);
            h.ger(1.0, &x, &x, 1.0);
        }
        h *= 2.0 / self.all.len() as f64;
        for j in 0..d {
            h[(j, j)] += self.beta;
        }
        h
    }

    /// Closed-form minimizer from the normal equations.
    pub fn optimum(&self) -> Result<ModelVector> {
        let d = self.dim();
        let mut rhs = DVector::<f64>::zeros(d);
        for s in &self.all {
            rhs.axpy(2.0 * s.label, &DVector::from_column_slice(&s.point), 1.0);
        }
        rhs /= self.all.len() as f64;
        let chol = self
            .hessian()
            .cholesky()
            .ok_or_else(|| invalid("beta", "ridge Hessian is not positive definite"))?;
        ModelVector::new(chol.solve(&rhs).iter().copied().collect())
    }

    /// `(λ_min, λ_max)` of the Hessian: the strong-convexity and smoothness
    /// constants of this quadratic objective.
    pub fn curvature(&self) -> (f64, f64) {
        let eig = SymmetricEigen::new(self.hessian()).eigenvalues;
        (eig.min(), eig.max())
    }

    /// Clipped local gradient of every client at `w`.
    pub fn clipped_gradients(&self, w: &ModelVector, bound: f64, clip_norm: f64) -> Result<Vec<Clipped>> {
        self.datasets
            .par_iter()
            .map(|ds| local_gradient(w, ds, self.beta).map(|g| clip(&g, bound, clip_norm)))
            .collect()
    }
}

/// Parameters in force for one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundPlan {
    pub bound: f64,
    pub clip: f64,
    pub levels: Vec<u64>,
    pub trials: Vec<u64>,
}

impl RoundPlan {
    pub fn from_allocation(bound: f64, clip: f64, alloc: &Allocation) -> Self {
        Self {
            bound,
            clip,
            levels: alloc.levels.clone(),
            trials: alloc.trials.clone(),
        }
    }

    fn step(&self, client: usize) -> f64 {
        2.0 * self.bound / (self.levels[client] - 1) as f64
    }

    fn check(&self, n: usize) -> Result<()> {
        for len in [self.levels.len(), self.trials.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        if let Some(&l) = self.levels.iter().find(|&&l| l < 2) {
            return Err(invalid("l", format!("need at least 2 levels, got {l}")));
        }
        if self.trials.contains(&0) {
            return Err(invalid("m", "need at least one binomial trial"));
        }
        for (name, v) in [("G", self.bound), ("D", self.clip)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// `(d/n²)·Σ_i s_i²·(1/4 + m_i·p(1-p))`
    pub fn mse_bound(&self, p: f64, d: usize) -> f64 {
        let n = self.levels.len() as f64;
        let sum: f64 = (0..self.levels.len())
            .map(|i| {
                let s = self.step(i);
                s * s * (0.25 + self.trials[i] as f64 * p * (1.0 - p))
            })
            .sum();
        d as f64 / (n * n) * sum
    }
}

/// Which parts of the client pipeline are applied. Only `Full` is the
/// protocol; the others isolate one noise source for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pipeline {
    Full,
    QuantizeOnly,
    NoiseOnly,
}

/// Server-side view of one round of transmissions.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    /// `ḡ = (1/n) Σ_i m_i`
    pub estimate: Vec<f64>,
    /// `g = (1/n) Σ_i clip(g_i)`
    pub target: Vec<f64>,
}

impl Aggregate {
    pub fn squared_error(&self) -> f64 {
        self.estimate
            .iter()
            .zip(&self.target)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// Quantize, perturb and average the clipped client gradients. Client `i`
/// draws from the `(seed, i, round)` streams only.
pub fn transmit(
    clipped: &[Clipped],
    plan: &RoundPlan,
    p: f64,
    seed: u64,
    round: u32,
    pipeline: Pipeline,
) -> Result<Aggregate> {
    let n = clipped.len();
    plan.check(n)?;
    let messages: Vec<Vec<f64>> = clipped
        .par_iter()
        .enumerate()
        .map(|(i, c)| -> Result<Vec<f64>> {
            let client = i as u32;
            let qcfg = QuantizerConfig::new(plan.bound, plan.levels[i])?;
            let mech = BinomialMechanism::new(plan.trials[i], p, qcfg.step())?;
            let qseed = RngSeed::new(seed, client, round, Purpose::Quantize);
            let nseed = RngSeed::new(seed, client, round, Purpose::Binomial);
            match pipeline {
                Pipeline::Full => {
                    let q = quantize_vector(&c.gradient, &qcfg, &qseed)?;
                    Ok(perturb(&q, &mech, &nseed)?.values)
                }
                Pipeline::QuantizeOnly => Ok(quantize_vector(&c.gradient, &qcfg, &qseed)?.values()),
                Pipeline::NoiseOnly => {
                    // same noise law applied around the unquantized gradient
                    let zero = quantize_vector(&GradientVector::zeros(c.gradient.dim()), &qcfg, &qseed)?;
                    let noisy = perturb(&zero, &mech, &nseed)?;
                    let offset = zero.values();
                    Ok(c.gradient
                        .as_slice()
                        .iter()
                        .zip(noisy.values.iter().zip(offset))
                        .map(|(g, (v, o))| g + (v - o))
                        .collect())
                }
            }
        })
        .collect::<Result<_>>()?;

    let d = clipped[0].gradient.dim();
    let inv = 1.0 / n as f64;
    let mut estimate = vec![0.0; d];
    let mut target = vec![0.0; d];
    for (msg, c) in messages.iter().zip(clipped) {
        for j in 0..d {
            estimate[j] += msg[j] * inv;
            target[j] += c.gradient[j] * inv;
        }
    }
    Ok(Aggregate { estimate, target })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub low_sample_warning: bool,
}

/// Monte-Carlo estimate of `E‖ḡ - g‖²` with `w` frozen; resample `k` uses
/// round index `k`.
pub fn empirical_mse(
    task: &RidgeTask,
    w: &ModelVector,
    plan: &RoundPlan,
    p: f64,
    seed: u64,
    samples: usize,
    pipeline: Pipeline,
) -> Result<MseEstimate> {
    if samples == 0 {
        return Err(invalid("samples", "need at least one resample"));
    }
    let clipped = task.clipped_gradients(w, plan.bound, plan.clip)?;
    let errors: Vec<f64> = (0..samples)
        .map(|k| transmit(&clipped, plan, p, seed, k as u32, pipeline).map(|a| a.squared_error()))
        .collect::<Result<_>>()?;
    Ok(summarize(&errors))
}

pub(crate) fn summarize(xs: &[f64]) -> MseEstimate {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    MseEstimate {
        mean,
        std_error: (var / n as f64).sqrt(),
        samples: n,
        low_sample_warning: n < MIN_MSE_SAMPLES,
    }
}

/// `(2μ/(λ²T²))·Σ_t [Σ_i d·G_t²/(n²(l_i-1)²)·(p(1-p)m_i + 1/4) + D_t²]`
pub fn convergence_bound(
    rounds: usize,
    n: usize,
    d: usize,
    schedule: &[RoundPlan],
    p: f64,
    lambda: f64,
    mu: f64,
) -> Result<f64> {
    if rounds == 0 {
        return Err(invalid("T", "need at least one round"));
    }
    if schedule.len() != rounds {
        return Err(Error::DimensionMismatch {
            expected: rounds,
            actual: schedule.len(),
        });
    }
    if n == 0 || d == 0 {
        return Err(invalid("n", "client count and dimension must be positive"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", format!("must lie in (0, 1), got {p}")));
    }
    for (name, v) in [("lambda", lambda), ("mu", mu)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(name, format!("must be finite and > 0, got {v}")));
        }
    }
    let nf = n as f64;
    let mut total = 0.0;
    for plan in schedule {
        plan.check(n)?;
        let g2 = plan.bound * plan.bound;
        let quant: f64 = plan
            .levels
            .iter()
            .zip(&plan.trials)
            .map(|(&l, &m)| {
                let lm1 = (l - 1) as f64;
                d as f64 * g2 / (nf * nf * lm1 * lm1) * (p * (1.0 - p) * m as f64 + 0.25)
            })
            .sum();
        total += quant + plan.clip * plan.clip;
    }
    let t = rounds as f64;
    Ok(2.0 * mu / (lambda * lambda * t * t) * total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub loss: f64,
    /// `ℓ̄(w^t) - ℓ̄(w*)`
    pub gap: f64,
    /// Norm of the averaged clipped gradient.
    pub grad_norm: f64,
    /// `‖ḡ - g‖²` for this round's draw.
    pub mse_empirical: f64,
    pub mse_bound: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    pub rounds: usize,
    /// Strong-convexity constant; sets `γ_t = 1/(λt)`.
    pub lambda: f64,
    pub mu: f64,
    pub p: f64,
    pub seed: u64,
    /// One plan per round, or a single plan reused for every round.
    pub schedule: Vec<RoundPlan>,
}

impl TrainerConfig {
    pub fn plan(&self, t: usize) -> &RoundPlan {
        if self.schedule.len() == 1 {
            &self.schedule[0]
        } else {
            &self.schedule[t - 1]
        }
    }

    pub fn gamma(&self, t: usize) -> f64 {
        1.0 / (self.lambda * t as f64)
    }

    /// The schedule expanded to one plan per round.
    pub fn full_schedule(&self) -> Vec<RoundPlan> {
        (1..=self.rounds).map(|t| self.plan(t).clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub t: usize,
    pub w: ModelVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRun {
    pub records: Vec<RoundRecord>,
    pub final_model: ModelVector,
    pub optimum_loss: f64,
    /// Clipping changed some client gradient in some round.
    pub clipping_activated: bool,
}

impl TrainingRun {
    pub fn final_loss(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.loss)
    }

    pub fn final_gap(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.gap)
    }
}

pub struct Trainer {
    task: RidgeTask,
    config: TrainerConfig,
    epsilons: Vec<f64>,
    optimum_loss: f64,
}

impl Trainer {
    /// Fails with [`Error::InfeasibleAllocation`] unless every round's rates
    /// lie inside the capacity region.
    pub fn new(
        task: RidgeTask,
        config: TrainerConfig,
        channel: &ChannelConfig,
        accountant: &Accountant,
    ) -> Result<Self> {
        if config.rounds == 0 {
            return Err(invalid("T", "need at least one round"));
        }
        if config.schedule.is_empty()
            || (config.schedule.len() != 1 && config.schedule.len() != config.rounds)
        {
            return Err(invalid("schedule", "need one plan, or one plan per round"));
        }
        if config.rounds > u32::MAX as usize {
            return Err(invalid("T", "too many rounds"));
        }
        for (name, v) in [("lambda", config.lambda), ("mu", config.mu)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        let n = task.clients();
        if channel.clients() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: channel.clients(),
            });
        }
        let d = task.dim();
        let mut epsilons = Vec::with_capacity(config.schedule.len());
        for plan in &config.schedule {
            plan.check(n)?;
            let rates = plan
                .levels
                .iter()
                .zip(&plan.trials)
                .map(|(&l, &m)| rate_of(l, m, d, channel.uses()))
                .collect::<Result<Vec<_>>>()?;
            let f = feasible(&RateVector::new(rates)?, channel)?;
            if !f.ok {
                let worst: Vec<String> = f.violated().map(|s| s.subset.to_string()).collect();
                return Err(Error::InfeasibleAllocation(format!(
                    "rates exceed capacity on subsets {}",
                    worst.join(" ")
                )));
            }
            let acc = Accountant {
                bound: plan.bound,
                clip: plan.clip,
                ..*accountant
            };
            epsilons.push(acc.report(&plan.levels, &plan.trials)?.epsilon);
        }
        let optimum_loss = task.loss(&task.optimum()?)?;
        Ok(Self {
            task,
            config,
            epsilons,
            optimum_loss,
        })
    }

    pub fn task(&self) -> &RidgeTask {
        &self.task
    }

    pub fn config(&self) -> &TrainerConfig {
        &self.config
    }

    pub fn optimum_loss(&self) -> f64 {
        self.optimum_loss
    }

    pub fn initial_state(&self) -> TrainState {
        TrainState {
            t: 0,
            w: ModelVector::zeros(self.task.dim()),
        }
    }

    fn epsilon(&self, t: usize) -> f64 {
        if self.epsilons.len() == 1 {
            self.epsilons[0]
        } else {
            self.epsilons[t - 1]
        }
    }

    /// Runs round `state.t + 1`.
    pub fn run_round(&self, state: &TrainState) -> Result<(TrainState, RoundRecord)> {
        let t = state.t + 1;
        if t > self.config.rounds {
            return Err(invalid("T", format!("round {t} beyond configured {}", self.config.rounds)));
        }
        let plan = self.config.plan(t);
        let clipped = self.task.clipped_gradients(&state.w, plan.bound, plan.clip)?;
        let agg = transmit(&clipped, plan, self.config.p, self.config.seed, t as u32, Pipeline::Full)?;
        let gamma = self.config.gamma(t);
        let next: Vec<f64> = state
            .w
            .as_slice()
            .iter()
            .zip(&agg.estimate)
            .map(|(w, g)| w - gamma * g)
            .collect();
        let w = ModelVector::new(next)?;
        let loss = self.task.loss(&w)?;
        let record = RoundRecord {
            t,
            loss,
            gap: loss - self.optimum_loss,
            grad_norm: norm_sq(&agg.target).sqrt(),
            mse_empirical: agg.squared_error(),
            mse_bound: plan.mse_bound(self.config.p, self.task.dim()),
            epsilon: self.epsilon(t),
            gamma,
            clipped: clipped.iter().any(Clipped::active),
        };
        Ok((TrainState { t, w }, record))
    }

    pub fn run(&self) -> Result<TrainingRun> {
        let mut state = self.initial_state();
        let mut records = Vec::with_capacity(self.config.rounds);
        for _ in 0..self.config.rounds {
            let (next, rec) = self.run_round(&state)?;
            records.push(rec);
            state = next;
        }
        let clipping_activated = records.iter().any(|r| r.clipped);
        Ok(TrainingRun {
            records,
            final_model: state.w,
            optimum_loss: self.optimum_loss,
            clipping_activated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(point: &[f64], label: f64) -> DataSample {
        DataSample::new(point.to_vec(), label).unwrap()
    }

    #[test]
    fn loss_examples() {
        let data = vec![sample(&[1.0, 0.0], 2.0), sample(&[0.0, 1.0], -1.0)];
        let zero = ModelVector::zeros(2);
        assert_eq!(ridge_loss(&zero, &data, 0.3).unwrap(), 2.5);
        let fit = vec![sample(&[1.0, 0.0], 1.0)];
        let e1 = ModelVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(ridge_loss(&e1, &fit, 0.0).unwrap(), 0.0);
        assert!(ridge_loss(&ModelVector::zeros(3), &data, 0.0).is_err());
    }

    #[test]
    fn zero_labels_zero_gradient() {
        let ds = ClientDataset::new(0, vec![sample(&[1.0, 2.0], 0.0), sample(&[-3.0, 0.5], 0.0)]).unwrap();
        let g = local_gradient(&ModelVector::zeros(2), &ds, 0.1).unwrap();
        assert!(g.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn clip_examples() {
        let g = GradientVector::new(vec![1.0, -2.0]).unwrap();
        let c = clip(&g, 4.0, 4.0);
        assert_eq!(c.gradient, g);
        assert!(!c.active());

        let g = GradientVector::new(vec![8.0, 0.0, 0.0]).unwrap();
        let c = clip(&g, 5.0, 4.0);
        assert_eq!(c.gradient.as_slice(), &[4.0, 0.0, 0.0]);
        assert!(c.norm_scaled && !c.clamped);

        let g = GradientVector::new(vec![3.0, 3.0]).unwrap();
        let c = clip(&g, 1.0, 1e9);
        assert_eq!(c.gradient.as_slice(), &[1.0, 1.0]);
        assert!(c.clamped && !c.norm_scaled);
    }

    #[test]
    fn synthesize_shapes_and_determinism() {
        let a = synthesize_data(2, 10, &[5000, 5000], 7).unwrap();
        assert_eq!(a.iter().map(ClientDataset::len).collect::<Vec<_>>(), vec![5000, 5000]);
        assert_eq!(a, synthesize_data(2, 10, &[5000, 5000], 7).unwrap());
        assert_ne!(a, synthesize_data(2, 10, &[5000, 5000], 8).unwrap());
        assert!(synthesize_data(2, 10, &[10], 7).is_err());
        assert!(synthesize_data(1, 10, &[0], 7).is_err());

        let all: Vec<&DataSample> = a.iter().flat_map(|ds| ds.samples()).collect();
        let band = 3.0 / (all.len() as f64).sqrt();
        for j in 0..=10 {
            let mean = all
                .iter()
                .map(|s| if j < 10 { s.point[j] } else { s.label })
                .sum::<f64>()
                / all.len() as f64;
            assert!(mean.abs() < band, "coordinate {j} mean {mean}");
        }
    }

    #[test]
    fn convergence_bound_examples() {
        let plan = RoundPlan {
            bound: 1.0,
            clip: 1.0,
            levels: vec![2],
            trials: vec![1],
        };
        let one = convergence_bound(1, 1, 1, std::slice::from_ref(&plan), 0.5, 1.0, 1.0).unwrap();
        assert_eq!(one, 3.0);

        let p3 = RoundPlan {
            bound: 4.0,
            clip: 4.0,
            levels: vec![5, 7],
            trials: vec![900, 1200],
        };
        let t10 = convergence_bound(10, 2, 10, &vec![p3.clone(); 10], 0.5, 2.0, 3.0).unwrap();
        let t20 = convergence_bound(20, 2, 10, &vec![p3.clone(); 20], 0.5, 2.0, 3.0).unwrap();
        assert!((t20 - t10 / 2.0).abs() < 1e-12 * t10);

        let huge = RoundPlan {
            levels: vec![1 << 40, 1 << 40],
            ..p3
        };
        let b = convergence_bound(10, 2, 10, &vec![huge; 10], 0.5, 2.0, 3.0).unwrap();
        let floor = 2.0 * 3.0 / (4.0 * 100.0) * 10.0 * 16.0;
        assert!((b - floor).abs() < 1e-6 * floor);

        assert!(convergence_bound(2, 1, 1, &[plan], 0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn mse_bound_formula() {
        let plan = RoundPlan {
            bound: 4.0,
            clip: 4.0,
            levels: vec![3, 5],
            trials: vec![4, 8],
        };
        // s = 4 and 2
        let expect = 10.0 / 4.0 * (16.0 * (0.25 + 1.0) + 4.0 * (0.25 + 2.0));
        assert!((plan.mse_bound(0.5, 10) - expect).abs() < 1e-12);
    }
}
