//! Binomial privacy mechanism and the per-round (ε, 2δ) accountant.
//!
//! Each client adds `s·(n - m·p)` to its quantized vector, `n_j ~ Bin(m, p)`
//! i.i.d. per coordinate. The accountant evaluates the closed-form ε bound,
//! which only applies once `m·p(1-p) ≥ max(23·ln(10d/δ), 2Δ∞/s)`. Below that
//! gate there is no guarantee, and every ε query fails with
//! [`Error::AccountantInvalid`].
//!
//! `b_p` and `c_p` are configurable. The defaults follow the cpSGD binomial
//! mechanism analysis:
//!
//! ```text
//! b_p = (2/3)(p² + (1-p)²) + (1 - 2p)
//! c_p = √2 · (3p³ + 3(1-p)³ + 2p² + 2(1-p)²)
//! d_p = (4/3)(p² + (1-p)²)
//! ```
//!
//! `d_p` is not configurable.

use std::fmt;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantizer::QuantizedVector;
use crate::rng::RngSeed;

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid("p", format!("must lie in (0, 1), got {p}")))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(invalid("delta", format!("must lie in (0, 1), got {delta}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialMechanism {
    trials: u64,
    p: f64,
    step: f64,
}

impl BinomialMechanism {
    pub fn new(trials: u64, p: f64, step: f64) -> Result<Self> {
        if trials == 0 {
            return Err(invalid("m", "need at least one binomial trial"));
        }
        check_probability(p)?;
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid("s", format!("step must be finite and > 0, got {step}")));
        }
        Ok(Self { trials, p, step })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// `m·p(1-p)`, the variance of one noise count.
    pub fn count_variance(&self) -> f64 {
        self.trials as f64 * self.p * (1.0 - self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismConstants {
    pub b_p: f64,
    pub c_p: f64,
    pub d_p: f64,
}

impl MechanismConstants {
    /// Default constants for success probability `p`.
    pub fn for_p(p: f64) -> Self {
        let q = 1.0 - p;
        let sq = p * p + q * q;
        Self {
            b_p: 2.0 / 3.0 * sq + (1.0 - 2.0 * p),
            c_p: std::f64::consts::SQRT_2 * (3.0 * p.powi(3) + 3.0 * q.powi(3) + 2.0 * sq),
            d_p: 4.0 / 3.0 * sq,
        }
    }

    pub fn with_overrides(p: f64, b_p: Option<f64>, c_p: Option<f64>) -> Result<Self> {
        check_probability(p)?;
        let mut c = Self::for_p(p);
        if let Some(b) = b_p {
            if !(b.is_finite() && b >= 0.0) {
                return Err(invalid("b_p", format!("must be finite and >= 0, got {b}")));
            }
            c.b_p = b;
        }
        if let Some(v) = c_p {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid("c_p", format!("must be finite and >= 0, got {v}")));
            }
            c.c_p = v;
        }
        Ok(c)
    }
}

/// Exact draw from `Bin(m, p)`.
pub fn sample_binomial<R: Rng + ?Sized>(m: u64, p: f64, rng: &mut R) -> Result<u64> {
    if m == 0 {
        return Err(invalid("m", "need at least one binomial trial"));
    }
    check_probability(p)?;
    let dist = Binomial::new(m, p).map_err(|e| invalid("p", e.to_string()))?;
    Ok(dist.sample(rng))
}

/// Output of the mechanism: the transmitted values plus the raw noise counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbedVector {
    pub values: Vec<f64>,
    pub counts: Vec<u64>,
}

/// `q + s·(n - m·p)`, coordinate `j` drawing from sub-stream `j` of `seed`.
pub fn perturb(
    q: &QuantizedVector,
    mech: &BinomialMechanism,
    seed: &RngSeed,
) -> Result<PerturbedVector> {
    let dist = Binomial::new(mech.trials, mech.p).map_err(|e| invalid("p", e.to_string()))?;
    let centre = mech.trials as f64 * mech.p;
    let counts: Vec<u64> = (0..q.dim())
        .map(|j| dist.sample(&mut seed.coordinate(j)))
        .collect();
    let values = q
        .values()
        .into_iter()
        .zip(&counts)
        .map(|(v, &n)| v + mech.step * (n as f64 - centre))
        .collect();
    Ok(PerturbedVector { values, counts })
}

/// High-probability ℓ∞/ℓ1/ℓ2 sensitivities of the quantized gradient,
/// measured in grid steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityBounds {
    pub delta_inf: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    /// `1 - δ`
    pub confidence: f64,
}

pub fn sensitivity_bounds(
    levels: u64,
    bound: f64,
    clip: f64,
    d: usize,
    delta: f64,
) -> Result<SensitivityBounds> {
    if levels < 2 {
        return Err(invalid("l", format!("need at least 2 levels, got {levels}")));
    }
    if !(bound.is_finite() && bound > 0.0) {
        return Err(invalid("G", format!("must be finite and > 0, got {bound}")));
    }
    if !(clip.is_finite() && clip > 0.0) {
        return Err(invalid("D", format!("must be finite and > 0, got {clip}")));
    }
    if d == 0 {
        return Err(invalid("d", "dimension must be positive"));
    }
    check_delta(delta)?;

    let lm1 = (levels - 1) as f64;
    let sqrt_d = (d as f64).sqrt();
    let ln2 = (2.0 / delta).ln();
    let cross = 2.0 * sqrt_d * clip * ln2 / bound * lm1;
    let delta_1 = sqrt_d * clip / bound * lm1 + cross.sqrt() + 4.0 / 3.0 * ln2;
    let delta_2 = clip / bound * lm1 + (delta_1 + cross).sqrt();
    Ok(SensitivityBounds {
        delta_inf: (levels + 1) as f64,
        delta_1,
        delta_2,
        confidence: 1.0 - delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateSide {
    /// `23·ln(10d/δ)`
    LogTerm,
    /// `2Δ∞/s`
    LevelTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateCheck {
    pub ok: bool,
    /// `m·p(1-p)`
    pub variance: f64,
    pub log_threshold: f64,
    pub level_threshold: f64,
}

impl GateCheck {
    /// The side of the max that dominates when the gate fails.
    pub fn failing_side(&self) -> Option<GateSide> {
        if self.ok {
            None
        } else if self.log_threshold >= self.level_threshold {
            Some(GateSide::LogTerm)
        } else {
            Some(GateSide::LevelTerm)
        }
    }

    pub fn required(&self) -> f64 {
        self.log_threshold.max(self.level_threshold)
    }

    pub fn failure(&self) -> Option<GateFailure> {
        self.failing_side().map(|side| GateFailure {
            side,
            variance: self.variance,
            required: self.required(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateFailure {
    pub side: GateSide,
    pub variance: f64,
    pub required: f64,
}

impl fmt::Display for GateFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            GateSide::LogTerm => "23·ln(10d/δ)",
            GateSide::LevelTerm => "2Δ∞/s",
        };
        write!(
            f,
            "m·p(1-p) = {:.6} below required {:.6} ({side} dominates)",
            self.variance, self.required
        )
    }
}

pub fn check_gate(
    mech: &BinomialMechanism,
    sens: &SensitivityBounds,
    d: usize,
    delta: f64,
) -> GateCheck {
    let variance = mech.count_variance();
    let log_threshold = 23.0 * (10.0 * d as f64 / delta).ln();
    let level_threshold = 2.0 * sens.delta_inf / mech.step;
    GateCheck {
        ok: variance >= log_threshold && variance >= level_threshold,
        variance,
        log_threshold,
        level_threshold,
    }
}

/// Tightest ε the bound guarantees for one client. Refuses below the gate.
pub fn epsilon_bound(
    sens: &SensitivityBounds,
    mech: &BinomialMechanism,
    consts: &MechanismConstants,
    d: usize,
    delta: f64,
) -> Result<f64> {
    check_delta(delta)?;
    let gate = check_gate(mech, sens, d, delta);
    if let Some(failure) = gate.failure() {
        return Err(Error::AccountantInvalid(failure));
    }
    let v = gate.variance;
    let ln_125 = (1.25 / delta).ln();
    let ln_10 = (10.0 / delta).ln();
    let ln_20d = (20.0 * d as f64 / delta).ln();

    let gaussian = sens.delta_2 * (2.0 * ln_125).sqrt() / v.sqrt();
    let cross = (sens.delta_2 * consts.c_p * (2.0 * ln_10).sqrt() + sens.delta_1 * consts.b_p)
        / (v * (1.0 - delta / 10.0));
    let tail = (2.0 / 3.0 * sens.delta_inf * ln_125 + sens.delta_inf * consts.d_p * ln_20d * ln_10)
        / v;
    Ok(gaussian + cross + tail)
}

/// Stateless ε accountant for one experiment's shared parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accountant {
    pub d: usize,
    pub delta: f64,
    pub p: f64,
    pub bound: f64,
    pub clip: f64,
    pub consts: MechanismConstants,
}

impl Accountant {
    pub fn new(
        d: usize,
        delta: f64,
        p: f64,
        bound: f64,
        clip: f64,
        consts: MechanismConstants,
    ) -> Result<Self> {
        // validates the shared arguments once
        sensitivity_bounds(2, bound, clip, d, delta)?;
        check_probability(p)?;
        Ok(Self {
            d,
            delta,
            p,
            bound,
            clip,
            consts,
        })
    }

    pub fn step(&self, levels: u64) -> f64 {
        2.0 * self.bound / (levels - 1) as f64
    }

    pub fn sensitivity(&self, levels: u64) -> Result<SensitivityBounds> {
        sensitivity_bounds(levels, self.bound, self.clip, self.d, self.delta)
    }

    pub fn mechanism(&self, levels: u64, trials: u64) -> Result<BinomialMechanism> {
        if levels < 2 {
            return Err(invalid("l", format!("need at least 2 levels, got {levels}")));
        }
        BinomialMechanism::new(trials, self.p, self.step(levels))
    }

    pub fn gate(&self, levels: u64, trials: u64) -> Result<GateCheck> {
        let sens = self.sensitivity(levels)?;
        Ok(check_gate(
            &self.mechanism(levels, trials)?,
            &sens,
            self.d,
            self.delta,
        ))
    }

    pub fn epsilon(&self, levels: u64, trials: u64) -> Result<f64> {
        let sens = self.sensitivity(levels)?;
        epsilon_bound(
            &sens,
            &self.mechanism(levels, trials)?,
            &self.consts,
            self.d,
            self.delta,
        )
    }

    /// Worst-client report for one round's allocation.
    pub fn report(&self, levels: &[u64], trials: &[u64]) -> Result<PrivacyReport> {
        if levels.len() != trials.len() {
            return Err(Error::DimensionMismatch {
                expected: levels.len(),
                actual: trials.len(),
            });
        }
        let mut per_client = Vec::with_capacity(levels.len());
        for (&l, &m) in levels.iter().zip(trials) {
            match self.epsilon(l, m) {
                Ok(e) => per_client.push(Some(e)),
                Err(Error::AccountantInvalid(_)) => per_client.push(None),
                Err(e) => return Err(e),
            }
        }
        let valid = per_client.iter().all(Option::is_some);
        let epsilon = if valid {
            per_client.iter().flatten().fold(0.0, |a: f64, &b| a.max(b))
        } else {
            f64::INFINITY
        };
        Ok(PrivacyReport {
            epsilon,
            delta_total: 2.0 * self.delta,
            valid,
            per_client,
            constants: self.consts,
        })
    }
}

/// `epsilon` is the worst client. It is infinite when any client sits below
/// the gate, in which case `valid` is false and that client's entry is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub epsilon: f64,
    pub delta_total: f64,
    pub valid: bool,
    pub per_client: Vec<Option<f64>>,
    pub constants: MechanismConstants,
}
