//! Experiment configuration.
//!
//! The on-disk format is TOML with one key per model parameter:
//!
//! ```toml
//! n = 2
//! d = 10
//! T = 100
//! N = 40
//! power = [10.0, 10.0]   # or: snr_db = 10.0
//! G = 4.0
//! D = 4.0
//! p = 0.5
//! delta = 0.01
//! eps_budget = 4.0       # `inf` disables the privacy constraint
//! beta = 0.001
//! seed = 1
//! ```
//!
//! Optional keys: `lambda`, `mu` (default: extreme eigenvalues of the data
//! Hessian), `b_p`, `c_p` (mechanism constants), `l_max`, `m_max` (allocator
//! search caps), `samples` (total dataset size, default 10 000, split evenly).
//! Unknown keys are rejected.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{snr_db_to_power, ChannelConfig, MAX_CLIENTS};
use crate::privacy::MechanismConstants;

pub const DEFAULT_SAMPLES: i64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: i64,
    pub d: i64,
    #[serde(rename = "T")]
    pub rounds: i64,
    #[serde(rename = "N")]
    pub channel_uses: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(rename = "G")]
    pub bound: f64,
    #[serde(rename = "D")]
    pub clip: f64,
    pub p: f64,
    pub delta: f64,
    pub eps_budget: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub beta: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_max: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

/// Every violated constraint of a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigErrors(pub Vec<FieldError>);

impl ConfigErrors {
    pub fn fields(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|e| e.field.as_str())
    }

    pub fn has(&self, field: &str) -> bool {
        self.fields().any(|f| f == field)
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} configuration error(s)", self.0.len())?;
        for e in &self.0 {
            write!(f, "; {}: {}", e.field, e.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// A configuration that passed [`ExperimentConfig::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment {
    pub n: usize,
    pub d: usize,
    pub rounds: usize,
    pub channel: ChannelConfig,
    pub bound: f64,
    pub clip: f64,
    pub p: f64,
    pub delta: f64,
    pub eps_budget: f64,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub beta: f64,
    pub seed: u64,
    pub consts: MechanismConstants,
    pub l_max: Option<u64>,
    pub m_max: Option<u64>,
    pub samples: usize,
    pub raw: ExperimentConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigErrors> {
        toml::from_str(text).map_err(|e| {
            ConfigErrors(vec![FieldError {
                field: "<parse>".into(),
                message: e.message().to_string(),
            }])
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every constraint and reports all violations at once.
    pub fn validate(&self) -> Result<Experiment, ConfigErrors> {
        let mut errs = Vec::new();
        let mut fail = |field: &str, message: String| {
            errs.push(FieldError {
                field: field.into(),
                message,
            })
        };

        if self.n < 1 || self.n > MAX_CLIENTS as i64 {
            fail("n", format!("must be in [1, {MAX_CLIENTS}], got {}", self.n));
        }
        if self.d < 1 {
            fail("d", format!("must be >= 1, got {}", self.d));
        }
        if self.rounds < 1 || self.rounds > i64::from(u32::MAX) {
            fail("T", format!("must be >= 1, got {}", self.rounds));
        }
        if self.channel_uses < 1 {
            fail("N", format!("must be >= 1, got {}", self.channel_uses));
        }
        let powers = match (&self.power, self.snr_db) {
            (Some(_), Some(_)) => {
                fail("power", "give either `power` or `snr_db`, not both".into());
                None
            }
            (None, None) => {
                fail("power", "one of `power` or `snr_db` is required".into());
                None
            }
            (Some(p), None) => {
                if self.n >= 1 && p.len() as i64 != self.n {
                    fail("power", format!("expected {} entries, got {}", self.n, p.len()));
                }
                if let Some(bad) = p.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                    fail("power", format!("every P_i must be > 0, got {bad}"));
                }
                Some(p.clone())
            }
            (None, Some(db)) => {
                if !db.is_finite() {
                    fail("snr_db", format!("must be finite, got {db}"));
                }
                Some(vec![snr_db_to_power(db); self.n.max(0) as usize])
            }
        };
        positive(&mut fail, "G", self.bound);
        positive(&mut fail, "D", self.clip);
        if !(self.p > 0.0 && self.p < 1.0) {
            fail("p", format!("must lie in (0, 1), got {}", self.p));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            fail("delta", format!("must lie in (0, 1), got {}", self.delta));
        }
        if self.eps_budget.is_nan() || self.eps_budget <= 0.0 {
            fail("eps_budget", format!("must be > 0, got {}", self.eps_budget));
        }
        if let Some(l) = self.lambda {
            positive(&mut fail, "lambda", l);
        }
        if let Some(m) = self.mu {
            positive(&mut fail, "mu", m);
        }
        positive(&mut fail, "beta", self.beta);
        for (name, v) in [("b_p", self.b_p), ("c_p", self.c_p)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    fail(name, format!("must be finite and >= 0, got {v}"));
                }
            }
        }
        if let Some(l) = self.l_max {
            if l < 2 {
                fail("l_max", format!("quantization needs l >= 2, got {l}"));
            }
        }
        if let Some(m) = self.m_max {
            if m < 1 {
                fail("m_max", format!("must be >= 1, got {m}"));
            }
        }
        let samples = self.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples < self.n.max(1) {
            fail("samples", format!("need at least one sample per client, got {samples}"));
        }

        let channel = powers.and_then(|p| ChannelConfig::new(self.channel_uses.max(1) as u64, p).ok());
        if !errs.is_empty() {
            return Err(ConfigErrors(errs));
        }
        let consts = MechanismConstants::with_overrides(self.p, self.b_p, self.c_p)
            .expect("validated above");
        Ok(Experiment {
            n: self.n as usize,
            d: self.d as usize,
            rounds: self.rounds as usize,
            channel: channel.expect("validated above"),
            bound: self.bound,
            clip: self.clip,
            p: self.p,
            delta: self.delta,
            eps_budget: self.eps_budget,
            lambda: self.lambda,
            mu: self.mu,
            beta: self.beta,
            seed: self.seed,
            consts,
            l_max: self.l_max.map(|v| v as u64),
            m_max: self.m_max.map(|v| v as u64),
            samples: samples as usize,
            raw: self.clone(),
        })
    }

    /// The parameters used in the paper's simulation section.
    pub fn section4() -> Self {
        Self {
            n: 2,
            d: 10,
            rounds: 100,
            channel_uses: 40,
            power: Some(vec![10.0, 10.0]),
            snr_db: None,
            bound: 4.0,
            clip: 4.0,
            p: 0.5,
            delta: 0.01,
            eps_budget: 4.0,
            lambda: None,
            mu: None,
            beta: 1e-3,
            seed: 1,
            b_p: None,
            c_p: None,
            l_max: None,
            m_max: None,
            samples: None,
        }
    }
}

fn positive(fail: &mut impl FnMut(&str, String), field: &str, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        fail(field, format!("must be finite and > 0, got {v}"));
    }
}

impl Experiment {
    /// Even split of `samples` across clients, remainder to the first clients.
    pub fn client_sizes(&self) -> Vec<usize> {
        let base = self.samples / self.n;
        let extra = self.samples % self.n;
        (0..self.n).map(|i| base + usize::from(i < extra)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn section4_is_valid() {
        let e = ExperimentConfig::section4().validate().unwrap();
        assert_eq!((e.n, e.d, e.rounds, e.channel.uses()), (2, 10, 100, 40));
        assert_eq!(e.client_sizes(), vec![5000, 5000]);
        assert_eq!(e.channel.powers(), &[10.0, 10.0]);
    }

    #[test]
    fn degenerate_p_rejected() {
        let mut c = ExperimentConfig::section4();
        c.p = 0.0;
        let err = c.validate().unwrap_err();
        assert!(err.has("p"));
        assert_eq!(err.0.len(), 1);
    }

    #[test]
    fn level_floor_rejected() {
        let mut c = ExperimentConfig::section4();
        c.l_max = Some(1);
        assert!(c.validate().unwrap_err().has("l_max"));
    }

    #[test]
    fn all_violations_reported() {
        let mut c = ExperimentConfig::section4();
        c.n = 0;
        c.d = 0;
        c.delta = 1.5;
        c.bound = -1.0;
        c.lambda = Some(0.0);
        let err = c.validate().unwrap_err();
        for f in ["n", "d", "delta", "G", "lambda"] {
            assert!(err.has(f), "missing {f} in {err}");
        }
    }

    #[test]
    fn toml_roundtrip_and_unknown_keys() {
        let text = ExperimentConfig::section4().to_toml_string();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, ExperimentConfig::section4());
        let bad = format!("{text}\nlamda = 1.0\n");
        let err = ExperimentConfig::from_toml_str(&bad).unwrap_err();
        assert!(err.to_string().contains("lamda"), "{err}");
    }

    #[test]
    fn snr_db_and_infinite_budget() {
        let text = r#"
            n = 2
            d = 10
            T = 5
            N = 40
            snr_db = 0.0
            G = 4.0
            D = 4.0
            p = 0.5
            delta = 0.01
            eps_budget = inf
            beta = 0.001
            seed = 3
        "#;
        let e = ExperimentConfig::from_toml_str(text).unwrap().validate().unwrap();
        assert_eq!(e.channel.powers(), &[1.0, 1.0]);
        assert!(e.eps_budget.is_infinite());
    }

    #[test]
    fn power_and_snr_exclusive() {
        let mut c = ExperimentConfig::section4();
        c.snr_db = Some(10.0);
        assert!(c.validate().unwrap_err().has("power"));
        c.snr_db = None;
        c.power = Some(vec![10.0]);
        assert!(c.validate().unwrap_err().has("power"));
    }
}
