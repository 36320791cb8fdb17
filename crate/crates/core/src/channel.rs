//! Gaussian multiple-access channel: capacity region and rate feasibility.
//!
//! Transmission is modelled as error-free exactly when the rate vector lies in
//! the capacity region, `Σ_{i∈S} R_i ≤ ½·log₂(1 + Σ_{i∈S} P_i)` for every
//! nonempty subset `S`. The channel noise itself is never sampled.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest client count for which the 2ⁿ - 1 subset constraints are enumerated.
pub const MAX_CLIENTS: usize = 16;

/// Subsets closer than this to their capacity are reported as tight.
pub const TIGHT_TOLERANCE: f64 = 1e-9;

pub fn snr_db_to_power(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

pub fn power_to_snr_db(power: f64) -> f64 {
    10.0 * power.log10()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    uses: u64,
    powers: Vec<f64>,
}

impl ChannelConfig {
    pub fn new(uses: u64, powers: Vec<f64>) -> Result<Self> {
        if uses == 0 {
            return Err(invalid("N", "need at least one channel use"));
        }
        if powers.is_empty() || powers.len() > MAX_CLIENTS {
            return Err(invalid(
                "power",
                format!("need between 1 and {MAX_CLIENTS} clients, got {}", powers.len()),
            ));
        }
        if let Some(p) = powers.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(invalid("power", format!("powers must be finite and > 0, got {p}")));
        }
        Ok(Self { uses, powers })
    }

    pub fn uniform_snr_db(uses: u64, n: usize, snr_db: f64) -> Result<Self> {
        Self::new(uses, vec![snr_db_to_power(snr_db); n])
    }

    /// Channel uses per round, `N`.
    pub fn uses(&self) -> u64 {
        self.uses
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn clients(&self) -> usize {
        self.powers.len()
    }

    /// Every nonempty subset, in increasing bitmask order.
    pub fn subsets(&self) -> impl Iterator<Item = ClientSet> {
        (1u32..(1u32 << self.powers.len())).map(ClientSet)
    }
}

/// A set of client indices as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClientSet(pub u32);

impl ClientSet {
    pub fn from_ids(ids: &[usize]) -> Self {
        Self(ids.iter().fold(0, |acc, &i| acc | (1 << i)))
    }

    pub fn singleton(i: usize) -> Self {
        Self(1 << i)
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..32).filter(move |&i| self.contains(i))
    }
}

impl std::fmt::Display for ClientSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ids: Vec<String> = self.ids().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", ids.join(","))
    }
}

/// Sum capacity `C_S` in bits per channel use.
pub fn capacity(subset: ClientSet, config: &ChannelConfig) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let n = config.clients();
    if let Some(bad) = subset.ids().find(|&i| i >= n) {
        return Err(Error::UnknownClient { client: bad, n });
    }
    let total: f64 = subset.ids().map(|i| config.powers[i]).sum();
    Ok(0.5 * (1.0 + total).log2())
}

/// `R = d·log₂(l + m)/N` bits per channel use.
pub fn rate_of(levels: u64, trials: u64, d: usize, uses: u64) -> Result<f64> {
    if levels < 2 {
        return Err(invalid("l", format!("need at least 2 levels, got {levels}")));
    }
    if trials == 0 {
        return Err(invalid("m", "need at least one binomial trial"));
    }
    if d == 0 || uses == 0 {
        return Err(invalid("d", "dimension and channel uses must be positive"));
    }
    Ok(alphabet_rate(levels + trials, d, uses))
}

/// Rate of sending `d` symbols from an alphabet of the given size over `N` uses.
pub fn alphabet_rate(alphabet: u64, d: usize, uses: u64) -> f64 {
    d as f64 * (alphabet as f64).log2() / uses as f64
}

/// Largest alphabet whose rate fits within `capacity`; 0 if none does.
pub fn max_alphabet(capacity: f64, d: usize, uses: u64) -> u64 {
    const CEILING: u64 = 1 << 62;
    let bits = capacity * uses as f64 / d as f64;
    let mut a = if bits >= 62.0 {
        CEILING
    } else {
        bits.exp2().floor() as u64
    };
    while a >= 1 && alphabet_rate(a, d, uses) > capacity {
        a -= 1;
    }
    while a < CEILING && alphabet_rate(a + 1, d, uses) <= capacity {
        a += 1;
    }
    a
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateVector(Vec<f64>);

impl RateVector {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(invalid("rates", format!("rates must be finite and >= 0, got {r}")));
        }
        Ok(Self(rates))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetSlack {
    pub subset: ClientSet,
    pub load: f64,
    pub capacity: f64,
}

impl SubsetSlack {
    /// `C_S - Σ_{i∈S} R_i`; negative means violated.
    pub fn slack(&self) -> f64 {
        self.capacity - self.load
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub ok: bool,
    /// One entry per nonempty subset, in bitmask order.
    pub subsets: Vec<SubsetSlack>,
}

impl Feasibility {
    pub fn violated(&self) -> impl Iterator<Item = &SubsetSlack> {
        self.subsets.iter().filter(|s| s.load > s.capacity)
    }

    pub fn tight(&self) -> impl Iterator<Item = &SubsetSlack> {
        self.subsets
            .iter()
            .filter(|s| s.slack().abs() <= TIGHT_TOLERANCE)
    }
}

pub fn feasible(rates: &RateVector, config: &ChannelConfig) -> Result<Feasibility> {
    if rates.0.len() != config.clients() {
        return Err(Error::DimensionMismatch {
            expected: config.clients(),
            actual: rates.0.len(),
        });
    }
    let subsets = config
        .subsets()
        .map(|s| {
            Ok(SubsetSlack {
                subset: s,
                load: s.ids().map(|i| rates.0[i]).sum(),
                capacity: capacity(s, config)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Feasibility {
        ok: subsets.iter().all(|s| s.load <= s.capacity),
        subsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn section4() -> ChannelConfig {
        ChannelConfig::new(40, vec![10.0, 10.0]).unwrap()
    }

    #[test]
    fn capacity_examples() {
        let c = section4();
        let both = capacity(ClientSet::from_ids(&[0, 1]), &c).unwrap();
        assert!((both - 0.5 * 21f64.log2()).abs() < 1e-15);
        assert!((both - 2.1962).abs() < 1e-4);
        let one = capacity(ClientSet::singleton(0), &c).unwrap();
        assert!((one - 1.7297).abs() < 1e-4);
        let weak = ChannelConfig::new(1, vec![1e-12]).unwrap();
        let z = capacity(ClientSet::singleton(0), &weak).unwrap();
        assert!(z > 0.0 && z < 1e-11);
        assert_eq!(capacity(ClientSet(0), &c), Err(Error::EmptySubset));
        assert!(matches!(
            capacity(ClientSet::singleton(2), &c),
            Err(Error::UnknownClient { client: 2, n: 2 })
        ));
    }

    #[test]
    fn rate_examples() {
        assert_eq!(rate_of(2, 2, 10, 40).unwrap(), 0.5);
        assert!((rate_of(2, 1, 1, 1).unwrap() - 3f64.log2()).abs() < 1e-15);
        assert!(rate_of(3, 2, 10, 40).unwrap() > rate_of(2, 2, 10, 40).unwrap());
        assert!(rate_of(2, 3, 10, 40).unwrap() > rate_of(2, 2, 10, 40).unwrap());
        assert!(rate_of(1, 2, 10, 40).is_err());
        assert!(rate_of(2, 0, 10, 40).is_err());
    }

    #[test]
    fn max_alphabet_matches_rate() {
        let c = section4();
        let cap = capacity(ClientSet::singleton(0), &c).unwrap();
        let a = max_alphabet(cap, 10, 40);
        assert_eq!(a, 121);
        assert!(alphabet_rate(a, 10, 40) <= cap);
        assert!(alphabet_rate(a + 1, 10, 40) > cap);
        assert_eq!(max_alphabet(0.0, 10, 40), 1);
    }

    #[test]
    fn feasibility_examples() {
        let c = section4();
        let zero = feasible(&RateVector::new(vec![0.0, 0.0]).unwrap(), &c).unwrap();
        assert!(zero.ok);
        assert_eq!(zero.subsets.len(), 3);
        let over = feasible(&RateVector::new(vec![2.0, 1.0]).unwrap(), &c).unwrap();
        assert!(!over.ok);
        let bad: Vec<_> = over.violated().map(|s| s.subset).collect();
        // 2.0 also exceeds the single-user capacity 1.7297
        assert_eq!(bad, vec![ClientSet::from_ids(&[0]), ClientSet::from_ids(&[0, 1])]);
        let ok = feasible(&RateVector::new(vec![1.0, 1.0]).unwrap(), &c).unwrap();
        assert!(ok.ok);
        assert_eq!(ok.violated().count(), 0);
    }

    #[test]
    fn tight_subsets_reported() {
        let c = section4();
        let cap = capacity(ClientSet::from_ids(&[0, 1]), &c).unwrap();
        let f = feasible(&RateVector::new(vec![cap / 2.0, cap / 2.0]).unwrap(), &c).unwrap();
        assert!(f.ok);
        let tight: Vec<_> = f.tight().map(|s| s.subset).collect();
        assert_eq!(tight, vec![ClientSet::from_ids(&[0, 1])]);
    }

    #[test]
    fn subset_count_and_power_scaling() {
        for n in 1..=6 {
            let c = ChannelConfig::new(10, vec![1.0; n]).unwrap();
            assert_eq!(c.subsets().count(), (1 << n) - 1);
            let doubled = ChannelConfig::new(10, vec![2.0; n]).unwrap();
            for s in c.subsets() {
                assert!(capacity(s, &doubled).unwrap() > capacity(s, &c).unwrap());
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(ChannelConfig::new(0, vec![1.0]).is_err());
        assert!(ChannelConfig::new(1, vec![]).is_err());
        assert!(ChannelConfig::new(1, vec![0.0]).is_err());
        assert!(ChannelConfig::new(1, vec![1.0; 17]).is_err());
        assert!((snr_db_to_power(10.0) - 10.0).abs() < 1e-12);
        assert!((power_to_snr_db(10.0) - 10.0).abs() < 1e-12);
    }
}
