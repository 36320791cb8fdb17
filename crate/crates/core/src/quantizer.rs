//! Multi-level stochastic quantization.
//!
//! A coordinate `g ∈ [-G, G]` is rounded to one of the two neighbouring grid
//! points `B(r) = -G + r·s`, `s = 2G/(l-1)`, with probabilities chosen so the
//! result is unbiased. Grid values are always recomputed from the index, never
//! accumulated, so a quantized value maps back to its index exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::RngSeed;
use crate::types::GradientVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerConfig {
    bound: f64,
    levels: u64,
}

impl QuantizerConfig {
    pub fn new(bound: f64, levels: u64) -> Result<Self> {
        if !(bound.is_finite() && bound > 0.0) {
            return Err(invalid("G", format!("must be finite and > 0, got {bound}")));
        }
        if levels < 2 {
            return Err(invalid("l", format!("need at least 2 levels, got {levels}")));
        }
        Ok(Self { bound, levels })
    }

    /// Clipping bound `G`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Level count `l`.
    pub fn levels(&self) -> u64 {
        self.levels
    }

    /// Grid step `s = 2G/(l-1)`.
    pub fn step(&self) -> f64 {
        2.0 * self.bound / (self.levels - 1) as f64
    }

    fn grid(&self, r: u64) -> f64 {
        if r == self.levels - 1 {
            // exact top edge regardless of rounding in r·s
            self.bound
        } else {
            -self.bound + r as f64 * self.step()
        }
    }

    /// The bin value `B(r)`.
    pub fn bin(&self, r: u64) -> Result<f64> {
        if r >= self.levels {
            return Err(Error::BinIndex {
                index: r,
                max: self.levels - 1,
            });
        }
        Ok(self.grid(r))
    }

    /// Recovers the grid index of a value produced by this quantizer.
    pub fn index_of(&self, q: f64) -> Option<u64> {
        let r = ((q + self.bound) / self.step()).round();
        if !(0.0..self.levels as f64).contains(&r) {
            return None;
        }
        let r = r as u64;
        (self.grid(r) == q).then_some(r)
    }

    /// The exact two-point law used for `g`.
    pub fn two_point_law(&self, g: f64) -> Result<TwoPointLaw> {
        if !(g.is_finite() && g.abs() <= self.bound) {
            return Err(Error::OutOfRange {
                value: g,
                bound: self.bound,
            });
        }
        let top = self.levels - 1;
        if g == self.bound {
            return Ok(TwoPointLaw {
                lower_index: top,
                p_upper: 0.0,
                lower: self.bound,
                upper: self.bound,
            });
        }
        let s = self.step();
        let mut r = (((g + self.bound) / s).floor().max(0.0) as u64).min(top - 1);
        // settle float rounding so that g ∈ [B(r), B(r+1))
        while r > 0 && g < self.grid(r) {
            r -= 1;
        }
        while r + 1 < top && g >= self.grid(r + 1) {
            r += 1;
        }
        let lower = self.grid(r);
        let upper = self.grid(r + 1);
        Ok(TwoPointLaw {
            lower_index: r,
            p_upper: ((g - lower) / s).clamp(0.0, 1.0),
            lower,
            upper,
        })
    }
}

/// `Q(g) = upper` with probability `p_upper`, else `lower`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointLaw {
    pub lower_index: u64,
    pub p_upper: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TwoPointLaw {
    pub fn mean(&self) -> f64 {
        self.lower * (1.0 - self.p_upper) + self.upper * self.p_upper
    }

    pub fn variance(&self, g: f64) -> f64 {
        let dl = self.lower - g;
        let du = self.upper - g;
        dl * dl * (1.0 - self.p_upper) + du * du * self.p_upper
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.p_upper > 0.0 && rng.random::<f64>() < self.p_upper {
            self.lower_index + 1
        } else {
            self.lower_index
        }
    }
}

/// A vector whose every entry lies on the quantizer grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedVector {
    indices: Vec<u64>,
    config: QuantizerConfig,
}

impl QuantizedVector {
    pub fn from_indices(indices: Vec<u64>, config: QuantizerConfig) -> Result<Self> {
        if let Some(&r) = indices.iter().find(|&&r| r >= config.levels) {
            return Err(Error::BinIndex {
                index: r,
                max: config.levels - 1,
            });
        }
        Ok(Self { indices, config })
    }

    pub fn config(&self) -> &QuantizerConfig {
        &self.config
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn values(&self) -> Vec<f64> {
        self.indices.iter().map(|&r| self.config.grid(r)).collect()
    }
}

/// Quantizes one coordinate using draws from `rng`.
pub fn quantize_element<R: Rng + ?Sized>(
    g: f64,
    config: &QuantizerConfig,
    rng: &mut R,
) -> Result<f64> {
    let law = config.two_point_law(g)?;
    Ok(config.grid(law.sample(rng)))
}

/// Coordinate `j` draws from the `j`-th coordinate sub-stream of `seed`.
pub fn quantize_vector(
    g: &GradientVector,
    config: &QuantizerConfig,
    seed: &RngSeed,
) -> Result<QuantizedVector> {
    let indices = g
        .as_slice()
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let law = config.two_point_law(x)?;
            Ok(law.sample(&mut seed.coordinate(j)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantizedVector {
        indices,
        config: *config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Purpose;
    use proptest::prelude::*;

    fn cfg(g: f64, l: u64) -> QuantizerConfig {
        QuantizerConfig::new(g, l).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(QuantizerConfig::new(4.0, 1).is_err());
        assert!(QuantizerConfig::new(0.0, 3).is_err());
        assert!(QuantizerConfig::new(f64::NAN, 3).is_err());
        assert_eq!(cfg(4.0, 3).step(), 4.0);
        assert_eq!(cfg(4.0, 2).step(), 8.0);
    }

    #[test]
    fn bin_values() {
        assert_eq!(cfg(4.0, 3).bin(0).unwrap(), -4.0);
        assert_eq!(cfg(4.0, 3).bin(2).unwrap(), 4.0);
        assert_eq!(cfg(4.0, 2).bin(1).unwrap(), 4.0);
        assert!(matches!(
            cfg(4.0, 3).bin(3),
            Err(Error::BinIndex { index: 3, max: 2 })
        ));
    }

    #[test]
    fn element_edge_cases() {
        let c = cfg(4.0, 3);
        let mut rng = RngSeed::new(1, 0, 0, Purpose::Quantize).rng();
        for _ in 0..1000 {
            assert_eq!(quantize_element(4.0, &c, &mut rng).unwrap(), 4.0);
            assert_eq!(quantize_element(0.0, &c, &mut rng).unwrap(), 0.0);
            assert_eq!(quantize_element(-4.0, &c, &mut rng).unwrap(), -4.0);
        }
        assert!(matches!(
            quantize_element(4.5, &c, &mut rng),
            Err(Error::OutOfRange { .. })
        ));
        assert!(quantize_element(f64::NAN, &c, &mut rng).is_err());
    }

    #[test]
    fn two_point_law_at_one() {
        let law = cfg(4.0, 3).two_point_law(1.0).unwrap();
        assert_eq!((law.lower, law.upper), (0.0, 4.0));
        assert_eq!(law.p_upper, 0.25);
        assert_eq!(law.mean(), 1.0);
    }

    #[test]
    fn vector_edge_cases() {
        let seed = RngSeed::new(3, 0, 1, Purpose::Quantize);
        let c = cfg(4.0, 5);
        let zero = quantize_vector(&GradientVector::zeros(6), &c, &seed).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        let top = GradientVector::new(vec![4.0; 6]).unwrap();
        let q = quantize_vector(&top, &c, &seed).unwrap();
        assert!(q.values().iter().all(|&v| v == 4.0));
    }

    #[test]
    fn vector_monte_carlo_unbiased() {
        let c = cfg(4.0, 3);
        let g = GradientVector::new(vec![1.0, -1.0]).unwrap();
        let runs = 100_000u32;
        let mut sum = [0.0; 2];
        for t in 0..runs {
            let q = quantize_vector(&g, &c, &RngSeed::new(11, 0, t, Purpose::Quantize)).unwrap();
            for (acc, v) in sum.iter_mut().zip(q.values()) {
                *acc += v;
            }
        }
        let band = 3.0 * (c.step() / 2.0) / f64::from(runs).sqrt();
        assert!((sum[0] / f64::from(runs) - 1.0).abs() < band);
        assert!((sum[1] / f64::from(runs) + 1.0).abs() < band);
    }

    #[test]
    fn coordinate_draws_independent_of_neighbours() {
        let c = cfg(1.0, 4);
        let seed = RngSeed::new(8, 2, 5, Purpose::Quantize);
        let a = GradientVector::new(vec![0.1, 0.3, -0.7]).unwrap();
        let b = GradientVector::new(vec![0.9, 0.3, -0.7]).unwrap();
        let qa = quantize_vector(&a, &c, &seed).unwrap();
        let qb = quantize_vector(&b, &c, &seed).unwrap();
        assert_eq!(qa.indices()[1..], qb.indices()[1..]);
    }

    proptest! {
        #[test]
        fn law_is_unbiased_and_bounded(g_frac in -1.0f64..=1.0, bound in 0.01f64..100.0, l in 2u64..200) {
            let c = cfg(bound, l);
            let g = (g_frac * bound).clamp(-bound, bound);
            let law = c.two_point_law(g).unwrap();
            prop_assert!((law.mean() - g).abs() <= 1e-12 * bound.max(1.0));
            let s = c.step();
            prop_assert!(law.variance(g) <= s * s / 4.0 * (1.0 + 1e-9));
            if g < bound {
                prop_assert!(law.lower <= g && g < law.upper);
            }
        }

        #[test]
        fn output_on_grid(g_frac in -1.0f64..=1.0, l in 2u64..64, seed in any::<u64>()) {
            let c = cfg(3.5, l);
            let g = g_frac * 3.5;
            let mut rng = RngSeed::new(seed, 0, 0, Purpose::Quantize).rng();
            let q = quantize_element(g, &c, &mut rng).unwrap();
            let r = c.index_of(q);
            prop_assert!(r.is_some());
            prop_assert_eq!(c.bin(r.unwrap()).unwrap(), q);
        }
    }
}
