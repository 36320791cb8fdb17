//! Vector and dataset value types shared by the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(j) => Err(Error::NonFinite(j)),
        None => Ok(()),
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

macro_rules! real_vector {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        pub struct $name(Vec<f64>);

        impl $name {
            /// Fails on an empty vector or any NaN/Inf entry.
            pub fn new(values: Vec<f64>) -> Result<Self> {
                if values.is_empty() {
                    return Err(invalid("d", "vector dimension must be positive"));
                }
                check_finite(&values)?;
                Ok(Self(values))
            }

            pub fn zeros(d: usize) -> Self {
                Self(vec![0.0; d])
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }

            pub fn norm(&self) -> f64 {
                norm_sq(&self.0).sqrt()
            }

            #[allow(dead_code)]
            pub(crate) fn from_raw(values: Vec<f64>) -> Self {
                debug_assert!(values.iter().all(|v| v.is_finite()));
                Self(values)
            }
        }

        impl std::ops::Index<usize> for $name {
            type Output = f64;
            fn index(&self, j: usize) -> &f64 {
                &self.0[j]
            }
        }
    };
}

real_vector!(
    /// Model parameters `w`.
    ModelVector
);
real_vector!(
    /// A local or aggregated gradient.
    GradientVector
);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSample {
    pub point: Vec<f64>,
    pub label: f64,
}

impl DataSample {
    pub fn new(point: Vec<f64>, label: f64) -> Result<Self> {
        check_finite(&point)?;
        if !label.is_finite() {
            return Err(invalid("label", "must be finite"));
        }
        Ok(Self { point, label })
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }
}

/// The local dataset held by one client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientDataset {
    client_id: usize,
    samples: Vec<DataSample>,
}

impl ClientDataset {
    pub fn new(client_id: usize, samples: Vec<DataSample>) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(Error::EmptyDataset);
        };
        let d = first.dim();
        if d == 0 {
            return Err(invalid("d", "sample dimension must be positive"));
        }
        if let Some(bad) = samples.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: bad.dim(),
            });
        }
        Ok(Self { client_id, samples })
    }

    pub fn client_id(&self) -> usize {
        self.client_id
    }

    pub fn samples(&self) -> &[DataSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            ModelVector::new(vec![0.0, f64::NAN]),
            Err(Error::NonFinite(1))
        );
        assert!(GradientVector::new(vec![]).is_err());
        assert!(DataSample::new(vec![1.0], f64::INFINITY).is_err());
    }

    #[test]
    fn dataset_shape_checks() {
        assert_eq!(ClientDataset::new(0, vec![]), Err(Error::EmptyDataset));
        let a = DataSample::new(vec![1.0, 2.0], 0.0).unwrap();
        let b = DataSample::new(vec![1.0], 0.0).unwrap();
        assert!(matches!(
            ClientDataset::new(0, vec![a.clone(), b]),
            Err(Error::DimensionMismatch { expected: 2, actual: 1 })
        ));
        let ds = ClientDataset::new(3, vec![a]).unwrap();
        assert_eq!((ds.client_id(), ds.len(), ds.dim()), (3, 1, 2));
    }
}
