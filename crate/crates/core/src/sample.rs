use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where the values of a [`Sample`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Simulated,
    Generated,
    Ingested,
}

/// An ordered collection of finite observations of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    provenance: Provenance,
    seed_lineage: Vec<u64>,
}

impl Sample {
    pub fn new(values: Vec<f64>, provenance: Provenance, seed_lineage: Vec<u64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sample value at index {i} is not finite"
            )));
        }
        Ok(Self {
            values,
            provenance,
            seed_lineage,
        })
    }

    /// Wraps values that are already known to be finite.
    pub(crate) fn from_finite(values: Vec<f64>, provenance: Provenance, seed_lineage: Vec<u64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self {
            values,
            provenance,
            seed_lineage,
        }
    }

    pub fn ingested(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Provenance::Ingested, Vec::new())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn seed_lineage(&self) -> &[u64] {
        &self.seed_lineage
    }

    /// `(min, max)` of the values, or `None` when empty.
    pub fn range(&self) -> Option<(f64, f64)> {
        let first = *self.values.first()?;
        Some(
            self.values
                .iter()
                .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v))),
        )
    }

    pub fn mean(&self) -> Option<f64> {
        if self.values.is_empty() {
            return None;
        }
        Some(self.values.iter().sum::<f64>() / self.values.len() as f64)
    }

    /// Same values with a different provenance and lineage.
    pub fn relabel(self, provenance: Provenance, seed_lineage: Vec<u64>) -> Self {
        Self {
            values: self.values,
            provenance,
            seed_lineage,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = Sample::ingested(vec![1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(m) if m.contains("index 1")));
        assert!(Sample::ingested(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn range_and_mean() {
        let s = Sample::ingested(vec![3.0, -1.0, 4.0]).unwrap();
        assert_eq!(s.range(), Some((-1.0, 4.0)));
        assert_eq!(s.mean(), Some(2.0));
        assert_eq!(Sample::ingested(vec![]).unwrap().range(), None);
    }
}
