use std::ops::Deref;

use crate::error::{Error, Result};

/// A strictly positive, finite vector: the measurement field `p` or the model
/// field `q` that every divergence compares.
#[derive(Debug, Clone, PartialEq)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Shape {
                expected: 1,
                found: 0,
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::Domain { index, value });
        }
        Ok(Self(values))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    /// Component sum, accumulated left to right.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Multiplies every component by `factor` (must be positive).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * factor).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Field {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Field {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

/// Checks that two fields have the same length.
pub fn same_len(p: &Field, q: &Field) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::Shape {
            expected: p.len(),
            found: q.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_and_reports_index() {
        assert_eq!(
            Field::new(vec![1.0, 0.0, 2.0]),
            Err(Error::Domain {
                index: 1,
                value: 0.0
            })
        );
        assert!(matches!(
            Field::new(vec![1.0, f64::NAN]),
            Err(Error::Domain { index: 1, .. })
        ));
        assert!(matches!(Field::new(vec![]), Err(Error::Shape { .. })));
    }

    #[test]
    fn total_and_scale() {
        let f = Field::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(f.total(), 4.0);
        assert_eq!(f.scaled(2.0).unwrap().as_slice(), &[2.0, 6.0]);
        assert!(f.scaled(-1.0).is_err());
    }
}
