use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Objective values of one solution, all minimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    /// Requires at least two objectives, all finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 objectives, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite objective value {v}")));
        }
        Ok(ObjectiveVector(values))
    }

    /// Unchecked construction for values produced by trusted arithmetic.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        debug_assert!(values.len() >= 2 && values.iter().all(|v| v.is_finite()));
        ObjectiveVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Pareto dominance under minimization.
    pub fn dominates(&self, other: &ObjectiveVector) -> Result<bool> {
        if self.len() != other.len() {
            return Err(Error::dims(self.len(), other.len()));
        }
        Ok(dominates_slice(&self.0, &other.0))
    }
}

impl Index<usize> for ObjectiveVector {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl TryFrom<Vec<f64>> for ObjectiveVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        ObjectiveVector::new(values)
    }
}

/// `a` dominates `b`: no worse everywhere and strictly better somewhere.
/// Callers guarantee equal lengths.
pub fn dominates_slice(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Free-function form of [`ObjectiveVector::dominates`].
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<bool> {
    a.dominates(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ov(v: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&ov(&[1.0, 1.0]), &ov(&[2.0, 2.0])).unwrap());
        assert!(!dominates(&ov(&[1.0, 1.0]), &ov(&[1.0, 1.0])).unwrap());
        // 1 < 2 but 3 > 2: incomparable
        assert!(!dominates(&ov(&[1.0, 3.0]), &ov(&[2.0, 2.0])).unwrap());
        assert!(!dominates(&ov(&[2.0, 2.0]), &ov(&[1.0, 3.0])).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(dominates(&ov(&[1.0, 1.0]), &ov(&[1.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(ObjectiveVector::new(vec![1.0]).is_err());
        assert!(ObjectiveVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(ObjectiveVector::new(vec![f64::INFINITY, 0.0]).is_err());
    }

    fn small_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((0i32..4).prop_map(f64::from), 3)
    }

    proptest! {
        #[test]
        fn irreflexive(a in small_vec()) {
            prop_assert!(!dominates_slice(&a, &a));
        }

        #[test]
        fn asymmetric(a in small_vec(), b in small_vec()) {
            prop_assert!(!(dominates_slice(&a, &b) && dominates_slice(&b, &a)));
        }

        #[test]
        fn transitive(a in small_vec(), b in small_vec(), c in small_vec()) {
            if dominates_slice(&a, &b) && dominates_slice(&b, &c) {
                prop_assert!(dominates_slice(&a, &c));
            }
        }
    }
}
