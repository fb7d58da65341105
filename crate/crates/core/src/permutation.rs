use std::fmt;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// A bijective arrangement of `0..n`.
///
/// Stored 0-based; the 1-based form of the text formats only appears through
/// [`Permutation::from_one_based`] and [`Permutation::to_one_based`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn from_zero_based(order: Vec<usize>) -> Result<Self> {
        validate(&order)?;
        Ok(Permutation(order))
    }

    pub fn from_one_based(order: &[usize]) -> Result<Self> {
        let order = order
            .iter()
            .map(|&v| {
                v.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPermutation("index 0 in a 1-based permutation".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_zero_based(order)
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Uniformly random permutation of `0..n` (Fisher-Yates).
    pub fn random(n: usize, rng: &mut RngStream) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("permutation length must be at least 1".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        Ok(Permutation(order))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|v| v + 1).collect()
    }

    /// `inverse()[v]` is the position holding element `v`.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.0.len()];
        for (pos, &v) in self.0.iter().enumerate() {
            inv[v] = pos;
        }
        inv
    }

    /// Exchanges the elements at positions `i` and `j`.
    pub fn swap(&mut self, i: usize, j: usize) {
        self.0.swap(i, j);
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, "]")
    }
}

/// Checks that `order` contains every index of `0..order.len()` exactly once.
pub fn validate(order: &[usize]) -> Result<()> {
    let n = order.len();
    if n == 0 {
        return Err(Error::InvalidPermutation("empty".into()));
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n {
            return Err(Error::InvalidPermutation(format!("index {} out of range 1..={n}", v + 1)));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidPermutation(format!("index {} repeated", v + 1)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_element() {
        let mut rng = RngStream::new(0);
        assert_eq!(Permutation::random(1, &mut rng).unwrap().to_one_based(), vec![1]);
    }

    #[test]
    fn zero_length_rejected() {
        let mut rng = RngStream::new(0);
        assert!(Permutation::random(0, &mut rng).is_err());
        assert!(Permutation::from_zero_based(vec![]).is_err());
    }

    #[test]
    fn seeded_draw_is_reproducible() {
        let a = Permutation::random(5, &mut RngStream::new(99)).unwrap();
        let b = Permutation::random(5, &mut RngStream::new(99)).unwrap();
        assert_eq!(a, b);
        assert!(validate(a.as_slice()).is_ok());
    }

    #[test]
    fn rejects_repeats_and_out_of_range() {
        assert!(Permutation::from_one_based(&[1, 1, 3]).is_err());
        assert!(Permutation::from_one_based(&[1, 4, 2]).is_err());
        assert!(Permutation::from_one_based(&[0, 1, 2]).is_err());
        assert_eq!(
            Permutation::from_one_based(&[2, 3, 1]).unwrap().as_slice(),
            &[1, 2, 0]
        );
    }

    #[test]
    fn uniform_over_all_24_permutations_of_four() {
        // Enumerate S_4 and check each observed frequency within 5 sigma of 1/24.
        let draws = 10_000usize;
        let mut counts = std::collections::HashMap::new();
        let mut rng = RngStream::new(2024);
        for _ in 0..draws {
            let p = Permutation::random(4, &mut rng).unwrap();
            *counts.entry(p.into_inner()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 24);
        let p = 1.0 / 24.0;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (perm, &c) in &counts {
            assert!((c as f64 - mean).abs() < 5.0 * sigma, "{perm:?} drawn {c} times");
        }
    }

    #[test]
    fn inverse_round_trips() {
        let p = Permutation::from_one_based(&[3, 1, 2]).unwrap();
        let inv = p.inverse();
        for (pos, &v) in p.as_slice().iter().enumerate() {
            assert_eq!(inv[v], pos);
        }
    }

    proptest! {
        #[test]
        fn random_is_always_bijective(n in 1usize..60, seed in any::<u64>()) {
            let p = Permutation::random(n, &mut RngStream::new(seed)).unwrap();
            prop_assert!(validate(p.as_slice()).is_ok());
            prop_assert_eq!(p.len(), n);
        }

        #[test]
        fn one_based_round_trip(n in 1usize..40, seed in any::<u64>()) {
            let p = Permutation::random(n, &mut RngStream::new(seed)).unwrap();
            prop_assert_eq!(Permutation::from_one_based(&p.to_one_based()).unwrap(), p);
        }
    }
}
