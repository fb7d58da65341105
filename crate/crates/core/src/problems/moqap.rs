use super::matrix::SquareMatrix;
use super::motsp::{check_objectives, random_symmetric, OPEN_INTERVAL_EPS};
use crate::error::{Error, Result};
use crate::objective::ObjectiveVector;
use crate::permutation::Permutation;
use crate::rng::RngStream;

/// Multi-objective QAP: one location-distance matrix, one flow matrix per objective.
#[derive(Debug, Clone, PartialEq)]
pub struct MoqapInstance {
    n_facilities: usize,
    distance: SquareMatrix,
    flows: Vec<SquareMatrix>,
    seed: Option<u64>,
}

impl MoqapInstance {
    pub fn new(distance: SquareMatrix, flows: Vec<SquareMatrix>, seed: Option<u64>) -> Result<Self> {
        let n = check_objectives(&flows)?;
        if distance.n() != n {
            return Err(Error::dims(n, distance.n()));
        }
        let negative = |m: &SquareMatrix| m.values().iter().any(|&v| !v.is_finite() || v < 0.0);
        if negative(&distance) || flows.iter().any(negative) {
            return Err(Error::InvalidArgument("MOQAP entries must be finite and non-negative".into()));
        }
        Ok(MoqapInstance { n_facilities: n, distance, flows, seed })
    }

    /// Distances and flows uniform in (0, 1), symmetric, zero diagonal.
    pub fn generate(n: usize, k: usize, rng: &mut RngStream) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("MOQAP needs at least 3 facilities, got {n}")));
        }
        if k < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 objectives, got {k}")));
        }
        let seed = rng.seed();
        let (lo, hi) = (OPEN_INTERVAL_EPS, 1.0 - OPEN_INTERVAL_EPS);
        let distance = random_symmetric(n, rng, lo, hi);
        let flows = (0..k).map(|_| random_symmetric(n, rng, lo, hi)).collect();
        Ok(MoqapInstance { n_facilities: n, distance, flows, seed: Some(seed) })
    }

    pub fn n_facilities(&self) -> usize {
        self.n_facilities
    }

    pub fn n_objectives(&self) -> usize {
        self.flows.len()
    }

    pub fn distance(&self) -> &SquareMatrix {
        &self.distance
    }

    pub fn flows(&self) -> &[SquareMatrix] {
        &self.flows
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `f_k = sum_i sum_j a[i][j] * b_k[t[i]][t[j]]`.
    pub fn evaluate(&self, assignment: &Permutation) -> Result<ObjectiveVector> {
        if assignment.len() != self.n_facilities {
            return Err(Error::dims(self.n_facilities, assignment.len()));
        }
        let t = assignment.as_slice();
        let values = self
            .flows
            .iter()
            .map(|b| {
                let mut sum = 0.0;
                for (i, &ti) in t.iter().enumerate() {
                    let a_row = self.distance.row(i);
                    let b_row = b.row(ti);
                    for (j, &tj) in t.iter().enumerate() {
                        sum += a_row[j] * b_row[tj];
                    }
                }
                sum
            })
            .collect();
        Ok(ObjectiveVector::from_raw(values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn identity_with_equal_matrices_gives_sum_of_squares() {
        let inst = MoqapInstance::generate(6, 2, &mut RngStream::new(3)).unwrap();
        let a = inst.distance().clone();
        let same = MoqapInstance::new(a.clone(), vec![a.clone(), a.clone()], None).unwrap();
        let f = same.evaluate(&Permutation::identity(6)).unwrap();
        let expected: f64 = a.values().iter().map(|v| v * v).sum();
        assert!((f[0] - expected).abs() < 1e-12);
        assert!((f[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn hand_enumerated_two_facility_case() {
        let a = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let b = m(&[&[0.0, 2.0], &[2.0, 0.0]]);
        let inst = MoqapInstance::new(a, vec![b.clone(), b], None).unwrap();
        let f = inst.evaluate(&Permutation::from_one_based(&[2, 1]).unwrap()).unwrap();
        assert_eq!(f.values(), &[4.0, 4.0]);
    }

    #[test]
    fn zero_flow_annihilates() {
        let inst = MoqapInstance::generate(5, 2, &mut RngStream::new(8)).unwrap();
        let z = SquareMatrix::zeros(5);
        let zero = MoqapInstance::new(inst.distance().clone(), vec![z.clone(), z], None).unwrap();
        let mut rng = RngStream::new(9);
        for _ in 0..10 {
            let p = Permutation::random(5, &mut rng).unwrap();
            assert_eq!(zero.evaluate(&p).unwrap().values(), &[0.0, 0.0]);
        }
    }

    #[test]
    fn generation_invariants_and_errors() {
        for n in [15, 30] {
            let inst = MoqapInstance::generate(n, 2, &mut RngStream::new(n as u64)).unwrap();
            assert!(inst.distance().is_symmetric() && inst.distance().has_zero_diagonal());
            for f in inst.flows() {
                assert!(f.is_symmetric() && f.has_zero_diagonal());
                assert!(f.values().iter().all(|&v| (0.0..1.0).contains(&v)));
            }
        }
        let a = MoqapInstance::generate(7, 2, &mut RngStream::new(1)).unwrap();
        let b = MoqapInstance::generate(7, 2, &mut RngStream::new(1)).unwrap();
        assert_eq!(a, b);
        assert!(MoqapInstance::generate(2, 2, &mut RngStream::new(1)).is_err());
        assert!(a.evaluate(&Permutation::identity(6)).is_err());
    }

    proptest! {
        #[test]
        fn transpose_resummation(seed in any::<u64>()) {
            let inst = MoqapInstance::generate(8, 2, &mut RngStream::new(seed)).unwrap();
            let p = Permutation::random(8, &mut RngStream::new(seed ^ 7)).unwrap();
            let f = inst.evaluate(&p).unwrap();
            let t = p.as_slice();
            for k in 0..2 {
                let b = &inst.flows()[k];
                let mut swapped = 0.0;
                for j in 0..8 {
                    for i in 0..8 {
                        swapped += inst.distance().get(j, i) * b.get(t[j], t[i]);
                    }
                }
                prop_assert!((f[k] - swapped).abs() < 1e-10);
            }
        }
    }
}
