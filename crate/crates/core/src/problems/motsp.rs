use super::matrix::SquareMatrix;
use crate::error::{Error, Result};
use crate::objective::ObjectiveVector;
use crate::permutation::Permutation;
use crate::rng::RngStream;

/// Lower bound offset of the open unit interval used for random entries.
pub const OPEN_INTERVAL_EPS: f64 = 1e-9;

/// Multi-objective symmetric TSP: one distance matrix per objective.
#[derive(Debug, Clone, PartialEq)]
pub struct MotspInstance {
    n_cities: usize,
    distances: Vec<SquareMatrix>,
    seed: Option<u64>,
}

impl MotspInstance {
    /// Validates symmetry, zero diagonal and off-diagonal entries in (0, 1).
    pub fn new(distances: Vec<SquareMatrix>, seed: Option<u64>) -> Result<Self> {
        let n = check_objectives(&distances)?;
        for (k, d) in distances.iter().enumerate() {
            if !d.is_symmetric() || !d.has_zero_diagonal() {
                return Err(Error::InvalidArgument(format!(
                    "distance matrix {} must be symmetric with zero diagonal",
                    k + 1
                )));
            }
            for i in 0..n {
                for j in 0..n {
                    let v = d.get(i, j);
                    if i != j && !(v > 0.0 && v < 1.0) {
                        return Err(Error::InvalidArgument(format!(
                            "distance matrix {} entry ({}, {}) = {v} outside (0, 1)",
                            k + 1,
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(MotspInstance { n_cities: n, distances, seed })
    }

    /// Random instance with i.i.d. uniform upper triangles mirrored to the lower.
    pub fn generate(n: usize, k: usize, rng: &mut RngStream) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("MOTSP needs at least 3 cities, got {n}")));
        }
        if k < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 objectives, got {k}")));
        }
        let seed = rng.seed();
        let distances = (0..k)
            .map(|_| random_symmetric(n, rng, OPEN_INTERVAL_EPS, 1.0 - OPEN_INTERVAL_EPS))
            .collect();
        Ok(MotspInstance { n_cities: n, distances, seed: Some(seed) })
    }

    pub fn n_cities(&self) -> usize {
        self.n_cities
    }

    pub fn n_objectives(&self) -> usize {
        self.distances.len()
    }

    pub fn distances(&self) -> &[SquareMatrix] {
        &self.distances
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Tour length under every distance matrix, closing edge included.
    pub fn evaluate(&self, tour: &Permutation) -> Result<ObjectiveVector> {
        if tour.len() != self.n_cities {
            return Err(Error::dims(self.n_cities, tour.len()));
        }
        let t = tour.as_slice();
        let n = t.len();
        let values = self
            .distances
            .iter()
            .map(|d| {
                let mut sum = 0.0;
                for i in 0..n - 1 {
                    sum += d.get(t[i], t[i + 1]);
                }
                sum + d.get(t[n - 1], t[0])
            })
            .collect();
        Ok(ObjectiveVector::from_raw(values))
    }
}

pub(super) fn check_objectives(mats: &[SquareMatrix]) -> Result<usize> {
    if mats.len() < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 objectives, got {}", mats.len())));
    }
    let n = mats[0].n();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    for m in mats {
        if m.n() != n {
            return Err(Error::dims(n, m.n()));
        }
        if m.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
    }
    Ok(n)
}

pub(super) fn random_symmetric(n: usize, rng: &mut RngStream, lo: f64, hi: f64) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.uniform_in(lo, hi);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}
