use crate::error::{Error, Result};
use crate::objective::ObjectiveVector;
use crate::permutation::Permutation;

/// A genotype with its cached objective vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Permutation,
    pub objectives: ObjectiveVector,
}

impl Individual {
    pub fn new(genotype: Permutation, objectives: ObjectiveVector) -> Self {
        Individual { genotype, objectives }
    }
}

/// Bounded collection of evaluated individuals.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    members: Vec<Individual>,
    capacity: usize,
}

impl Population {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("population capacity must be positive".into()));
        }
        Ok(Population { members: Vec::with_capacity(capacity), capacity })
    }

    pub fn from_members(members: Vec<Individual>, capacity: usize) -> Result<Self> {
        if capacity == 0 || members.len() > capacity {
            return Err(Error::InvalidArgument(format!(
                "{} members exceed capacity {capacity}",
                members.len()
            )));
        }
        Ok(Population { members, capacity })
    }

    pub fn push(&mut self, ind: Individual) -> Result<()> {
        if self.members.len() == self.capacity {
            return Err(Error::InvalidArgument("population is full".into()));
        }
        self.members.push(ind);
        Ok(())
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub(crate) fn members_mut(&mut self) -> &mut [Individual] {
        &mut self.members
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.members.iter().map(|m| m.objectives.clone()).collect()
    }

    pub fn into_members(self) -> Vec<Individual> {
        self.members
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ind(n: usize) -> Individual {
        Individual::new(
            Permutation::identity(n),
            ObjectiveVector::new(vec![0.0, 0.0]).unwrap(),
        )
    }

    #[test]
    fn capacity_is_enforced() {
        let mut p = Population::new(2).unwrap();
        p.push(ind(3)).unwrap();
        p.push(ind(3)).unwrap();
        assert!(p.push(ind(3)).is_err());
        assert!(Population::new(0).is_err());
        assert!(Population::from_members(vec![ind(2), ind(2)], 1).is_err());
    }
}
