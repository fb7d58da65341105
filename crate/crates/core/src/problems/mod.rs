//! MOTSP and MOQAP instances, their evaluation and their text format.

mod io;
mod matrix;
mod moqap;
mod motsp;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

pub use io::{load_instance, parse_instance, save_instance, write_instance};
pub use matrix::SquareMatrix;
pub use moqap::MoqapInstance;
pub use motsp::{MotspInstance, OPEN_INTERVAL_EPS};

use crate::error::{Error, Result};
use crate::objective::ObjectiveVector;
use crate::permutation::Permutation;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Motsp,
    Moqap,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Motsp => "motsp",
            ProblemKind::Moqap => "moqap",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "motsp" => Ok(ProblemKind::Motsp),
            "moqap" => Ok(ProblemKind::Moqap),
            other => Err(Error::Config(format!("unknown problem `{other}` (expected motsp or moqap)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Motsp(MotspInstance),
    Moqap(MoqapInstance),
}

impl Instance {
    pub fn generate(kind: ProblemKind, n: usize, k: usize, rng: &mut RngStream) -> Result<Self> {
        Ok(match kind {
            ProblemKind::Motsp => Instance::Motsp(MotspInstance::generate(n, k, rng)?),
            ProblemKind::Moqap => Instance::Moqap(MoqapInstance::generate(n, k, rng)?),
        })
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            Instance::Motsp(_) => ProblemKind::Motsp,
            Instance::Moqap(_) => ProblemKind::Moqap,
        }
    }

    /// Permutation length.
    pub fn size(&self) -> usize {
        match self {
            Instance::Motsp(i) => i.n_cities(),
            Instance::Moqap(i) => i.n_facilities(),
        }
    }

    pub fn n_objectives(&self) -> usize {
        match self {
            Instance::Motsp(i) => i.n_objectives(),
            Instance::Moqap(i) => i.n_objectives(),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Instance::Motsp(i) => i.seed(),
            Instance::Moqap(i) => i.seed(),
        }
    }

    /// Short label such as `MOTSP15`.
    pub fn label(&self) -> String {
        format!("{}{}", self.kind().to_string().to_uppercase(), self.size())
    }

    pub fn evaluate(&self, p: &Permutation) -> Result<ObjectiveVector> {
        match self {
            Instance::Motsp(i) => i.evaluate(p),
            Instance::Moqap(i) => i.evaluate(p),
        }
    }
}

/// Counts every objective evaluation performed through it.
#[derive(Debug)]
pub struct Evaluator<'a> {
    instance: &'a Instance,
    count: AtomicU64,
}

impl<'a> Evaluator<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Evaluator { instance, count: AtomicU64::new(0) }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn evaluate(&self, p: &Permutation) -> Result<ObjectiveVector> {
        let f = self.instance.evaluate(p)?;
        self.count.fetch_add(1, Ordering::Relaxed);
        Ok(f)
    }

    pub fn evaluations(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluator_counts_successful_calls() {
        let inst = Instance::generate(ProblemKind::Motsp, 6, 2, &mut RngStream::new(1)).unwrap();
        let ev = Evaluator::new(&inst);
        for _ in 0..5 {
            ev.evaluate(&Permutation::identity(6)).unwrap();
        }
        assert!(ev.evaluate(&Permutation::identity(5)).is_err());
        assert_eq!(ev.evaluations(), 5);
        assert_eq!(inst.label(), "MOTSP6");
    }
}
