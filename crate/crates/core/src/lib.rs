//! Learnable evolutionary multi-objective optimization of permutations.
//!
//! Each generation a host evolutionary algorithm (NSGA-II or MOEA/D) breeds
//! offspring. The offspring are split into elite and poor halves, every poor
//! solution is paired with the elite solution whose objective vector points in
//! the most similar direction, and a pointer network is trained to map poor
//! permutations onto their elite partners. Decoding the poor permutations with
//! the trained network yields new candidates, which compete for a place in the
//! population alongside the ordinary offspring.

pub mod error;
pub mod harness;
pub mod metrics;
pub mod moea;
pub mod neuralnet;
pub mod objective;
pub mod pairing;
pub mod permutation;
pub mod population;
pub mod problems;
pub mod rng;

pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use objective::{dominates, ObjectiveVector};
pub use permutation::Permutation;
pub use population::{Individual, Population};
pub use rng::{RngStream, StreamId};
