//! Permutation operators, NSGA-II and MOEA/D hosts, and the environmental
//! selection that merges network-generated solutions into the population.

mod moead;
mod nsga2;
mod operators;
mod sorting;

use std::fmt;
use std::str::FromStr;

pub use moead::{
    ideal_point, moead_generation, tchebycheff, update_ideal, MoeadParams, MoeadState, WeightVectorSet,
};
pub use nsga2::{nsga2_generation, nsga2_offspring, nsga2_select, rank_and_crowding};
pub use operators::{order_crossover, order_crossover_with_cuts, swap_mutation};
pub use sorting::{crowding_distance, fast_nondominated_sort, nondominated_indices, FrontPartition};

use crate::error::{Error, Result};
use crate::permutation::Permutation;
use crate::population::{Individual, Population};
use crate::problems::Evaluator;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HostKind {
    Nsga2,
    Moead,
}

impl fmt::Display for HostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HostKind::Nsga2 => "nsga2",
            HostKind::Moead => "moead",
        })
    }
}

impl FromStr for HostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nsga2" | "nsgaii" => Ok(HostKind::Nsga2),
            "moead" | "moea/d" => Ok(HostKind::Moead),
            other => Err(Error::Config(format!("unknown host algorithm `{other}`"))),
        }
    }
}

/// Settings shared by both hosts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EaConfig {
    pub pop_size: usize,
    /// Per-gene swap probability; `None` means `2 / n`.
    pub mutation_rate: Option<f64>,
    pub neighborhood_size: usize,
    pub max_replacements: usize,
}

impl Default for EaConfig {
    fn default() -> Self {
        EaConfig { pop_size: 100, mutation_rate: None, neighborhood_size: 20, max_replacements: 2 }
    }
}

impl EaConfig {
    pub fn mutation_rate_for(&self, n: usize) -> f64 {
        self.mutation_rate.unwrap_or((2.0 / n as f64).min(1.0))
    }
}

/// A network-generated solution together with the index, within the
/// offspring batch, of the poor solution it was decoded from.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub individual: Individual,
    pub origin: usize,
}

/// Outcome of one environmental selection.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SelectionAudit {
    /// Population members replaced by each generated solution, in input order.
    pub replacements: Vec<usize>,
}

impl SelectionAudit {
    pub fn total(&self) -> usize {
        self.replacements.iter().sum()
    }

    pub fn accepted(&self, i: usize) -> bool {
        self.replacements[i] > 0
    }
}

/// Random initial population of `capacity` evaluated permutations.
pub fn initial_population(capacity: usize, evaluator: &Evaluator<'_>, rng: &mut RngStream) -> Result<Population> {
    let n = evaluator.instance().size();
    let mut pop = Population::new(capacity)?;
    for _ in 0..capacity {
        let g = Permutation::random(n, rng)?;
        let f = evaluator.evaluate(&g)?;
        pop.push(Individual::new(g, f))?;
    }
    Ok(pop)
}

/// The evolutionary algorithm hosting the learned generator.
#[derive(Debug, Clone)]
pub enum Host {
    Nsga2 { population: Population, mutation_rate: f64 },
    Moead(MoeadState),
}

impl Host {
    /// Draws and evaluates the initial population.
    pub fn initialize(
        kind: HostKind,
        cfg: &EaConfig,
        evaluator: &Evaluator<'_>,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let instance = evaluator.instance();
        let mutation_rate = cfg.mutation_rate_for(instance.size());
        let population = initial_population(cfg.pop_size, evaluator, rng)?;
        Ok(match kind {
            HostKind::Nsga2 => Host::Nsga2 { population, mutation_rate },
            HostKind::Moead => {
                let weights =
                    WeightVectorSet::uniform(cfg.pop_size, instance.n_objectives(), cfg.neighborhood_size)?;
                let params = MoeadParams {
                    neighborhood_size: cfg.neighborhood_size,
                    max_replacements: cfg.max_replacements,
                    mutation_rate,
                };
                Host::Moead(MoeadState::new(population, weights, params)?)
            }
        })
    }

    pub fn kind(&self) -> HostKind {
        match self {
            Host::Nsga2 { .. } => HostKind::Nsga2,
            Host::Moead(_) => HostKind::Moead,
        }
    }

    pub fn population(&self) -> &Population {
        match self {
            Host::Nsga2 { population, .. } => population,
            Host::Moead(s) => &s.population,
        }
    }

    /// Genetic operation step. NSGA-II returns unmerged offspring; MOEA/D
    /// merges each child into its neighbourhood as it is produced, which is
    /// its sequential use of the offspring batch.
    pub fn generate_offspring(&mut self, evaluator: &Evaluator<'_>, rng: &mut RngStream) -> Result<Vec<Individual>> {
        match self {
            Host::Nsga2 { population, mutation_rate } => nsga2_offspring(population, evaluator, *mutation_rate, rng),
            Host::Moead(s) => s.generation(evaluator, rng),
        }
    }
}

/// Updates the host population from the offspring `c` and the generated
/// solutions.
///
/// NSGA-II truncates `P ∪ C ∪ C_generated` by rank and crowding; a generated
/// solution counts as one replacement when it survives. MOEA/D has already
/// applied `C` during [`Host::generate_offspring`], so only the generated
/// solutions are offered, each to the neighbourhood of the subproblem that
/// produced its source; replacements are counted per member overwritten.
/// `rng` orders MOEA/D neighbourhood visits and is unused by NSGA-II.
pub fn environment_selection(
    host: &mut Host,
    c: Vec<Individual>,
    generated: &[Generated],
    rng: &mut RngStream,
) -> Result<SelectionAudit> {
    match host {
        Host::Nsga2 { population, .. } => {
            let parents = population.len();
            let offspring = c.len();
            let mut pool = population.members().to_vec();
            pool.extend(c);
            pool.extend(generated.iter().map(|g| g.individual.clone()));
            let (next, chosen) = nsga2_select(&pool, population.capacity())?;
            let mut replacements = vec![0; generated.len()];
            for idx in chosen {
                if let Some(g) = idx.checked_sub(parents + offspring) {
                    replacements[g] = 1;
                }
            }
            *population = next;
            Ok(SelectionAudit { replacements })
        }
        Host::Moead(state) => {
            let n = state.population.len();
            let replacements = generated
                .iter()
                .map(|g| {
                    if g.origin >= n {
                        return Err(Error::InvalidArgument(format!(
                            "generated solution origin {} outside {n} subproblems",
                            g.origin
                        )));
                    }
                    Ok(state.offer(g.origin, &g.individual, rng))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SelectionAudit { replacements })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::ObjectiveVector;
    use crate::problems::{Instance, ProblemKind};

    fn setup(kind: HostKind) -> (Instance, EaConfig) {
        let inst = Instance::generate(ProblemKind::Motsp, 10, 2, &mut RngStream::new(5)).unwrap();
        let cfg = EaConfig { pop_size: 20, neighborhood_size: 5, ..EaConfig::default() };
        let _ = kind;
        (inst, cfg)
    }

    #[test]
    fn empty_generated_set_matches_plain_generation() {
        for kind in [HostKind::Nsga2, HostKind::Moead] {
            let (inst, cfg) = setup(kind);
            let ev = Evaluator::new(&inst);
            let mut rng = RngStream::new(1);
            let mut host = Host::initialize(kind, &cfg, &ev, &mut rng).unwrap();
            let mut baseline = host.clone();
            let mut rng_b = rng.clone();
            let mut shuffle = RngStream::new(99);

            let c = host.generate_offspring(&ev, &mut rng).unwrap();
            let audit = environment_selection(&mut host, c, &[], &mut shuffle).unwrap();
            assert_eq!(audit.total(), 0);

            let expected = match &mut baseline {
                Host::Nsga2 { population, mutation_rate } => {
                    nsga2_generation(population, &ev, *mutation_rate, &mut rng_b).unwrap()
                }
                Host::Moead(s) => {
                    s.generation(&ev, &mut rng_b).unwrap();
                    s.population.clone()
                }
            };
            assert_eq!(host.population(), &expected);
        }
    }

    #[test]
    fn dominating_generated_solution_enters() {
        for kind in [HostKind::Nsga2, HostKind::Moead] {
            let (inst, cfg) = setup(kind);
            let ev = Evaluator::new(&inst);
            let mut rng = RngStream::new(2);
            let mut host = Host::initialize(kind, &cfg, &ev, &mut rng).unwrap();
            let c = host.generate_offspring(&ev, &mut rng).unwrap();
            let star = Individual::new(Permutation::identity(10), ObjectiveVector::new(vec![0.0, 0.0]).unwrap());
            let generated = vec![Generated { individual: star.clone(), origin: 3 }];
            let audit = environment_selection(&mut host, c, &generated, &mut RngStream::new(0)).unwrap();
            assert!(audit.total() >= 1, "{kind}");
            assert!(host.population().members().contains(&star));
        }
    }
}
