//! The optimisation loop: a host EA, optionally wrapped with the learned
//! generator.

use crate::error::{Error, Result};
use crate::metrics::{HvConfig, UpdateTrace};
use crate::moea::{environment_selection, nondominated_indices, Generated, Host};
use crate::neuralnet::{predict, Trainer};
use crate::objective::ObjectiveVector;
use crate::pairing::build_training_set;
use crate::permutation::Permutation;
use crate::population::{Individual, Population};
use crate::problems::{Evaluator, Instance};
use crate::rng::{RngStream, StreamId};

use super::config::RunConfig;
use super::snapshot::{Role, Snapshot};

/// Stream that orders neighbourhood visits when generated solutions are
/// offered to MOEA/D subproblems.
pub const SELECTION_STREAM: StreamId = StreamId::Custom(1);

/// Margin, as a fraction of the front's range, used for a single run's HV box.
pub const SINGLE_RUN_HV_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct LossRecord {
    pub iteration: usize,
    pub generation: usize,
    pub epoch: usize,
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub instance_label: String,
    pub population: Population,
    /// Objective vectors of the non-dominated members of the final population.
    pub front: Vec<ObjectiveVector>,
    /// HV of `front` in its own box widened by [`SINGLE_RUN_HV_MARGIN`];
    /// `None` for more than two objectives.
    pub hv: Option<f64>,
    pub update_trace: UpdateTrace,
    pub loss_trace: Vec<LossRecord>,
    pub snapshots: Vec<Snapshot>,
    pub evaluations: u64,
    pub generations: usize,
}

/// Called with the generation number (0 for the initial population) and the
/// population after that generation's selection.
pub type Observer<'a> = dyn FnMut(usize, &Population) + 'a;

/// Validates the config, builds the instance and runs the configured
/// algorithm.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let instance = cfg.instance()?;
    run_on(cfg, &instance, &mut |_, _| {})
}

pub fn run_on(cfg: &RunConfig, instance: &Instance, observer: &mut Observer<'_>) -> Result<RunOutcome> {
    if cfg.algorithm.is_seqmo() {
        run_seqmo(cfg, instance, observer)
    } else {
        run_baseline(cfg, instance, observer)
    }
}

fn check_instance(cfg: &RunConfig, instance: &Instance) -> Result<()> {
    cfg.validate()?;
    if instance.size() != cfg.n || instance.n_objectives() != cfg.k || instance.kind() != cfg.problem {
        return Err(Error::Config(format!(
            "instance {} (k={}) does not match config {} n={} k={}",
            instance.label(),
            instance.n_objectives(),
            cfg.problem,
            cfg.n,
            cfg.k
        )));
    }
    Ok(())
}

fn finish(
    cfg: &RunConfig,
    instance: &Instance,
    population: Population,
    evaluator: &Evaluator<'_>,
    generations: usize,
    update_trace: UpdateTrace,
    loss_trace: Vec<LossRecord>,
    snapshots: Vec<Snapshot>,
) -> Result<RunOutcome> {
    let objs = population.objectives();
    let front: Vec<ObjectiveVector> = nondominated_indices(&objs).into_iter().map(|i| objs[i].clone()).collect();
    let hv = if cfg.k == 2 {
        Some(HvConfig::widened(&front, SINGLE_RUN_HV_MARGIN)?.hypervolume(&front)?)
    } else {
        None
    };
    Ok(RunOutcome {
        config: cfg.clone(),
        instance_label: instance.label(),
        population,
        front,
        hv,
        update_trace,
        loss_trace,
        snapshots,
        evaluations: evaluator.evaluations(),
        generations,
    })
}

/// The host EA alone, with the same evaluation accounting as
/// [`run_seqmo`]: generations continue until more than `max_fe`
/// evaluations have been spent.
pub fn run_baseline(cfg: &RunConfig, instance: &Instance, observer: &mut Observer<'_>) -> Result<RunOutcome> {
    check_instance(cfg, instance)?;
    let evaluator = Evaluator::new(instance);
    let mut evo = RngStream::derive(cfg.seed, StreamId::Evolution);
    let mut select = RngStream::derive(cfg.seed, SELECTION_STREAM);
    let mut host = Host::initialize(cfg.algorithm.host(), &cfg.ea_config(), &evaluator, &mut evo)?;
    observer(0, host.population());
    let mut generation = 0;
    while evaluator.evaluations() <= cfg.max_fe {
        generation += 1;
        let c = host.generate_offspring(&evaluator, &mut evo)?;
        environment_selection(&mut host, c, &[], &mut select)?;
        observer(generation, host.population());
    }
    let population = host.population().clone();
    finish(cfg, instance, population, &evaluator, generation, UpdateTrace::new(), Vec::new(), Vec::new())
}

/// The learned-generator loop. On each training generation the offspring
/// are split into poor and elite halves, paired by objective direction, the
/// network is trained on the pairs, and the poor solutions are decoded into
/// generated solutions that are evaluated and offered to environmental
/// selection with the offspring.
pub fn run_seqmo(cfg: &RunConfig, instance: &Instance, observer: &mut Observer<'_>) -> Result<RunOutcome> {
    check_instance(cfg, instance)?;
    let evaluator = Evaluator::new(instance);
    let mut evo = RngStream::derive(cfg.seed, StreamId::Evolution);
    let mut select = RngStream::derive(cfg.seed, SELECTION_STREAM);
    let mut init = RngStream::derive(cfg.seed, StreamId::NeuralInit);
    let mut shuffle = RngStream::derive(cfg.seed, StreamId::Shuffle);
    let mut dropout = RngStream::derive(cfg.seed, StreamId::Dropout);

    let mut host = Host::initialize(cfg.algorithm.host(), &cfg.ea_config(), &evaluator, &mut evo)?;
    observer(0, host.population());
    let mut trainer: Option<Trainer> = None;
    let mut update_trace = UpdateTrace::new();
    let mut loss_trace = Vec::new();
    let mut snapshots = Vec::new();
    let mut generation = 0;
    let mut iteration = 0;
    while evaluator.evaluations() <= cfg.max_fe {
        generation += 1;
        let c = host.generate_offspring(&evaluator, &mut evo)?;
        let learning = cfg.learning_enabled() && (generation - 1) % cfg.train_every == 0;
        if !learning {
            environment_selection(&mut host, c, &[], &mut select)?;
            observer(generation, host.population());
            continue;
        }
        iteration += 1;
        let set = build_training_set(&c, cfg.pairing)?;
        let pairs: Vec<(Permutation, Permutation)> =
            set.pairs.iter().map(|p| (p.data.clone(), p.label.clone())).collect();
        match trainer.as_mut() {
            Some(_) if cfg.train.warm_start => {}
            Some(t) => t.reinitialize(&mut init)?,
            None => trainer = Some(Trainer::new(cfg.train.clone(), instance.size(), &mut init)?),
        }
        let t = trainer.as_mut().expect("initialised above");
        let losses = t.fit(&pairs, &mut shuffle, &mut dropout)?;
        loss_trace.extend(losses.into_iter().enumerate().map(|(e, loss)| LossRecord {
            iteration,
            generation,
            epoch: e + 1,
            loss,
        }));
        let poor: Vec<Permutation> = pairs.into_iter().map(|p| p.0).collect();
        let decoded = predict(&t.params, &poor)?;
        let mut generated = Vec::with_capacity(decoded.len());
        for (pair, genotype) in set.pairs.iter().zip(decoded) {
            let objectives = evaluator.evaluate(&genotype)?;
            generated.push(Generated { individual: Individual::new(genotype, objectives), origin: pair.data_index });
        }
        let snapshot_offspring = due(cfg, iteration).then(|| c.clone());
        let audit = environment_selection(&mut host, c, &generated, &mut select)?;
        update_trace.add(iteration, audit.total())?;
        if let Some(offspring) = snapshot_offspring {
            snapshots.push(snapshot(iteration, &offspring, &set.poor, &set.elite, &set.pairs, &generated, &audit.replacements, host.population()));
        }
        observer(generation, host.population());
    }
    let population = host.population().clone();
    finish(cfg, instance, population, &evaluator, generation, update_trace, loss_trace, snapshots)
}

fn due(cfg: &RunConfig, iteration: usize) -> bool {
    cfg.snapshot_every > 0 && (iteration == 1 || iteration % cfg.snapshot_every == 0)
}

#[allow(clippy::too_many_arguments)]
fn snapshot(
    iteration: usize,
    offspring: &[Individual],
    poor: &[usize],
    elite: &[usize],
    pairs: &[crate::pairing::Pair],
    generated: &[Generated],
    replacements: &[usize],
    population: &Population,
) -> Snapshot {
    let mut s = Snapshot::new(iteration);
    let mut poor_ids = std::collections::HashMap::new();
    for &i in poor {
        poor_ids.insert(i, s.add_point(Role::Poor, offspring[i].objectives.values()));
    }
    for &i in elite {
        s.add_point(Role::Elite, offspring[i].objectives.values());
    }
    for m in population.members() {
        s.add_point(Role::Population, m.objectives.values());
    }
    for ((g, pair), &r) in generated.iter().zip(pairs).zip(replacements) {
        let role = if r > 0 { Role::GeneratedAndAccepted } else { Role::Generated };
        let id = s.add_point(role, g.individual.objectives.values());
        s.pairs.push((poor_ids[&pair.data_index], id));
    }
    s
}
