use std::cmp::Ordering;

use super::operators::{order_crossover, swap_mutation};
use super::sorting::{crowding_distance, fast_nondominated_sort};
use crate::error::Result;
use crate::objective::ObjectiveVector;
use crate::population::{Individual, Population};
use crate::problems::Evaluator;
use crate::rng::RngStream;

/// Front rank and crowding distance of every member of `objectives`.
pub fn rank_and_crowding(objectives: &[ObjectiveVector]) -> Result<(Vec<usize>, Vec<f64>)> {
    let partition = fast_nondominated_sort(objectives)?;
    let ranks = partition.ranks();
    let mut crowd = vec![0.0; objectives.len()];
    for front in &partition.fronts {
        let objs: Vec<ObjectiveVector> = front.iter().map(|&i| objectives[i].clone()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&objs)) {
            crowd[i] = d;
        }
    }
    Ok((ranks, crowd))
}

/// Crowded comparison: lower rank, then larger distance, then lower index.
fn crowded_cmp(a: usize, b: usize, ranks: &[usize], crowd: &[f64]) -> Ordering {
    ranks[a]
        .cmp(&ranks[b])
        .then_with(|| crowd[b].total_cmp(&crowd[a]))
        .then(a.cmp(&b))
}

fn tournament(ranks: &[usize], crowd: &[f64], rng: &mut RngStream) -> usize {
    let a = rng.below(ranks.len());
    let b = rng.below(ranks.len());
    match crowded_cmp(a, b, ranks, crowd) {
        Ordering::Greater => b,
        _ => a,
    }
}

/// Breeds `pop.capacity()` children by binary tournament, OX and swap mutation.
pub fn nsga2_offspring(
    pop: &Population,
    evaluator: &Evaluator<'_>,
    mutation_rate: f64,
    rng: &mut RngStream,
) -> Result<Vec<Individual>> {
    let (ranks, crowd) = rank_and_crowding(&pop.objectives())?;
    let members = pop.members();
    let mut children = Vec::with_capacity(pop.capacity());
    for _ in 0..pop.capacity() {
        let u = &members[tournament(&ranks, &crowd, rng)].genotype;
        let v = &members[tournament(&ranks, &crowd, rng)].genotype;
        let child = swap_mutation(&order_crossover(u, v, rng)?, mutation_rate, rng)?;
        let objectives = evaluator.evaluate(&child)?;
        children.push(Individual::new(child, objectives));
    }
    Ok(children)
}

/// Elitist truncation of `pool` to `capacity` by (rank, crowding distance).
///
/// Returns the survivors and their indices into `pool`, ascending.
pub fn nsga2_select(pool: &[Individual], capacity: usize) -> Result<(Population, Vec<usize>)> {
    let objectives: Vec<ObjectiveVector> = pool.iter().map(|i| i.objectives.clone()).collect();
    let partition = fast_nondominated_sort(&objectives)?;
    let mut chosen = Vec::with_capacity(capacity);
    for front in &partition.fronts {
        let room = capacity - chosen.len();
        if room == 0 {
            break;
        }
        if front.len() <= room {
            chosen.extend_from_slice(front);
            continue;
        }
        let objs: Vec<ObjectiveVector> = front.iter().map(|&i| objectives[i].clone()).collect();
        let dist = crowding_distance(&objs);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));
        chosen.extend(order[..room].iter().map(|&o| front[o]));
        break;
    }
    chosen.sort_unstable();
    let members = chosen.iter().map(|&i| pool[i].clone()).collect();
    Ok((Population::from_members(members, capacity)?, chosen))
}

/// One NSGA-II generation: offspring, then truncation of parents plus offspring.
pub fn nsga2_generation(
    pop: &Population,
    evaluator: &Evaluator<'_>,
    mutation_rate: f64,
    rng: &mut RngStream,
) -> Result<Population> {
    let children = nsga2_offspring(pop, evaluator, mutation_rate, rng)?;
    let mut pool = pop.members().to_vec();
    pool.extend(children);
    Ok(nsga2_select(&pool, pop.capacity())?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permutation::Permutation;

    fn ind(f: [f64; 2]) -> Individual {
        Individual::new(Permutation::identity(3), ObjectiveVector::new(f.to_vec()).unwrap())
    }

    #[test]
    fn front_that_fits_is_kept_whole() {
        // 10 points on the line f1 + f2 = 1 plus 10 dominated points
        let mut pool: Vec<Individual> = (0..10)
            .map(|i| ind([i as f64 / 9.0 + 1.0, 2.0 - i as f64 / 9.0]))
            .collect();
        pool.extend((0..10).map(|i| ind([i as f64 / 9.0, 1.0 - i as f64 / 9.0])));
        let (pop, idx) = nsga2_select(&pool, 10).unwrap();
        assert_eq!(idx, (10..20).collect::<Vec<_>>());
        assert_eq!(pop.len(), 10);
    }

    #[test]
    fn dominated_offspring_leave_parents_unchanged() {
        let parents: Vec<Individual> = (0..5).map(|i| ind([i as f64, 4.0 - i as f64])).collect();
        let mut pool = parents.clone();
        pool.extend((0..5).map(|i| ind([i as f64 + 10.0, 14.0 - i as f64])));
        let (pop, _) = nsga2_select(&pool, 5).unwrap();
        let got: Vec<_> = pop.objectives();
        let want: Vec<_> = parents.iter().map(|p| p.objectives.clone()).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn crowding_truncates_overfull_front() {
        // five points on one front, keep three: both extremes plus the
        // interior point with the largest gap
        let pool = vec![
            ind([0.0, 1.0]),
            ind([0.1, 0.9]),
            ind([0.2, 0.8]),
            ind([0.6, 0.4]),
            ind([1.0, 0.0]),
        ];
        let (_, idx) = nsga2_select(&pool, 3).unwrap();
        assert_eq!(idx, vec![0, 3, 4]);
    }
}
