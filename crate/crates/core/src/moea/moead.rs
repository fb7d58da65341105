use super::operators::{order_crossover, swap_mutation};
use crate::error::{Error, Result};
use crate::objective::ObjectiveVector;
use crate::population::{Individual, Population};
use crate::problems::Evaluator;
use crate::rng::RngStream;

/// Weight vectors of the MOEA/D subproblems and their neighbourhoods.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVectorSet {
    vectors: Vec<Vec<f64>>,
    neighborhoods: Vec<Vec<usize>>,
}

impl WeightVectorSet {
    /// `n` weight vectors of dimension `k`, each with its `t` nearest
    /// neighbours (itself included).
    ///
    /// For `k == 2` the vectors are `(i/(n-1), 1 - i/(n-1))`. For larger `k`
    /// the smallest simplex lattice with at least `n` points is built and `n`
    /// of its points are taken at an even stride.
    pub fn uniform(n: usize, k: usize, t: usize) -> Result<Self> {
        if n < 2 || k < 2 {
            return Err(Error::InvalidArgument(format!("need n >= 2 and k >= 2, got n={n}, k={k}")));
        }
        let vectors: Vec<Vec<f64>> = if k == 2 {
            (0..n)
                .map(|i| {
                    let a = i as f64 / (n - 1) as f64;
                    vec![a, 1.0 - a]
                })
                .collect()
        } else {
            let mut divisions = 1;
            let mut lattice = simplex_lattice(k, divisions);
            while lattice.len() < n {
                divisions += 1;
                lattice = simplex_lattice(k, divisions);
            }
            let stride = lattice.len() as f64 / n as f64;
            (0..n).map(|i| lattice[(i as f64 * stride) as usize].clone()).collect()
        };
        let t = t.clamp(1, n);
        let neighborhoods = vectors
            .iter()
            .map(|w| {
                let mut idx: Vec<usize> = (0..n).collect();
                let d: Vec<f64> = vectors
                    .iter()
                    .map(|v| v.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                    .collect();
                idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
                idx.truncate(t);
                idx
            })
            .collect();
        Ok(WeightVectorSet { vectors, neighborhoods })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    pub fn neighborhood(&self, i: usize) -> &[usize] {
        &self.neighborhoods[i]
    }
}

fn simplex_lattice(k: usize, divisions: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, divisions: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == k - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / divisions as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(k, left - c, divisions, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, divisions, divisions, &mut Vec::new(), &mut out);
    out
}

/// Tchebycheff aggregation `max_k w_k * |f_k - z_k|`.
pub fn tchebycheff(f: &ObjectiveVector, w: &[f64], z: &ObjectiveVector) -> f64 {
    f.values()
        .iter()
        .zip(w)
        .zip(z.values())
        .map(|((fk, wk), zk)| wk * (fk - zk).abs())
        .fold(0.0, f64::max)
}

/// Componentwise minimum over a set of objective vectors.
pub fn ideal_point<'a>(objs: impl IntoIterator<Item = &'a ObjectiveVector>) -> Option<ObjectiveVector> {
    let mut it = objs.into_iter();
    let mut z = it.next()?.values().to_vec();
    for o in it {
        for (zk, fk) in z.iter_mut().zip(o.values()) {
            *zk = zk.min(*fk);
        }
    }
    Some(ObjectiveVector::from_raw(z))
}

pub fn update_ideal(z: &mut ObjectiveVector, f: &ObjectiveVector) {
    let merged = z.values().iter().zip(f.values()).map(|(a, b)| a.min(*b)).collect();
    *z = ObjectiveVector::from_raw(merged);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoeadParams {
    pub neighborhood_size: usize,
    pub max_replacements: usize,
    pub mutation_rate: f64,
}

/// Population, weights and ideal point of a running MOEA/D.
#[derive(Debug, Clone)]
pub struct MoeadState {
    pub population: Population,
    pub weights: WeightVectorSet,
    pub ideal: ObjectiveVector,
    pub params: MoeadParams,
}

impl MoeadState {
    pub fn new(population: Population, weights: WeightVectorSet, params: MoeadParams) -> Result<Self> {
        if population.len() != weights.len() {
            return Err(Error::dims(weights.len(), population.len()));
        }
        let ideal = ideal_point(population.members().iter().map(|m| &m.objectives))
            .ok_or(Error::Empty("MOEA/D population"))?;
        Ok(MoeadState { population, weights, ideal, params })
    }

    /// Offers `child` to the neighbourhood of subproblem `i`, visiting the
    /// neighbours in random order. Replaces up to `max_replacements` members
    /// whose aggregation value is strictly worse than the child's. Returns the
    /// number of replacements.
    pub fn offer(&mut self, i: usize, child: &Individual, rng: &mut RngStream) -> usize {
        update_ideal(&mut self.ideal, &child.objectives);
        let mut order = self.weights.neighborhood(i).to_vec();
        rng.shuffle(&mut order);
        let mut replaced = 0;
        for j in order {
            if replaced >= self.params.max_replacements {
                break;
            }
            let w = self.weights.vector(j);
            let current = &self.population.members()[j];
            if tchebycheff(&child.objectives, w, &self.ideal) < tchebycheff(&current.objectives, w, &self.ideal) {
                self.population.members_mut()[j] = child.clone();
                replaced += 1;
            }
        }
        replaced
    }

    /// One generation: per subproblem, mate two neighbours, evaluate the
    /// child and offer it to the neighbourhood. Returns the children in
    /// subproblem order.
    pub fn generation(&mut self, evaluator: &Evaluator<'_>, rng: &mut RngStream) -> Result<Vec<Individual>> {
        let n = self.population.len();
        let mut children = Vec::with_capacity(n);
        for i in 0..n {
            let hood = self.weights.neighborhood(i);
            let a = hood[rng.below(hood.len())];
            let b = if hood.len() > 1 {
                loop {
                    let b = hood[rng.below(hood.len())];
                    if b != a {
                        break b;
                    }
                }
            } else {
                a
            };
            let members = self.population.members();
            let child = order_crossover(&members[a].genotype, &members[b].genotype, rng)?;
            let child = swap_mutation(&child, self.params.mutation_rate, rng)?;
            let objectives = evaluator.evaluate(&child)?;
            let child = Individual::new(child, objectives);
            self.offer(i, &child, rng);
            children.push(child);
        }
        Ok(children)
    }

    /// Sum over subproblems of each member's aggregation value.
    pub fn total_aggregation(&self, z: &ObjectiveVector) -> f64 {
        self.population
            .members()
            .iter()
            .enumerate()
            .map(|(i, m)| tchebycheff(&m.objectives, self.weights.vector(i), z))
            .sum()
    }
}

/// Functional form of [`MoeadState::generation`].
pub fn moead_generation(
    pop: Population,
    weights: &WeightVectorSet,
    z_ideal: ObjectiveVector,
    params: MoeadParams,
    evaluator: &Evaluator<'_>,
    rng: &mut RngStream,
) -> Result<(Population, ObjectiveVector, Vec<Individual>)> {
    if pop.len() != weights.len() {
        return Err(Error::dims(weights.len(), pop.len()));
    }
    let mut state = MoeadState { population: pop, weights: weights.clone(), ideal: z_ideal, params };
    let children = state.generation(evaluator, rng)?;
    Ok((state.population, state.ideal, children))
}
