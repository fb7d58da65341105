//! Training-pair construction: split offspring into elite and poor halves and
//! pair each poor solution with an elite one by objective-space angle.

mod hungarian;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use hungarian::{assignment_cost, hungarian, CostMatrix};

use crate::error::{Error, Result};
use crate::moea::{crowding_distance, fast_nondominated_sort};
use crate::objective::ObjectiveVector;
use crate::permutation::Permutation;
use crate::population::Individual;

/// Offset added after the ideal-point shift so no shifted vector is zero.
pub const SHIFT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingMode {
    Greedy,
    Hungarian,
}

impl fmt::Display for PairingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairingMode::Greedy => "greedy",
            PairingMode::Hungarian => "hungarian",
        })
    }
}

impl FromStr for PairingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "greedy" => Ok(PairingMode::Greedy),
            "hungarian" => Ok(PairingMode::Hungarian),
            other => Err(Error::Config(format!("unknown pairing mode `{other}`"))),
        }
    }
}

/// A data/label training pair. Indices refer to the offspring batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub data: Permutation,
    pub label: Permutation,
    pub angle: f64,
    pub data_index: usize,
    pub label_index: usize,
}

pub type PairSet = Vec<Pair>;

/// Pairwise angles between poor (rows) and elite (columns) objective vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

impl AngleMatrix {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }
}

/// Result of [`build_training_set`].
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub pairs: PairSet,
    pub angles: AngleMatrix,
    /// Offspring indices of the poor half, in the row order of `angles`.
    pub poor: Vec<usize>,
    /// Offspring indices of the elite half, in the column order of `angles`.
    pub elite: Vec<usize>,
}

/// Splits offspring into `(poor, elite)` index sets.
///
/// Whole fronts go to the elite set until it holds at least `ceil(n/2)`
/// members; the front that crosses the boundary is split by crowding
/// distance, larger distances staying elite. Both lists are ascending.
pub fn divide_offspring(offspring: &[Individual]) -> Result<(Vec<usize>, Vec<usize>)> {
    if offspring.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 offspring to divide, got {}",
            offspring.len()
        )));
    }
    let objectives: Vec<ObjectiveVector> = offspring.iter().map(|i| i.objectives.clone()).collect();
    let target = offspring.len().div_ceil(2);
    let partition = fast_nondominated_sort(&objectives)?;
    let mut elite = Vec::with_capacity(target);
    for front in &partition.fronts {
        let room = target - elite.len();
        if room == 0 {
            break;
        }
        if front.len() <= room {
            elite.extend_from_slice(front);
            continue;
        }
        let objs: Vec<ObjectiveVector> = front.iter().map(|&i| objectives[i].clone()).collect();
        let dist = crowding_distance(&objs);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));
        elite.extend(order[..room].iter().map(|&o| front[o]));
    }
    elite.sort_unstable();
    let mut is_elite = vec![false; offspring.len()];
    for &e in &elite {
        is_elite[e] = true;
    }
    let poor = (0..offspring.len()).filter(|&i| !is_elite[i]).collect();
    Ok((poor, elite))
}

/// Angle in radians between two objective vectors, in `[0, pi]`.
pub fn objective_angle(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::dims(u.len(), v.len()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Degenerate("zero-norm objective vector".into()));
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0).acos())
}

/// Objective vectors shifted by the ideal point of `all` plus [`SHIFT_EPS`].
fn shifted(all: &[&ObjectiveVector]) -> Result<Vec<Vec<f64>>> {
    let k = all.first().ok_or(Error::Empty("objective set"))?.len();
    let mut z = vec![f64::INFINITY; k];
    for o in all {
        if o.len() != k {
            return Err(Error::dims(k, o.len()));
        }
        for (zk, v) in z.iter_mut().zip(o.values()) {
            *zk = zk.min(*v);
        }
    }
    Ok(all
        .iter()
        .map(|o| o.values().iter().zip(&z).map(|(v, zk)| v - zk + SHIFT_EPS).collect())
        .collect())
}

/// Angle matrix between shifted poor and elite objective vectors. The
/// ideal point is taken over both sets.
pub fn angle_matrix(poor: &[&ObjectiveVector], elite: &[&ObjectiveVector]) -> Result<AngleMatrix> {
    if poor.is_empty() {
        return Err(Error::Empty("poor set"));
    }
    if elite.is_empty() {
        return Err(Error::Empty("elite set"));
    }
    let all: Vec<&ObjectiveVector> = poor.iter().chain(elite).copied().collect();
    let s = shifted(&all)?;
    let (sp, se) = s.split_at(poor.len());
    let mut entries = Vec::with_capacity(poor.len() * elite.len());
    for p in sp {
        for e in se {
            entries.push(objective_angle(p, e)?);
        }
    }
    Ok(AngleMatrix { rows: poor.len(), cols: elite.len(), entries })
}

/// For each poor row the elite column of minimum angle (lowest index on ties).
pub fn greedy_assignment(angles: &AngleMatrix) -> Vec<(usize, usize)> {
    (0..angles.rows)
        .map(|r| {
            let row = angles.row(r);
            let best = (0..row.len()).fold(0, |b, c| if row[c] < row[b] { c } else { b });
            (r, best)
        })
        .collect()
}

/// One-to-one assignment minimizing the total angle.
pub fn hungarian_assignment(angles: &AngleMatrix) -> Result<Vec<(usize, usize)>> {
    hungarian(&CostMatrix::new(angles.rows, angles.cols, angles.entries.clone())?)
}

fn to_pairs(
    offspring: &[Individual],
    poor: &[usize],
    elite: &[usize],
    angles: &AngleMatrix,
    assignment: &[(usize, usize)],
) -> PairSet {
    assignment
        .iter()
        .map(|&(r, c)| Pair {
            data: offspring[poor[r]].genotype.clone(),
            label: offspring[elite[c]].genotype.clone(),
            angle: angles.get(r, c),
            data_index: poor[r],
            label_index: elite[c],
        })
        .collect()
}

fn objectives_of<'a>(offspring: &'a [Individual], idx: &[usize]) -> Vec<&'a ObjectiveVector> {
    idx.iter().map(|&i| &offspring[i].objectives).collect()
}

/// Greedy pairing: every poor solution takes its angle-nearest elite.
/// `poor` and `elite` index into `offspring`.
pub fn greedy_match(offspring: &[Individual], poor: &[usize], elite: &[usize]) -> Result<PairSet> {
    let angles = angle_matrix(&objectives_of(offspring, poor), &objectives_of(offspring, elite))?;
    Ok(to_pairs(offspring, poor, elite, &angles, &greedy_assignment(&angles)))
}

/// One-to-one pairing minimizing the summed angle. When the sets differ in
/// size the surplus side stays unmatched.
pub fn hungarian_match(offspring: &[Individual], poor: &[usize], elite: &[usize]) -> Result<PairSet> {
    let angles = angle_matrix(&objectives_of(offspring, poor), &objectives_of(offspring, elite))?;
    Ok(to_pairs(offspring, poor, elite, &angles, &hungarian_assignment(&angles)?))
}

/// Divides `offspring` and pairs poor with elite solutions.
pub fn build_training_set(offspring: &[Individual], mode: PairingMode) -> Result<TrainingSet> {
    let (poor, elite) = divide_offspring(offspring)?;
    let angles = angle_matrix(&objectives_of(offspring, &poor), &objectives_of(offspring, &elite))?;
    let assignment = match mode {
        PairingMode::Greedy => greedy_assignment(&angles),
        PairingMode::Hungarian => hungarian_assignment(&angles)?,
    };
    let pairs = to_pairs(offspring, &poor, &elite, &angles, &assignment);
    Ok(TrainingSet { pairs, angles, poor, elite })
}

#[derive(Serialize)]
struct PairRecord {
    data: usize,
    label: usize,
    angle: f64,
}

#[derive(Serialize)]
struct PairingDump<'a> {
    iteration: usize,
    poor: &'a [usize],
    elite: &'a [usize],
    pairs: Vec<PairRecord>,
    angles: &'a AngleMatrix,
}

impl TrainingSet {
    /// One JSON object describing the split, the pairs and the angle matrix.
    pub fn to_json_line(&self, iteration: usize) -> String {
        let dump = PairingDump {
            iteration,
            poor: &self.poor,
            elite: &self.elite,
            pairs: self
                .pairs
                .iter()
                .map(|p| PairRecord { data: p.data_index, label: p.label_index, angle: p.angle })
                .collect(),
            angles: &self.angles,
        };
        serde_json::to_string(&dump).expect("pairing dump serializes")
    }
}
