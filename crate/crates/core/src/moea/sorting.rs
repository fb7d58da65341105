use crate::error::{Error, Result};
use crate::objective::{dominates_slice, ObjectiveVector};

/// Ranked fronts of indices into the sorted input; front 0 is non-dominated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontPartition {
    pub fronts: Vec<Vec<usize>>,
}

impl FrontPartition {
    /// `rank[i]` is the 0-based front index of input `i`.
    pub fn ranks(&self) -> Vec<usize> {
        let n = self.fronts.iter().map(Vec::len).sum();
        let mut rank = vec![0; n];
        for (r, front) in self.fronts.iter().enumerate() {
            for &i in front {
                rank[i] = r;
            }
        }
        rank
    }

    pub fn first(&self) -> &[usize] {
        &self.fronts[0]
    }
}

/// Deb's fast non-dominated sort. Indices within a front are ascending.
pub fn fast_nondominated_sort(objectives: &[ObjectiveVector]) -> Result<FrontPartition> {
    if objectives.is_empty() {
        return Err(Error::Empty("non-dominated sort input"));
    }
    let k = objectives[0].len();
    if let Some(bad) = objectives.iter().find(|o| o.len() != k) {
        return Err(Error::dims(k, bad.len()));
    }
    let n = objectives.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (objectives[i].values(), objectives[j].values());
            if dominates_slice(a, b) {
                dominated_by[i].push(j);
                counts[j] += 1;
            } else if dominates_slice(b, a) {
                dominated_by[j].push(i);
                counts[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    Ok(FrontPartition { fronts })
}

/// Crowding distance of every member of one front.
///
/// Boundary members along any objective get `+inf`; interior members sum the
/// normalized gap between their sorted neighbours over all objectives. Equal
/// values keep input order, so duplicates are ordered by index.
pub fn crowding_distance(front: &[ObjectiveVector]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let k = front[0].len();
    let mut dist = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for m in 0..k {
        order.sort_by(|&a, &b| front[a][m].total_cmp(&front[b][m]).then(a.cmp(&b)));
        let lo = front[order[0]][m];
        let hi = front[order[n - 1]][m];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in order.windows(3) {
            let gap = (front[w[2]][m] - front[w[0]][m]) / range;
            dist[w[1]] += gap;
        }
    }
    dist
}

/// Indices of the non-dominated members of `objectives`, ascending.
pub fn nondominated_indices(objectives: &[ObjectiveVector]) -> Vec<usize> {
    (0..objectives.len())
        .filter(|&i| {
            !objectives
                .iter()
                .any(|o| dominates_slice(o.values(), objectives[i].values()))
        })
        .collect()
}
