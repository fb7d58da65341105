use crate::error::{Error, Result};
use crate::permutation::Permutation;
use crate::rng::RngStream;

/// Order crossover (OX) with random cut points.
pub fn order_crossover(u: &Permutation, v: &Permutation, rng: &mut RngStream) -> Result<Permutation> {
    if u.len() != v.len() {
        return Err(Error::dims(u.len(), v.len()));
    }
    let n = u.len();
    let a = rng.below(n);
    let b = rng.below(n);
    order_crossover_with_cuts(u, v, a.min(b), a.max(b))
}

/// Order crossover keeping `u[first..=last]` in place (0-based, inclusive).
///
/// The remaining elements are taken in the order they appear in `v` and
/// written into the free positions from left to right.
pub fn order_crossover_with_cuts(
    u: &Permutation,
    v: &Permutation,
    first: usize,
    last: usize,
) -> Result<Permutation> {
    let n = u.len();
    if v.len() != n {
        return Err(Error::dims(n, v.len()));
    }
    if first > last || last >= n {
        return Err(Error::InvalidArgument(format!("bad cut points ({first}, {last}) for length {n}")));
    }
    let u = u.as_slice();
    let mut in_segment = vec![false; n];
    let mut child = vec![usize::MAX; n];
    for i in first..=last {
        child[i] = u[i];
        in_segment[u[i]] = true;
    }
    let free = (0..first).chain(last + 1..n);
    for (pos, &x) in free.zip(v.as_slice().iter().filter(|&&x| !in_segment[x])) {
        child[pos] = x;
    }
    Ok(Permutation::from_zero_based(child).expect("OX yields a permutation"))
}

/// Swap mutation.
///
/// Each position not yet touched by an earlier swap in this call is selected
/// with probability `rate` and exchanged with a uniformly chosen other
/// position. For small rates the expected number of swaps is close to
/// `rate * n`.
pub fn swap_mutation(p: &Permutation, rate: f64, rng: &mut RngStream) -> Result<Permutation> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!("mutation rate {rate} outside [0, 1]")));
    }
    let mut out = p.clone();
    let n = out.len();
    if n < 2 || rate == 0.0 {
        return Ok(out);
    }
    let mut touched = vec![false; n];
    for i in 0..n {
        if touched[i] || !rng.bernoulli(rate) {
            continue;
        }
        let mut j = rng.below(n - 1);
        if j >= i {
            j += 1;
        }
        out.swap(i, j);
        touched[i] = true;
        touched[j] = true;
    }
    Ok(out)
}
