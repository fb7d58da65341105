//! Hypervolume, objective normalisation and the predicted-solution update
//! trace.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::objective::ObjectiveVector;

/// Area dominated by `front` and bounded by `reference`, for two
/// objectives. Points that do not strictly dominate the reference point
/// contribute nothing.
pub fn hypervolume_2d(front: &[ObjectiveVector], reference: &ObjectiveVector) -> Result<f64> {
    if reference.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "hypervolume is implemented for 2 objectives, reference has {}",
            reference.len()
        )));
    }
    let (r1, r2) = (reference[0], reference[1]);
    let mut pts = Vec::with_capacity(front.len());
    for p in front {
        if p.len() != 2 {
            return Err(Error::dims(2, p.len()));
        }
        if p[0] < r1 && p[1] < r2 {
            pts.push((p[0], p[1]));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    // sweep in ascending f1; each point that lowers the best f2 so far adds
    // the slab between it and the next such point
    let mut area = 0.0;
    let mut best_f2 = r2;
    let mut kept: Vec<(f64, f64)> = Vec::new();
    for (f1, f2) in pts {
        if f2 < best_f2 {
            kept.push((f1, f2));
            best_f2 = f2;
        }
    }
    for (i, &(f1, f2)) in kept.iter().enumerate() {
        let next = kept.get(i + 1).map_or(r1, |p| p.0);
        area += (next - f1) * (r2 - f2);
    }
    Ok(area)
}

/// Per-objective `(lower, upper)` box spanning all given points.
pub fn objective_bounds<'a>(points: impl IntoIterator<Item = &'a ObjectiveVector>) -> Option<Vec<(f64, f64)>> {
    let mut it = points.into_iter();
    let first = it.next()?;
    let mut bounds: Vec<(f64, f64)> = first.values().iter().map(|&v| (v, v)).collect();
    for p in it {
        for (b, &v) in bounds.iter_mut().zip(p.values()) {
            b.0 = b.0.min(v);
            b.1 = b.1.max(v);
        }
    }
    Some(bounds)
}

/// Affine map of each objective from `[lower, upper]` to `[0, 1]`. Values
/// outside the bounds are not clamped.
pub fn normalize_front(front: &[ObjectiveVector], bounds: &[(f64, f64)]) -> Result<Vec<ObjectiveVector>> {
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Degenerate(format!("objective {k} has bounds ({lo}, {hi})")));
        }
    }
    front
        .iter()
        .map(|p| {
            if p.len() != bounds.len() {
                return Err(Error::dims(bounds.len(), p.len()));
            }
            let v = p.values().iter().zip(bounds).map(|(&x, &(lo, hi))| (x - lo) / (hi - lo)).collect();
            ObjectiveVector::new(v)
        })
        .collect()
}

/// Normalisation box and reference point for comparing fronts.
#[derive(Debug, Clone, PartialEq)]
pub struct HvConfig {
    pub reference_point: ObjectiveVector,
    pub bounds: Vec<(f64, f64)>,
}

impl HvConfig {
    /// Unit reference point over `bounds`; a zero-width objective range is
    /// widened to one unit so the box stays non-degenerate.
    pub fn unit(bounds: Vec<(f64, f64)>) -> Self {
        let bounds: Vec<(f64, f64)> =
            bounds.into_iter().map(|(lo, hi)| if hi > lo { (lo, hi) } else { (lo, lo + 1.0) }).collect();
        let reference_point = ObjectiveVector::from_raw(vec![1.0; bounds.len()]);
        HvConfig { reference_point, bounds }
    }

    /// Bounds spanning every point of every front.
    pub fn from_fronts<'a>(fronts: impl IntoIterator<Item = &'a [ObjectiveVector]>) -> Result<Self> {
        let bounds = objective_bounds(fronts.into_iter().flatten()).ok_or(Error::Empty("fronts"))?;
        Ok(Self::unit(bounds))
    }

    /// Bounds of a single front widened by `margin` of its range on each
    /// side, so that its extreme points still enclose area.
    pub fn widened(front: &[ObjectiveVector], margin: f64) -> Result<Self> {
        let bounds = objective_bounds(front).ok_or(Error::Empty("front"))?;
        let bounds = bounds
            .into_iter()
            .map(|(lo, hi)| {
                let w = if hi > lo { hi - lo } else { 1.0 };
                (lo - margin * w, hi + margin * w)
            })
            .collect();
        Ok(Self::unit(bounds))
    }

    pub fn hypervolume(&self, front: &[ObjectiveVector]) -> Result<f64> {
        hypervolume_2d(&normalize_front(front, &self.bounds)?, &self.reference_point)
    }
}

/// Number of population members replaced by predicted solutions, per
/// training iteration.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdateTrace {
    /// `(iteration, count)`, iterations strictly increasing.
    entries: Vec<(usize, usize)>,
}

impl UpdateTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Ensures an entry for `iteration` exists, creating it with count 0.
    pub fn begin(&mut self, iteration: usize) -> Result<()> {
        match self.entries.last() {
            Some(&(last, _)) if last == iteration => Ok(()),
            Some(&(last, _)) if last > iteration => Err(Error::InvalidArgument(format!(
                "update trace iteration {iteration} precedes {last}"
            ))),
            _ => {
                self.entries.push((iteration, 0));
                Ok(())
            }
        }
    }

    /// Adds `count` replacements to `iteration`.
    pub fn add(&mut self, iteration: usize, count: usize) -> Result<()> {
        self.begin(iteration)?;
        self.entries.last_mut().expect("entry exists").1 += count;
        Ok(())
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn counts(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.1).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,updated\n");
        for (it, n) in &self.entries {
            let _ = writeln!(out, "{it},{n}");
        }
        out
    }

    /// Aligned text table with `per_row` iterations per block: one row of
    /// iteration numbers and one row of counts.
    pub fn render_table(&self, per_row: usize) -> String {
        let mut out = String::new();
        for block in self.entries.chunks(per_row.max(1)) {
            let its: Vec<String> = block.iter().map(|e| e.0.to_string()).collect();
            let ns: Vec<String> = block.iter().map(|e| e.1.to_string()).collect();
            let w: Vec<usize> = its.iter().zip(&ns).map(|(a, b)| a.len().max(b.len())).collect();
            let line = |label: &str, vals: &[String]| {
                let cells: Vec<String> = vals.iter().zip(&w).map(|(v, w)| format!("{v:>w$}")).collect();
                format!("{label:<9} | {}\n", cells.join(" | "))
            };
            out.push_str(&line("iteration", &its));
            out.push_str(&line("updated", &ns));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut trace = UpdateTrace::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let parse = |s: Option<&str>| {
                s.and_then(|s| s.trim().parse::<usize>().ok())
                    .ok_or_else(|| Error::InvalidArgument(format!("update trace line {}: `{line}`", i + 1)))
            };
            let mut cols = line.split(',');
            let it = parse(cols.next())?;
            let n = parse(cols.next())?;
            trace.add(it, n)?;
        }
        Ok(trace)
    }
}

/// Adds one to `iteration` when `accepted`; otherwise only makes sure the
/// iteration is present.
pub fn record_update(trace: &mut UpdateTrace, iteration: usize, accepted: bool) -> Result<()> {
    trace.add(iteration, usize::from(accepted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ov(a: f64, b: f64) -> ObjectiveVector {
        ObjectiveVector::new(vec![a, b]).unwrap()
    }

    fn unit_ref() -> ObjectiveVector {
        ov(1.0, 1.0)
    }

    #[test]
    fn worked_examples() {
        assert_eq!(hypervolume_2d(&[ov(0.5, 0.5)], &unit_ref()).unwrap(), 0.25);
        let hv = hypervolume_2d(&[ov(0.2, 0.6), ov(0.6, 0.2)], &unit_ref()).unwrap();
        // inclusion-exclusion: 0.32 + 0.32 - 0.16
        assert!((hv - 0.48).abs() < 1e-15);
        assert_eq!(hypervolume_2d(&[], &unit_ref()).unwrap(), 0.0);
        assert_eq!(hypervolume_2d(&[ov(1.0, 0.2), ov(0.3, 1.5)], &unit_ref()).unwrap(), 0.0);
    }

    #[test]
    fn dominating_front_has_more_volume() {
        let b = [ov(0.3, 0.7), ov(0.7, 0.3)];
        let a = [ov(0.2, 0.6), ov(0.6, 0.2)];
        assert!(hypervolume_2d(&a, &unit_ref()).unwrap() > hypervolume_2d(&b, &unit_ref()).unwrap());
    }

    #[test]
    fn three_objectives_are_rejected() {
        let r = ObjectiveVector::new(vec![1.0; 3]).unwrap();
        assert!(hypervolume_2d(&[], &r).is_err());
        assert!(hypervolume_2d(&[ObjectiveVector::new(vec![0.1; 3]).unwrap()], &unit_ref()).is_err());
    }

    #[test]
    fn normalisation_examples() {
        let n = normalize_front(&[ov(5.0, 2.0)], &[(0.0, 10.0), (2.0, 4.0)]).unwrap();
        assert_eq!(n[0].values(), &[0.5, 0.0]);
        let front = [ov(1.0, 9.0), ov(3.0, 5.0)];
        let b = objective_bounds(&front).unwrap();
        let n = normalize_front(&front, &b).unwrap();
        assert_eq!(n[0].values(), &[0.0, 1.0]);
        assert_eq!(n[1].values(), &[1.0, 0.0]);
        let same = normalize_front(&front, &[(0.0, 1.0), (0.0, 1.0)]).unwrap();
        assert_eq!(same, front.to_vec());
        assert!(matches!(normalize_front(&front, &[(1.0, 1.0), (0.0, 1.0)]), Err(Error::Degenerate(_))));
        // out-of-range values pass through unclamped
        let n = normalize_front(&[ov(12.0, 0.0)], &[(0.0, 10.0), (0.0, 1.0)]).unwrap();
        assert!((n[0][0] - 1.2).abs() < 1e-15);
    }

    #[test]
    fn hv_config_widening_keeps_extremes_inside() {
        let front = [ov(1.0, 9.0), ov(3.0, 5.0)];
        let cfg = HvConfig::widened(&front, 0.1).unwrap();
        assert!(cfg.hypervolume(&front).unwrap() > 0.0);
        let tight = HvConfig::from_fronts([&front[..]]).unwrap();
        assert_eq!(tight.hypervolume(&front).unwrap(), 0.0);
        let single = [ov(2.0, 2.0)];
        assert!(HvConfig::widened(&single, 0.1).unwrap().hypervolume(&single).unwrap() > 0.0);
    }

    #[test]
    fn update_trace_bookkeeping() {
        let mut t = UpdateTrace::new();
        record_update(&mut t, 1, true).unwrap();
        record_update(&mut t, 1, true).unwrap();
        record_update(&mut t, 2, false).unwrap();
        record_update(&mut t, 3, true).unwrap();
        assert_eq!(t.entries(), &[(1, 2), (2, 0), (3, 1)]);
        assert_eq!(t.total(), 3);
        assert!(record_update(&mut t, 2, true).is_err());
        assert_eq!(UpdateTrace::from_csv(&t.to_csv()).unwrap(), t);
        let table = t.render_table(2);
        assert_eq!(table.lines().next().unwrap(), "iteration | 1 | 2");
        assert_eq!(table.lines().nth(1).unwrap(), "updated   | 2 | 0");
    }

    fn front_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.0f64..1.2, 0.0f64..1.2), 0..20)
    }

    fn to_front(pts: &[(f64, f64)]) -> Vec<ObjectiveVector> {
        pts.iter().map(|&(a, b)| ov(a, b)).collect()
    }

    proptest! {
        #[test]
        fn order_does_not_matter(pts in front_strategy(), seed in any::<u64>()) {
            let front = to_front(&pts);
            let mut shuffled = front.clone();
            crate::rng::RngStream::new(seed).shuffle(&mut shuffled);
            let a = hypervolume_2d(&front, &unit_ref()).unwrap();
            let b = hypervolume_2d(&shuffled, &unit_ref()).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn dominated_points_add_nothing(pts in front_strategy(), idx in any::<prop::sample::Index>(), dx in 0.0f64..0.2, dy in 0.0f64..0.2) {
            prop_assume!(!pts.is_empty());
            let mut front = to_front(&pts);
            let base = hypervolume_2d(&front, &unit_ref()).unwrap();
            let p = &pts[idx.index(pts.len())];
            front.push(ov(p.0 + dx, p.1 + dy));
            let after = hypervolume_2d(&front, &unit_ref()).unwrap();
            prop_assert!((after - base).abs() < 1e-12);
        }

        #[test]
        fn new_nondominated_point_in_the_box_adds_volume(pts in front_strategy(), x in 0.0f64..0.999, y in 0.0f64..0.999) {
            let mut front = to_front(&pts);
            let q = ov(x, y);
            prop_assume!(!front.iter().any(|p| p.values()[0] <= x && p.values()[1] <= y));
            let base = hypervolume_2d(&front, &unit_ref()).unwrap();
            front.push(q);
            prop_assert!(hypervolume_2d(&front, &unit_ref()).unwrap() > base);
        }
    }
}
