//! Batches of runs and the mean (std) hypervolume tables built from them.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::HvConfig;
use crate::objective::ObjectiveVector;

use super::config::{Algorithm, RunConfig};
use super::output::ResultRow;
use super::run::{run, RunOutcome};

/// Every combination of `sizes`, `algorithms` and `seeds` over `base`.
pub fn expand(base: &RunConfig, sizes: &[usize], algorithms: &[Algorithm], seeds: &[u64]) -> Vec<RunConfig> {
    let mut out = Vec::new();
    for &n in sizes {
        for &algorithm in algorithms {
            for &seed in seeds {
                out.push(RunConfig { n, algorithm, seed, ..base.clone() });
            }
        }
    }
    out
}

/// Identifies the problem instance a config runs on.
fn instance_key(cfg: &RunConfig) -> String {
    match &cfg.instance_path {
        Some(p) => p.display().to_string(),
        None => format!("{}-{}-{}-{}", cfg.problem, cfg.n, cfg.k, cfg.instance_seed),
    }
}

/// Runs all configs on the worker pool; outcomes keep the input order.
pub fn run_all(configs: &[RunConfig]) -> Result<Vec<RunOutcome>> {
    for c in configs {
        c.validate()?;
    }
    configs.par_iter().map(run).collect()
}

/// Hypervolume of each outcome's front, normalised per instance over the
/// union of all fronts on that instance, with reference point (1, 1).
pub fn score(outcomes: &[RunOutcome]) -> Result<Vec<ResultRow>> {
    let keys: Vec<String> = outcomes.iter().map(|o| instance_key(&o.config)).collect();
    let mut hv_configs: Vec<(String, HvConfig)> = Vec::new();
    for key in &keys {
        if hv_configs.iter().any(|(k, _)| k == key) {
            continue;
        }
        let fronts: Vec<&[ObjectiveVector]> =
            outcomes.iter().zip(&keys).filter(|(_, k)| *k == key).map(|(o, _)| &o.front[..]).collect();
        hv_configs.push((key.clone(), HvConfig::from_fronts(fronts)?));
    }
    outcomes
        .iter()
        .zip(&keys)
        .map(|(o, key)| {
            let cfg = &hv_configs.iter().find(|(k, _)| k == key).expect("built above").1;
            Ok(ResultRow {
                instance: o.instance_label.clone(),
                algorithm: o.config.algorithm.to_string(),
                seed: o.config.seed,
                hv: cfg.hypervolume(&o.front)?,
            })
        })
        .collect()
}

/// Mean and sample standard deviation of one table cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl CellStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(CellStats { mean, std, count: values.len() })
    }

    /// `7.7289e-1 (1.38e-2)`.
    pub fn format(&self) -> String {
        format!("{:.4e} ({:.2e})", self.mean, self.std)
    }
}

/// Instances as rows, algorithms as columns, in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub instances: Vec<String>,
    pub algorithms: Vec<String>,
    pub cells: Vec<Vec<Option<CellStats>>>,
}

impl SummaryTable {
    pub fn from_rows(rows: &[ResultRow]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("result rows"));
        }
        let mut instances: Vec<String> = Vec::new();
        let mut algorithms: Vec<String> = Vec::new();
        for r in rows {
            if !instances.contains(&r.instance) {
                instances.push(r.instance.clone());
            }
            if !algorithms.contains(&r.algorithm) {
                algorithms.push(r.algorithm.clone());
            }
        }
        let cells = instances
            .iter()
            .map(|inst| {
                algorithms
                    .iter()
                    .map(|alg| {
                        let values: Vec<f64> = rows
                            .iter()
                            .filter(|r| &r.instance == inst && &r.algorithm == alg)
                            .map(|r| r.hv)
                            .collect();
                        CellStats::from_values(&values)
                    })
                    .collect()
            })
            .collect();
        Ok(SummaryTable { instances, algorithms, cells })
    }

    pub fn cell(&self, instance: &str, algorithm: &str) -> Option<CellStats> {
        let i = self.instances.iter().position(|x| x == instance)?;
        let j = self.algorithms.iter().position(|x| x == algorithm)?;
        self.cells[i][j]
    }

    fn rendered(&self) -> Vec<Vec<String>> {
        let mut rows = vec![std::iter::once("instance".to_string()).chain(self.algorithms.iter().cloned()).collect()];
        for (inst, cells) in self.instances.iter().zip(&self.cells) {
            let mut row = vec![inst.clone()];
            row.extend(cells.iter().map(|c| c.map_or_else(|| "-".to_string(), |c| c.format())));
            rows.push(row);
        }
        rows
    }

    pub fn to_csv(&self) -> String {
        self.rendered().iter().map(|r| r.join(",") + "\n").collect()
    }

    pub fn to_text(&self) -> String {
        let rows = self.rendered();
        let widths: Vec<usize> =
            (0..rows[0].len()).map(|j| rows.iter().map(|r| r[j].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for (i, r) in rows.iter().enumerate() {
            let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            if i == 0 {
                let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
            }
        }
        out
    }
}

/// Runs every config and tabulates the normalised hypervolumes.
pub fn compare(configs: &[RunConfig]) -> Result<(Vec<RunOutcome>, Vec<ResultRow>, SummaryTable)> {
    let outcomes = run_all(configs)?;
    let rows = score(&outcomes)?;
    let table = SummaryTable::from_rows(&rows)?;
    Ok((outcomes, rows, table))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(inst: &str, alg: &str, seed: u64, hv: f64) -> ResultRow {
        ResultRow { instance: inst.into(), algorithm: alg.into(), seed, hv }
    }

    #[test]
    fn cell_format_matches_table_convention() {
        let c = CellStats { mean: 0.77289, std: 0.0138, count: 10 };
        assert_eq!(c.format(), "7.7289e-1 (1.38e-2)");
        assert_eq!(CellStats::from_values(&[0.5]).unwrap().std, 0.0);
        assert!(CellStats::from_values(&[]).is_none());
    }

    #[test]
    fn table_matches_recomputation() {
        let rows = vec![
            row("MOTSP15", "moead", 1, 0.7),
            row("MOTSP15", "moead", 2, 0.8),
            row("MOTSP15", "seqmo-moead", 1, 0.9),
            row("MOTSP20", "moead", 1, 0.6),
        ];
        let t = SummaryTable::from_rows(&rows).unwrap();
        assert_eq!(t.algorithms, ["moead", "seqmo-moead"]);
        let c = t.cell("MOTSP15", "moead").unwrap();
        assert!((c.mean - 0.75).abs() < 1e-12);
        assert!((c.std - (0.005f64).sqrt()).abs() < 1e-12);
        assert!(t.cell("MOTSP20", "seqmo-moead").is_none());
        let text = t.to_text();
        assert!(text.lines().next().unwrap().starts_with("instance"));
        assert_eq!(t.to_csv().lines().count(), 3);
        assert!(SummaryTable::from_rows(&[]).is_err());
    }

    #[test]
    fn expand_covers_the_grid() {
        let algs = ["moead".parse().unwrap(), "seqmo-moead".parse().unwrap()];
        let v = expand(&RunConfig::default(), &[15, 20], &algs, &[1, 2, 3]);
        assert_eq!(v.len(), 12);
        assert_eq!(v[0].n, 15);
        assert_eq!(v[11].n, 20);
        assert_eq!(v[11].seed, 3);
    }
}
