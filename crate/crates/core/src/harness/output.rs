//! Files written for each run: results, final front, traces, snapshots and
//! a manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::population::Population;
use crate::rng::{RngStream, StreamId};

use super::config::RunConfig;
use super::run::{LossRecord, RunOutcome, SELECTION_STREAM};
use super::snapshot::snapshots_to_jsonl;

pub const RESULTS_FILE: &str = "results.csv";
pub const FRONT_FILE: &str = "population.csv";
pub const UPDATE_TRACE_FILE: &str = "update_trace.csv";
pub const LOSS_TRACE_FILE: &str = "loss_trace.csv";
pub const SNAPSHOT_FILE: &str = "snapshots.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "run.cfg";

/// One line of a results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub instance: String,
    pub algorithm: String,
    pub seed: u64,
    pub hv: f64,
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from("instance,algorithm,seed,hv\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{:?}", r.instance, r.algorithm, r.seed, r.hv);
    }
    out
}

pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let bad = || Error::InvalidArgument(format!("results line {}: `{line}`", i + 1));
        if cols.len() != 4 {
            return Err(bad());
        }
        rows.push(ResultRow {
            instance: cols[0].to_string(),
            algorithm: cols[1].to_string(),
            seed: cols[2].parse().map_err(|_| bad())?,
            hv: cols[3].parse().map_err(|_| bad())?,
        });
    }
    Ok(rows)
}

pub fn loss_trace_csv(records: &[LossRecord]) -> String {
    let mut out = String::from("iteration,generation,epoch,loss\n");
    for r in records {
        let _ = writeln!(out, "{},{},{},{:?}", r.iteration, r.generation, r.epoch, r.loss);
    }
    out
}

/// Objective values and 1-based genotype of every member.
pub fn population_csv(pop: &Population) -> String {
    let k = pop.members().first().map_or(0, |m| m.objectives.len());
    let mut out = String::new();
    let header: Vec<String> = (1..=k).map(|i| format!("f{i}")).chain(["permutation".to_string()]).collect();
    let _ = writeln!(out, "{}", header.join(","));
    for m in pop.members() {
        for v in m.objectives.values() {
            let _ = write!(out, "{v:?},");
        }
        let _ = writeln!(out, "{}", m.genotype);
    }
    out
}

#[derive(Debug, Serialize)]
struct StreamSeeds {
    evolution: u64,
    selection: u64,
    neural_init: u64,
    shuffle: u64,
    dropout: u64,
    instance: u64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    format: &'static str,
    tool_version: &'static str,
    instance: &'a str,
    config: &'a RunConfig,
    stream_seeds: StreamSeeds,
    evaluations: u64,
    generations: usize,
    training_iterations: usize,
    hv: Option<f64>,
    files: Vec<&'static str>,
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes every file of one run into `dir`, creating it if needed. Contents
/// depend only on the config, so repeated runs produce identical bytes.
pub fn write_run(outcome: &RunOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cfg = &outcome.config;
    let mut files = vec![CONFIG_FILE, FRONT_FILE];
    let mut paths = vec![write(dir, CONFIG_FILE, &cfg.to_kv_string())?, write(dir, FRONT_FILE, &population_csv(&outcome.population))?];
    if let Some(hv) = outcome.hv {
        let row = ResultRow { instance: outcome.instance_label.clone(), algorithm: cfg.algorithm.to_string(), seed: cfg.seed, hv };
        paths.push(write(dir, RESULTS_FILE, &results_csv(&[row]))?);
        files.push(RESULTS_FILE);
    }
    if cfg.algorithm.is_seqmo() {
        paths.push(write(dir, UPDATE_TRACE_FILE, &outcome.update_trace.to_csv())?);
        paths.push(write(dir, LOSS_TRACE_FILE, &loss_trace_csv(&outcome.loss_trace))?);
        paths.push(write(dir, SNAPSHOT_FILE, &snapshots_to_jsonl(&outcome.snapshots))?);
        files.extend([UPDATE_TRACE_FILE, LOSS_TRACE_FILE, SNAPSHOT_FILE]);
    }
    let seed_of = |id| RngStream::derive(cfg.seed, id).seed();
    let manifest = Manifest {
        format: "seqmo-manifest 1",
        tool_version: env!("CARGO_PKG_VERSION"),
        instance: &outcome.instance_label,
        config: cfg,
        stream_seeds: StreamSeeds {
            evolution: seed_of(StreamId::Evolution),
            selection: seed_of(SELECTION_STREAM),
            neural_init: seed_of(StreamId::NeuralInit),
            shuffle: seed_of(StreamId::Shuffle),
            dropout: seed_of(StreamId::Dropout),
            instance: RngStream::derive(cfg.instance_seed, StreamId::Instance).seed(),
        },
        evaluations: outcome.evaluations,
        generations: outcome.generations,
        training_iterations: outcome.update_trace.len(),
        hv: outcome.hv,
        files,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("serializable") + "\n";
    paths.push(write(dir, MANIFEST_FILE, &json)?);
    Ok(paths)
}
