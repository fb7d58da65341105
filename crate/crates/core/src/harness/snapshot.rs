//! Per-iteration objective-space snapshots, written as JSON lines.
//!
//! Each point is one record
//! `{"type":"point","iteration":1,"id":0,"role":"poor","objectives":[..]}`
//! and each poor-to-generated correspondence one record
//! `{"type":"pair","iteration":1,"poor":0,"generated":57}`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Poor,
    Elite,
    Population,
    Generated,
    GeneratedAndAccepted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotPoint {
    pub id: usize,
    pub role: Role,
    pub objectives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Snapshot {
    pub iteration: usize,
    pub points: Vec<SnapshotPoint>,
    /// `(poor id, generated id)`.
    pub pairs: Vec<(usize, usize)>,
}

impl Snapshot {
    pub fn new(iteration: usize) -> Self {
        Snapshot { iteration, ..Default::default() }
    }

    /// Adds a point with the next free id and returns that id.
    pub fn add_point(&mut self, role: Role, objectives: &[f64]) -> usize {
        let id = self.points.len();
        self.points.push(SnapshotPoint { id, role, objectives: objectives.to_vec() });
        id
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &SnapshotPoint> {
        self.points.iter().filter(move |p| p.role == role)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Record {
    Point {
        iteration: usize,
        id: usize,
        role: Role,
        objectives: Vec<f64>,
    },
    Pair {
        iteration: usize,
        poor: usize,
        generated: usize,
    },
}

pub fn snapshots_to_jsonl(snapshots: &[Snapshot]) -> String {
    let mut out = String::new();
    for s in snapshots {
        for p in &s.points {
            let r = Record::Point { iteration: s.iteration, id: p.id, role: p.role, objectives: p.objectives.clone() };
            out.push_str(&serde_json::to_string(&r).expect("serializable"));
            out.push('\n');
        }
        for &(poor, generated) in &s.pairs {
            let r = Record::Pair { iteration: s.iteration, poor, generated };
            out.push_str(&serde_json::to_string(&r).expect("serializable"));
            out.push('\n');
        }
    }
    out
}

pub fn parse_snapshots(text: &str) -> Result<Vec<Snapshot>> {
    let mut snapshots: Vec<Snapshot> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(line)
            .map_err(|e| Error::InvalidArgument(format!("snapshot line {}: {e}", i + 1)))?;
        let iteration = match &record {
            Record::Point { iteration, .. } | Record::Pair { iteration, .. } => *iteration,
        };
        if snapshots.last().is_none_or(|s| s.iteration != iteration) {
            snapshots.push(Snapshot::new(iteration));
        }
        let snap = snapshots.last_mut().expect("pushed above");
        match record {
            Record::Point { id, role, objectives, .. } => snap.points.push(SnapshotPoint { id, role, objectives }),
            Record::Pair { poor, generated, .. } => {
                let known = |id: usize| snap.points.iter().any(|p| p.id == id);
                if !known(poor) || !known(generated) {
                    return Err(Error::InvalidArgument(format!(
                        "snapshot line {}: pair references an unknown point",
                        i + 1
                    )));
                }
                snap.pairs.push((poor, generated));
            }
        }
    }
    Ok(snapshots)
}

pub fn emit_snapshots(snapshots: &[Snapshot], path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(snapshots_to_jsonl(snapshots).as_bytes()).map_err(|e| Error::io(path, e))
}
