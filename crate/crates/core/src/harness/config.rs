//! Declarative run configuration: a versioned `key = value` text file.
//!
//! ```text
//! version = 1
//! problem = motsp
//! n = 15
//! algorithm = seqmo-moead
//! profile = desk
//! seed = 3
//! ```
//! Keys left out take the defaults of the chosen `profile`; blank lines and
//! lines starting with `#` are ignored.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moea::{EaConfig, HostKind};
use crate::neuralnet::TrainConfig;
use crate::pairing::PairingMode;
use crate::problems::{load_instance, Instance, ProblemKind};
use crate::rng::{RngStream, StreamId};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Algorithm {
    /// A host EA on its own.
    Plain(HostKind),
    /// A host EA wrapped with the learned generator.
    Seqmo(HostKind),
}

impl Algorithm {
    pub fn host(self) -> HostKind {
        match self {
            Algorithm::Plain(h) | Algorithm::Seqmo(h) => h,
        }
    }

    pub fn is_seqmo(self) -> bool {
        matches!(self, Algorithm::Seqmo(_))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Plain(h) => write!(f, "{h}"),
            Algorithm::Seqmo(h) => write!(f, "seqmo-{h}"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.strip_prefix("seqmo-") {
            Some(host) => Ok(Algorithm::Seqmo(host.parse()?)),
            None if s == "seqmo" => Ok(Algorithm::Seqmo(HostKind::Moead)),
            None => Ok(Algorithm::Plain(s.parse()?)),
        }
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Algorithm {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Training budget presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// 20 epochs every 5th generation on a 64-unit network.
    Desk,
    /// 200 epochs every generation on a 200-unit network.
    Paper,
}

impl Profile {
    pub fn train_config(self) -> TrainConfig {
        match self {
            Profile::Desk => TrainConfig { epochs: 20, hidden_units: 64, embedding_dim: 32, ..TrainConfig::default() },
            Profile::Paper => TrainConfig::default(),
        }
    }

    /// Population size. The desk value is large enough for one training
    /// iteration to replace several hundred members, as in the reference
    /// update trace.
    pub fn pop_size(self) -> usize {
        match self {
            Profile::Desk => 1000,
            Profile::Paper => EaConfig::default().pop_size,
        }
    }

    pub fn pairing(self) -> PairingMode {
        match self {
            Profile::Desk => PairingMode::Hungarian,
            Profile::Paper => PairingMode::Greedy,
        }
    }

    pub fn train_every(self) -> usize {
        match self {
            Profile::Desk => 5,
            Profile::Paper => 1,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Desk => "desk",
            Profile::Paper => "paper",
        })
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            other => Err(Error::Config(format!("unknown profile `{other}` (expected desk or paper)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub n: usize,
    pub k: usize,
    pub instance_seed: u64,
    pub instance_path: Option<PathBuf>,
    pub algorithm: Algorithm,
    pub pop_size: usize,
    pub max_fe: u64,
    pub neighborhood_size: usize,
    pub max_replacements: usize,
    /// `None` means 2 / n.
    pub mutation_rate: Option<f64>,
    pub pairing: PairingMode,
    pub profile: Profile,
    pub train: TrainConfig,
    /// Train and predict on every `train_every`-th generation, starting with
    /// the first; 0 disables the learned generator.
    pub train_every: usize,
    /// Snapshot the first training iteration and every multiple of this; 0
    /// disables snapshots.
    pub snapshot_every: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::for_profile(Profile::Desk)
    }
}

impl RunConfig {
    pub fn for_profile(profile: Profile) -> Self {
        let ea = EaConfig::default();
        RunConfig {
            problem: ProblemKind::Motsp,
            n: 15,
            k: 2,
            instance_seed: 1,
            instance_path: None,
            algorithm: Algorithm::Seqmo(HostKind::Moead),
            pop_size: profile.pop_size(),
            max_fe: 50_000,
            neighborhood_size: ea.neighborhood_size,
            max_replacements: ea.max_replacements,
            mutation_rate: ea.mutation_rate,
            pairing: profile.pairing(),
            profile,
            train: profile.train_config(),
            train_every: profile.train_every(),
            snapshot_every: 11,
            seed: 1,
        }
    }

    pub fn ea_config(&self) -> EaConfig {
        EaConfig {
            pop_size: self.pop_size,
            mutation_rate: self.mutation_rate,
            neighborhood_size: self.neighborhood_size,
            max_replacements: self.max_replacements,
        }
    }

    /// Whether the learned generator runs at all.
    pub fn learning_enabled(&self) -> bool {
        self.algorithm.is_seqmo() && self.train_every > 0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n < 3 {
            return bad(format!("n must be at least 3, got {}", self.n));
        }
        if self.k < 2 {
            return bad(format!("k must be at least 2, got {}", self.k));
        }
        if self.pop_size < 2 {
            return bad(format!("pop_size must be at least 2, got {}", self.pop_size));
        }
        if self.max_fe <= self.pop_size as u64 {
            return bad(format!("max_fe ({}) must exceed pop_size ({})", self.max_fe, self.pop_size));
        }
        if self.algorithm.host() == HostKind::Moead
            && (self.neighborhood_size == 0 || self.neighborhood_size > self.pop_size)
        {
            return bad(format!("neighborhood_size must lie in 1..={}", self.pop_size));
        }
        if self.max_replacements == 0 {
            return bad("max_replacements must be positive".into());
        }
        if let Some(r) = self.mutation_rate {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("mutation_rate must lie in [0, 1], got {r}"));
            }
        }
        if self.train.hidden_units == 0 {
            return bad("hidden_units must be positive".into());
        }
        self.train.validate()
    }

    /// Loads or generates the problem instance described by the config.
    pub fn instance(&self) -> Result<Instance> {
        match &self.instance_path {
            Some(path) => {
                let inst = load_instance(path)?;
                if inst.kind() != self.problem || inst.size() != self.n || inst.n_objectives() != self.k {
                    return Err(Error::Config(format!(
                        "{} holds a {} instance with n={} k={}, config asks for {} n={} k={}",
                        path.display(),
                        inst.kind(),
                        inst.size(),
                        inst.n_objectives(),
                        self.problem,
                        self.n,
                        self.k
                    )));
                }
                Ok(inst)
            }
            None => {
                let mut rng = RngStream::derive(self.instance_seed, StreamId::Instance);
                Instance::generate(self.problem, self.n, self.k, &mut rng)
            }
        }
    }

    /// Renders the config in the file format, every key explicit.
    pub fn to_kv_string(&self) -> String {
        let t = &self.train;
        let mut lines = vec![
            format!("version = {CONFIG_VERSION}"),
            format!("problem = {}", self.problem),
            format!("n = {}", self.n),
            format!("k = {}", self.k),
            format!("instance_seed = {}", self.instance_seed),
        ];
        if let Some(p) = &self.instance_path {
            lines.push(format!("instance_path = {}", p.display()));
        }
        lines.extend([
            format!("algorithm = {}", self.algorithm),
            format!("profile = {}", self.profile),
            format!("pop_size = {}", self.pop_size),
            format!("max_fe = {}", self.max_fe),
            format!("neighborhood_size = {}", self.neighborhood_size),
            format!("max_replacements = {}", self.max_replacements),
            format!(
                "mutation_rate = {}",
                self.mutation_rate.map_or_else(|| "auto".to_string(), |r| format!("{r:?}"))
            ),
            format!("pairing = {}", self.pairing),
            format!("epochs = {}", t.epochs),
            format!("batch_size = {}", t.batch_size),
            format!("learn_rate = {:?}", t.learn_rate),
            format!("hidden_units = {}", t.hidden_units),
            format!("embedding_dim = {}", t.embedding_dim),
            format!("dropout = {:?}", t.dropout),
            format!("clip_norm = {:?}", t.clip_norm),
            format!("warm_start = {}", t.warm_start),
            format!("train_every = {}", self.train_every),
            format!("snapshot_every = {}", self.snapshot_every),
            format!("seed = {}", self.seed),
        ]);
        lines.join("\n") + "\n"
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        // relative instance paths are resolved against the config's directory
        if let (Some(p), Some(dir)) = (&cfg.instance_path, path.parent()) {
            if p.is_relative() {
                cfg.instance_path = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            if entries.iter().any(|e| e.1 == key) {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", i + 1)));
            }
            entries.push((i + 1, key, value.trim().to_string()));
        }
        let version = entries
            .iter()
            .find(|e| e.1 == "version")
            .ok_or_else(|| Error::Config("missing `version` key".into()))?;
        if version.2 != CONFIG_VERSION.to_string() {
            return Err(Error::Config(format!(
                "line {}: unsupported config version `{}` (expected {CONFIG_VERSION})",
                version.0, version.2
            )));
        }
        let profile = match entries.iter().find(|e| e.1 == "profile") {
            Some((line, _, v)) => v.parse::<Profile>().map_err(|e| Error::Config(format!("line {line}: {e}")))?,
            None => Profile::Desk,
        };
        let mut cfg = RunConfig::for_profile(profile);
        for (line, key, value) in &entries {
            cfg.apply(key, value).map_err(|e| Error::Config(format!("line {line}: {e}")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key. Errors name the key but not the line.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
        }
        let t = &mut self.train;
        match key {
            "version" | "profile" => {}
            "problem" => self.problem = value.parse()?,
            "n" => self.n = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "instance_seed" => self.instance_seed = num(key, value)?,
            "instance_path" => self.instance_path = (!value.is_empty()).then(|| PathBuf::from(value)),
            "algorithm" => self.algorithm = value.parse()?,
            "pop_size" => self.pop_size = num(key, value)?,
            "max_fe" => self.max_fe = num(key, value)?,
            "neighborhood_size" => self.neighborhood_size = num(key, value)?,
            "max_replacements" => self.max_replacements = num(key, value)?,
            "mutation_rate" => {
                self.mutation_rate = if value == "auto" { None } else { Some(num(key, value)?) };
            }
            "pairing" => self.pairing = value.parse()?,
            "epochs" => t.epochs = num(key, value)?,
            "batch_size" => t.batch_size = num(key, value)?,
            "learn_rate" => t.learn_rate = num(key, value)?,
            "hidden_units" => t.hidden_units = num(key, value)?,
            "embedding_dim" => t.embedding_dim = num(key, value)?,
            "dropout" => t.dropout = num(key, value)?,
            "clip_norm" => t.clip_norm = num(key, value)?,
            "warm_start" => t.warm_start = num(key, value)?,
            "train_every" => {
                self.train_every = if value == "never" { 0 } else { num(key, value)? };
            }
            "snapshot_every" => self.snapshot_every = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for name in ["nsga2", "moead", "seqmo-moead", "seqmo-nsga2"] {
            assert_eq!(name.parse::<Algorithm>().unwrap().to_string(), name);
        }
        assert!("seqmo-foo".parse::<Algorithm>().is_err());
    }

    #[test]
    fn minimal_file_takes_profile_defaults() {
        let cfg = RunConfig::parse("version = 1\nprofile = paper\n").unwrap();
        assert_eq!(cfg.train.epochs, 200);
        assert_eq!(cfg.train.hidden_units, 200);
        assert_eq!(cfg.train_every, 1);
        assert_eq!(cfg.pop_size, 100);
        assert_eq!(cfg.pairing, PairingMode::Greedy);
        let desk = RunConfig::parse("version = 1\n# comment\n\nseed = 4\n").unwrap();
        assert_eq!(desk.train.epochs, 20);
        assert_eq!(desk.train_every, 5);
        assert_eq!(desk.seed, 4);
        assert_eq!(desk.max_fe, 50_000);
        assert_eq!(desk.pop_size, 1000);
        assert_eq!(desk.pairing, PairingMode::Hungarian);
    }

    #[test]
    fn rendered_config_parses_back() {
        let mut cfg = RunConfig::for_profile(Profile::Paper);
        cfg.algorithm = Algorithm::Plain(HostKind::Nsga2);
        cfg.mutation_rate = Some(0.125);
        cfg.train.learn_rate = 0.003;
        cfg.instance_path = Some(PathBuf::from("/tmp/x.inst"));
        assert_eq!(RunConfig::parse(&cfg.to_kv_string()).unwrap(), cfg);
    }

    #[test]
    fn config_errors() {
        for text in [
            "problem = motsp\n",
            "version = 2\n",
            "version = 1\nfoo = 3\n",
            "version = 1\nn = x\n",
            "version = 1\nseed = 1\nseed = 2\n",
            "version = 1\nmax_fe = 50\n",
            "version = 1\nn = 2\n",
            "version = 1\njust words\n",
            "version = 1\nalgorithm = tabu\n",
            "version = 1\ndropout = 1.5\n",
        ] {
            assert!(matches!(RunConfig::parse(text), Err(Error::Config(_))), "{text:?}");
        }
    }

    #[test]
    fn generated_instance_is_reproducible() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.instance().unwrap(), cfg.instance().unwrap());
        let other = RunConfig { instance_seed: 2, ..RunConfig::default() };
        assert_ne!(cfg.instance().unwrap(), other.instance().unwrap());
    }

    #[test]
    fn loaded_instance_must_match() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i.txt");
        let cfg = RunConfig::default();
        crate::problems::save_instance(&cfg.instance().unwrap(), &path).unwrap();
        let with_path = RunConfig { instance_path: Some(path.clone()), ..cfg.clone() };
        assert_eq!(with_path.instance().unwrap(), cfg.instance().unwrap());
        let wrong = RunConfig { n: 20, instance_path: Some(path), ..cfg };
        assert!(matches!(wrong.instance(), Err(Error::Config(_))));
    }
}
