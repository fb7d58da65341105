use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use seqmo::harness::{self, Algorithm, RunConfig};
use seqmo::metrics::UpdateTrace;
use seqmo::problems::{save_instance, Instance, ProblemKind};
use seqmo::{Error, Result, RngStream, StreamId};

#[derive(Parser)]
#[command(name = "seqmo", version, about = "Pointer-network assisted evolutionary optimisation of permutations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random problem instance file.
    GenInstance {
        #[arg(long, default_value = "motsp")]
        problem: ProblemKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one configuration and write its result files.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the run seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override a config key, e.g. `--set epochs=5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run several algorithms, sizes and seeds and tabulate mean (std) HV.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "moead,seqmo-moead")]
        algorithms: Vec<Algorithm>,
        /// Problem sizes; defaults to the config's `n`.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Seeds as a list or range, e.g. `1-10` or `1,2,5`.
        #[arg(long, default_value = "1-10")]
        seeds: String,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print an update-trace CSV as an iteration/count table.
    Trace {
        input: PathBuf,
        #[arg(long, default_value_t = 6)]
        per_row: usize,
    },
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("cannot parse seeds `{s}`"));
    if let Some((a, b)) = s.split_once('-') {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn load_config(path: &PathBuf, overrides: &[String]) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    for o in overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| Error::Config(format!("override `{o}` is not KEY=VALUE")))?;
        cfg.apply(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenInstance { problem, n, k, seed, out } => {
            let inst = Instance::generate(problem, n, k, &mut RngStream::derive(seed, StreamId::Instance))?;
            save_instance(&inst, &out)?;
            println!("wrote {} to {}", inst.label(), out.display());
        }
        Command::Run { config, out, seed, overrides } => {
            let mut cfg = load_config(&config, &overrides)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let outcome = harness::run(&cfg)?;
            harness::write_run(&outcome, &out)?;
            match outcome.hv {
                Some(hv) => println!("{} {} seed {}: hv {hv:.6} after {} evaluations", outcome.instance_label, cfg.algorithm, cfg.seed, outcome.evaluations),
                None => println!("{} {} seed {}: {} evaluations", outcome.instance_label, cfg.algorithm, cfg.seed, outcome.evaluations),
            }
        }
        Command::Compare { config, algorithms, sizes, seeds, out, jobs, overrides } => {
            let base = load_config(&config, &overrides)?;
            let sizes = if sizes.is_empty() { vec![base.n] } else { sizes };
            let configs = harness::expand(&base, &sizes, &algorithms, &parse_seeds(&seeds)?);
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.unwrap_or(0))
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            let (outcomes, rows, table) = pool.install(|| harness::compare(&configs))?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io { path: out.clone(), source: e })?;
            for o in &outcomes {
                let dir = out.join("runs").join(format!("{}-{}-seed{}", o.instance_label, o.config.algorithm, o.config.seed));
                harness::write_run(o, &dir)?;
            }
            let write = |name: &str, text: String| {
                let p = out.join(name);
                std::fs::write(&p, text).map_err(|e| Error::Io { path: p, source: e })
            };
            write("results.csv", harness::results_csv(&rows))?;
            write("table.csv", table.to_csv())?;
            write("table.txt", table.to_text())?;
            print!("{}", table.to_text());
        }
        Command::Trace { input, per_row } => {
            let text = std::fs::read_to_string(&input).map_err(|e| Error::Io { path: input.clone(), source: e })?;
            print!("{}", UpdateTrace::from_csv(&text)?.render_table(per_row));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::Divergence(_) => 3,
                _ => 1,
            })
        }
    }
}
