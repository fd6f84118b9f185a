//! `lso`: generate datasets, build and verify orderings and spanners, and
//! answer queries from stdin.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};

use commands::{bench, run_nns, run_paths, write_out, Experiment, NnsOptions};
use config::{generate, read, ExperimentConfig, GenKind, InputFormat, Params, Source, Structure};
use report::{csv_row, Report, CSV_HEADER};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(lso_core::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => f.write_str(s),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<lso_core::Error> for CliError {
    fn from(e: lso_core::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Parser)]
#[command(
    name = "lso",
    version,
    about = "Locality-sensitive orderings and the spanners built on them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a structure and write its file.
    Build {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and check structures; exits 1 if any check fails.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Report file (single experiment only).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Experiments verified in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Leave timings out so reports are byte-identical across runs.
        #[arg(long)]
        no_timings: bool,
    },
    /// Nearest-neighbor queries: stdin lines `q <id>`, `+ <id>`, `- <id>`.
    Nns {
        #[command(flatten)]
        common: Common,
        /// Start with every point stored.
        #[arg(long)]
        preload: bool,
        /// Also write the point labels to this file.
        #[arg(long)]
        labels_out: Option<PathBuf>,
    },
    /// Path queries: stdin lines `p <u> <v> [faults…]`.
    Path {
        #[command(flatten)]
        common: Common,
    },
    /// Time random path queries and print latency percentiles.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        queries: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Collect report files into CSV.
    Report {
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Experiment selection shared by the structure subcommands. Flags override
/// values from `--config`.
#[derive(Args)]
struct Common {
    /// Experiment config file; `verify` accepts several.
    #[arg(long)]
    config: Vec<PathBuf>,
    #[arg(long, value_enum)]
    structure: Option<Structure>,
    /// Metric input: points (.pts), graph (.graph) or distance matrix (.mat).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
    /// Ordering family file for structures that consume one.
    #[arg(long)]
    family: Option<PathBuf>,
    /// Tree decomposition file.
    #[arg(long)]
    td: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Stretch parameter k (spanners) or hop count (triangle oracle).
    #[arg(long)]
    k: Option<usize>,
    /// Fault budget.
    #[arg(long)]
    f: Option<usize>,
    /// ℓp exponent of a points input (`inf` for ℓ∞).
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Line length of the hop structures.
    #[arg(long)]
    n: Option<usize>,
    /// Random fault sets or oracle invocations checked by `verify`.
    #[arg(long)]
    trials: Option<usize>,
    /// Write the resolved experiment config here.
    #[arg(long)]
    save_config: Option<PathBuf>,
}

impl Common {
    fn params(&self) -> Params {
        Params {
            t: self.t,
            eps: self.eps,
            k: self.k,
            f: self.f,
            p: self.p,
            delta: self.delta,
            n: self.n,
        }
    }

    fn apply(&self, mut c: ExperimentConfig) -> ExperimentConfig {
        if let Some(s) = self.structure {
            c.structure = s;
        }
        if let Some(path) = &self.input {
            c.source = Some(Source::File {
                path: path.clone(),
                format: self.format,
            });
        }
        c.family = self.family.clone().or(c.family);
        c.td = self.td.clone().or(c.td);
        c.seed = self.seed.unwrap_or(c.seed);
        c.params = self.params().or(&c.params);
        if let Some(t) = self.trials {
            c.verify.trials = t;
        }
        c
    }

    fn configs(&self) -> Result<Vec<ExperimentConfig>, CliError> {
        let configs = if self.config.is_empty() {
            let structure = self
                .structure
                .ok_or_else(|| CliError::Usage("pass --structure or --config".into()))?;
            vec![self.apply(ExperimentConfig {
                structure,
                source: None,
                family: None,
                td: None,
                params: Params::default(),
                seed: 0,
                verify: Default::default(),
                outputs: Default::default(),
            })]
        } else {
            self.config
                .iter()
                .map(|p| ExperimentConfig::load(p).map(|c| self.apply(c)))
                .collect::<Result<_, _>>()?
        };
        if let Some(path) = &self.save_config {
            if configs.len() != 1 {
                return Err(CliError::Usage("--save-config needs exactly one experiment".into()));
            }
            write_out(Some(path), &configs[0].to_json())?;
        }
        Ok(configs)
    }

    fn single(&self) -> Result<Experiment, CliError> {
        let mut configs = self.configs()?;
        if configs.len() != 1 {
            return Err(CliError::Usage("this subcommand takes one experiment".into()));
        }
        Experiment::load(configs.remove(0))
    }
}

fn verify_all(configs: Vec<ExperimentConfig>, jobs: usize, timings: bool) -> Vec<Result<Report, CliError>> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<Report, CliError>>>> = configs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, configs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(c) = configs.get(i) else { break };
                let r = Experiment::load(c.clone()).and_then(|e| e.verify(timings));
                *slots[i].lock().expect("no panics while holding the slot") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().expect("slot lock").expect("every slot filled"))
        .collect()
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Gen { kind, n, d, seed, out } => {
            if n == 0 || d == 0 {
                return Err(CliError::Usage("n and d must be positive".into()));
            }
            write_out(out.as_deref(), &generate(kind, n, d, seed)?)?;
            Ok(true)
        }
        Command::Build { common, out } => {
            let exp = common.single()?;
            let text = exp.build()?.to_json()?;
            write_out(out.as_deref().or(exp.config.outputs.structure.as_deref()), &text)?;
            Ok(true)
        }
        Command::Verify {
            common,
            out,
            jobs,
            no_timings,
        } => {
            let configs = common.configs()?;
            if out.is_some() && configs.len() > 1 {
                return Err(CliError::Usage(
                    "--out needs a single experiment; set outputs.report per config".into(),
                ));
            }
            let targets: Vec<Option<PathBuf>> = configs
                .iter()
                .map(|c| out.clone().or_else(|| c.outputs.report.clone()))
                .collect();
            let mut all_pass = true;
            for (r, target) in verify_all(configs, jobs, !no_timings).into_iter().zip(targets) {
                let r = r?;
                all_pass &= r.pass;
                write_out(target.as_deref(), &r.to_json())?;
            }
            Ok(all_pass)
        }
        Command::Nns {
            common,
            preload,
            labels_out,
        } => {
            let exp = common.single()?;
            let opts = NnsOptions {
                preload,
                labels_out: labels_out.as_deref(),
            };
            run_nns(&exp, opts, std::io::stdin().lock(), std::io::stdout().lock())?;
            Ok(true)
        }
        Command::Path { common } => {
            let exp = common.single()?;
            run_paths(&exp, std::io::stdin().lock(), std::io::stdout().lock())?;
            Ok(true)
        }
        Command::Bench { common, queries, out } => {
            let exp = common.single()?;
            write_out(out.as_deref(), &bench(&exp, queries)?)?;
            Ok(true)
        }
        Command::Report { files, out } => {
            let mut csv = format!("{CSV_HEADER}\n");
            for f in &files {
                let r: Report =
                    serde_json::from_str(&read(f)?).map_err(|e| CliError::Usage(format!("{}: {e}", f.display())))?;
                csv.push_str(&csv_row(&f.display().to_string(), &r));
                csv.push('\n');
            }
            write_out(out.as_deref(), &csv)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("lso: {e}");
            ExitCode::from(2)
        }
    }
}
