//! Flag definitions, optional TOML defaults and their resolution into solver
//! inputs. Flags win over the config file; the file wins over built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qrbsde::bench::SinBenchmark;
use qrbsde::dist::SamplingMeasure;
use qrbsde::mindex::{IndexKind, MultiIndexSet};
use qrbsde::solver::default_workers;
use qrbsde::{MemoryMode, RunConfig};
use serde::Deserialize;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "qrbsde", version, about = "Quasi-regression Monte-Carlo BSDE solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a coefficient table on the sinusoidal benchmark problem.
    Solve(RunArgs),
    /// Train and score against the exact solution; one row per (q, run).
    Bench(BenchArgs),
    /// Print the size of a multi-index set.
    MindexCard(IndexArgs),
    /// Check the sampling law's quantile round trip and tail behaviour.
    DistCheck(DistArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    Full,
    Total,
    Hyperbolic,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryArg {
    StoreCloud,
    RecomputeFromSeeds,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Default)]
pub struct IndexArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Total or hyperbolic degree; for `full`, the same K in every coordinate.
    #[arg(long)]
    pub deg: Option<u32>,
    /// Per-coordinate K for the full grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub full_k: Option<Vec<u32>>,
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// TOML file with defaults for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub index: IndexArgs,
    /// Student degrees of freedom of the sampling law.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Damping exponent(s); `bench` accepts a comma-separated sweep.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    /// Time steps N (Delta = horizon / N).
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Paths per step M.
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum)]
    pub memory_mode: Option<MemoryArg>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Print the index-set size, Christoffel number and memory estimate only.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Args, Debug, Default)]
pub struct BenchArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub eval_seed: Option<u64>,
    /// Evaluation points per time step.
    #[arg(long)]
    pub eval_points: Option<usize>,
    /// Independent runs per q (seeds seed, seed+1, ...).
    #[arg(long)]
    pub runs: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DistArgs {
    #[arg(long, default_value_t = 2.0)]
    pub mu: f64,
    /// Interior grid points in (0, 1), in addition to the log-spaced tails.
    #[arg(long, default_value_t = 10_000)]
    pub grid: usize,
}

#[derive(Deserialize, Debug, Default)]
#[serde(untagged)]
enum OneOrMany {
    #[default]
    None,
    One(f64),
    Many(Vec<f64>),
}

#[derive(Deserialize, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileDefaults {
    dim: Option<usize>,
    kind: Option<KindArg>,
    deg: Option<u32>,
    full_k: Option<Vec<u32>>,
    mu: Option<f64>,
    #[serde(default)]
    q: OneOrMany,
    steps: Option<usize>,
    horizon: Option<f64>,
    paths: Option<usize>,
    seed: Option<u64>,
    threads: Option<usize>,
    memory_mode: Option<MemoryArg>,
    kappa: Option<f64>,
    lambda: Option<f64>,
    format: Option<Format>,
    eval_seed: Option<u64>,
    eval_points: Option<usize>,
    runs: Option<usize>,
}

fn load_defaults(path: Option<&Path>) -> Result<FileDefaults, CliError> {
    let Some(path) = path else {
        return Ok(FileDefaults::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

/// Everything a solve needs, validated.
#[derive(Debug)]
pub struct Resolved {
    pub bench: SinBenchmark,
    pub qs: Vec<f64>,
    pub config: RunConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub dry_run: bool,
    pub eval_seed: u64,
    pub eval_points: usize,
    pub runs: usize,
}

pub fn resolve_kind(
    dim: usize,
    kind: Option<KindArg>,
    deg: Option<u32>,
    full_k: Option<Vec<u32>>,
) -> Result<IndexKind, CliError> {
    let usage = |m: &str| Err(CliError::Usage(m.into()));
    match (kind, deg, full_k) {
        (Some(KindArg::Full) | None, Some(_), Some(_)) => usage("--deg and --full-k are contradictory; give one"),
        (Some(KindArg::Total | KindArg::Hyperbolic), _, Some(_)) => usage("--full-k only applies to --kind full"),
        (Some(KindArg::Full) | None, Some(k), None) => Ok(IndexKind::Full { k: vec![k; dim] }),
        (Some(KindArg::Full) | None, None, Some(k)) => {
            if k.len() != dim {
                return Err(CliError::Usage(format!("--full-k has {} entries for --dim {dim}", k.len())));
            }
            Ok(IndexKind::Full { k })
        }
        (Some(KindArg::Total), Some(deg), None) => Ok(IndexKind::Total { deg }),
        (Some(KindArg::Hyperbolic), Some(deg), None) => Ok(IndexKind::Hyperbolic { deg }),
        (_, None, None) => usage("missing --deg (or --full-k for a full grid)"),
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be positive and finite, got {v}")))
    }
}

impl RunArgs {
    pub fn resolve(self, extra: Option<(Option<u64>, Option<usize>, Option<usize>)>) -> Result<Resolved, CliError> {
        let file = load_defaults(self.config.as_deref())?;
        let dim = self.index.dim.or(file.dim).unwrap_or(1);
        if dim == 0 {
            return Err(CliError::Usage("--dim must be at least 1".into()));
        }
        let kind = resolve_kind(
            dim,
            self.index.kind.or(file.kind),
            self.index.deg.or(file.deg),
            self.index.full_k.or(file.full_k),
        )?;
        let mu = positive("mu", self.mu.or(file.mu).unwrap_or(2.0))?;
        let qs = match (self.q, file.q) {
            (Some(q), _) => q,
            (None, OneOrMany::One(q)) => vec![q],
            (None, OneOrMany::Many(q)) => q,
            (None, OneOrMany::None) => vec![0.0],
        };
        if qs.is_empty() || qs.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
            return Err(CliError::Usage(format!("--q values must be finite and >= 0, got {qs:?}")));
        }
        let steps = self.steps.or(file.steps).unwrap_or(20);
        let horizon = positive("horizon", self.horizon.or(file.horizon).unwrap_or(1.0))?;
        let paths = self
            .paths
            .or(file.paths)
            .ok_or_else(|| CliError::Usage("missing --paths".into()))?;
        let seed = self.seed.or(file.seed).unwrap_or(1);
        let threads = self.threads.or(file.threads).unwrap_or_else(default_workers);
        let memory_mode = match self.memory_mode.or(file.memory_mode) {
            Some(MemoryArg::RecomputeFromSeeds) => MemoryMode::RecomputeFromSeeds,
            _ => MemoryMode::StoreCloud,
        };
        let kappa = self.kappa.or(file.kappa).unwrap_or(0.6);
        let lambda = self.lambda.or(file.lambda).unwrap_or(1.0 / (dim as f64).sqrt());
        if !(kappa.is_finite() && lambda.is_finite()) {
            return Err(CliError::Usage("--kappa and --lambda must be finite".into()));
        }
        let format = self.format.or(file.format).unwrap_or(Format::Json);
        let (eval_seed, eval_points, runs) = extra.unwrap_or((None, None, None));
        let eval_seed = eval_seed.or(file.eval_seed).unwrap_or(seed.wrapping_add(1_000_000));
        let eval_points = eval_points.or(file.eval_points).unwrap_or(1000);
        let runs = runs.or(file.runs).unwrap_or(1);
        if eval_points == 0 || runs == 0 {
            return Err(CliError::Usage("--eval-points and --runs must be at least 1".into()));
        }

        let gamma = MultiIndexSet::build(dim, kind).map_err(|e| CliError::Usage(e.to_string()))?;
        let measure = SamplingMeasure::new(mu, dim).map_err(|e| CliError::Usage(e.to_string()))?;
        let config = RunConfig::new(steps, paths, qs[0], seed, gamma, measure)
            .with_workers(threads)
            .with_memory_mode(memory_mode);
        config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Resolved {
            bench: SinBenchmark {
                dim,
                kappa,
                lambda,
                horizon,
            },
            qs,
            config,
            out: self.out,
            format,
            dry_run: self.dry_run,
            eval_seed,
            eval_points,
            runs,
        })
    }
}
