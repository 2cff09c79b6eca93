use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use climber::bench::{run_bench, BenchSpec, RandomWalk, StepDistribution};
use climber::build::BuildConfig;
use climber::query::{QueryMode, QuerySpec};
use climber::signature::Decay;
use climber::storage::{import_csv, list_dataset_files, read_csv, read_dataset_file, SKELETON_FILE_NAME};
use climber::ClimberIndex;

/// Approximate kNN search over data series.
#[derive(Debug, Parser)]
#[command(name = "climber", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate or import a dataset.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Build an index from dataset files.
    Build {
        /// Dataset file or directory of `.clbd` files.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        index: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Answer one query.
    Query {
        #[arg(long)]
        index: PathBuf,
        /// Dataset (`.clbd`) or CSV file holding the query series.
        #[arg(long)]
        query_file: PathBuf,
        /// Position of the query within the file.
        #[arg(long, default_value_t = 0)]
        record: usize,
        #[arg(long, default_value_t = 500)]
        k: usize,
        #[arg(long, default_value = "adaptive4x")]
        mode: QueryMode,
        #[arg(long)]
        json: bool,
    },
    /// Measure recall and time of the query modes.
    Bench {
        #[arg(long)]
        data: PathBuf,
        /// Index directory; built from `--data` when it holds no index yet.
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        rebuild: bool,
        #[arg(long, default_value_t = 50)]
        queries: usize,
        #[arg(long = "k", value_delimiter = ',', default_value = "500")]
        ks: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "knn,adaptive2x,adaptive4x,od-smallest,scan")]
        modes: Vec<QueryMode>,
        #[arg(long, default_value_t = 7)]
        bench_seed: u64,
        /// Perturb queries with Gaussian noise of this standard deviation.
        #[arg(long)]
        noise: Option<f64>,
        /// Where to write the JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Print skeleton and partition statistics.
    Inspect {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Random-walk series.
    Randomwalk {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        count: u64,
        #[arg(long, default_value_t = 256)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 5000)]
        per_file: u64,
        #[arg(long, value_enum, default_value_t = Step::Normal)]
        step: Step,
        /// Standard deviation (normal) or half width (uniform) of a step.
        #[arg(long, default_value_t = 1.0)]
        step_scale: f64,
    },
    /// Import a CSV file with the id in the first column.
    Csv {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5000)]
        per_file: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Step {
    Normal,
    Uniform,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DecayKind {
    Exponential,
    Linear,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    #[arg(long, default_value_t = 16)]
    segments: usize,
    #[arg(long, default_value_t = 200)]
    pivots: usize,
    #[arg(long, default_value_t = 10)]
    prefix: usize,
    /// Partition capacity in records.
    #[arg(long, default_value_t = 2000)]
    capacity: u64,
    /// Fraction of dataset files sampled for the skeleton.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 2)]
    epsilon: usize,
    #[arg(long)]
    max_centroids: Option<usize>,
    #[arg(long, value_enum, default_value_t = DecayKind::Exponential)]
    decay: DecayKind,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl ConfigArgs {
    fn to_config(&self) -> BuildConfig {
        BuildConfig {
            segments: self.segments,
            pivots: self.pivots,
            prefix_len: self.prefix,
            capacity: self.capacity,
            alpha: self.alpha,
            epsilon: self.epsilon,
            max_centroids: self.max_centroids,
            decay: match self.decay {
                DecayKind::Exponential => Decay::Exponential { lambda: self.lambda },
                DecayKind::Linear => Decay::Linear,
            },
            seed: self.seed,
        }
    }
}

fn dataset_files(path: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let files = list_dataset_files(path)?;
    if files.is_empty() {
        bail!("no dataset files found at {}", path.display());
    }
    Ok(files)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen(GenCommand::Randomwalk { out, count, length, seed, per_file, step, step_scale }) => {
            let steps = match step {
                Step::Normal => StepDistribution::Normal { std_dev: step_scale },
                Step::Uniform => StepDistribution::Uniform { half_width: step_scale },
            };
            let walk = RandomWalk { count, length, seed, steps };
            let files = walk.write(&out, per_file)?;
            println!("wrote {count} series of length {length} to {} files in {}", files.len(), out.display());
        }
        Command::Gen(GenCommand::Csv { input, out, per_file }) => {
            let files = import_csv(&input, &out, per_file)?;
            println!("wrote {} files to {}", files.len(), out.display());
        }
        Command::Build { data, index, config } => {
            let files = dataset_files(&data)?;
            let (_, summary) = ClimberIndex::build(&files, &index, &config.to_config())?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Query { index, query_file, record, k, mode, json } => {
            let index = ClimberIndex::open(&index)?;
            let rows = if query_file.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                read_csv(&query_file)?.into_inner()
            } else {
                read_dataset_file(&query_file)?
            };
            let series = rows
                .into_iter()
                .nth(record)
                .with_context(|| format!("{} has no record at position {record}", query_file.display()))?;
            let result = index.query(&QuerySpec::new(series, k, mode)?)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&result)?);
            } else {
                println!(
                    "mode {mode}, {} partitions, {} records examined, {:.3} ms",
                    result.partitions_accessed,
                    result.records_examined,
                    result.elapsed_secs * 1e3
                );
                for (rank, n) in result.neighbors.iter().enumerate() {
                    println!("{:>5} {:>12} {:.6}", rank + 1, n.id, n.distance);
                }
            }
        }
        Command::Bench { data, index, rebuild, queries, ks, modes, bench_seed, noise, out, config } => {
            let files = dataset_files(&data)?;
            let (idx, build) = if rebuild || !index.join(SKELETON_FILE_NAME).exists() {
                let (idx, summary) = ClimberIndex::build(&files, &index, &config.to_config())?;
                (idx, Some(summary))
            } else {
                (ClimberIndex::open(&index)?, None)
            };
            let spec = BenchSpec { queries, ks, modes, seed: bench_seed, noise };
            let report = run_bench(&spec, &idx.cached(), &files, build)?;
            print!("{}", report.table());
            if let Some(out) = out {
                fs::write(&out, report.to_json()?).with_context(|| format!("writing {}", out.display()))?;
            }
        }
        Command::Inspect { index, json } => {
            let report = ClimberIndex::open(&index)?.inspect()?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{report}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("CLIMBER_THREADS").ok().and_then(|v| v.parse().ok()) {
        // fails only if the pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
