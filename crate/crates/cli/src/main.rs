use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use qkstrat::pipeline::{
    emit_diagnostics, emit_results, ingest_csv, make_blobs, run_noise_comparison, run_sample_complexity,
    run_sc_sweep, Outcome, SweepConfig,
};

#[derive(Parser)]
#[command(
    name = "qkstrat",
    version,
    about = "Quantum-kernel spectral clustering experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Silhouette of every (family, beta, k) on the full data.
    Sweep(Common),
    /// Agreement of subset clusterings with the full-data clustering.
    SampleComplexity(Common),
    /// Noisy shot-sampled kernels against exact kernels on a subset.
    NoiseCompare(Common),
    /// Write planted Gaussian blobs as an input CSV.
    GenBlobs {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        blobs: BlobArgs,
    },
}

#[derive(Args)]
struct Common {
    /// Feature CSV: header row, sample id first, numeric features after.
    #[arg(long)]
    input: Option<PathBuf>,
    /// JSON configuration; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the configured base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct BlobArgs {
    #[arg(long)]
    n_per_cluster: Option<usize>,
    #[arg(long)]
    n_clusters: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long)]
    spread: Option<f64>,
}

/// Blob generator settings, readable from `--config`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BlobConfig {
    n_per_cluster: usize,
    n_clusters: usize,
    dim: usize,
    separation: f64,
    spread: f64,
    seed: u64,
}

impl Default for BlobConfig {
    fn default() -> Self {
        BlobConfig {
            n_per_cluster: 100,
            n_clusters: 3,
            dim: 4,
            separation: 10.0,
            spread: 1.0,
            seed: 0,
        }
    }
}

fn init_threads(threads: usize) -> anyhow::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the worker pool")
}

fn load_config(common: &Common) -> anyhow::Result<SweepConfig> {
    let mut config = match &common.config {
        Some(path) => {
            SweepConfig::load(path).with_context(|| format!("reading config {}", path.display()))?
        }
        None => SweepConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.base_seed = seed;
    }
    Ok(config)
}

fn input(common: &Common) -> anyhow::Result<&Path> {
    match &common.input {
        Some(p) => Ok(p),
        None => bail!("--input is required"),
    }
}

fn write_outcome(outcome: &Outcome, out: &Path) -> anyhow::Result<()> {
    emit_diagnostics(outcome, out)?;
    emit_results(&outcome.records, out)?;
    log::info!(
        "{} records, {} failures written to {}",
        outcome.records.len(),
        outcome.failures.len(),
        out.display()
    );
    Ok(())
}

fn run_experiment(common: &Common, command: &Command) -> anyhow::Result<Outcome> {
    init_threads(common.threads)?;
    let config = load_config(common)?;
    let path = input(common)?;
    let data = ingest_csv(path).with_context(|| format!("reading {}", path.display()))?;
    log::info!("{} samples, {} features", data.n_samples(), data.n_features());
    let outcome = match command {
        Command::Sweep(_) => run_sc_sweep(&data, &config)?,
        Command::SampleComplexity(_) => {
            run_sample_complexity(&data, &config, Some(&common.out.join("label_cache")))?
        }
        Command::NoiseCompare(_) => run_noise_comparison(&data, &config)?,
        Command::GenBlobs { .. } => unreachable!(),
    };
    write_outcome(&outcome, &common.out)?;
    Ok(outcome)
}

fn gen_blobs(common: &Common, args: &BlobArgs) -> anyhow::Result<()> {
    init_threads(common.threads)?;
    if common.input.is_some() {
        bail!("gen-blobs generates its data; --input does not apply");
    }
    let mut c: BlobConfig = match &common.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
            .with_context(|| format!("reading config {}", path.display()))?,
        None => BlobConfig::default(),
    };
    c.n_per_cluster = args.n_per_cluster.unwrap_or(c.n_per_cluster);
    c.n_clusters = args.n_clusters.unwrap_or(c.n_clusters);
    c.dim = args.dim.unwrap_or(c.dim);
    c.separation = args.separation.unwrap_or(c.separation);
    c.spread = args.spread.unwrap_or(c.spread);
    c.seed = common.seed.unwrap_or(c.seed);
    let (data, labels) = make_blobs(
        c.n_per_cluster,
        c.n_clusters,
        c.dim,
        c.separation,
        c.spread,
        c.seed,
    )?;
    fs::create_dir_all(&common.out)?;
    data.write_csv(BufWriter::new(File::create(common.out.join("blobs.csv"))?))?;
    let mut w = BufWriter::new(File::create(common.out.join("labels.csv"))?);
    use std::io::Write;
    writeln!(w, "sample_id,label")?;
    for (id, l) in data.ids.iter().zip(labels.labels()) {
        writeln!(w, "{id},{l}")?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GenBlobs { common, blobs } => gen_blobs(common, blobs),
        Command::Sweep(c) | Command::SampleComplexity(c) | Command::NoiseCompare(c) => {
            run_experiment(c, &cli.command).map(|outcome| {
                if !outcome.failures.is_empty() {
                    log::warn!("{} cells failed; see failures.log", outcome.failures.len());
                }
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
