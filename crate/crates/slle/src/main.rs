use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use slle::cli::{self, Command, RunConfig};
use slle::data::DatasetKind;
use slle::error::{Error, Result};
use slle::stochastic::{ExtractMode, PriorMode, ScatterScope};

#[derive(Parser)]
#[command(
    name = "slle",
    about = "Stochastic linear reconstruction for LLE, with factor analysis, \
             probabilistic PCA, and classic LLE baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Fit stochastic reconstruction weights by EM and embed them
    #[command(name = "fit-slle")]
    FitSlle(CommonArgs),
    /// Classic LLE: reconstruction weights and spectral embedding
    #[command(name = "fit-lle")]
    FitLle(CommonArgs),
    /// Factor analysis by EM; writes model JSON and a likelihood trace
    #[command(name = "fit-fa")]
    FitFa(CommonArgs),
    /// Probabilistic PCA (closed form); writes model JSON and likelihood
    #[command(name = "fit-ppca")]
    FitPpca(CommonArgs),
    /// Run stochastic and classic LLE on one dataset and write metrics
    Compare(CommonArgs),
    /// Run the built-in invariant suite; nonzero exit on any failure
    Verify(CommonArgs),
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Flat key=value config file; explicit flags override file entries
    #[arg(long)]
    config: Option<PathBuf>,

    /// Dataset kind: swiss_roll, s_curve, affine_patch, gaussian_blobs, or csv [default: swiss_roll]
    #[arg(long)]
    dataset: Option<String>,

    /// Number of points to generate [default: 500]
    #[arg(long)]
    n: Option<usize>,

    /// Additive Gaussian noise standard deviation [default: 0]
    #[arg(long)]
    noise: Option<f64>,

    /// RNG seed for data generation, sampling, and verification [default: 0]
    #[arg(long)]
    seed: Option<u64>,

    /// Number of nearest neighbors (required by fit-slle, fit-lle, compare)
    #[arg(long)]
    k: Option<usize>,

    /// Embedding dimension [default: 2]
    #[arg(long)]
    p: Option<usize>,

    /// Latent dimension (required by fit-fa and fit-ppca)
    #[arg(long)]
    q: Option<usize>,

    /// Prior covariance mode: full or spherical [default: spherical]
    #[arg(long)]
    mode: Option<String>,

    /// Maximum EM iterations [default: 100]
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,

    /// Relative objective-change convergence tolerance [default: 1e-6]
    #[arg(long)]
    tol: Option<f64>,

    /// Full mode: ascent step size on each precision matrix [default: 1e-3]
    #[arg(long)]
    lr: Option<f64>,

    /// Full mode: ascent steps per EM iteration [default: 5]
    #[arg(long = "grad-steps")]
    grad_steps: Option<usize>,

    /// Weight extraction: mean or sample [default: mean]
    #[arg(long)]
    extract: Option<String>,

    /// Scatter scope: global or per-point [default: global]
    #[arg(long)]
    scatter: Option<String>,

    /// Load the dataset from a CSV file instead of generating it
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Output directory [default: out]
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<PriorMode> {
    match s {
        "full" => Ok(PriorMode::Full),
        "spherical" => Ok(PriorMode::Spherical),
        other => Err(Error::InvalidInput(format!(
            "--mode must be full or spherical, got {other:?}"
        ))),
    }
}

fn parse_extract(s: &str) -> Result<ExtractMode> {
    match s {
        "mean" => Ok(ExtractMode::Mean),
        "sample" => Ok(ExtractMode::Sample),
        other => Err(Error::InvalidInput(format!(
            "--extract must be mean or sample, got {other:?}"
        ))),
    }
}

fn parse_scatter(s: &str) -> Result<ScatterScope> {
    match s {
        "global" => Ok(ScatterScope::Global),
        "per-point" | "per_point" => Ok(ScatterScope::PerPoint),
        other => Err(Error::InvalidInput(format!(
            "--scatter must be global or per-point, got {other:?}"
        ))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidInput(format!("config {key}: bad value {value:?}")))
}

/// Resolution order: built-in defaults, then the config file, then flags.
fn resolve(command: Command, args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::new(command);

    if let Some(path) = &args.config {
        for (key, value) in cli::parse_config_file(path)? {
            match key.as_str() {
                "dataset" => cfg.dataset.kind = DatasetKind::parse(&value)?,
                "n" => cfg.dataset.n = parse_num(&key, &value)?,
                "noise" => cfg.dataset.noise = parse_num(&key, &value)?,
                "seed" => {
                    cfg.dataset.seed = parse_num(&key, &value)?;
                    cfg.em.seed = cfg.dataset.seed;
                }
                "k" => cfg.k = Some(parse_num(&key, &value)?),
                "p" => cfg.p = parse_num(&key, &value)?,
                "q" => cfg.q = Some(parse_num(&key, &value)?),
                "mode" => cfg.em.mode = parse_mode(&value)?,
                "max_iter" => cfg.em.max_iter = parse_num(&key, &value)?,
                "tol" => cfg.em.tol = parse_num(&key, &value)?,
                "lr" => cfg.em.lr = parse_num(&key, &value)?,
                "grad_steps" => cfg.em.grad_steps = parse_num(&key, &value)?,
                "sigma_floor" => cfg.em.sigma_floor = parse_num(&key, &value)?,
                "ridge" => cfg.em.ridge = parse_num(&key, &value)?,
                "extract" => cfg.em.extract = parse_extract(&value)?,
                "scatter" => cfg.em.scatter_scope = parse_scatter(&value)?,
                "csv" => cfg.dataset.path = Some(PathBuf::from(value)),
                "out" => cfg.out_dir = PathBuf::from(value),
                "reg" => cfg.reg = parse_num(&key, &value)?,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "config file: unknown key {other:?}"
                    )))
                }
            }
        }
    }

    if let Some(v) = &args.dataset {
        cfg.dataset.kind = DatasetKind::parse(v)?;
    }
    if let Some(v) = args.n {
        cfg.dataset.n = v;
    }
    if let Some(v) = args.noise {
        cfg.dataset.noise = v;
    }
    if let Some(v) = args.seed {
        cfg.dataset.seed = v;
        cfg.em.seed = v;
    }
    if let Some(v) = args.k {
        cfg.k = Some(v);
    }
    if let Some(v) = args.p {
        cfg.p = v;
    }
    if let Some(v) = args.q {
        cfg.q = Some(v);
    }
    if let Some(v) = &args.mode {
        cfg.em.mode = parse_mode(v)?;
    }
    if let Some(v) = args.max_iter {
        cfg.em.max_iter = v;
    }
    if let Some(v) = args.tol {
        cfg.em.tol = v;
    }
    if let Some(v) = args.lr {
        cfg.em.lr = v;
    }
    if let Some(v) = args.grad_steps {
        cfg.em.grad_steps = v;
    }
    if let Some(v) = &args.extract {
        cfg.em.extract = parse_extract(v)?;
    }
    if let Some(v) = &args.scatter {
        cfg.em.scatter_scope = parse_scatter(v)?;
    }
    if let Some(v) = &args.csv {
        cfg.dataset.kind = DatasetKind::Csv;
        cfg.dataset.path = Some(v.clone());
    }
    if let Some(v) = &args.out {
        cfg.out_dir = v.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("error_code=invalid_config {e}");
            return ExitCode::from(1);
        }
    };
    let (command, args) = match &cli.command {
        Commands::FitSlle(a) => (Command::FitSlle, a),
        Commands::FitLle(a) => (Command::FitLle, a),
        Commands::FitFa(a) => (Command::FitFa, a),
        Commands::FitPpca(a) => (Command::FitPpca, a),
        Commands::Compare(a) => (Command::Compare, a),
        Commands::Verify(a) => (Command::Verify, a),
    };
    let cfg = match resolve(command, args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error_code=invalid_config {e}");
            return ExitCode::from(1);
        }
    };
    ExitCode::from(cli::run(&cfg) as u8)
}
