//! Command execution behind the `slle` binary: configuration resolution,
//! per-command pipelines, exit codes, and the machine-parseable error line.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 numerical failure,
//! 3 verification failure. Every error also prints a single
//! `error_code=<code> ...` line to the diagnostic stream.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::classic::{
    embed, embed_from_stochastic, neighborhood_preservation, reconstruction_weights,
};
use crate::data::{self, DatasetKind, DatasetSpec};
use crate::error::{Error, Result};
use crate::latent::{fa_fit, ppca_fit_closed_form, fa_log_likelihood};
use crate::neighborhood::{knn_graph, DataMatrix, NeighborhoodSystem};
use crate::numerics::Vector;
use crate::stochastic::{
    extract_weights, fit_stochastic_reconstruction, reconstruction_residuals, EmConfig, EmTrace,
    TraceEntry,
};
use crate::verify::run_default_suite;

/// Default regularization for the classic reconstruction weights.
pub const DEFAULT_REG: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    FitSlle,
    FitLle,
    FitFa,
    FitPpca,
    Compare,
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FitSlle => "fit-slle",
            Command::FitLle => "fit-lle",
            Command::FitFa => "fit-fa",
            Command::FitPpca => "fit-ppca",
            Command::Compare => "compare",
            Command::Verify => "verify",
        }
    }
}

/// Fully resolved invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub dataset: DatasetSpec,
    pub k: Option<usize>,
    pub p: usize,
    pub q: Option<usize>,
    pub em: EmConfig,
    pub out_dir: PathBuf,
    pub reg: f64,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            dataset: DatasetSpec::new(DatasetKind::SwissRoll, 500, 0.0, 0),
            k: None,
            p: 2,
            q: None,
            em: EmConfig::default(),
            out_dir: PathBuf::from("out"),
            reg: DEFAULT_REG,
        }
    }

    fn require_k(&self) -> Result<usize> {
        self.k.ok_or_else(|| {
            Error::InvalidInput(format!(
                "missing required flag --k for {}",
                self.command.name()
            ))
        })
    }

    fn require_q(&self) -> Result<usize> {
        self.q.ok_or_else(|| {
            Error::InvalidInput(format!(
                "missing required flag --q for {}",
                self.command.name()
            ))
        })
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) | Error::Parse { .. } | Error::Io { .. } => 1,
        Error::VerificationFailed(_) => 3,
        _ => 2,
    }
}

fn error_code_name(code: i32) -> &'static str {
    match code {
        1 => "invalid_config",
        3 => "verification_failure",
        _ => "numerical_failure",
    }
}

/// Execute a resolved configuration and return the process exit code.
/// Errors are reported on the diagnostic stream with an `error_code=` line.
pub fn run(cfg: &RunConfig) -> i32 {
    match dispatch(cfg) {
        Ok(()) => 0,
        Err(err) => {
            let code = exit_code_for(&err);
            eprintln!("error_code={} {err}", error_code_name(code));
            code
        }
    }
}

fn dispatch(cfg: &RunConfig) -> Result<()> {
    match cfg.command {
        Command::FitSlle => fit_slle(cfg),
        Command::FitLle => fit_lle(cfg),
        Command::FitFa => fit_latent(cfg, false),
        Command::FitPpca => fit_latent(cfg, true),
        Command::Compare => compare(cfg),
        Command::Verify => verify(cfg),
    }
}

fn load_dataset(cfg: &RunConfig) -> Result<DataMatrix> {
    if cfg.dataset.kind == DatasetKind::Csv || cfg.dataset.path.is_some() {
        let path = cfg.dataset.path.as_ref().ok_or_else(|| {
            Error::InvalidInput("csv dataset requires --csv <path>".into())
        })?;
        data::load_csv(path, false)
    } else {
        Ok(data::generate(&cfg.dataset)?.0)
    }
}

fn report_progress(trace: &EmTrace) {
    for e in &trace.iterations {
        eprintln!("iter={} objective={} dmax={}", e.iter, e.objective, e.max_change);
    }
}

fn stochastic_triplets(
    nbrs: &NeighborhoodSystem,
    weights: &[Vector],
) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for (i, w) in weights.iter().enumerate() {
        for (slot, &j) in nbrs.neighbor_indices[i].iter().enumerate() {
            out.push((i, j, w[slot]));
        }
    }
    out
}

fn fit_slle(cfg: &RunConfig) -> Result<()> {
    let k = cfg.require_k()?;
    let data = load_dataset(cfg)?;
    let nbrs = knn_graph(&data, k)?;
    let (_, post, trace) = fit_stochastic_reconstruction(&data, &nbrs, &cfg.em)?;
    report_progress(&trace);
    let weights = extract_weights(&post, cfg.em.extract, cfg.em.seed)?;
    let embedding = embed_from_stochastic(&weights, &nbrs, cfg.p, true)?;
    data::save_results(
        &cfg.out_dir,
        &embedding,
        &stochastic_triplets(&nbrs, &weights),
        &trace,
    )
}

fn fit_lle(cfg: &RunConfig) -> Result<()> {
    let k = cfg.require_k()?;
    let data = load_dataset(cfg)?;
    let nbrs = knn_graph(&data, k)?;
    let w = reconstruction_weights(&data, &nbrs, cfg.reg)?;
    let embedding = embed(&w, cfg.p)?;
    data::save_results(&cfg.out_dir, &embedding, &w.triplets(), &EmTrace::default())
}

fn fit_latent(cfg: &RunConfig, isotropic: bool) -> Result<()> {
    let q = cfg.require_q()?;
    let data = load_dataset(cfg)?;
    let (model, trace) = if isotropic {
        // Probabilistic PCA ships the closed-form solve; its single trace
        // entry records the attained marginal log-likelihood.
        let model = ppca_fit_closed_form(&data, q)?;
        let ll = fa_log_likelihood(&model, &data)?;
        let trace = EmTrace {
            iterations: vec![TraceEntry {
                iter: 1,
                objective: ll,
                max_change: 0.0,
            }],
            converged: true,
        };
        (model, trace)
    } else {
        fa_fit(&data, q, &cfg.em)?
    };
    report_progress(&trace);
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let model_path = cfg.out_dir.join("model.json");
    std::fs::write(&model_path, model.to_json()).map_err(|e| Error::io(&model_path, e))?;
    data::save_trace_csv(&cfg.out_dir.join("trace.csv"), &trace)
}

fn compare(cfg: &RunConfig) -> Result<()> {
    let k = cfg.require_k()?;
    let data = load_dataset(cfg)?;
    let nbrs = knn_graph(&data, k)?;

    let start = Instant::now();
    let (_, post, trace) = fit_stochastic_reconstruction(&data, &nbrs, &cfg.em)?;
    let weights = extract_weights(&post, cfg.em.extract, cfg.em.seed)?;
    let slle_embedding = embed_from_stochastic(&weights, &nbrs, cfg.p, true)?;
    let slle_seconds = start.elapsed().as_secs_f64();
    report_progress(&trace);
    let slle_residual = mean(&reconstruction_residuals(&data, &nbrs, &weights)?);
    let slle_score = neighborhood_preservation(&nbrs, &slle_embedding.y, k)?;

    let start = Instant::now();
    let w = reconstruction_weights(&data, &nbrs, cfg.reg)?;
    let lle_embedding = embed(&w, cfg.p)?;
    let lle_seconds = start.elapsed().as_secs_f64();
    let lle_residual = {
        let mut total = 0.0;
        for (i, idx, row) in w.rows() {
            let mut recon = Vector::zeros(data.d());
            for (j, v) in idx.iter().zip(row.iter()) {
                recon += data.point(*j) * *v;
            }
            total += (data.point(i) - recon).norm();
        }
        total / data.n() as f64
    };
    let lle_score = neighborhood_preservation(&nbrs, &lle_embedding.y, k)?;

    // Wall-clock timings go to the diagnostic stream so the metrics file
    // stays byte-reproducible for a fixed seed.
    eprintln!("timing method=slle seconds={slle_seconds:.3}");
    eprintln!("timing method=lle seconds={lle_seconds:.3}");

    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let metrics = format!(
        "method,reconstruction_residual,neighborhood_preservation\n\
         slle,{},{}\n\
         lle,{},{}\n",
        data::fmt_float(slle_residual),
        data::fmt_float(slle_score),
        data::fmt_float(lle_residual),
        data::fmt_float(lle_score),
    );
    let path = cfg.out_dir.join("metrics.csv");
    std::fs::write(&path, metrics).map_err(|e| Error::io(&path, e))
}

fn verify(cfg: &RunConfig) -> Result<()> {
    let results = run_default_suite(cfg.em.seed)?;
    let mut failures = Vec::new();
    for check in &results {
        let status = if check.pass { "PASS" } else { "FAIL" };
        println!("check {}: {status} ({})", check.name, check.detail);
        if !check.pass {
            failures.push(check.name.clone());
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::VerificationFailed(failures.join(", ")))
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Parse a flat `key=value` config file; `#` starts a comment line.
pub fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                msg: format!("expected key=value, got {line:?}"),
            });
        };
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_dir(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("slle-cli-{}-{name}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        dir
    }

    #[test]
    fn missing_k_is_invalid_config() {
        let mut cfg = RunConfig::new(Command::FitSlle);
        cfg.dataset.n = 30;
        cfg.out_dir = tmp_dir("missing-k");
        assert_eq!(run(&cfg), 1);
    }

    #[test]
    fn fit_slle_writes_result_bundle() {
        let mut cfg = RunConfig::new(Command::FitSlle);
        cfg.dataset.n = 40;
        cfg.dataset.seed = 3;
        cfg.k = Some(4);
        cfg.out_dir = tmp_dir("slle-bundle");
        assert_eq!(run(&cfg), 0);
        for file in ["embedding.csv", "weights.csv", "trace.csv"] {
            assert!(cfg.out_dir.join(file).exists(), "{file} missing");
        }
    }

    #[test]
    fn verify_command_passes() {
        let cfg = RunConfig::new(Command::Verify);
        assert_eq!(run(&cfg), 0);
    }

    #[test]
    fn config_file_parsing() {
        let path = std::env::temp_dir().join(format!("slle-cfg-{}.conf", std::process::id()));
        std::fs::write(&path, "# comment\nk=8\n tol = 1e-7 \n\nmode=full\n").unwrap();
        let kv = parse_config_file(&path).unwrap();
        assert_eq!(
            kv,
            vec![
                ("k".to_string(), "8".to_string()),
                ("tol".to_string(), "1e-7".to_string()),
                ("mode".to_string(), "full".to_string()),
            ]
        );
        std::fs::write(&path, "novalue\n").unwrap();
        assert!(parse_config_file(&path).is_err());
    }
}
