//! Synthetic manifold generators and dataset/result persistence.
//!
//! Generators are deterministic per seed and use ChaCha8 as the pinned RNG,
//! so a given `DatasetSpec` reproduces bit-identical data on any platform.
//! CSV files are UTF-8, comma-delimited, LF-terminated, and render floats
//! with 17 significant digits so values round-trip losslessly.

use std::fs;
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::classic::EmbeddingResult;
use crate::error::{Error, Result};
use crate::neighborhood::DataMatrix;
use crate::numerics::{Matrix, SpectralDecomposition, Vector};
use crate::stochastic::EmTrace;

/// Which dataset to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    SwissRoll,
    SCurve,
    AffinePatch,
    GaussianBlobs,
    Csv,
}

impl DatasetKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "swiss_roll" => Ok(DatasetKind::SwissRoll),
            "s_curve" => Ok(DatasetKind::SCurve),
            "affine_patch" => Ok(DatasetKind::AffinePatch),
            "gaussian_blobs" => Ok(DatasetKind::GaussianBlobs),
            "csv" => Ok(DatasetKind::Csv),
            other => Err(Error::InvalidInput(format!(
                "unknown dataset {other:?}; expected swiss_roll, s_curve, affine_patch, gaussian_blobs, or csv"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DatasetKind::SwissRoll => "swiss_roll",
            DatasetKind::SCurve => "s_curve",
            DatasetKind::AffinePatch => "affine_patch",
            DatasetKind::GaussianBlobs => "gaussian_blobs",
            DatasetKind::Csv => "csv",
        }
    }
}

/// Description of a synthetic (or file-backed) dataset.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub n: usize,
    /// Standard deviation of additive Gaussian noise (blob spread for
    /// `gaussian_blobs`).
    pub noise: f64,
    pub seed: u64,
    /// Source file for `csv` datasets.
    pub path: Option<PathBuf>,
    /// Ambient dimension for `affine_patch` (default 5) and
    /// `gaussian_blobs` (default 3); the curved manifolds are always 3-D.
    pub ambient_dim: Option<usize>,
    /// Intrinsic dimension for `affine_patch` (default 2).
    pub intrinsic_dim: Option<usize>,
}

impl DatasetSpec {
    pub fn new(kind: DatasetKind, n: usize, noise: f64, seed: u64) -> Self {
        DatasetSpec {
            kind,
            n,
            noise,
            seed,
            path: None,
            ambient_dim: None,
            intrinsic_dim: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidInput("dataset needs n >= 1".into()));
        }
        if self.noise.is_nan() || self.noise < 0.0 {
            return Err(Error::InvalidInput(format!(
                "noise must be non-negative, got {}",
                self.noise
            )));
        }
        Ok(())
    }
}

fn normal_vec(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| rng.sample(StandardNormal))
}

/// Generate a dataset and its intrinsic coordinates (one row per point).
pub fn generate(spec: &DatasetSpec) -> Result<(DataMatrix, Matrix)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    match spec.kind {
        DatasetKind::SwissRoll => {
            let mut rows = Matrix::zeros(n, 3);
            let mut intrinsic = Matrix::zeros(n, 2);
            for i in 0..n {
                let t = 1.5 * std::f64::consts::PI * (1.0 + 2.0 * rng.random::<f64>());
                let h = 21.0 * rng.random::<f64>();
                let mut p = Vector::from_vec(vec![t * t.cos(), h, t * t.sin()]);
                if spec.noise > 0.0 {
                    p += normal_vec(&mut rng, 3) * spec.noise;
                }
                rows.set_row(i, &p.transpose());
                intrinsic[(i, 0)] = t;
                intrinsic[(i, 1)] = h;
            }
            Ok((DataMatrix::new(rows)?, intrinsic))
        }
        DatasetKind::SCurve => {
            let mut rows = Matrix::zeros(n, 3);
            let mut intrinsic = Matrix::zeros(n, 2);
            for i in 0..n {
                let t = 1.5 * std::f64::consts::PI * (2.0 * rng.random::<f64>() - 1.0);
                let h = 2.0 * rng.random::<f64>();
                let mut p =
                    Vector::from_vec(vec![t.sin(), h, t.signum() * (t.cos() - 1.0)]);
                if spec.noise > 0.0 {
                    p += normal_vec(&mut rng, 3) * spec.noise;
                }
                rows.set_row(i, &p.transpose());
                intrinsic[(i, 0)] = t;
                intrinsic[(i, 1)] = h;
            }
            Ok((DataMatrix::new(rows)?, intrinsic))
        }
        DatasetKind::AffinePatch => {
            let d = spec.ambient_dim.unwrap_or(5);
            let m = spec.intrinsic_dim.unwrap_or(2);
            if m < 1 || m > d {
                return Err(Error::InvalidInput(format!(
                    "affine_patch needs 1 <= intrinsic <= ambient (got {m}, {d})"
                )));
            }
            let basis = Matrix::from_fn(d, m, |_, _| rng.sample::<f64, _>(StandardNormal));
            let mut rows = Matrix::zeros(n, d);
            let mut intrinsic = Matrix::zeros(n, m);
            for i in 0..n {
                let u = Vector::from_fn(m, |_, _| 2.0 * rng.random::<f64>() - 1.0);
                let mut p = &basis * &u;
                if spec.noise > 0.0 {
                    p += normal_vec(&mut rng, d) * spec.noise;
                }
                rows.set_row(i, &p.transpose());
                intrinsic.set_row(i, &u.transpose());
            }
            Ok((DataMatrix::new(rows)?, intrinsic))
        }
        DatasetKind::GaussianBlobs => {
            let d = spec.ambient_dim.unwrap_or(3);
            let centers: Vec<Vector> =
                (0..3).map(|_| normal_vec(&mut rng, d) * 5.0).collect();
            let mut rows = Matrix::zeros(n, d);
            let mut intrinsic = Matrix::zeros(n, 1);
            for i in 0..n {
                let c = i % 3;
                let mut p = centers[c].clone();
                if spec.noise > 0.0 {
                    p += normal_vec(&mut rng, d) * spec.noise;
                }
                rows.set_row(i, &p.transpose());
                intrinsic[(i, 0)] = c as f64;
            }
            Ok((DataMatrix::new(rows)?, intrinsic))
        }
        DatasetKind::Csv => Err(Error::InvalidInput(
            "csv datasets are read from disk; use load_csv with --csv <path>".into(),
        )),
    }
}

/// Render a float with 17 significant digits (lossless f64 round-trip).
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Load a rectangular numeric CSV into a [`DataMatrix`].
pub fn load_csv(path: &Path, has_header: bool) -> Result<DataMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let display = path.display().to_string();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if has_header && idx == 0 {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if let Some(w) = width {
            if cells.len() != w {
                return Err(Error::Parse {
                    path: display,
                    line: line_no,
                    msg: format!("ragged row: {} cells, expected {w}", cells.len()),
                });
            }
        } else {
            width = Some(cells.len());
        }
        let mut row = Vec::with_capacity(cells.len());
        for (col, cell) in cells.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                path: display.clone(),
                line: line_no,
                msg: format!("column {}: not a number: {cell:?}", col + 1),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    path: display,
                    line: line_no,
                    msg: format!("column {}: non-finite value {cell:?}", col + 1),
                });
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: display,
            line: 1,
            msg: "empty file".into(),
        });
    }
    DataMatrix::from_points(&rows)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Save a dataset as headerless CSV (inverse of `load_csv(path, false)`).
pub fn save_csv(path: &Path, data: &DataMatrix) -> Result<()> {
    let mut out = String::new();
    for i in 0..data.n() {
        let row: Vec<String> = data.point(i).iter().map(|&v| fmt_float(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_file(path, &out)
}

/// Save an arbitrary matrix as CSV with the given header row.
pub fn save_matrix_csv(path: &Path, m: &Matrix, header: &[String]) -> Result<()> {
    let mut out = String::new();
    if !header.is_empty() {
        out.push_str(&header.join(","));
        out.push('\n');
    }
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_float(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_file(path, &out)
}

/// Save an EM trace: `iter,objective,max_change` per iteration.
pub fn save_trace_csv(path: &Path, trace: &EmTrace) -> Result<()> {
    let mut out = String::from("iter,objective,max_change\n");
    for e in &trace.iterations {
        out.push_str(&format!(
            "{},{},{}\n",
            e.iter,
            fmt_float(e.objective),
            fmt_float(e.max_change)
        ));
    }
    write_file(path, &out)
}

/// Save sparse weights as `point,neighbor,weight` triplets.
pub fn save_weights_csv(path: &Path, triplets: &[(usize, usize, f64)]) -> Result<()> {
    let mut out = String::from("point,neighbor,weight\n");
    for (i, j, w) in triplets {
        out.push_str(&format!("{i},{j},{}\n", fmt_float(*w)));
    }
    write_file(path, &out)
}

/// Reload a weights CSV written by [`save_weights_csv`].
pub fn load_weights_csv(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let display = path.display().to_string();
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        let line_no = idx + 1;
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse {
                path: display,
                line: line_no,
                msg: "expected point,neighbor,weight".into(),
            });
        }
        let parse_usize = |s: &str, what: &str| -> Result<usize> {
            s.trim().parse().map_err(|_| Error::Parse {
                path: display.clone(),
                line: line_no,
                msg: format!("bad {what}: {s:?}"),
            })
        };
        let i = parse_usize(parts[0], "point index")?;
        let j = parse_usize(parts[1], "neighbor index")?;
        let w: f64 = parts[2].trim().parse().map_err(|_| Error::Parse {
            path: display.clone(),
            line: line_no,
            msg: format!("bad weight: {:?}", parts[2]),
        })?;
        out.push((i, j, w));
    }
    Ok(out)
}

/// Write the standard result bundle into `dir`: `embedding.csv` (one row per
/// point), `weights.csv` (point,neighbor,weight triplets), and `trace.csv`
/// (iter,objective,max_change; header-only when the trace is empty).
pub fn save_results(
    dir: &Path,
    embedding: &EmbeddingResult,
    weights: &[(usize, usize, f64)],
    trace: &EmTrace,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let header: Vec<String> = (0..embedding.y.ncols()).map(|j| format!("y{j}")).collect();
    save_matrix_csv(&dir.join("embedding.csv"), &embedding.y, &header)?;
    save_weights_csv(&dir.join("weights.csv"), weights)?;
    save_trace_csv(&dir.join("trace.csv"), trace)
}

/// Distance of each point to the best rank-`m` linear subspace, used to
/// check exactness of noiseless planar data.
pub fn subspace_residuals(data: &DataMatrix, m: usize) -> Result<Vec<f64>> {
    let mut gram = Matrix::zeros(data.d(), data.d());
    for i in 0..data.n() {
        let p = data.point(i);
        gram += &p * p.transpose();
    }
    let spec = SpectralDecomposition::new(&gram)?;
    let basis = spec.eigenvectors.columns(0, m.min(data.d())).into_owned();
    let proj = &basis * basis.transpose();
    Ok((0..data.n())
        .map(|i| {
            let p = data.point(i);
            (&p - &proj * &p).norm()
        })
        .collect())
}
