//! Global linear latent models: factor analysis fitted by EM and
//! probabilistic PCA in closed form (plus its EM variant, which is factor
//! analysis with the noise constrained isotropic).
//!
//! Both share the generative shape `x = Λ w + μ + ε` with `w ~ N(0, I)`;
//! factor analysis keeps a diagonal noise covariance Ψ while probabilistic
//! PCA restricts it to `σ² I`. The EM updates and the closed-form solution
//! are the standard ones from the factor-analysis / probabilistic-PCA
//! literature; μ is fixed to the sample mean, for which the maximum
//! likelihood decouples from the remaining parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianParams, PreparedGaussian};
use crate::neighborhood::DataMatrix;
use crate::numerics::{max_abs, Matrix, SpectralDecomposition, Vector, DEFAULT_RANK_TOL};
use crate::stochastic::{EmConfig, EmTrace, TraceEntry};

/// Noise covariance of the latent linear model.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    /// Diagonal Ψ as a d-vector (factor analysis).
    Diagonal(Vector),
    /// Isotropic σ²·I (probabilistic PCA).
    Isotropic(f64),
}

/// Loading matrix Λ (d×q), noise covariance, and mean μ — the shared shape
/// of factor analysis and probabilistic PCA.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentLinearModel {
    pub loading: Matrix,
    pub noise: NoiseModel,
    pub mean: Vector,
}

impl LatentLinearModel {
    pub fn d(&self) -> usize {
        self.loading.nrows()
    }

    pub fn q(&self) -> usize {
        self.loading.ncols()
    }

    pub fn kind(&self) -> &'static str {
        match self.noise {
            NoiseModel::Diagonal(_) => "fa",
            NoiseModel::Isotropic(_) => "ppca",
        }
    }

    /// The marginal data covariance `Λ Λᵀ + Ψ`.
    pub fn marginal_covariance(&self) -> Matrix {
        let mut cov = &self.loading * self.loading.transpose();
        match &self.noise {
            NoiseModel::Diagonal(psi) => {
                for j in 0..self.d() {
                    cov[(j, j)] += psi[j];
                }
            }
            NoiseModel::Isotropic(s2) => {
                for j in 0..self.d() {
                    cov[(j, j)] += s2;
                }
            }
        }
        cov
    }

    /// Posterior-mean latent coordinates `(ΛᵀΛ + σ²I)⁻¹ Λᵀ (x - μ)` rows for
    /// a whole dataset; the standard low-dimensional view of the data under
    /// the model.
    pub fn latent_coordinates(&self, data: &DataMatrix) -> Result<Matrix> {
        let lam = &self.loading;
        let mut m = lam.transpose() * lam;
        // For diagonal Ψ the exact posterior map would use Λᵀ Ψ⁻¹; a fixed
        // isotropic level (the mean noise) keeps the map a plain projection
        // and is all the coordinate view needs.
        let level = match &self.noise {
            NoiseModel::Isotropic(s2) => *s2,
            NoiseModel::Diagonal(psi) => psi.sum() / psi.len() as f64,
        };
        for j in 0..self.q() {
            m[(j, j)] += level;
        }
        let m_inv = m
            .try_inverse()
            .ok_or_else(|| Error::Singular("latent posterior matrix".into()))?;
        let map = m_inv * lam.transpose();
        let n = data.n();
        let mut out = Matrix::zeros(n, self.q());
        for i in 0..n {
            let w = &map * (data.point(i) - &self.mean);
            out.set_row(i, &w.transpose());
        }
        Ok(out)
    }
}

/// Initialization of the EM loop.
#[derive(Debug, Clone)]
pub enum FaInit {
    /// Λ from the top-q principal directions scaled by √λ_j, Ψ from the
    /// residual variances.
    Warm,
    /// Seeded random loading, Ψ from the data variances (for testing EM
    /// robustness to initialization).
    Random,
    /// Start exactly at the given parameters.
    Explicit { loading: Matrix, noise: NoiseModel },
}

fn sample_covariance(data: &DataMatrix) -> Matrix {
    let n = data.n() as f64;
    let mut s = Matrix::zeros(data.d(), data.d());
    for i in 0..data.n() {
        let v = data.point(i) - data.mean();
        s += &v * v.transpose();
    }
    s / n
}

fn psi_floor(s: &Matrix) -> f64 {
    (1e-10 * s.trace() / s.nrows() as f64).max(1e-12)
}

fn initial_parameters(
    data: &DataMatrix,
    q: usize,
    init: &FaInit,
    seed: u64,
    s: &Matrix,
) -> Result<(Matrix, Vector)> {
    let d = data.d();
    let floor = psi_floor(s);
    match init {
        FaInit::Warm => {
            let spec = SpectralDecomposition::new(s)?;
            let mut loading = Matrix::zeros(d, q);
            for j in 0..q {
                let scale = spec.eigenvalues[j].max(0.0).sqrt();
                let col = spec.eigenvectors.column(j) * scale;
                loading.set_column(j, &col);
            }
            let llt = &loading * loading.transpose();
            let psi = Vector::from_fn(d, |j, _| (s[(j, j)] - llt[(j, j)]).max(floor));
            Ok((loading, psi))
        }
        FaInit::Random => {
            use rand::prelude::*;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let scale = (s.trace() / d as f64).sqrt().max(1e-3);
            let loading = Matrix::from_fn(d, q, |_, _| {
                rng.sample::<f64, _>(rand_distr::StandardNormal) * scale
            });
            let psi = Vector::from_fn(d, |j, _| s[(j, j)].max(floor));
            Ok((loading, psi))
        }
        FaInit::Explicit { loading, noise } => {
            if loading.shape() != (d, q) {
                return Err(Error::InvalidInput(format!(
                    "explicit loading has shape {:?}, expected {}x{}",
                    loading.shape(),
                    d,
                    q
                )));
            }
            let psi = match noise {
                NoiseModel::Diagonal(psi) => {
                    if psi.len() != d {
                        return Err(Error::InvalidInput("explicit Ψ has wrong length".into()));
                    }
                    psi.clone()
                }
                NoiseModel::Isotropic(s2) => Vector::from_element(d, s2.max(floor)),
            };
            Ok((loading.clone(), psi.map(|v| v.max(floor))))
        }
    }
}

fn fa_em_core(
    data: &DataMatrix,
    q: usize,
    cfg: &EmConfig,
    isotropic: bool,
    init: &FaInit,
) -> Result<(LatentLinearModel, EmTrace)> {
    let d = data.d();
    if q == 0 || q >= d {
        return Err(Error::InvalidInput(format!(
            "latent dimension must satisfy 1 <= q < d (q = {q}, d = {d})"
        )));
    }
    if data.n() < 2 {
        return Err(Error::InvalidInput("EM needs at least two points".into()));
    }
    if cfg.max_iter < 1 {
        return Err(Error::InvalidInput("max_iter must be at least 1".into()));
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }

    let mu = data.mean().clone();
    let s = sample_covariance(data);
    let floor = psi_floor(&s);
    let (mut loading, mut psi) = initial_parameters(data, q, init, cfg.seed, &s)?;
    if isotropic {
        let s2 = psi.sum() / d as f64;
        psi = Vector::from_element(d, s2.max(floor));
    }
    let n = data.n() as f64;
    let mut trace = EmTrace::default();

    for iter in 1..=cfg.max_iter {
        // E-step in closed form through the sample covariance:
        // β = Λᵀ(ΛΛᵀ+Ψ)⁻¹, Σ E[w]vᵀ = n β S, Σ E[wwᵀ] = n(I - βΛ + β S βᵀ).
        let mut mx = &loading * loading.transpose();
        for j in 0..d {
            mx[(j, j)] += psi[j];
        }
        let mx_inv = mx
            .try_inverse()
            .ok_or_else(|| Error::Singular("marginal covariance is singular".into()))?;
        let beta = loading.transpose() * mx_inv;
        let a = &s * beta.transpose() * n; // Σ v E[w]ᵀ, d×q
        let b = (Matrix::identity(q, q) - &beta * &loading + &beta * &s * beta.transpose()) * n;
        let b_inv = b
            .try_inverse()
            .ok_or_else(|| Error::Singular("E[wwᵀ] accumulator is singular".into()))?;
        let new_loading = &a * b_inv;
        let cross = &new_loading * (a.transpose() / n);
        let mut new_psi = Vector::from_fn(d, |j, _| (s[(j, j)] - cross[(j, j)]).max(floor));
        if isotropic {
            let s2 = (new_psi.sum() / d as f64).max(floor);
            new_psi = Vector::from_element(d, s2);
        }

        let max_change = max_abs(&(&new_loading - &loading))
            .max((&new_psi - &psi).amax());
        loading = new_loading;
        psi = new_psi;

        let model = assemble_model(&loading, &psi, &mu, isotropic);
        let ll = fa_log_likelihood(&model, data)?;
        if !ll.is_finite() {
            trace.iterations.push(TraceEntry {
                iter,
                objective: ll,
                max_change,
            });
            return Err(Error::Diverged { trace });
        }
        let prev = trace.iterations.last().map(|e| e.objective);
        trace.iterations.push(TraceEntry {
            iter,
            objective: ll,
            max_change,
        });
        if let Some(prev) = prev {
            if (ll - prev).abs() / prev.abs().max(1.0) < cfg.tol {
                trace.converged = true;
                break;
            }
        }
    }

    Ok((assemble_model(&loading, &psi, &mu, isotropic), trace))
}

fn assemble_model(loading: &Matrix, psi: &Vector, mu: &Vector, isotropic: bool) -> LatentLinearModel {
    let noise = if isotropic {
        NoiseModel::Isotropic(psi[0])
    } else {
        NoiseModel::Diagonal(psi.clone())
    };
    LatentLinearModel {
        loading: loading.clone(),
        noise,
        mean: mu.clone(),
    }
}

/// Factor analysis by EM with a warm (principal-direction) start.
pub fn fa_fit(data: &DataMatrix, q: usize, cfg: &EmConfig) -> Result<(LatentLinearModel, EmTrace)> {
    fa_em_core(data, q, cfg, false, &FaInit::Warm)
}

/// [`fa_fit`] with an explicit initialization strategy.
pub fn fa_fit_with_init(
    data: &DataMatrix,
    q: usize,
    cfg: &EmConfig,
    init: &FaInit,
) -> Result<(LatentLinearModel, EmTrace)> {
    fa_em_core(data, q, cfg, false, init)
}

/// Marginal log-likelihood `Σ_i log N(x_i; μ, ΛΛᵀ + Ψ)`.
pub fn fa_log_likelihood(model: &LatentLinearModel, data: &DataMatrix) -> Result<f64> {
    if model.d() != data.d() {
        return Err(Error::InvalidInput(format!(
            "model dimension {} does not match data dimension {}",
            model.d(),
            data.d()
        )));
    }
    let g = GaussianParams::new(model.mean.clone(), model.marginal_covariance())?;
    let prepared = PreparedGaussian::new(&g, DEFAULT_RANK_TOL)?;
    let mut total = 0.0;
    for i in 0..data.n() {
        total += prepared.log_density(&data.point(i))?;
    }
    Ok(total)
}

/// Probabilistic PCA in closed form: eigendecompose the sample covariance,
/// set `σ²` to the mean of the discarded eigenvalues, and take
/// `Λ = V_q (diag(λ) - σ² I)^{1/2}` with columns clamped to zero wherever
/// `λ_j ≤ σ²`.
pub fn ppca_fit_closed_form(data: &DataMatrix, q: usize) -> Result<LatentLinearModel> {
    let d = data.d();
    if q == 0 || q >= d {
        return Err(Error::InvalidInput(format!(
            "latent dimension must satisfy 1 <= q < d (q = {q}, d = {d})"
        )));
    }
    let s = sample_covariance(data);
    let spec = SpectralDecomposition::new(&s)?;
    let discarded: f64 = (q..d).map(|j| spec.eigenvalues[j].max(0.0)).sum();
    let sigma2 = discarded / (d - q) as f64;
    let mut loading = Matrix::zeros(d, q);
    for j in 0..q {
        let gap = spec.eigenvalues[j] - sigma2;
        let scale = if gap > 0.0 { gap.sqrt() } else { 0.0 };
        let col = spec.eigenvectors.column(j) * scale;
        loading.set_column(j, &col);
    }
    Ok(LatentLinearModel {
        loading,
        noise: NoiseModel::Isotropic(sigma2),
        mean: data.mean().clone(),
    })
}

/// Probabilistic PCA by EM: factor analysis with the noise constrained to be
/// isotropic (the σ² M-step averages the diagonal of the FA Ψ update).
pub fn ppca_fit_em(
    data: &DataMatrix,
    q: usize,
    cfg: &EmConfig,
) -> Result<(LatentLinearModel, EmTrace)> {
    fa_em_core(data, q, cfg, true, &FaInit::Warm)
}

/// [`ppca_fit_em`] with an explicit initialization strategy.
pub fn ppca_fit_em_with_init(
    data: &DataMatrix,
    q: usize,
    cfg: &EmConfig,
    init: &FaInit,
) -> Result<(LatentLinearModel, EmTrace)> {
    fa_em_core(data, q, cfg, true, init)
}

// --- serialization ---------------------------------------------------------

// Floats are persisted as the hexadecimal IEEE-754 bit pattern so the
// round-trip is exact at full binary precision.
fn f64_to_hex(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

fn f64_from_hex(s: &str) -> Result<f64> {
    let bits = u64::from_str_radix(s, 16)
        .map_err(|_| Error::InvalidInput(format!("bad float encoding: {s:?}")))?;
    Ok(f64::from_bits(bits))
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    #[serde(rename = "type")]
    kind: String,
    d: usize,
    q: usize,
    mean: Vec<String>,
    /// Row-major loading entries.
    loading: Vec<String>,
    /// d entries for "fa", a single entry for "ppca".
    noise: Vec<String>,
}

impl LatentLinearModel {
    /// Flat JSON document `{type, d, q, mean, loading, noise}` with every
    /// float hex-encoded for a bit-exact round-trip.
    pub fn to_json(&self) -> String {
        let (d, q) = (self.d(), self.q());
        let mut loading = Vec::with_capacity(d * q);
        for r in 0..d {
            for c in 0..q {
                loading.push(f64_to_hex(self.loading[(r, c)]));
            }
        }
        let noise = match &self.noise {
            NoiseModel::Diagonal(psi) => psi.iter().map(|&v| f64_to_hex(v)).collect(),
            NoiseModel::Isotropic(s2) => vec![f64_to_hex(*s2)],
        };
        let doc = ModelDocument {
            kind: self.kind().to_string(),
            d,
            q,
            mean: self.mean.iter().map(|&v| f64_to_hex(v)).collect(),
            loading,
            noise,
        };
        serde_json::to_string_pretty(&doc).expect("model document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("bad model document: {e}")))?;
        if doc.mean.len() != doc.d || doc.loading.len() != doc.d * doc.q {
            return Err(Error::InvalidInput(
                "model document dimensions are inconsistent".into(),
            ));
        }
        let mean = Vector::from_iterator(
            doc.d,
            doc.mean
                .iter()
                .map(|s| f64_from_hex(s))
                .collect::<Result<Vec<f64>>>()?,
        );
        let entries = doc
            .loading
            .iter()
            .map(|s| f64_from_hex(s))
            .collect::<Result<Vec<f64>>>()?;
        let loading = Matrix::from_fn(doc.d, doc.q, |r, c| entries[r * doc.q + c]);
        let noise = match doc.kind.as_str() {
            "fa" => {
                if doc.noise.len() != doc.d {
                    return Err(Error::InvalidInput(
                        "fa document needs d noise entries".into(),
                    ));
                }
                NoiseModel::Diagonal(Vector::from_iterator(
                    doc.d,
                    doc.noise
                        .iter()
                        .map(|s| f64_from_hex(s))
                        .collect::<Result<Vec<f64>>>()?,
                ))
            }
            "ppca" => {
                if doc.noise.len() != 1 {
                    return Err(Error::InvalidInput(
                        "ppca document needs one noise entry".into(),
                    ));
                }
                NoiseModel::Isotropic(f64_from_hex(&doc.noise[0])?)
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown model type {other:?}"
                )))
            }
        };
        Ok(LatentLinearModel {
            loading,
            noise,
            mean,
        })
    }
}
