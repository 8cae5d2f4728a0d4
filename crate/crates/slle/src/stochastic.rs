//! EM for stochastic linear reconstruction: each point `x_i` is generated
//! from latent reconstruction weights `w_i ~ N(0, Ω_i)` through its local
//! design matrix, `x_i = X_i w_i + μ`. The E-step computes the exact weight
//! posterior through the (generally rank-deficient) joint; the M-step either
//! takes gradient ascent steps on each `Ω_i⁻¹` (full mode) or uses the
//! closed-form update for spherical priors `Ω_i = σ_i I`.
//!
//! Degenerate covariances `X_i Ω_i X_iᵀ` (rank ≤ k < d) are handled with the
//! pseudo-inverse in the E-step and the pseudo-log-determinant in the
//! objective, so the surrogate stays finite and comparable across iterations.
//! An optional ridge replaces the pseudo-inverse path with `(C + λI)⁻¹`.

use crate::error::{Error, Result};
use crate::gaussian;
use crate::neighborhood::{DataMatrix, NeighborhoodSystem};
use crate::numerics::{
    kron, max_abs, pinv, pseudo_logdet, symmetrize_psd, unvec, vec_mat, Matrix,
    SpectralDecomposition, Vector, DEFAULT_RANK_TOL,
};

const LN_2PI: f64 = 1.8378770664093453;

/// Per-point prior covariance over reconstruction weights: either a full
/// k×k matrix `Ω_i` per point or a spherical scale `σ_i` (so `Ω_i = σ_i I`).
#[derive(Debug, Clone)]
pub enum PriorCovariance {
    Full(Vec<Matrix>),
    Spherical(Vec<f64>),
}

/// Which prior family the EM fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorMode {
    Full,
    Spherical,
}

impl PriorCovariance {
    /// The initialization used by the EM driver: `Ω_i = I` for every point.
    pub fn identity(mode: PriorMode, n: usize, k: usize) -> Self {
        match mode {
            PriorMode::Full => PriorCovariance::Full(vec![Matrix::identity(k, k); n]),
            PriorMode::Spherical => PriorCovariance::Spherical(vec![1.0; n]),
        }
    }

    pub fn mode(&self) -> PriorMode {
        match self {
            PriorCovariance::Full(_) => PriorMode::Full,
            PriorCovariance::Spherical(_) => PriorMode::Spherical,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            PriorCovariance::Full(v) => v.len(),
            PriorCovariance::Spherical(v) => v.len(),
        }
    }

    /// The k×k covariance for point `i`.
    pub fn omega(&self, i: usize, k: usize) -> Matrix {
        match self {
            PriorCovariance::Full(v) => v[i].clone(),
            PriorCovariance::Spherical(v) => Matrix::identity(k, k) * v[i],
        }
    }

    /// Full mode: every `Ω_i` symmetric PSD within tolerance.
    /// Spherical mode: every `σ_i > 0`.
    pub fn validate(&self) -> Result<()> {
        match self {
            PriorCovariance::Full(v) => {
                for (i, m) in v.iter().enumerate() {
                    if !m.is_square() {
                        return Err(Error::InvalidInput(format!("Ω_{i} is not square")));
                    }
                    let scale = max_abs(m).max(1.0);
                    if max_abs(&(m - m.transpose())) > 1e-8 * scale {
                        return Err(Error::NotPsd(format!("Ω_{i} is asymmetric")));
                    }
                    let spec = SpectralDecomposition::new(m)?;
                    if let Some(lmin) = spec.eigenvalues.iter().cloned().reduce(f64::min) {
                        if lmin < -1e-8 * scale {
                            return Err(Error::NotPsd(format!(
                                "Ω_{i} has eigenvalue {lmin:.3e}"
                            )));
                        }
                    }
                }
                Ok(())
            }
            PriorCovariance::Spherical(v) => {
                for (i, &s) in v.iter().enumerate() {
                    if !s.is_finite() || s <= 0.0 {
                        return Err(Error::InvalidInput(format!(
                            "spherical prior σ_{i} must be positive, got {s}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Conditional mean and covariance of the weights given each data point.
#[derive(Debug, Clone)]
pub struct WeightPosterior {
    pub means: Vec<Vector>,
    pub covariances: Vec<Matrix>,
}

impl WeightPosterior {
    pub fn n(&self) -> usize {
        self.means.len()
    }
}

/// The two M-step scatter matrices: `S1` (d×d, expected residual scatter)
/// and `S2` (k×k, expected weight second moment).
#[derive(Debug, Clone)]
pub struct Scatters {
    pub s1: Matrix,
    pub s2: Matrix,
}

/// Which scatters feed the M-step: the global averages shared across all
/// points, or a per-point variant built from point `i` alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScatterScope {
    #[default]
    Global,
    PerPoint,
}

/// Scatters resolved under a [`ScatterScope`].
#[derive(Debug, Clone)]
pub enum ScatterSet {
    Global(Scatters),
    PerPoint(Vec<Scatters>),
}

impl ScatterSet {
    pub fn for_point(&self, i: usize) -> &Scatters {
        match self {
            ScatterSet::Global(s) => s,
            ScatterSet::PerPoint(v) => &v[i],
        }
    }
}

/// One EM iteration record: surrogate objective after the M-step and the
/// largest parameter change that step made.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iter: usize,
    pub objective: f64,
    pub max_change: f64,
}

/// Per-iteration trace of the EM surrogate objective.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmTrace {
    pub iterations: Vec<TraceEntry>,
    pub converged: bool,
}

/// How final weights are read off the fitted posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtractMode {
    #[default]
    Mean,
    Sample,
}

/// EM driver configuration.
#[derive(Debug, Clone)]
pub struct EmConfig {
    pub mode: PriorMode,
    pub max_iter: usize,
    pub tol: f64,
    /// Full mode: ascent step size on each `Ω_i⁻¹`.
    pub lr: f64,
    /// Full mode: ascent steps per EM iteration.
    pub grad_steps: usize,
    /// Spherical mode: lower clamp for the closed-form update.
    pub sigma_floor: f64,
    /// When positive, `(C + ridge·I)⁻¹` replaces the pseudo-inverse.
    pub ridge: f64,
    pub scatter_scope: ScatterScope,
    pub extract: ExtractMode,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            mode: PriorMode::Spherical,
            max_iter: 100,
            tol: 1e-6,
            lr: 1e-3,
            grad_steps: 5,
            sigma_floor: 1e-12,
            ridge: 0.0,
            scatter_scope: ScatterScope::Global,
            extract: ExtractMode::Mean,
            seed: 0,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.mode == PriorMode::Full && (self.lr.is_nan() || self.lr <= 0.0 || self.grad_steps < 1) {
            return Err(Error::InvalidInput(
                "full mode needs lr > 0 and grad_steps >= 1".into(),
            ));
        }
        if self.sigma_floor.is_nan() || self.sigma_floor <= 0.0 {
            return Err(Error::InvalidInput("sigma_floor must be positive".into()));
        }
        if self.ridge < 0.0 {
            return Err(Error::InvalidInput("ridge must be non-negative".into()));
        }
        Ok(())
    }
}

fn check_shapes(data: &DataMatrix, nbrs: &NeighborhoodSystem) -> Result<()> {
    if nbrs.n() != data.n() {
        return Err(Error::InvalidInput(format!(
            "neighborhood system covers {} points, data has {}",
            nbrs.n(),
            data.n()
        )));
    }
    for (i, x) in nbrs.local_design.iter().enumerate() {
        if x.nrows() != data.d() || x.ncols() != nbrs.k {
            return Err(Error::InvalidInput(format!(
                "design {i} has shape {:?}, expected {}x{}",
                x.shape(),
                data.d(),
                nbrs.k
            )));
        }
    }
    Ok(())
}

/// Inverse of the model covariance `C = X Ω Xᵀ`: pseudo-inverse by default,
/// `(C + ridge·I)⁻¹` when a ridge is configured.
fn model_cov_inverse(c: &Matrix, ridge: f64) -> Result<Matrix> {
    let sym = (c + c.transpose()) * 0.5;
    if ridge > 0.0 {
        let ridged = &sym + Matrix::identity(sym.nrows(), sym.ncols()) * ridge;
        pinv(&ridged, DEFAULT_RANK_TOL)
    } else {
        pinv(&sym, DEFAULT_RANK_TOL)
    }
}

/// E-step: exact posterior of the weights for every point.
///
/// Per point: mean `Ω Xᵀ (X Ω Xᵀ)† (x - μ)` and covariance
/// `Ω - Ω Xᵀ (X Ω Xᵀ)† X Ω`, symmetrized and floored onto the PSD cone.
pub fn e_step(
    data: &DataMatrix,
    nbrs: &NeighborhoodSystem,
    prior: &PriorCovariance,
) -> Result<WeightPosterior> {
    e_step_with_ridge(data, nbrs, prior, 0.0)
}

/// [`e_step`] with the configurable ridge alternative to the pseudo-inverse.
pub fn e_step_with_ridge(
    data: &DataMatrix,
    nbrs: &NeighborhoodSystem,
    prior: &PriorCovariance,
    ridge: f64,
) -> Result<WeightPosterior> {
    check_shapes(data, nbrs)?;
    prior.validate()?;
    if prior.n() != data.n() {
        return Err(Error::InvalidInput(format!(
            "prior covers {} points, data has {}",
            prior.n(),
            data.n()
        )));
    }
    let k = nbrs.k;
    let mut means = Vec::with_capacity(data.n());
    let mut covs = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let x = &nbrs.local_design[i];
        let omega = prior.omega(i, k);
        let c = x * &omega * x.transpose();
        let c_inv = model_cov_inverse(&c, ridge)?;
        let gain = &omega * x.transpose() * &c_inv;
        let centered = data.point(i) - data.mean();
        means.push(&gain * centered);
        let cov = &omega - &gain * x * &omega;
        covs.push(symmetrize_psd(&cov, 0.0)?);
    }
    Ok(WeightPosterior {
        means,
        covariances: covs,
    })
}

fn point_scatters(
    data: &DataMatrix,
    nbrs: &NeighborhoodSystem,
    post: &WeightPosterior,
    i: usize,
) -> (Matrix, Matrix) {
    let x = &nbrs.local_design[i];
    let v = data.point(i) - data.mean();
    let m = &post.means[i];
    // E[w wᵀ] = Σ_{w|x} + μ_{w|x} μ_{w|x}ᵀ.
    let second_moment = &post.covariances[i] + m * m.transpose();
    let xm = x * m;
    let s1 = &v * v.transpose() - 2.0 * &xm * v.transpose() + x * &second_moment * x.transpose();
    (s1, second_moment)
}

/// The global scatters `S1 = (1/n) Σ_i E[(x_i - X_i w_i - μ)(·)ᵀ]` and
/// `S2 = (1/n) Σ_i E[w_i w_iᵀ]`, both symmetrized.
pub fn scatters(
    data: &DataMatrix,
    nbrs: &NeighborhoodSystem,
    post: &WeightPosterior,
) -> Result<Scatters> {
    check_shapes(data, nbrs)?;
    if post.n() != data.n() {
        return Err(Error::InvalidInput(format!(
            "posterior covers {} points, data has {}",
            post.n(),
            data.n()
        )));
    }
    let n = data.n() as f64;
    let mut s1 = Matrix::zeros(data.d(), data.d());
    let mut s2 = Matrix::zeros(nbrs.k, nbrs.k);
    for i in 0..data.n() {
        let (r, m2) = point_scatters(data, nbrs, post, i);
        s1 += r;
        s2 += m2;
    }
    s1 /= n;
    s2 /= n;
    Ok(Scatters {
        s1: (&s1 + s1.transpose()) * 0.5,
        s2: (&s2 + s2.transpose()) * 0.5,
    })
}

/// The per-point scatter variant: point `i`'s own residual scatter and
/// second moment, without averaging.
pub fn per_point_scatters(
    data: &DataMatrix,
    nbrs: &NeighborhoodSystem,
    post: &WeightPosterior,
) -> Result<Vec<Scatters>> {
    check_shapes(data, nbrs)?;
    let mut out = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let (s1, s2) = point_scatters(data, nbrs, post, i);
        out.push(Scatters {
            s1: (&s1 + s1.transpose()) * 0.5,
            s2: (&s2 + s2.transpose()) * 0.5,
        });
    }
    Ok(out)
}

/// Resolve scatters under the configured scope.
pub fn compute_scatter_set(
    data: &DataMatrix,
    nbrs: &NeighborhoodSystem,
    post: &WeightPosterior,
    scope: ScatterScope,
) -> Result<ScatterSet> {
    match scope {
        ScatterScope::Global => Ok(ScatterSet::Global(scatters(data, nbrs, post)?)),
        ScatterScope::PerPoint => Ok(ScatterSet::PerPoint(per_point_scatters(
            data, nbrs, post,
        )?)),
    }
}

/// One point's contribution to the EM surrogate, without the 2π constants:
/// `-(n/2) [ logpdet(X Ω Xᵀ) + tr((X Ω Xᵀ)† S1) + ln|Ω| + tr(Ω⁻¹ S2) ]`.
///
/// Tolerates slightly asymmetric `Ω` so central differences can perturb the
/// precision entrywise; `Ω` must still be invertible with positive
/// determinant.
pub fn per_point_surrogate(
    design: &Matrix,
    omega: &Matrix,
    s1: &Matrix,
    s2: &Matrix,
    n_points: usize,
) -> Result<f64> {
    surrogate_term(design, omega, s1, s2, n_points, 0.0)
}

fn surrogate_term(
    design: &Matrix,
    omega: &Matrix,
    s1: &Matrix,
    s2: &Matrix,
    n_points: usize,
    ridge: f64,
) -> Result<f64> {
    let c = design * omega * design.transpose();
    let sym_c = (&c + c.transpose()) * 0.5;
    let logpdet = if ridge > 0.0 {
        let ridged = &sym_c + Matrix::identity(sym_c.nrows(), sym_c.ncols()) * ridge;
        pseudo_logdet(&ridged, DEFAULT_RANK_TOL)?
    } else {
        pseudo_logdet(&sym_c, DEFAULT_RANK_TOL)?
    };
    let c_inv = model_cov_inverse(&c, ridge)?;
    let tr1 = (&c_inv * s1).trace();
    let det = omega.determinant();
    if !det.is_finite() || det <= 0.0 {
        return Err(Error::Singular(
            "prior covariance must be positive definite for the surrogate".into(),
        ));
    }
    let omega_inv = omega.clone().try_inverse().ok_or_else(|| {
        Error::Singular("prior covariance is not invertible".into())
    })?;
    let tr2 = (&omega_inv * s2).trace();
    let half_n = n_points as f64 / 2.0;
    Ok(-half_n * (logpdet + tr1 + det.ln() + tr2))
}

fn objective_from_scatters(
    data: &DataMatrix,
    nbrs: &NeighborhoodSystem,
    prior: &PriorCovariance,
    sc: &ScatterSet,
    ridge: f64,
) -> Result<f64> {
    let n = data.n();
    let k = nbrs.k;
    let mut total = 0.0;
    for i in 0..n {
        let s = sc.for_point(i);
        let omega = prior.omega(i, k);
        total += surrogate_term(&nbrs.local_design[i], &omega, &s.s1, &s.s2, n, ridge)?;
    }
    let nf = n as f64;
    total += -(data.d() as f64 * nf / 2.0) * LN_2PI - (k as f64 * nf / 2.0) * LN_2PI;
    Ok(total)
}

/// The EM surrogate objective (expected joint log-likelihood of data and
/// weights) for the given prior and posterior. The four non-constant terms
/// are evaluated per point and summed, with `S1`/`S2` resolved under `scope`;
/// the `-(dn/2)ln 2π - (kn/2)ln 2π` constants are included so values are
/// comparable in absolute terms.
pub fn joint_log_likelihood(
    data: &DataMatrix,
    nbrs: &NeighborhoodSystem,
    prior: &PriorCovariance,
    post: &WeightPosterior,
    scope: ScatterScope,
) -> Result<f64> {
    let sc = compute_scatter_set(data, nbrs, post, scope)?;
    objective_from_scatters(data, nbrs, prior, &sc, 0.0)
}

fn gradient_term(x: &Matrix, omega: &Matrix, s: &Scatters, n: usize, k: usize) -> Result<Matrix> {
    let c = x * omega * x.transpose();
    let t = kron(&x.transpose(), &x.transpose())?;
    let pulled = unvec(&(&t * vec_mat(&(&c - &s.s1))), k, k)?;
    Ok((pulled + omega - &s.s2) * (n as f64 / 2.0))
}

/// Gradient of the surrogate with respect to each `Ω_i⁻¹` (full mode only):
/// `(n/2) [ vec⁻¹(T_i vec(X Ω Xᵀ)) - vec⁻¹(T_i vec(S1)) + Ω_i - S2 ]` with
/// `T_i = X_iᵀ ⊗ X_iᵀ`.
pub fn m_step_gradient(
    nbrs: &NeighborhoodSystem,
    prior: &PriorCovariance,
    sc: &ScatterSet,
) -> Result<Vec<Matrix>> {
    let omegas = match prior {
        PriorCovariance::Full(v) => v,
        PriorCovariance::Spherical(_) => return Err(Error::WrongMode { expected: "full" }),
    };
    prior.validate()?;
    let n = nbrs.n();
    let k = nbrs.k;
    let mut grads = Vec::with_capacity(n);
    for (i, (design, omega)) in nbrs.local_design.iter().zip(omegas).enumerate() {
        grads.push(gradient_term(design, omega, sc.for_point(i), n, k)?);
    }
    Ok(grads)
}

/// Closed-form spherical M-step:
/// `σ_i = (d + k)⁻¹ [ tr((X_i X_iᵀ)† S1) + tr(S2) ]`, clamped below.
pub fn m_step_spherical(
    data: &DataMatrix,
    nbrs: &NeighborhoodSystem,
    sc: &ScatterSet,
) -> Result<Vec<f64>> {
    m_step_spherical_cfg(data, nbrs, sc, 1e-12, 0.0)
}

/// [`m_step_spherical`] with explicit floor and ridge.
pub fn m_step_spherical_cfg(
    data: &DataMatrix,
    nbrs: &NeighborhoodSystem,
    sc: &ScatterSet,
    sigma_floor: f64,
    ridge: f64,
) -> Result<Vec<f64>> {
    check_shapes(data, nbrs)?;
    let denom = (data.d() + nbrs.k) as f64;
    let mut out = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let (t1, t2) = spherical_trace_terms(nbrs, sc, i, ridge)?;
        out.push(((t1 + t2) / denom).max(sigma_floor));
    }
    Ok(out)
}

/// The two trace terms of the relaxed objective for point `i`:
/// `tr((X_i X_iᵀ)† S1)` and `tr(S2)`.
pub fn spherical_trace_terms(
    nbrs: &NeighborhoodSystem,
    sc: &ScatterSet,
    i: usize,
    ridge: f64,
) -> Result<(f64, f64)> {
    let x = &nbrs.local_design[i];
    let s = sc.for_point(i);
    let gram = x * x.transpose();
    let gram_inv = model_cov_inverse(&gram, ridge)?;
    Ok(((&gram_inv * &s.s1).trace(), s.s2.trace()))
}

/// The spherical relaxation of the surrogate for one point as a function of
/// `σ`: `-(n/2) [ (d + k) ln σ + (t1 + t2) / σ ]`, dropping the σ-independent
/// `ln|X Xᵀ|` constant. Its maximizer is the closed-form spherical update.
pub fn relaxed_objective(sigma: f64, n: usize, d: usize, k: usize, t1: f64, t2: f64) -> f64 {
    let half_n = n as f64 / 2.0;
    -half_n * ((d + k) as f64 * sigma.ln() + (t1 + t2) / sigma)
}

fn symmetric_inverse(m: &Matrix) -> Result<Matrix> {
    let spec = SpectralDecomposition::new(m)?;
    if spec.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::Singular(
            "matrix must be positive definite to invert spectrally".into(),
        ));
    }
    let mut scaled = spec.eigenvectors.clone();
    for (c, l) in spec.eigenvalues.iter().enumerate() {
        scaled.column_mut(c).scale_mut(1.0 / l);
    }
    let inv = &scaled * spec.eigenvectors.transpose();
    Ok((&inv + inv.transpose()) * 0.5)
}

fn prior_max_change(old: &PriorCovariance, new: &PriorCovariance) -> f64 {
    match (old, new) {
        (PriorCovariance::Spherical(a), PriorCovariance::Spherical(b)) => a
            .iter()
            .zip(b.iter())
            .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs())),
        (PriorCovariance::Full(a), PriorCovariance::Full(b)) => a
            .iter()
            .zip(b.iter())
            .fold(0.0_f64, |acc, (x, y)| acc.max(max_abs(&(x - y)))),
        _ => f64::INFINITY,
    }
}

/// Run the EM loop: initialize `Ω_i = I`, then alternate E-step and M-step
/// until the relative change of the surrogate objective drops below
/// `cfg.tol` or `cfg.max_iter` is reached. Returns the final prior, a
/// posterior consistent with it, and the per-iteration trace.
pub fn fit_stochastic_reconstruction(
    data: &DataMatrix,
    nbrs: &NeighborhoodSystem,
    cfg: &EmConfig,
) -> Result<(PriorCovariance, WeightPosterior, EmTrace)> {
    cfg.validate()?;
    check_shapes(data, nbrs)?;
    let mut prior = PriorCovariance::identity(cfg.mode, data.n(), nbrs.k);
    let mut trace = EmTrace::default();

    for iter in 1..=cfg.max_iter {
        let post = e_step_with_ridge(data, nbrs, &prior, cfg.ridge)?;
        let sc = compute_scatter_set(data, nbrs, &post, cfg.scatter_scope)?;

        let new_prior = match cfg.mode {
            PriorMode::Spherical => PriorCovariance::Spherical(m_step_spherical_cfg(
                data,
                nbrs,
                &sc,
                cfg.sigma_floor,
                cfg.ridge,
            )?),
            PriorMode::Full => {
                let omegas = match &prior {
                    PriorCovariance::Full(v) => v,
                    _ => unreachable!(),
                };
                let k = nbrs.k;
                let n = data.n();
                let mut updated = Vec::with_capacity(omegas.len());
                for (i, (omega, design)) in omegas.iter().zip(&nbrs.local_design).enumerate() {
                    let mut precision = symmetric_inverse(omega)?;
                    let mut current = omega.clone();
                    for _ in 0..cfg.grad_steps {
                        let grad = gradient_term(design, &current, sc.for_point(i), n, k)?;
                        precision = symmetrize_psd(&(&precision + grad * cfg.lr), 1e-9)?;
                        current = symmetric_inverse(&precision)?;
                    }
                    updated.push(current);
                }
                PriorCovariance::Full(updated)
            }
        };

        let objective = objective_from_scatters(data, nbrs, &new_prior, &sc, cfg.ridge)?;
        let max_change = prior_max_change(&prior, &new_prior);
        prior = new_prior;
        if !objective.is_finite() {
            trace.iterations.push(TraceEntry {
                iter,
                objective,
                max_change,
            });
            return Err(Error::Diverged { trace });
        }
        let prev = trace.iterations.last().map(|e| e.objective);
        trace.iterations.push(TraceEntry {
            iter,
            objective,
            max_change,
        });
        if let Some(prev) = prev {
            if (objective - prev).abs() / prev.abs().max(1.0) < cfg.tol {
                trace.converged = true;
                break;
            }
        }
    }

    let post = e_step_with_ridge(data, nbrs, &prior, cfg.ridge)?;
    Ok((prior, post, trace))
}

/// Read weights off the posterior: the conditional mean, or one draw per
/// point from `N(μ_{w|x,i}, Σ_{w|x,i})` with a per-point seed derived from
/// `seed`.
pub fn extract_weights(
    post: &WeightPosterior,
    mode: ExtractMode,
    seed: u64,
) -> Result<Vec<Vector>> {
    match mode {
        ExtractMode::Mean => Ok(post.means.clone()),
        ExtractMode::Sample => {
            let mut out = Vec::with_capacity(post.n());
            for i in 0..post.n() {
                let g = gaussian::GaussianParams::new(
                    post.means[i].clone(),
                    post.covariances[i].clone(),
                )?;
                let draws = gaussian::sample(&g, gaussian::derive_seed(seed, i as u64), 1)?;
                out.push(draws.into_iter().next().unwrap());
            }
            Ok(out)
        }
    }
}

/// Residual norms `‖x_i - X_i w_i - μ‖` for a set of extracted weights.
pub fn reconstruction_residuals(
    data: &DataMatrix,
    nbrs: &NeighborhoodSystem,
    weights: &[Vector],
) -> Result<Vec<f64>> {
    check_shapes(data, nbrs)?;
    if weights.len() != data.n() {
        return Err(Error::InvalidInput(format!(
            "{} weight vectors for {} points",
            weights.len(),
            data.n()
        )));
    }
    Ok((0..data.n())
        .map(|i| {
            let recon = &nbrs.local_design[i] * &weights[i];
            (data.point(i) - data.mean() - recon).norm()
        })
        .collect())
}
