//! Multivariate Gaussian parameterization, log-density, conditioning, and
//! sampling, including degenerate (rank-deficient covariance) distributions.
//!
//! Degenerate Gaussians are first-class here: densities are evaluated on the
//! support of the covariance via pseudo-inverse and pseudo-log-determinant,
//! and sampling goes through the eigendecomposition so rank-deficient
//! covariances need no special casing. A point off the support of a
//! degenerate Gaussian gets log-density `-inf` rather than an error.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{
    self, ensure_finite, ensure_finite_vec, max_abs, pinv, Matrix, SpectralDecomposition, Vector,
    DEFAULT_RANK_TOL,
};

const LN_2PI: f64 = 1.8378770664093453;

/// Mean and covariance of a (possibly degenerate) multivariate Gaussian.
#[derive(Debug, Clone)]
pub struct GaussianParams {
    pub mean: Vector,
    pub covariance: Matrix,
}

impl GaussianParams {
    /// Validates the covariance: square, matching dimension, symmetric
    /// within 1e-10, and eigenvalues >= -1e-10 (both scaled by magnitude).
    pub fn new(mean: Vector, covariance: Matrix) -> Result<Self> {
        ensure_finite_vec("gaussian mean", &mean)?;
        ensure_finite("gaussian covariance", &covariance)?;
        if !covariance.is_square() || covariance.nrows() != mean.len() {
            return Err(Error::InvalidInput(format!(
                "covariance {}x{} does not match mean of length {}",
                covariance.nrows(),
                covariance.ncols(),
                mean.len()
            )));
        }
        let scale = max_abs(&covariance).max(1.0);
        let asym = max_abs(&(&covariance - covariance.transpose()));
        if asym > 1e-10 * scale {
            return Err(Error::InvalidInput(format!(
                "covariance asymmetric by {asym:.3e}"
            )));
        }
        let spec = SpectralDecomposition::new(&covariance)?;
        if let Some(lmin) = spec.eigenvalues.iter().cloned().reduce(f64::min) {
            if lmin < -1e-10 * scale {
                return Err(Error::NotPsd(format!(
                    "covariance eigenvalue {lmin:.3e}"
                )));
            }
        }
        Ok(GaussianParams { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Block decomposition of a joint Gaussian over `(x1, x2)`.
#[derive(Debug, Clone)]
pub struct JointBlocks {
    pub mu1: Vector,
    pub mu2: Vector,
    pub s11: Matrix,
    pub s12: Matrix,
    pub s21: Matrix,
    pub s22: Matrix,
}

impl JointBlocks {
    /// Validates shapes, `S21 = S12ᵀ` within 1e-12, and that the assembled
    /// full covariance is symmetric PSD up to tolerance.
    pub fn new(
        mu1: Vector,
        mu2: Vector,
        s11: Matrix,
        s12: Matrix,
        s21: Matrix,
        s22: Matrix,
    ) -> Result<Self> {
        let (d1, d2) = (mu1.len(), mu2.len());
        if s11.shape() != (d1, d1)
            || s12.shape() != (d1, d2)
            || s21.shape() != (d2, d1)
            || s22.shape() != (d2, d2)
        {
            return Err(Error::InvalidInput(
                "joint block shapes inconsistent with mean dimensions".into(),
            ));
        }
        let scale = max_abs(&s12).max(max_abs(&s21)).max(1.0);
        if max_abs(&(&s21 - s12.transpose())) > 1e-12 * scale {
            return Err(Error::InvalidInput(
                "S21 is not the transpose of S12".into(),
            ));
        }
        let blocks = JointBlocks {
            mu1,
            mu2,
            s11,
            s12,
            s21,
            s22,
        };
        // PSD check on the assembled covariance delegates to GaussianParams.
        blocks.assemble()?;
        Ok(blocks)
    }

    /// Assemble the full `(d1+d2)`-dimensional Gaussian.
    pub fn assemble(&self) -> Result<GaussianParams> {
        let (d1, d2) = (self.mu1.len(), self.mu2.len());
        let d = d1 + d2;
        let mut mean = Vector::zeros(d);
        mean.rows_mut(0, d1).copy_from(&self.mu1);
        mean.rows_mut(d1, d2).copy_from(&self.mu2);
        let mut cov = Matrix::zeros(d, d);
        cov.view_mut((0, 0), (d1, d1)).copy_from(&self.s11);
        cov.view_mut((0, d1), (d1, d2)).copy_from(&self.s12);
        cov.view_mut((d1, 0), (d2, d1)).copy_from(&self.s21);
        cov.view_mut((d1, d1), (d2, d2)).copy_from(&self.s22);
        // Exact symmetry for the assembled matrix (S12/S21 agree to 1e-12
        // but not necessarily bitwise).
        let cov = (&cov + cov.transpose()) * 0.5;
        GaussianParams::new(mean, cov)
    }
}

/// A Gaussian with its eigendecomposition cached, for evaluating the
/// log-density at many points without repeating the decomposition.
#[derive(Debug, Clone)]
pub struct PreparedGaussian {
    mean: Vector,
    spec: SpectralDecomposition,
    kept: Vec<usize>,
    logpdet: f64,
}

impl PreparedGaussian {
    pub fn new(g: &GaussianParams, rank_tol: f64) -> Result<Self> {
        let spec = SpectralDecomposition::new(&g.covariance)?;
        let lmax = spec.lambda_max().max(0.0);
        let cut = rank_tol * lmax;
        let kept: Vec<usize> = (0..spec.eigenvalues.len())
            .filter(|&i| spec.eigenvalues[i] > cut)
            .collect();
        let logpdet = kept.iter().map(|&i| spec.eigenvalues[i].ln()).sum();
        Ok(PreparedGaussian {
            mean: g.mean.clone(),
            spec,
            kept,
            logpdet,
        })
    }

    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    /// Log-density on the support; `-inf` off the support of a degenerate
    /// covariance (orthogonal residual above `1e-6 · ‖x-μ‖`).
    pub fn log_density(&self, x: &Vector) -> Result<f64> {
        if x.len() != self.mean.len() {
            return Err(Error::InvalidInput(format!(
                "point of dimension {} against Gaussian of dimension {}",
                x.len(),
                self.mean.len()
            )));
        }
        ensure_finite_vec("log_density point", x)?;
        let centered = x - &self.mean;
        let rank = self.kept.len();
        if rank < self.mean.len() {
            let mut proj = Vector::zeros(self.mean.len());
            for &i in &self.kept {
                let v = self.spec.eigenvectors.column(i);
                proj += v * v.dot(&centered);
            }
            let residual = (&centered - proj).norm();
            if residual > 1e-6 * centered.norm() {
                return Ok(f64::NEG_INFINITY);
            }
        }
        let quad: f64 = self
            .kept
            .iter()
            .map(|&i| {
                let c = self.spec.eigenvectors.column(i).dot(&centered);
                c * c / self.spec.eigenvalues[i]
            })
            .sum();
        Ok(-0.5 * (rank as f64 * LN_2PI + self.logpdet + quad))
    }
}

/// Log-density of `x` under `g`, defined on the support of the covariance:
/// `-0.5 [ r ln(2π) + logpdet(Σ) + (x-μ)ᵀ Σ† (x-μ) ]` with `r` the numerical
/// rank of `Σ`. Returns `-inf` when `x - μ` leaves the column space of a
/// degenerate covariance by more than `1e-6 · ‖x-μ‖`.
pub fn log_density(g: &GaussianParams, x: &Vector, rank_tol: f64) -> Result<f64> {
    PreparedGaussian::new(g, rank_tol)?.log_density(x)
}

/// Condition the joint on an observed `x1`: mean `μ2 + Σ21 Σ11† (x1 - μ1)`
/// and covariance `Σ22 - Σ21 Σ11† Σ12` (pseudo-inverse when `Σ11` is
/// singular). The conditional covariance does not depend on `x1`.
pub fn condition(j: &JointBlocks, x1: &Vector) -> Result<GaussianParams> {
    if x1.len() != j.mu1.len() {
        return Err(Error::InvalidInput(format!(
            "conditioning point of dimension {} against block of dimension {}",
            x1.len(),
            j.mu1.len()
        )));
    }
    ensure_finite_vec("conditioning point", x1)?;
    let s11_pinv = pinv(&j.s11, DEFAULT_RANK_TOL)?;
    let gain = &j.s21 * &s11_pinv;
    let mean = &j.mu2 + &gain * (x1 - &j.mu1);
    let cov = &j.s22 - &gain * &j.s12;
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianParams::new(mean, cov)
}

/// Draw `count` samples deterministically from `seed` via the
/// eigendecomposition factor `V diag(√λ) z + μ`. Eigen-directions below the
/// rank cut contribute exactly zero, so degenerate Gaussians sample on their
/// support.
pub fn sample(g: &GaussianParams, rng_seed: u64, count: usize) -> Result<Vec<Vector>> {
    let spec = SpectralDecomposition::new(&g.covariance)?;
    let lmax = spec.lambda_max().max(0.0);
    let cut = DEFAULT_RANK_TOL * lmax;
    let d = g.dim();
    let mut factor = spec.eigenvectors.clone();
    for i in 0..d {
        let s = if spec.eigenvalues[i] > cut {
            spec.eigenvalues[i].sqrt()
        } else {
            0.0
        };
        factor.column_mut(i).scale_mut(s);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let z = Vector::from_fn(d, |_, _| rng.sample(StandardNormal));
        out.push(&factor * z + &g.mean);
    }
    Ok(out)
}

/// Per-point seed derivation for callers that parallelize sampling over
/// points while keeping one user-facing seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    numerics::mix_seed(seed, stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn standard_1d() -> GaussianParams {
        GaussianParams::new(Vector::zeros(1), Matrix::identity(1, 1)).unwrap()
    }

    #[test]
    fn log_density_standard_normal_at_mode() {
        let g = standard_1d();
        let v = log_density(&g, &Vector::zeros(1), DEFAULT_RANK_TOL).unwrap();
        assert_abs_diff_eq!(v, -0.5 * LN_2PI, epsilon = 1e-12);
        assert_abs_diff_eq!(v, -0.9189385332046727, epsilon = 1e-10);
    }

    #[test]
    fn log_density_scaled_scalar() {
        let g = GaussianParams::new(Vector::zeros(1), Matrix::identity(1, 1) * 4.0).unwrap();
        let v = log_density(&g, &Vector::from_vec(vec![2.0]), DEFAULT_RANK_TOL).unwrap();
        let expected = -0.5 * LN_2PI - 0.5 * 4.0_f64.ln() - 0.5;
        assert_abs_diff_eq!(v, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(v, -2.112085713764609, epsilon = 1e-10);
    }

    #[test]
    fn log_density_off_support_is_neg_infinity() {
        let g = GaussianParams::new(
            Vector::zeros(2),
            Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 0.0])),
        )
        .unwrap();
        let v = log_density(&g, &Vector::from_vec(vec![0.0, 0.5]), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
    }

    #[test]
    fn log_density_on_support_of_degenerate() {
        let g = GaussianParams::new(
            Vector::zeros(2),
            Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 0.0])),
        )
        .unwrap();
        // A point on the support behaves as the 1-D marginal.
        let v = log_density(&g, &Vector::from_vec(vec![1.0, 0.0]), DEFAULT_RANK_TOL).unwrap();
        assert_abs_diff_eq!(v, -0.5 * LN_2PI - 0.5, epsilon = 1e-12);
    }

    #[test]
    fn log_density_rejects_dimension_mismatch() {
        let g = standard_1d();
        assert!(matches!(
            log_density(&g, &Vector::zeros(2), DEFAULT_RANK_TOL),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn condition_independent_blocks() {
        let j = JointBlocks::new(
            Vector::from_vec(vec![1.0]),
            Vector::from_vec(vec![-2.0]),
            Matrix::identity(1, 1) * 3.0,
            Matrix::zeros(1, 1),
            Matrix::zeros(1, 1),
            Matrix::identity(1, 1) * 5.0,
        )
        .unwrap();
        let c = condition(&j, &Vector::from_vec(vec![9.0])).unwrap();
        assert_abs_diff_eq!(c.mean[0], -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.covariance[(0, 0)], 5.0, epsilon = 1e-14);
    }

    #[test]
    fn condition_bivariate_textbook_case() {
        let rho = 0.5;
        let j = JointBlocks::new(
            Vector::zeros(1),
            Vector::zeros(1),
            Matrix::identity(1, 1),
            Matrix::identity(1, 1) * rho,
            Matrix::identity(1, 1) * rho,
            Matrix::identity(1, 1),
        )
        .unwrap();
        let c = condition(&j, &Vector::from_vec(vec![1.0])).unwrap();
        assert_abs_diff_eq!(c.mean[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.covariance[(0, 0)], 0.75, epsilon = 1e-12);

        // Oracle: numerical integration of the joint density at x1 = 1.
        let joint = j.assemble().unwrap();
        let (mut mass, mut m1, mut m2) = (0.0, 0.0, 0.0);
        let h = 0.001;
        let steps = (16.0 / h) as usize;
        for i in 0..=steps {
            let x2 = -8.0 + i as f64 * h;
            let p = log_density(
                &joint,
                &Vector::from_vec(vec![1.0, x2]),
                DEFAULT_RANK_TOL,
            )
            .unwrap()
            .exp();
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            mass += w * p;
            m1 += w * p * x2;
            m2 += w * p * x2 * x2;
        }
        let mean = m1 / mass;
        let var = m2 / mass - mean * mean;
        assert_abs_diff_eq!(c.mean[0], mean, epsilon = 1e-6);
        assert_abs_diff_eq!(c.covariance[(0, 0)], var, epsilon = 1e-6);
    }

    #[test]
    fn condition_at_prior_mean_returns_mu2() {
        let j = JointBlocks::new(
            Vector::from_vec(vec![2.0, -1.0]),
            Vector::from_vec(vec![7.0]),
            Matrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]),
            Matrix::from_row_slice(2, 1, &[0.5, -0.2]),
            Matrix::from_row_slice(1, 2, &[0.5, -0.2]),
            Matrix::identity(1, 1) * 2.0,
        )
        .unwrap();
        let c = condition(&j, &Vector::from_vec(vec![2.0, -1.0])).unwrap();
        assert_abs_diff_eq!(c.mean[0], 7.0, epsilon = 1e-12);
    }

    #[test]
    fn conditional_covariance_independent_of_x1() {
        let j = JointBlocks::new(
            Vector::zeros(2),
            Vector::zeros(2),
            Matrix::from_row_slice(2, 2, &[2.0, 0.4, 0.4, 1.0]),
            Matrix::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.3]),
            Matrix::from_row_slice(2, 2, &[0.5, -0.2, 0.1, 0.3]),
            Matrix::from_row_slice(2, 2, &[1.5, 0.2, 0.2, 0.9]),
        )
        .unwrap();
        let a = condition(&j, &Vector::from_vec(vec![0.3, -4.0])).unwrap();
        let b = condition(&j, &Vector::from_vec(vec![100.0, 2.5])).unwrap();
        assert_eq!(a.covariance, b.covariance);
    }

    #[test]
    fn sample_zero_covariance_returns_mean() {
        let g = GaussianParams::new(Vector::from_vec(vec![3.0, -1.0]), Matrix::zeros(2, 2)).unwrap();
        for s in sample(&g, 42, 10).unwrap() {
            assert_eq!(s, Vector::from_vec(vec![3.0, -1.0]));
        }
    }

    #[test]
    fn sample_moments_match_law_of_large_numbers() {
        let g = GaussianParams::new(Vector::zeros(2), Matrix::identity(2, 2)).unwrap();
        let draws = sample(&g, 7, 100_000).unwrap();
        let n = draws.len() as f64;
        let mean = draws.iter().fold(Vector::zeros(2), |acc, s| acc + s) / n;
        assert!(mean.amax() < 0.02, "sample mean {mean}");
        let mut cov = Matrix::zeros(2, 2);
        for s in &draws {
            let c = s - &mean;
            cov += &c * c.transpose();
        }
        cov /= n;
        assert!(max_abs(&(&cov - Matrix::identity(2, 2))) < 0.05);
    }

    #[test]
    fn sample_is_deterministic_per_seed() {
        let g = GaussianParams::new(
            Vector::zeros(3),
            Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 1.0, 0.0])),
        )
        .unwrap();
        let a = sample(&g, 123, 5).unwrap();
        let b = sample(&g, 123, 5).unwrap();
        assert_eq!(a, b);
        // Degenerate direction produces exactly zero components.
        for s in &a {
            assert_eq!(s[2], 0.0);
        }
    }

    #[test]
    fn density_integrates_to_one_1d() {
        let g = GaussianParams::new(Vector::from_vec(vec![0.7]), Matrix::identity(1, 1) * 2.25)
            .unwrap();
        let sigma = 1.5;
        let h = 0.01;
        let steps = (16.0 * sigma / h) as usize;
        let mut mass = 0.0;
        for i in 0..=steps {
            let x = 0.7 - 8.0 * sigma + i as f64 * h;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            mass += w
                * log_density(&g, &Vector::from_vec(vec![x]), DEFAULT_RANK_TOL)
                    .unwrap()
                    .exp();
        }
        mass *= h;
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn density_integrates_to_one_2d() {
        let g = GaussianParams::new(
            Vector::zeros(2),
            Matrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]),
        )
        .unwrap();
        let h = 0.05;
        let steps = (16.0 / h) as usize;
        let mut mass = 0.0;
        for i in 0..=steps {
            let wx = if i == 0 || i == steps { 0.5 } else { 1.0 };
            let x = -8.0 + i as f64 * h;
            for j in 0..=steps {
                let wy = if j == 0 || j == steps { 0.5 } else { 1.0 };
                let y = -8.0 + j as f64 * h;
                mass += wx
                    * wy
                    * log_density(&g, &Vector::from_vec(vec![x, y]), DEFAULT_RANK_TOL)
                        .unwrap()
                        .exp();
            }
        }
        mass *= h * h;
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn binned_samples_match_conditional_formulas() {
        // Jointly Gaussian pairs; conditional moments from samples binned on
        // x1 should match the closed-form conditional within Monte-Carlo
        // error (3 standard errors).
        let rho = 0.5;
        let j = JointBlocks::new(
            Vector::zeros(1),
            Vector::zeros(1),
            Matrix::identity(1, 1),
            Matrix::identity(1, 1) * rho,
            Matrix::identity(1, 1) * rho,
            Matrix::identity(1, 1),
        )
        .unwrap();
        let joint = j.assemble().unwrap();
        let draws = sample(&joint, 2024, 200_000).unwrap();
        let (a, w) = (0.8, 0.05);
        let in_bin: Vec<&Vector> = draws.iter().filter(|s| (s[0] - a).abs() < w).collect();
        let m = in_bin.len() as f64;
        assert!(m > 1000.0, "bin too sparse: {m}");
        let mean_x1 = in_bin.iter().map(|s| s[0]).sum::<f64>() / m;
        let mean_x2 = in_bin.iter().map(|s| s[1]).sum::<f64>() / m;
        let var_x1 = in_bin.iter().map(|s| (s[0] - mean_x1).powi(2)).sum::<f64>() / (m - 1.0);
        let var_x2 = in_bin.iter().map(|s| (s[1] - mean_x2).powi(2)).sum::<f64>() / (m - 1.0);

        // Conditional mean is linear, so the prediction at the bin's own
        // x1-mean is exact; bin width only widens the variance by rho^2*var(x1|bin).
        let cond = condition(&j, &Vector::from_vec(vec![mean_x1])).unwrap();
        let pred_mean = cond.mean[0];
        let pred_var = cond.covariance[(0, 0)] + rho * rho * var_x1;

        let se_mean = (var_x2 / m).sqrt();
        assert!(
            (mean_x2 - pred_mean).abs() <= 3.0 * se_mean,
            "conditional mean {mean_x2} vs {pred_mean} (3se = {:.3e})",
            3.0 * se_mean
        );
        let se_var = pred_var * (2.0 / (m - 1.0)).sqrt();
        assert!(
            (var_x2 - pred_var).abs() <= 3.0 * se_var,
            "conditional var {var_x2} vs {pred_var} (3se = {:.3e})",
            3.0 * se_var
        );
    }
}
