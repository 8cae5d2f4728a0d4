//! Dense-matrix utilities: pseudo-inverse, pseudo-log-determinant,
//! Kronecker product, column-stacking vectorization, PSD repair, and a
//! central-difference gradient for numerical checking.
//!
//! Everything here is a pure function of its inputs. All routines work on
//! `f64` dense matrices and treat numerical rank relative to the largest
//! singular (or eigen) value.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Default relative tolerance for numerical-rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

pub(crate) fn ensure_finite(name: &str, m: &Matrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{name} contains NaN or Inf")))
    }
}

pub(crate) fn ensure_finite_vec(name: &str, v: &Vector) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{name} contains NaN or Inf")))
    }
}

/// Largest absolute entry of a matrix.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// SplitMix64 step, used to derive independent per-stream seeds from one
/// user-facing seed without correlated low bits.
pub(crate) fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
/// descending order and orthonormal eigenvectors as columns.
///
/// The symmetric part `(A + Aᵀ)/2` of the input is decomposed, so slightly
/// asymmetric inputs are tolerated.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vector,
    pub eigenvectors: Matrix,
}

impl SpectralDecomposition {
    pub fn new(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidInput(format!(
                "spectral decomposition requires a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        ensure_finite("spectral decomposition input", a)?;
        let sym = (a + a.transpose()) * 0.5;
        let eig = nalgebra::SymmetricEigen::new(sym);
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            eig.eigenvalues[j]
                .partial_cmp(&eig.eigenvalues[i])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let eigenvalues = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let eigenvectors = Matrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(SpectralDecomposition {
            eigenvalues,
            eigenvectors,
        })
    }

    /// Largest eigenvalue (already first after sorting).
    pub fn lambda_max(&self) -> f64 {
        if self.eigenvalues.is_empty() {
            0.0
        } else {
            self.eigenvalues[0]
        }
    }

    /// Rebuild `V diag(clamped λ) Vᵀ` with eigenvalues clamped below at `floor`.
    pub fn reconstruct_clamped(&self, floor: f64) -> Matrix {
        let clamped = self.eigenvalues.map(|l| l.max(floor));
        let scaled = {
            let mut m = self.eigenvectors.clone();
            for (c, s) in clamped.iter().enumerate() {
                m.column_mut(c).scale_mut(*s);
            }
            m
        };
        let rebuilt = &scaled * self.eigenvectors.transpose();
        (&rebuilt + rebuilt.transpose()) * 0.5
    }
}

/// One-sided Jacobi SVD of a tall matrix (rows >= cols): returns
/// `(U, σ, V)` with `A = U diag(σ) Vᵀ`, σ descending. Chosen over the
/// Golub–Kahan route for its behavior on exactly rank-deficient input,
/// where the final rotation of near-null directions must still come out
/// right for the pseudo-inverse to satisfy the Penrose identities.
fn jacobi_svd_tall(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut w = a.clone();
    let mut v = Matrix::identity(n, n);
    let eps = f64::EPSILON;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..m {
                    let wp = w[(r, p)];
                    let wq = w[(r, q)];
                    w[(r, p)] = c * wp - s * wq;
                    w[(r, q)] = s * wp + c * wq;
                }
                for r in 0..n {
                    let vp = v[(r, p)];
                    let vq = v[(r, q)];
                    v[(r, p)] = c * vp - s * vq;
                    v[(r, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let mut u = Matrix::zeros(m, n);
    let mut v_sorted = Matrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (c, &j) in order.iter().enumerate() {
        sigma.push(norms[j]);
        if norms[j] > 0.0 {
            u.set_column(c, &(w.column(j) / norms[j]));
        }
        v_sorted.set_column(c, &v.column(j));
    }
    (u, sigma, v_sorted)
}

/// Moore–Penrose pseudo-inverse.
///
/// Singular values below `rank_tol * sigma_max` are treated as exactly zero.
/// Symmetric input goes through the symmetric eigendecomposition (σ = |λ|);
/// general input through a one-sided Jacobi SVD.
pub fn pinv(a: &Matrix, rank_tol: f64) -> Result<Matrix> {
    ensure_finite("pinv input", a)?;
    if rank_tol.is_nan() || rank_tol <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "rank_tol must be positive, got {rank_tol}"
        )));
    }
    let scale = max_abs(a);
    if a.is_square() && max_abs(&(a - a.transpose())) <= 1e-12 * scale.max(1.0) {
        let spec = SpectralDecomposition::new(a)?;
        let sig_max = spec.eigenvalues.iter().fold(0.0_f64, |m, &l| m.max(l.abs()));
        let cut = rank_tol * sig_max;
        let mut scaled = spec.eigenvectors.clone();
        for (c, &l) in spec.eigenvalues.iter().enumerate() {
            let inv = if l.abs() > cut { 1.0 / l } else { 0.0 };
            scaled.column_mut(c).scale_mut(inv);
        }
        return Ok(&scaled * spec.eigenvectors.transpose());
    }
    let transposed = a.nrows() < a.ncols();
    let tall = if transposed { a.transpose() } else { a.clone() };
    let (u, sigma, v) = jacobi_svd_tall(&tall);
    let smax = sigma.first().cloned().unwrap_or(0.0);
    let cut = rank_tol * smax;
    // tall† = V Σ† Uᵀ.
    let mut ut = u.transpose();
    for (r, &s) in sigma.iter().enumerate() {
        let inv = if s > cut { 1.0 / s } else { 0.0 };
        ut.row_mut(r).scale_mut(inv);
    }
    let tall_pinv = &v * ut;
    Ok(if transposed {
        tall_pinv.transpose()
    } else {
        tall_pinv
    })
}

/// Log pseudo-determinant of a symmetric PSD matrix: the sum of the logs of
/// eigenvalues above `rank_tol * lambda_max`. Returns 0 for the zero matrix.
pub fn pseudo_logdet(a: &Matrix, rank_tol: f64) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "pseudo_logdet requires a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_finite("pseudo_logdet input", a)?;
    if rank_tol.is_nan() || rank_tol <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "rank_tol must be positive, got {rank_tol}"
        )));
    }
    let scale = max_abs(a).max(1.0);
    let asym = max_abs(&(a - a.transpose()));
    if asym > 1e-8 * scale {
        return Err(Error::NotPsd(format!(
            "matrix is asymmetric by {asym:.3e} (tolerance {:.3e})",
            1e-8 * scale
        )));
    }
    let spec = SpectralDecomposition::new(a)?;
    let lmax = spec.lambda_max().max(0.0);
    let neg_tol = 1e-8 * lmax.max(1.0);
    if let Some(lmin) = spec.eigenvalues.iter().cloned().reduce(f64::min) {
        if lmin < -neg_tol {
            return Err(Error::NotPsd(format!(
                "eigenvalue {lmin:.3e} below -{neg_tol:.3e}"
            )));
        }
    }
    let cut = rank_tol * lmax;
    Ok(spec
        .eigenvalues
        .iter()
        .filter(|&&l| l > cut)
        .map(|&l| l.ln())
        .sum())
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    ensure_finite("kron left operand", a)?;
    ensure_finite("kron right operand", b)?;
    Ok(a.kronecker(b))
}

/// Column-stacking vectorization (Magnus–Neudecker convention).
pub fn vec_mat(a: &Matrix) -> Vector {
    // nalgebra stores matrices column-major, so the raw slice is already
    // the column-stacked vector.
    Vector::from_column_slice(a.as_slice())
}

/// Inverse of [`vec_mat`]: reshape a length `rows*cols` vector into a matrix
/// by filling columns first.
pub fn unvec(v: &Vector, rows: usize, cols: usize) -> Result<Matrix> {
    if v.len() != rows * cols {
        return Err(Error::InvalidInput(format!(
            "unvec: vector of length {} cannot fill a {}x{} matrix",
            v.len(),
            rows,
            cols
        )));
    }
    Ok(Matrix::from_column_slice(rows, cols, v.as_slice()))
}

/// `(A + Aᵀ)/2` with eigenvalues clamped below at `floor`.
pub fn symmetrize_psd(a: &Matrix, floor: f64) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "symmetrize_psd requires a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let spec = SpectralDecomposition::new(a)?;
    Ok(spec.reconstruct_clamped(floor))
}

/// Central-difference gradient of a scalar function of a matrix:
/// `(f(A + h·E_ij) - f(A - h·E_ij)) / (2h)` entrywise.
pub fn fd_gradient<F>(f: F, a: &Matrix, h: f64) -> Result<Matrix>
where
    F: Fn(&Matrix) -> Result<f64>,
{
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "step size must be positive, got {h}"
        )));
    }
    ensure_finite("fd_gradient input", a)?;
    let mut grad = Matrix::zeros(a.nrows(), a.ncols());
    for c in 0..a.ncols() {
        for r in 0..a.nrows() {
            let mut plus = a.clone();
            plus[(r, c)] += h;
            let mut minus = a.clone();
            minus[(r, c)] -= h;
            let fp = f(&plus)?;
            let fm = f(&minus)?;
            if !fp.is_finite() || !fm.is_finite() {
                return Err(Error::NonFinite(format!(
                    "objective non-finite at perturbed entry ({r},{c})"
                )));
            }
            grad[(r, c)] = (fp - fm) / (2.0 * h);
        }
    }
    Ok(grad)
}
