//! Deterministic LLE baseline: standard reconstruction weights and the
//! spectral embedding step, plus the bridge that feeds stochastically
//! fitted weights into the same embedding.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::neighborhood::{knn_graph, DataMatrix, NeighborhoodSystem};
use crate::numerics::{Matrix, SpectralDecomposition, Vector};

/// Sparse-pattern reconstruction weights: row i is nonzero only at point i's
/// neighbors, sums to 1, and has a zero diagonal.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    n: usize,
    neighbor_indices: Vec<Vec<usize>>,
    weights: Vec<Vec<f64>>,
}

impl WeightMatrix {
    pub fn new(
        n: usize,
        neighbor_indices: Vec<Vec<usize>>,
        weights: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if neighbor_indices.len() != n || weights.len() != n {
            return Err(Error::InvalidInput("weight rows must cover all points".into()));
        }
        for i in 0..n {
            if neighbor_indices[i].len() != weights[i].len() {
                return Err(Error::InvalidInput(format!(
                    "row {i}: {} indices vs {} weights",
                    neighbor_indices[i].len(),
                    weights[i].len()
                )));
            }
            if neighbor_indices[i].iter().any(|&j| j >= n) {
                return Err(Error::InvalidInput(format!("row {i}: index out of range")));
            }
            if neighbor_indices[i].contains(&i) {
                return Err(Error::InvalidInput(format!(
                    "row {i}: diagonal entry must be zero"
                )));
            }
            let sum: f64 = weights[i].iter().sum();
            if (sum - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidInput(format!(
                    "row {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(WeightMatrix {
            n,
            neighbor_indices,
            weights,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &[usize], &[f64])> {
        (0..self.n).map(move |i| {
            (
                i,
                self.neighbor_indices[i].as_slice(),
                self.weights[i].as_slice(),
            )
        })
    }

    /// Triplet view `(point, neighbor, weight)` for persistence.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, idx, w) in self.rows() {
            for (j, v) in idx.iter().zip(w.iter()) {
                out.push((i, *j, *v));
            }
        }
        out
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for (i, idx, w) in self.rows() {
            for (j, v) in idx.iter().zip(w.iter()) {
                m[(i, *j)] = *v;
            }
        }
        m
    }
}

/// Embedded coordinates with the trailing spectrum of the embedding matrix.
#[derive(Debug, Clone)]
pub struct EmbeddingResult {
    /// n×p embedded coordinates.
    pub y: Matrix,
    /// The p+1 smallest eigenvalues of `M = (I-W)ᵀ(I-W)`, ascending; the
    /// first belongs to the discarded constant eigenvector.
    pub eigenvalues: Vec<f64>,
    /// Rows whose weight sum was too small to renormalize (only populated by
    /// [`embed_from_stochastic`]); such rows were embedded as-is.
    pub skipped_rows: Vec<usize>,
}

/// Standard LLE reconstruction weights: per point solve
/// `(G + reg·tr(G)/k · I) w = 1` on the local Gram matrix of differences,
/// then normalize `w` to sum to one.
pub fn reconstruction_weights(
    data: &DataMatrix,
    nbrs: &NeighborhoodSystem,
    reg: f64,
) -> Result<WeightMatrix> {
    if reg < 0.0 {
        return Err(Error::InvalidInput(format!(
            "regularization must be non-negative, got {reg}"
        )));
    }
    if !nbrs.has_indices() {
        return Err(Error::InvalidInput(
            "neighborhood system carries no neighbor indices".into(),
        ));
    }
    if nbrs.n() != data.n() {
        return Err(Error::InvalidInput(
            "neighborhood system does not match data".into(),
        ));
    }
    let k = nbrs.k;
    let mut weights = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let xi = data.point(i);
        let diffs: Vec<Vector> = nbrs.neighbor_indices[i]
            .iter()
            .map(|&j| &xi - data.point(j))
            .collect();
        let mut gram = Matrix::from_fn(k, k, |a, b| diffs[a].dot(&diffs[b]));
        let shift = reg * gram.trace() / k as f64;
        for j in 0..k {
            gram[(j, j)] += shift;
        }
        let ones = Vector::from_element(k, 1.0);
        let solved = gram.lu().solve(&ones);
        let w = match solved {
            Some(w) if w.iter().all(|v| v.is_finite()) => w,
            _ => {
                return Err(Error::Singular(format!(
                    "local Gram system for point {i} is singular; pass reg > 0"
                )))
            }
        };
        let sum: f64 = w.iter().sum();
        if !sum.is_finite() || sum.abs() < 1e-300 {
            return Err(Error::Singular(format!(
                "weights for point {i} cannot be normalized; pass reg > 0"
            )));
        }
        weights.push(w.iter().map(|v| v / sum).collect::<Vec<f64>>());
    }
    WeightMatrix::new(data.n(), nbrs.neighbor_indices.clone(), weights)
}

fn embed_rows(
    n: usize,
    neighbor_indices: &[Vec<usize>],
    weights: &[Vec<f64>],
    p: usize,
    skipped_rows: Vec<usize>,
) -> Result<EmbeddingResult> {
    if p == 0 || p > n - 1 {
        return Err(Error::InvalidInput(format!(
            "p must satisfy 1 <= p <= n-1 (p = {p}, n = {n})"
        )));
    }
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        for (j, v) in neighbor_indices[i].iter().zip(weights[i].iter()) {
            w[(i, *j)] = *v;
        }
    }
    let iw = Matrix::identity(n, n) - &w;
    let m = iw.transpose() * &iw;
    let spec = SpectralDecomposition::new(&m)
        .map_err(|e| Error::Numerical(format!("embedding eigensolve failed: {e}")))?;
    // SpectralDecomposition sorts descending; embedding wants ascending.
    let asc: Vec<usize> = (0..n).rev().collect();
    let eigenvalues: Vec<f64> = asc
        .iter()
        .take(p + 1)
        .map(|&c| spec.eigenvalues[c])
        .collect();
    let mut y = Matrix::zeros(n, p);
    for (out_col, &c) in asc.iter().skip(1).take(p).enumerate() {
        let mut col = spec.eigenvectors.column(c).into_owned();
        // The embedding is defined modulo the constant direction; remove any
        // residual constant component (it is only nonzero when the bottom of
        // the spectrum is nearly degenerate).
        let mean = col.sum() / n as f64;
        col.add_scalar_mut(-mean);
        // Sign convention: the entry of largest magnitude is positive.
        let mut lead = 0;
        for r in 1..n {
            if col[r].abs() > col[lead].abs() {
                lead = r;
            }
        }
        if col[lead] < 0.0 {
            col.neg_mut();
        }
        col.scale_mut((n as f64).sqrt());
        y.set_column(out_col, &col);
    }
    Ok(EmbeddingResult {
        y,
        eigenvalues,
        skipped_rows,
    })
}

/// Spectral embedding step: eigendecompose `M = (I-W)ᵀ(I-W)`, discard the
/// constant eigenvector, and return the next `p` eigenvectors scaled by √n.
pub fn embed(w: &WeightMatrix, p: usize) -> Result<EmbeddingResult> {
    embed_rows(w.n, &w.neighbor_indices, &w.weights, p, Vec::new())
}

/// Scatter stochastically fitted weight vectors onto the neighbor pattern
/// and run the embedding. The model places no sum-to-one constraint on
/// these weights, so rows are renormalized by default; rows with
/// `|sum| < 1e-12` are left as-is and reported in `skipped_rows`.
pub fn embed_from_stochastic(
    weights: &[Vector],
    nbrs: &NeighborhoodSystem,
    p: usize,
    renormalize: bool,
) -> Result<EmbeddingResult> {
    if !nbrs.has_indices() {
        return Err(Error::InvalidInput(
            "embedding requires a neighborhood system with neighbor indices".into(),
        ));
    }
    let n = nbrs.n();
    if weights.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} weight vectors for {} points",
            weights.len(),
            n
        )));
    }
    if weights.iter().any(|w| w.len() != nbrs.k) {
        return Err(Error::InvalidInput("weight vectors must have length k".into()));
    }
    let mut rows = Vec::with_capacity(n);
    let mut skipped = Vec::new();
    for (i, w) in weights.iter().enumerate() {
        let mut row: Vec<f64> = w.iter().cloned().collect();
        if renormalize {
            let sum: f64 = row.iter().sum();
            if sum.abs() < 1e-12 {
                skipped.push(i);
            } else if (sum - 1.0).abs() > 1e-12 {
                // Rows already summing to 1 are left untouched so the
                // renormalization is an exact no-op on them.
                for v in &mut row {
                    *v /= sum;
                }
            }
        }
        rows.push(row);
    }
    embed_rows(n, &nbrs.neighbor_indices, &rows, p, skipped)
}

/// Fraction of each point's k input-space neighbors retained among its k
/// embedding-space neighbors, averaged over points.
pub fn neighborhood_preservation(
    reference: &NeighborhoodSystem,
    embedding: &Matrix,
    k: usize,
) -> Result<f64> {
    if embedding.nrows() != reference.n() {
        return Err(Error::InvalidInput(
            "embedding rows must match the reference neighborhood system".into(),
        ));
    }
    let ydata = DataMatrix::new(embedding.clone())?;
    let ynbrs = knn_graph(&ydata, k)?;
    let mut total = 0.0;
    for i in 0..reference.n() {
        let orig: HashSet<usize> = reference.neighbor_indices[i].iter().cloned().collect();
        let shared = ynbrs.neighbor_indices[i]
            .iter()
            .filter(|j| orig.contains(j))
            .count();
        total += shared as f64 / k as f64;
    }
    Ok(total / reference.n() as f64)
}
