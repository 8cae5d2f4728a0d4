//! k-nearest-neighbor structure and the per-point local design matrices the
//! stochastic reconstruction conditions on.
//!
//! Neighbor search is exact (exhaustive O(n²)) with ties broken by ascending
//! point index, so results are deterministic and usable as a test oracle.

use crate::error::{Error, Result};
use crate::numerics::{ensure_finite, Matrix, Vector};

/// An n×d dataset together with its arithmetic mean.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    rows: Matrix,
    mu: Vector,
}

impl DataMatrix {
    /// Build from row-per-point data; computes the mean and rejects
    /// non-finite entries.
    pub fn new(rows: Matrix) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(Error::InvalidInput(
                "dataset must have at least one point and one dimension".into(),
            ));
        }
        ensure_finite("data matrix", &rows)?;
        let n = rows.nrows() as f64;
        let mu = Vector::from_fn(rows.ncols(), |j, _| rows.column(j).sum() / n);
        Ok(DataMatrix { rows, mu })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("dataset has no points".into()));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidInput(
                "all points must have the same dimension".into(),
            ));
        }
        let rows = Matrix::from_fn(points.len(), d, |i, j| points[i][j]);
        DataMatrix::new(rows)
    }

    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn d(&self) -> usize {
        self.rows.ncols()
    }

    pub fn point(&self, i: usize) -> Vector {
        self.rows.row(i).transpose()
    }

    pub fn mean(&self) -> &Vector {
        &self.mu
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }
}

/// How the columns of a local design matrix are shifted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centering {
    /// Columns are `x_neighbor - μ` with μ the data mean (default).
    DataMean,
    /// Columns are the raw neighbor coordinates.
    None,
}

/// Per-point neighbor lists and d×k local design matrices.
///
/// Built either from data via [`knn_graph`] or directly from a set of design
/// matrices ([`NeighborhoodSystem::from_designs`]); the latter carries no
/// neighbor indices and therefore cannot feed the embedding step.
#[derive(Debug, Clone)]
pub struct NeighborhoodSystem {
    pub k: usize,
    pub neighbor_indices: Vec<Vec<usize>>,
    pub local_design: Vec<Matrix>,
}

impl NeighborhoodSystem {
    /// Wrap explicit design matrices (the "{X_i} given directly" input path).
    /// All designs must share the d×k shape. Neighbor indices are left empty.
    pub fn from_designs(designs: Vec<Matrix>) -> Result<Self> {
        let first = designs
            .first()
            .ok_or_else(|| Error::InvalidInput("no design matrices given".into()))?;
        let shape = first.shape();
        if shape.1 == 0 {
            return Err(Error::InvalidInput("design matrices need k >= 1".into()));
        }
        for (i, m) in designs.iter().enumerate() {
            if m.shape() != shape {
                return Err(Error::InvalidInput(format!(
                    "design {i} has shape {:?}, expected {:?}",
                    m.shape(),
                    shape
                )));
            }
            ensure_finite("design matrix", m)?;
        }
        let n = designs.len();
        Ok(NeighborhoodSystem {
            k: shape.1,
            neighbor_indices: vec![Vec::new(); n],
            local_design: designs,
        })
    }

    pub fn n(&self) -> usize {
        self.local_design.len()
    }

    pub fn has_indices(&self) -> bool {
        self.neighbor_indices.iter().all(|l| l.len() == self.k)
    }
}

/// The d×k design matrix for one point: column j is neighbor j, centered
/// according to `centering`.
pub fn local_design(data: &DataMatrix, indices: &[usize], centering: Centering) -> Result<Matrix> {
    let d = data.d();
    let mut m = Matrix::zeros(d, indices.len());
    for (j, &idx) in indices.iter().enumerate() {
        if idx >= data.n() {
            return Err(Error::InvalidInput(format!(
                "neighbor index {idx} out of range for {} points",
                data.n()
            )));
        }
        let mut col = data.point(idx);
        if centering == Centering::DataMean {
            col -= data.mean();
        }
        m.set_column(j, &col);
    }
    Ok(m)
}

/// Exact k nearest neighbors per point under Euclidean distance, ties broken
/// by smaller index, with mean-centered design matrices.
pub fn knn_graph(data: &DataMatrix, k: usize) -> Result<NeighborhoodSystem> {
    knn_graph_with(data, k, Centering::DataMean)
}

/// [`knn_graph`] with an explicit centering convention.
pub fn knn_graph_with(
    data: &DataMatrix,
    k: usize,
    centering: Centering,
) -> Result<NeighborhoodSystem> {
    let n = data.n();
    if k == 0 || k > n - 1 {
        return Err(Error::InvalidInput(format!(
            "k must satisfy 1 <= k <= n-1 (k = {k}, n = {n})"
        )));
    }
    let mut neighbor_indices = Vec::with_capacity(n);
    let mut local = Vec::with_capacity(n);
    for i in 0..n {
        let xi = data.point(i);
        // Squared distances to every other point; ties resolved by index so
        // duplicate points are handled deterministically.
        let mut cand: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| ((data.point(j) - &xi).norm_squared(), j))
            .collect();
        cand.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let indices: Vec<usize> = cand.iter().take(k).map(|&(_, j)| j).collect();
        local.push(local_design(data, &indices, centering)?);
        neighbor_indices.push(indices);
    }
    Ok(NeighborhoodSystem {
        k,
        neighbor_indices,
        local_design: local,
    })
}
