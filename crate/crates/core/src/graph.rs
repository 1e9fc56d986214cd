//! Constraint-graph Laplacians and the scatter matrices built from them.
//!
//! Every Laplacian here is `N x N` over training samples. [`scatter`] turns a
//! Laplacian into the `D x D` matrix `X L X^T`; the [`LaplacianSpec::Zero`]
//! variant is special and realizes the identity at that level.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cluster::kmeans;
use crate::error::{Error, Result};
use crate::linalg::symmetrize;
use crate::svdd::DualSolution;

/// Default cluster and neighbor count.
pub const DEFAULT_GRAPH_K: usize = 5;

/// Which constraint graph to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LaplacianSpec {
    /// No data-dependent constraint; the scatter becomes the identity.
    Zero,
    /// `L = I`, so the scatter is `X X^T`.
    Identity,
    /// `L = (1/N) (I - 11^T/N)`, the sample covariance.
    Pca,
    /// Within-cluster scatter over k-means clusters.
    WithinCluster { clusters: usize },
    /// Between-cluster scatter over k-means clusters.
    BetweenCluster { clusters: usize },
    /// Unweighted symmetric k-nearest-neighbor graph.
    Knn { neighbors: usize },
}

impl LaplacianSpec {
    /// Short token used in variant names (`0`, `i`, `pca`, `sw`, `sb`, `knn`).
    pub fn token(&self) -> &'static str {
        match self {
            LaplacianSpec::Zero => "0",
            LaplacianSpec::Identity => "i",
            LaplacianSpec::Pca => "pca",
            LaplacianSpec::WithinCluster { .. } => "sw",
            LaplacianSpec::BetweenCluster { .. } => "sb",
            LaplacianSpec::Knn { .. } => "knn",
        }
    }

    /// Builds the Laplacian for centered samples `x` (`D x N`).
    ///
    /// Cluster-based kinds run k-means with `seed` first.
    pub fn realize(&self, x: &DMatrix<f64>, seed: u64) -> Result<Laplacian> {
        let n = x.ncols();
        match *self {
            LaplacianSpec::Zero => Ok(Laplacian {
                matrix: DMatrix::zeros(n, n),
                kind: Some(*self),
                cluster_labels: None,
            }),
            LaplacianSpec::Identity => Ok(Laplacian {
                matrix: DMatrix::identity(n, n),
                kind: Some(*self),
                cluster_labels: None,
            }),
            LaplacianSpec::Pca => Ok(laplacian_pca(n)),
            LaplacianSpec::WithinCluster { clusters } | LaplacianSpec::BetweenCluster { clusters } => {
                check_graph_count("cluster", clusters, n)?;
                let assignment = kmeans(x, clusters, seed)?;
                let mut lap = if matches!(self, LaplacianSpec::WithinCluster { .. }) {
                    laplacian_within(&assignment.labels, n)?
                } else {
                    laplacian_between(&assignment.labels, n)?
                };
                lap.kind = Some(*self);
                Ok(lap)
            }
            LaplacianSpec::Knn { neighbors } => laplacian_knn(x, neighbors),
        }
    }
}

impl fmt::Display for LaplacianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

fn check_graph_count(what: &str, k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        Err(Error::InvalidParameter(format!(
            "{what} count must be in [1, {n}), got {k}"
        )))
    } else {
        Ok(())
    }
}

/// A realized `N x N` Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    pub matrix: DMatrix<f64>,
    /// The constraint graph this realizes; `None` for auxiliary graphs such
    /// as the total-scatter or dual-weight Laplacians.
    pub kind: Option<LaplacianSpec>,
    /// Cluster assignment for the cluster-based kinds.
    pub cluster_labels: Option<Vec<usize>>,
}

impl Laplacian {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest absolute row sum.
    pub fn max_row_sum(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| r.sum().abs())
            .fold(0.0, f64::max)
    }
}

fn centering(n: usize) -> DMatrix<f64> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64)
}

/// `L_t = I - (1/n) 1 1^T`.
pub fn laplacian_total(n: usize) -> Laplacian {
    Laplacian {
        matrix: centering(n),
        kind: None,
        cluster_labels: None,
    }
}

/// Groups sample indices by label; labels must cover `0..=max` without gaps.
fn cluster_members(labels: &[usize], n: usize) -> Result<Vec<Vec<usize>>> {
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            context: "cluster labels",
            expected: n,
            found: labels.len(),
        });
    }
    let count = labels.iter().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); count];
    for (i, &c) in labels.iter().enumerate() {
        members[c].push(i);
    }
    if let Some(empty) = members.iter().position(Vec::is_empty) {
        return Err(Error::EmptyCluster(empty));
    }
    Ok(members)
}

/// Sum over clusters of `(1/N_c) 1_c 1_c^T`.
fn cluster_averaging(members: &[Vec<usize>], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for group in members {
        let w = 1.0 / group.len() as f64;
        for &i in group {
            for &j in group {
                m[(i, j)] = w;
            }
        }
    }
    m
}

/// `L_w = I - sum_c (1/N_c) 1_c 1_c^T`.
pub fn laplacian_within(labels: &[usize], n: usize) -> Result<Laplacian> {
    let members = cluster_members(labels, n)?;
    Ok(Laplacian {
        matrix: DMatrix::identity(n, n) - cluster_averaging(&members, n),
        kind: Some(LaplacianSpec::WithinCluster { clusters: members.len() }),
        cluster_labels: Some(labels.to_vec()),
    })
}

/// `L_b = sum_c (1/N_c) 1_c 1_c^T - (1/n) 1 1^T`.
pub fn laplacian_between(labels: &[usize], n: usize) -> Result<Laplacian> {
    let members = cluster_members(labels, n)?;
    let matrix = cluster_averaging(&members, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    Ok(Laplacian {
        matrix,
        kind: Some(LaplacianSpec::BetweenCluster { clusters: members.len() }),
        cluster_labels: Some(labels.to_vec()),
    })
}

/// `L_pca = (1/n) L_t`.
pub fn laplacian_pca(n: usize) -> Laplacian {
    let mut lap = laplacian_total(n);
    if n > 0 {
        lap.matrix /= n as f64;
    }
    lap.kind = Some(LaplacianSpec::Pca);
    lap
}

/// Indices of the `k` nearest neighbors of every sample (self excluded,
/// ties broken by lower index).
pub fn nearest_neighbors(x: &DMatrix<f64>, k: usize) -> Vec<Vec<usize>> {
    let n = x.ncols();
    (0..n)
        .map(|i| {
            let xi = x.column(i);
            let mut others: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| ((x.column(j) - xi).norm_squared(), j))
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            others.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// `L = D - A` for the symmetric k-nearest-neighbor graph with
/// `A_ij = 1` if either sample is among the other's neighbors.
pub fn laplacian_knn(x: &DMatrix<f64>, k: usize) -> Result<Laplacian> {
    let n = x.ncols();
    check_graph_count("neighbor", k, n)?;
    let mut adjacency = DMatrix::zeros(n, n);
    for (i, nbrs) in nearest_neighbors(x, k).into_iter().enumerate() {
        for j in nbrs {
            adjacency[(i, j)] = 1.0;
            adjacency[(j, i)] = 1.0;
        }
    }
    let degree = DVector::from_iterator(n, adjacency.row_iter().map(|r| r.sum()));
    Ok(Laplacian {
        matrix: DMatrix::from_diagonal(&degree) - adjacency,
        kind: Some(LaplacianSpec::Knn { neighbors: k }),
        cluster_labels: None,
    })
}

/// Tolerance on `sum(alpha) = 1` accepted by [`laplacian_alpha`].
pub const ALPHA_SUM_TOL: f64 = 1e-8;

/// `L_alpha = diag(alpha) - alpha alpha^T` for a feasible dual solution.
pub fn laplacian_alpha(alpha: &DualSolution) -> Result<Laplacian> {
    laplacian_from_weights(&alpha.alpha)
}

/// [`laplacian_alpha`] on a bare weight vector.
pub fn laplacian_from_weights(alpha: &DVector<f64>) -> Result<Laplacian> {
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(Error::non_finite("alpha"));
    }
    let sum = alpha.sum();
    if (sum - 1.0).abs() > ALPHA_SUM_TOL {
        return Err(Error::InfeasibleAlpha(format!("weights sum to {sum}")));
    }
    if let Some(neg) = alpha.iter().find(|&&a| a < 0.0) {
        return Err(Error::InfeasibleAlpha(format!("negative weight {neg}")));
    }
    let matrix = DMatrix::from_diagonal(alpha) - alpha * alpha.transpose();
    Ok(Laplacian {
        matrix,
        kind: None,
        cluster_labels: None,
    })
}

/// `S = X L X^T` (`D x D`), or the identity for [`LaplacianSpec::Zero`].
pub fn scatter(x: &DMatrix<f64>, lap: &Laplacian) -> Result<DMatrix<f64>> {
    if lap.kind == Some(LaplacianSpec::Zero) {
        if lap.size() != x.ncols() {
            return Err(Error::DimensionMismatch {
                context: "scatter",
                expected: x.ncols(),
                found: lap.size(),
            });
        }
        return Ok(DMatrix::identity(x.nrows(), x.nrows()));
    }
    scatter_matrix(x, &lap.matrix)
}

/// `X L X^T` for an arbitrary `N x N` matrix, symmetrized.
pub fn scatter_matrix(x: &DMatrix<f64>, l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if l.nrows() != x.ncols() || l.ncols() != x.ncols() {
        return Err(Error::DimensionMismatch {
            context: "scatter",
            expected: x.ncols(),
            found: l.nrows(),
        });
    }
    Ok(symmetrize(&(x * l * x.transpose())))
}
