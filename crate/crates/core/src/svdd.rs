//! The SVDD dual in a projected space, the resulting hypersphere and the
//! decision rule.
//!
//! The dual is
//!
//! ```text
//! max  sum_i a_i z_i'z_i - sum_ij a_i a_j z_i'z_j
//! s.t. sum_i a_i = 1,  0 <= a_i <= C
//! ```
//!
//! and is solved by pairwise coordinate ascent that keeps the equality
//! constraint exact: each step moves weight from the sample with the lowest
//! gradient to the one with the highest, subject to the box.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopping tolerance on the maximal KKT violation.
pub const KKT_TOL: f64 = 1e-6;

/// Position of a training sample relative to the description.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleCategory {
    /// `alpha = 0`, strictly inside.
    Interior,
    /// `0 < alpha < C`, on the sphere.
    Boundary,
    /// `alpha = C`, allowed outside.
    Outlier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    #[serde(with = "crate::matrix_serde::vector")]
    pub alpha: DVector<f64>,
    pub objective: f64,
    pub categories: Vec<SampleCategory>,
    /// False if the iteration cap was hit before the KKT tolerance.
    pub converged: bool,
    pub iterations: usize,
    /// Maximal KKT violation at the returned point.
    pub kkt_violation: f64,
}

impl DualSolution {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

/// Tolerance separating the three sample categories.
pub fn support_tolerance(c: f64) -> f64 {
    (1e-6 * c).max(1e-8)
}

pub fn categorize(alpha: f64, c: f64) -> SampleCategory {
    let eps = support_tolerance(c);
    if alpha <= eps {
        SampleCategory::Interior
    } else if alpha >= c - eps {
        SampleCategory::Outlier
    } else {
        SampleCategory::Boundary
    }
}

/// Dual objective for a Gram matrix `k = Z^T Z`.
pub fn dual_objective(k: &DMatrix<f64>, alpha: &DVector<f64>) -> f64 {
    let linear: f64 = (0..alpha.len()).map(|i| alpha[i] * k[(i, i)]).sum();
    linear - (alpha.transpose() * k * alpha)[(0, 0)]
}

/// Largest gap between the gradient of a coordinate that may still grow and
/// one that may still shrink. Zero (or negative) at a KKT point.
pub fn kkt_violation(k: &DMatrix<f64>, alpha: &DVector<f64>, c: f64) -> f64 {
    let ka = k * alpha;
    let grad = DVector::from_fn(alpha.len(), |i, _| k[(i, i)] - 2.0 * ka[i]);
    let (up, down) = extreme_pair(&grad, alpha, c);
    match (up, down) {
        (Some(j), Some(i)) => (grad[j] - grad[i]).max(0.0),
        _ => 0.0,
    }
}

/// `(argmax over alpha_j < C of g_j, argmin over alpha_i > 0 of g_i)`.
fn extreme_pair(grad: &DVector<f64>, alpha: &DVector<f64>, c: f64) -> (Option<usize>, Option<usize>) {
    let mut up: Option<usize> = None;
    let mut down: Option<usize> = None;
    for i in 0..alpha.len() {
        if alpha[i] < c && up.is_none_or(|j| grad[i] > grad[j]) {
            up = Some(i);
        }
        if alpha[i] > 0.0 && down.is_none_or(|j| grad[i] < grad[j]) {
            down = Some(i);
        }
    }
    (up, down)
}

/// Solves the dual for projected samples `z` (`d x N`, samples in columns).
pub fn solve_dual(z: &DMatrix<f64>, c: f64) -> Result<DualSolution> {
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::non_finite("projected samples"));
    }
    let gram = z.transpose() * z;
    solve_dual_gram(&gram, c)
}

/// [`solve_dual`] on a precomputed Gram matrix.
pub fn solve_dual_gram(k: &DMatrix<f64>, c: f64) -> Result<DualSolution> {
    let n = k.nrows();
    if n == 0 {
        return Err(Error::InvalidParameter("dual needs at least one sample".into()));
    }
    if k.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "dual Gram matrix",
            expected: n,
            found: k.ncols(),
        });
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("C must be > 0, got {c}")));
    }
    if (n as f64) * c < 1.0 {
        return Err(Error::InfeasibleC { c, n });
    }
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::non_finite("dual Gram matrix"));
    }

    let mut alpha = DVector::from_element(n, 1.0 / n as f64);
    let mut ka = k * &alpha;
    let mut grad = DVector::zeros(n);
    let max_iter = 10 * n * n;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        for i in 0..n {
            grad[i] = k[(i, i)] - 2.0 * ka[i];
        }
        let (Some(up), Some(down)) = extreme_pair(&grad, &alpha, c) else {
            converged = true;
            break;
        };
        let gap = grad[up] - grad[down];
        if gap < KKT_TOL || up == down {
            converged = true;
            break;
        }
        let curvature = k[(up, up)] + k[(down, down)] - 2.0 * k[(up, down)];
        let room = alpha[down].min(c - alpha[up]);
        let step = if curvature > f64::EPSILON * (k[(up, up)] + k[(down, down)]).abs() {
            (gap / (2.0 * curvature)).min(room)
        } else {
            room
        };
        if step <= 0.0 {
            converged = true;
            break;
        }
        if step == alpha[down] {
            alpha[down] = 0.0;
        } else {
            alpha[down] = (alpha[down] - step).max(0.0);
        }
        if step == c - alpha[up] {
            alpha[up] = c;
        } else {
            alpha[up] = (alpha[up] + step).min(c);
        }
        for r in 0..n {
            ka[r] += step * (k[(r, up)] - k[(r, down)]);
        }
        iterations += 1;
    }

    let objective = dual_objective(k, &alpha);
    let violation = kkt_violation(k, &alpha, c);
    let categories = alpha.iter().map(|&a| categorize(a, c)).collect();
    Ok(DualSolution {
        alpha,
        objective,
        categories,
        converged: converged || violation < KKT_TOL,
        iterations,
        kkt_violation: violation,
    })
}

/// Center and radius of the description in the projected space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereDescription {
    #[serde(with = "crate::matrix_serde::vector")]
    pub center: DVector<f64>,
    pub radius: f64,
    /// Stored separately so that the defining sample scores exactly zero.
    pub radius_squared: f64,
    /// Sample whose distance to the center defines the radius.
    pub support_index: usize,
}

/// Squared Euclidean distance with a fixed summation order.
pub fn squared_distance<'a>(a: impl IntoIterator<Item = &'a f64>, b: &DVector<f64>) -> f64 {
    a.into_iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Picks the sample that defines the radius.
///
/// Prefers a boundary sample; otherwise the non-outlier with the largest
/// weight; otherwise the weighted sample farthest from the center.
pub fn support_sample(z: &DMatrix<f64>, sol: &DualSolution, c: f64, center: &DVector<f64>) -> usize {
    if let Some(s) = sol.categories.iter().position(|&cat| cat == SampleCategory::Boundary) {
        return s;
    }
    let eps = support_tolerance(c);
    let below_cap = (0..sol.len())
        .filter(|&i| sol.alpha[i] < c - eps)
        .max_by(|&i, &j| sol.alpha[i].total_cmp(&sol.alpha[j]).then(j.cmp(&i)));
    if let Some(s) = below_cap {
        return s;
    }
    (0..sol.len())
        .filter(|&i| sol.alpha[i] > 0.0)
        .map(|i| (i, squared_distance(z.column(i).iter(), center)))
        .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc })
        .0
}

/// Builds the hypersphere from a dual solution: `u = Z alpha`, `R = |z_s - u|`.
pub fn sphere_from_dual(z: &DMatrix<f64>, sol: &DualSolution, c: f64) -> Result<SphereDescription> {
    if z.ncols() != sol.len() {
        return Err(Error::DimensionMismatch {
            context: "sphere_from_dual",
            expected: z.ncols(),
            found: sol.len(),
        });
    }
    let center = z * &sol.alpha;
    let support_index = support_sample(z, sol, c, &center);
    let radius_squared = squared_distance(z.column(support_index).iter(), &center);
    Ok(SphereDescription {
        radius: radius_squared.sqrt(),
        radius_squared,
        center,
        support_index,
    })
}

/// `R^2` via `s's - 2 s'u + u'u` for support sample `s`.
pub fn radius_squared_expanded(z: &DMatrix<f64>, sphere: &SphereDescription) -> f64 {
    let s = z.column(sphere.support_index);
    s.dot(&s) - 2.0 * s.dot(&sphere.center) + sphere.center.dot(&sphere.center)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub positive: bool,
    /// `R^2 - |z - u|^2`, positive inside.
    pub score: f64,
}

/// Positive iff `|z - u|^2 <= R^2` (the boundary counts as inside).
pub fn classify(z: &DVector<f64>, sphere: &SphereDescription) -> Result<Decision> {
    if z.len() != sphere.center.len() {
        return Err(Error::DimensionMismatch {
            context: "classify",
            expected: sphere.center.len(),
            found: z.len(),
        });
    }
    let dist = squared_distance(z.iter(), &sphere.center);
    Ok(Decision {
        positive: dist <= sphere.radius_squared,
        score: sphere.radius_squared - dist,
    })
}
