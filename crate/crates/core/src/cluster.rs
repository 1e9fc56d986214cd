//! Seeded k-means over sample columns, used by the cluster-scatter graphs.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;
pub const SHIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    /// Cluster id in `[0, k)` per sample.
    pub labels: Vec<usize>,
    /// `k x D`, one centroid per row.
    pub centroids: DMatrix<f64>,
    pub inertia: f64,
    /// Inertia after each assignment step.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(x: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>, c: usize) -> f64 {
    (0..x.nrows())
        .map(|r| {
            let d = x[(r, i)] - centroids[(c, r)];
            d * d
        })
        .sum()
}

fn plus_plus_seeding(x: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (dim, n) = x.shape();
    let mut centroids = DMatrix::zeros(k, dim);
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from(&x.column(first).transpose());
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(x, i, &centroids, 0)).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random_range(0.0..total);
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                acc += w;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining points coincide with a centroid.
            rng.random_range(0..n)
        };
        centroids.row_mut(c).copy_from(&x.column(pick).transpose());
        for (i, slot) in nearest.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(x, i, &centroids, c));
        }
    }
    centroids
}

fn assign(x: &DMatrix<f64>, centroids: &DMatrix<f64>, labels: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (i, label) in labels.iter_mut().enumerate() {
        let (best, dist) = (0..centroids.nrows())
            .map(|c| (c, sq_dist(x, i, centroids, c)))
            .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        *label = best;
        inertia += dist;
    }
    inertia
}

/// Moves the centroid of every empty cluster onto the sample farthest from
/// its own centroid. Returns true if anything changed.
fn repair_empty(x: &DMatrix<f64>, centroids: &mut DMatrix<f64>, labels: &mut [usize]) -> bool {
    let k = centroids.nrows();
    let mut repaired = false;
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return repaired;
        };
        let far = (0..labels.len())
            .filter(|&i| counts[labels[i]] > 1)
            .map(|i| (i, sq_dist(x, i, centroids, labels[i])))
            .fold((usize::MAX, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc })
            .0;
        if far == usize::MAX {
            return repaired;
        }
        centroids.row_mut(empty).copy_from(&x.column(far).transpose());
        labels[far] = empty;
        repaired = true;
    }
}

/// Lloyd's algorithm from a k-means++ seeding drawn with `seed`.
///
/// `x` is `D x N` with samples in columns; requires `1 <= k <= N`.
pub fn kmeans(x: &DMatrix<f64>, k: usize, seed: u64) -> Result<ClusterAssignment> {
    let (dim, n) = x.shape();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "cluster count must be in [1, {n}], got {k}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::non_finite("kmeans input"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_seeding(x, k, &mut rng);
    let mut labels = vec![0usize; n];
    let mut inertia_trace = Vec::new();
    let mut iterations = 0;

    loop {
        let mut inertia = assign(x, &centroids, &mut labels);
        if repair_empty(x, &mut centroids, &mut labels) {
            inertia = (0..n).map(|i| sq_dist(x, i, &centroids, labels[i])).sum();
        }
        inertia_trace.push(inertia);
        if iterations == MAX_ITERATIONS {
            break;
        }
        iterations += 1;

        let mut sums = DMatrix::<f64>::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for r in 0..dim {
                sums[(l, r)] += x[(r, i)];
            }
        }
        let mut shift = 0.0_f64;
        for c in 0..k {
            let updated = DVector::<f64>::from_fn(dim, |r, _| sums[(c, r)] / counts[c] as f64);
            let moved = (0..dim)
                .map(|r| (updated[r] - centroids[(c, r)]).powi(2))
                .sum::<f64>()
                .sqrt();
            shift = shift.max(moved);
            centroids.row_mut(c).copy_from(&updated.transpose());
        }
        if shift < SHIFT_TOL {
            assign(x, &centroids, &mut labels);
            repair_empty(x, &mut centroids, &mut labels);
            inertia_trace.push((0..n).map(|i| sq_dist(x, i, &centroids, labels[i])).sum());
            break;
        }
    }
    let inertia = (0..n).map(|i| sq_dist(x, i, &centroids, labels[i])).sum();
    Ok(ClusterAssignment {
        labels,
        centroids,
        inertia,
        inertia_trace,
        iterations,
    })
}
