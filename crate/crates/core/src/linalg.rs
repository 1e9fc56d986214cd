//! Dense linear-algebra kernels used by the trainer.
//!
//! Everything here is a pure function over [`nalgebra::DMatrix`]. Eigenpairs
//! are always returned with eigenvalues ascending; callers pick the end of
//! the spectrum they need with [`EigenPairs::select`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative asymmetry accepted by the symmetric solvers.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvalues at or below `POSITIVE_TOL * max(1, |lambda_max|)` do not count as positive.
pub const POSITIVE_TOL: f64 = 1e-9;

/// Default relative floor for [`spd_inv_sqrt`] and [`pseudo_inverse`].
pub const DEFAULT_REL_FLOOR: f64 = 1e-12;

/// Eigenvalues in ascending order with their eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

/// Which end of a spectrum to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumEnd {
    /// The smallest eigenvalues that are strictly positive.
    SmallestPositive,
    /// The largest eigenvalues.
    Largest,
}

/// Indices chosen by [`EigenPairs::select`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub indices: Vec<usize>,
    /// Number of indices that had to be taken from outside the requested set.
    pub padded: usize,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Picks `count` eigenpairs from the requested end of the spectrum.
    ///
    /// For [`SpectrumEnd::SmallestPositive`], if fewer than `count` eigenvalues
    /// clear the positivity threshold the remainder is filled with the
    /// non-positive eigenvalues closest to it, and `padded` says how many.
    pub fn select(&self, end: SpectrumEnd, count: usize) -> Selection {
        let n = self.len();
        let count = count.min(n);
        match end {
            SpectrumEnd::Largest => Selection {
                indices: (0..n).rev().take(count).collect(),
                padded: 0,
            },
            SpectrumEnd::SmallestPositive => {
                let threshold = positive_threshold(&self.values);
                let first_positive = (0..n)
                    .find(|&i| self.values[i] > threshold)
                    .unwrap_or(n);
                let mut indices: Vec<usize> = (first_positive..n).take(count).collect();
                let padded = count - indices.len();
                indices.extend((0..first_positive).rev().take(padded));
                Selection { indices, padded }
            }
        }
    }

    /// Columns of `vectors` at `indices`, in that order.
    pub fn columns(&self, indices: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.vectors.nrows(), indices.len(), |r, c| {
            self.vectors[(r, indices[c])]
        })
    }
}

/// Threshold above which an eigenvalue is treated as positive.
pub fn positive_threshold(values: &DVector<f64>) -> f64 {
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    POSITIVE_TOL * max.max(1.0)
}

pub(crate) fn ensure_finite(m: &DMatrix<f64>, context: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::non_finite(context))
    }
}

fn ensure_square(m: &DMatrix<f64>, context: &'static str) -> Result<()> {
    if m.nrows() == m.ncols() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected: m.nrows(),
            found: m.ncols(),
        })
    }
}

fn ensure_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let scale = m.iter().fold(0.0_f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut asymmetry = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            asymmetry = asymmetry.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if asymmetry > SYMMETRY_TOL * scale {
        Err(Error::NonSymmetric { asymmetry })
    } else {
        Ok(())
    }
}

/// Returns `(m + m^T) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Flips each column so that its largest-magnitude entry is positive.
pub(crate) fn fix_column_signs(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let mut best = 0.0_f64;
        let mut sign = 1.0;
        for &x in col.iter() {
            if x.abs() > best {
                best = x.abs();
                sign = x.signum();
            }
        }
        if sign < 0.0 {
            col.neg_mut();
        }
    }
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub fn sym_eig(a: &DMatrix<f64>) -> Result<EigenPairs> {
    ensure_square(a, "sym_eig")?;
    ensure_finite(a, "sym_eig input")?;
    ensure_symmetric(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(EigenPairs {
            values: DVector::zeros(0),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(symmetrize(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    fix_column_signs(&mut vectors);
    let pairs = EigenPairs { values, vectors };
    ensure_finite(&pairs.vectors, "sym_eig output")?;
    Ok(pairs)
}

/// Ridge used by the trainer when none is given: `1e-10 * trace(B) / n`.
pub fn default_ridge(b: &DMatrix<f64>) -> f64 {
    if b.nrows() == 0 {
        return 0.0;
    }
    1e-10 * b.trace().abs() / b.nrows() as f64
}

/// Solves `A q = v (B + ridge I) q` by Cholesky-whitening the right-hand side.
///
/// The eigenvectors are `(B + ridge I)`-orthonormal.
pub fn gen_eig(a: &DMatrix<f64>, b: &DMatrix<f64>, ridge: f64) -> Result<EigenPairs> {
    ensure_square(a, "gen_eig left matrix")?;
    ensure_square(b, "gen_eig right matrix")?;
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            context: "gen_eig",
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(Error::InvalidParameter(format!("ridge must be >= 0, got {ridge}")));
    }
    ensure_finite(a, "gen_eig left matrix")?;
    ensure_finite(b, "gen_eig right matrix")?;
    ensure_symmetric(a)?;
    ensure_symmetric(b)?;

    let n = a.nrows();
    let rhs = symmetrize(b) + DMatrix::identity(n, n) * ridge;
    let rhs_spectrum = sym_eig(&rhs)?;
    if n > 0 {
        let min = rhs_spectrum.values[0];
        let max = rhs_spectrum.values[n - 1];
        if max <= 0.0 || min <= 1e-14 * max {
            return Err(Error::SingularB { min, max });
        }
    }
    let chol = rhs
        .clone()
        .cholesky()
        .ok_or(Error::SingularB { min: rhs_spectrum.values.min(), max: rhs_spectrum.values.max() })?;
    let l = chol.l();
    let half = l
        .solve_lower_triangular(&symmetrize(a))
        .ok_or_else(|| Error::non_finite("gen_eig whitening"))?;
    let whitened = l
        .solve_lower_triangular(&half.transpose())
        .ok_or_else(|| Error::non_finite("gen_eig whitening"))?;
    let inner = sym_eig(&symmetrize(&whitened))?;
    let mut vectors = l
        .transpose()
        .solve_upper_triangular(&inner.vectors)
        .ok_or_else(|| Error::non_finite("gen_eig back-substitution"))?;
    fix_column_signs(&mut vectors);
    ensure_finite(&vectors, "gen_eig output")?;
    Ok(EigenPairs {
        values: inner.values,
        vectors,
    })
}

/// Inverse square root of a symmetric matrix after flooring its spectrum at
/// `rel_floor * lambda_max`.
pub fn spd_inv_sqrt(s: &DMatrix<f64>, rel_floor: f64) -> Result<DMatrix<f64>> {
    if !(rel_floor > 0.0) {
        return Err(Error::InvalidParameter(format!("rel_floor must be > 0, got {rel_floor}")));
    }
    let eig = sym_eig(s)?;
    let n = eig.len();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let max = eig.values[n - 1];
    if max <= 0.0 {
        return Err(Error::AllDegenerate { max });
    }
    let floor = rel_floor * max;
    let scales = eig.values.map(|v| 1.0 / v.max(floor).sqrt());
    let scaled = DMatrix::from_fn(n, n, |r, c| eig.vectors[(r, c)] * scales[c]);
    let out = symmetrize(&(scaled * eig.vectors.transpose()));
    ensure_finite(&out, "spd_inv_sqrt output")?;
    Ok(out)
}

/// Orthonormalizes the rows of a `d x D` matrix with a Householder QR of its
/// transpose. Row `i` of the result lies in the span of input rows `0..=i`
/// and has a positive inner product with input row `i`.
pub fn qr_orthonormalize_rows(q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    ensure_finite(q, "qr_orthonormalize_rows input")?;
    let (d, dim) = q.shape();
    if d > dim {
        return Err(Error::RankDeficient { rank: dim, expected: d });
    }
    if d == 0 {
        return Ok(q.clone());
    }
    let norm = q.norm();
    let qr = q.transpose().qr();
    let r = qr.r();
    let basis = qr.q();
    let tol = 1e-10 * norm;
    let rank = (0..d).filter(|&i| r[(i, i)].abs() > tol).count();
    if rank < d || norm == 0.0 {
        return Err(Error::RankDeficient { rank, expected: d });
    }
    let mut out = DMatrix::zeros(d, dim);
    for i in 0..d {
        let sign = r[(i, i)].signum();
        for j in 0..dim {
            out[(i, j)] = sign * basis[(j, i)];
        }
    }
    Ok(out)
}

/// Ridge regression of targets on samples: `Q = T^T X^T (X X^T + eta I)^-1`.
///
/// `x` is `D x N` with samples in columns, `t` is `N x d`; the result is `d x D`.
pub fn ridge_solve(x: &DMatrix<f64>, t: &DMatrix<f64>, eta: f64) -> Result<DMatrix<f64>> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter(format!("ridge constant must be > 0, got {eta}")));
    }
    if x.ncols() != t.nrows() {
        return Err(Error::DimensionMismatch {
            context: "ridge_solve",
            expected: x.ncols(),
            found: t.nrows(),
        });
    }
    ensure_finite(x, "ridge_solve samples")?;
    ensure_finite(t, "ridge_solve targets")?;
    let dim = x.nrows();
    let gram = symmetrize(&(x * x.transpose())) + DMatrix::identity(dim, dim) * eta;
    let rhs = x * t;
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::non_finite("ridge_solve normal matrix"))?;
    let solved = chol.solve(&rhs);
    let q = solved.transpose();
    ensure_finite(&q, "ridge_solve output")?;
    Ok(q)
}

/// Moore-Penrose pseudo-inverse; singular values at or below `rel_tol * sigma_max` are dropped.
pub fn pseudo_inverse(a: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    ensure_finite(a, "pseudo_inverse input")?;
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 || a.iter().all(|&v| v == 0.0) {
        return Ok(DMatrix::zeros(cols, rows));
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().ok_or_else(|| Error::non_finite("pseudo_inverse svd"))?;
    let v_t = svd.v_t.as_ref().ok_or_else(|| Error::non_finite("pseudo_inverse svd"))?;
    let sigma_max = svd.singular_values.max();
    let cutoff = rel_tol * sigma_max;
    let mut out = DMatrix::zeros(cols, rows);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            let vk = v_t.row(k).transpose();
            let uk = u.column(k);
            out += (vk * uk.transpose()) / s;
        }
    }
    ensure_finite(&out, "pseudo_inverse output")?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
        let a = random(rng, n, n);
        &a * a.transpose() + DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn sym_eig_identity_and_diagonal() {
        let eig = sym_eig(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(eig.values.as_slice(), &[1.0, 1.0, 1.0]);
        let gram = eig.vectors.transpose() * &eig.vectors;
        assert!((gram - DMatrix::identity(3, 3)).norm() < 1e-12);

        let eig = sym_eig(&DMatrix::from_diagonal(&DVector::from_vec(vec![9.0, 4.0]))).unwrap();
        assert_eq!(eig.values.as_slice(), &[4.0, 9.0]);
        assert!((eig.vectors.column(0)[1].abs() - 1.0).abs() < 1e-14);
        assert!((eig.vectors.column(1)[0].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sym_eig_random_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 12, 40] {
            let a = symmetrize(&random(&mut rng, n, n));
            let eig = sym_eig(&a).unwrap();
            let scale = a.norm().max(1.0);
            for k in 0..n {
                let v = eig.vectors.column(k);
                let res = (&a * v - v * eig.values[k]).norm();
                assert!(res <= 1e-8 * scale, "n={n} residual {res}");
                if k > 0 {
                    assert!(eig.values[k - 1] <= eig.values[k]);
                }
            }
            let recon = &eig.vectors * DMatrix::from_diagonal(&eig.values) * eig.vectors.transpose();
            assert!((recon - &a).norm() <= 1e-8 * a.norm().max(1e-300));
        }
    }

    #[test]
    fn sym_eig_rejects_bad_input() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(sym_eig(&a), Err(Error::NonSymmetric { .. })));
        let b = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, f64::NAN, 1.0]);
        assert!(matches!(sym_eig(&b), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn sign_convention_largest_entry_positive() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let eig = sym_eig(&a).unwrap();
        for col in eig.vectors.column_iter() {
            let (mut best, mut val) = (0.0_f64, 0.0);
            for &x in col.iter() {
                if x.abs() > best + 1e-15 {
                    best = x.abs();
                    val = x;
                }
            }
            assert!(val > 0.0);
        }
    }

    #[test]
    fn selection_smallest_positive_skips_null_space() {
        let values = DVector::from_vec(vec![-1e-15, 0.0, 0.5, 2.0, 3.0]);
        let pairs = EigenPairs {
            vectors: DMatrix::identity(5, 5),
            values,
        };
        let sel = pairs.select(SpectrumEnd::SmallestPositive, 2);
        assert_eq!(sel.indices, vec![2, 3]);
        assert_eq!(sel.padded, 0);
        let sel = pairs.select(SpectrumEnd::SmallestPositive, 4);
        assert_eq!(sel.indices, vec![2, 3, 4, 1]);
        assert_eq!(sel.padded, 1);
        let sel = pairs.select(SpectrumEnd::Largest, 2);
        assert_eq!(sel.indices, vec![4, 3]);
    }

    #[test]
    fn gen_eig_reduces_to_standard_problem() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = symmetrize(&random(&mut rng, 4, 4));
        let plain = sym_eig(&a).unwrap();
        let gen = gen_eig(&a, &DMatrix::identity(4, 4), 0.0).unwrap();
        assert!((plain.values - &gen.values).norm() < 1e-12);
    }

    #[test]
    fn gen_eig_equal_pair_gives_unit_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = random_spd(&mut rng, 5);
        let eig = gen_eig(&b, &b, 0.0).unwrap();
        for v in eig.values.iter() {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    // Characteristic polynomial det(A - v B) for 2x2 pairs, solved in closed form.
    #[test]
    fn gen_eig_matches_characteristic_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = symmetrize(&random(&mut rng, 2, 2));
            let b = random_spd(&mut rng, 2);
            let (a11, a12, a22) = (a[(0, 0)], a[(0, 1)], a[(1, 1)]);
            let (b11, b12, b22) = (b[(0, 0)], b[(0, 1)], b[(1, 1)]);
            let qa = b11 * b22 - b12 * b12;
            let qb = -(a11 * b22 + a22 * b11 - 2.0 * a12 * b12);
            let qc = a11 * a22 - a12 * a12;
            let disc = (qb * qb - 4.0 * qa * qc).sqrt();
            let mut roots = [(-qb - disc) / (2.0 * qa), (-qb + disc) / (2.0 * qa)];
            roots.sort_by(f64::total_cmp);
            let eig = gen_eig(&a, &b, 0.0).unwrap();
            for k in 0..2 {
                assert!((eig.values[k] - roots[k]).abs() < 1e-9, "{} vs {}", eig.values[k], roots[k]);
            }
        }
    }

    #[test]
    fn gen_eig_residual_and_normalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let a = symmetrize(&random(&mut rng, 4, 4));
            let b = random_spd(&mut rng, 4);
            let ridge = 1e-3;
            let bb = &b + DMatrix::identity(4, 4) * ridge;
            let eig = gen_eig(&a, &b, ridge).unwrap();
            for k in 0..4 {
                let q = eig.vectors.column(k);
                let res = (&a * q - &bb * q * eig.values[k]).norm();
                assert!(res <= 1e-7 * a.norm().max(1.0));
                let norm = (q.transpose() * &bb * q)[(0, 0)];
                assert!((norm - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gen_eig_singular_rhs() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(gen_eig(&a, &b, 0.0), Err(Error::SingularB { .. })));
        assert!(gen_eig(&a, &b, default_ridge(&b)).is_ok());
    }

    #[test]
    fn inv_sqrt_examples() {
        let id = spd_inv_sqrt(&DMatrix::identity(3, 3), DEFAULT_REL_FLOOR).unwrap();
        assert!((id - DMatrix::identity(3, 3)).norm() < 1e-14);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let m = spd_inv_sqrt(&d, DEFAULT_REL_FLOOR).unwrap();
        assert!((m[(0, 0)] - 0.5).abs() < 1e-14);
        assert!((m[(1, 1)] - 1.0 / 3.0).abs() < 1e-14);
        assert!(m[(0, 1)].abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = random_spd(&mut rng, 6);
        let m = spd_inv_sqrt(&s, DEFAULT_REL_FLOOR).unwrap();
        assert!((&m * &s * &m - DMatrix::identity(6, 6)).norm() < 1e-8);
        assert!((&m - m.transpose()).norm() == 0.0);
    }

    #[test]
    fn inv_sqrt_floors_small_eigenvalues() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0]));
        let m = spd_inv_sqrt(&s, 1e-4).unwrap();
        assert!((m[(0, 0)] - 100.0).abs() < 1e-9);
        assert!(matches!(
            spd_inv_sqrt(&DMatrix::zeros(2, 2), DEFAULT_REL_FLOOR),
            Err(Error::AllDegenerate { .. })
        ));
    }

    #[test]
    fn qr_examples() {
        let row = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        let q = qr_orthonormalize_rows(&row).unwrap();
        assert!((q[(0, 0)] - 0.6).abs() < 1e-15 && (q[(0, 1)] - 0.8).abs() < 1e-15);

        let ortho = DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, -1.0]);
        let q = qr_orthonormalize_rows(&ortho).unwrap();
        assert!((q - ortho).norm() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random(&mut rng, 3, 7);
        let q = qr_orthonormalize_rows(&a).unwrap();
        assert!((&q * q.transpose() - DMatrix::identity(3, 3)).norm() < 1e-10);
        // Same row space: projector onto the rows is unchanged.
        let proj_a = a.transpose() * (&a * a.transpose()).try_inverse().unwrap() * &a;
        let proj_q = q.transpose() * &q;
        assert!((proj_a - proj_q).norm() < 1e-8);
    }

    #[test]
    fn qr_rank_deficient() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(matches!(
            qr_orthonormalize_rows(&a),
            Err(Error::RankDeficient { rank: 1, expected: 2 })
        ));
    }

    #[test]
    fn ridge_examples() {
        let t = DMatrix::identity(3, 3);
        let q = ridge_solve(&DMatrix::identity(3, 3), &t, 1e-12).unwrap();
        assert!((q - DMatrix::identity(3, 3)).norm() < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = random(&mut rng, 4, 10);
        let zero = ridge_solve(&x, &DMatrix::zeros(10, 2), 1e-3).unwrap();
        assert_eq!(zero, DMatrix::zeros(2, 4));

        let t = random(&mut rng, 10, 2);
        let eta = 1e-3;
        let q = ridge_solve(&x, &t, eta).unwrap();
        let gram = &x * x.transpose() + DMatrix::identity(4, 4) * eta;
        for r in 0..2 {
            let qr = q.row(r).transpose();
            let res = &gram * qr - &x * t.column(r);
            assert!(res.norm() < 1e-8);
        }
        assert!(ridge_solve(&x, &t, 0.0).is_err());
    }

    #[test]
    fn pinv_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let p = pseudo_inverse(&a, DEFAULT_REL_FLOOR).unwrap();
        assert!((p - a.try_inverse().unwrap()).norm() < 1e-12);
        let z = pseudo_inverse(&DMatrix::zeros(2, 3), DEFAULT_REL_FLOOR).unwrap();
        assert_eq!(z, DMatrix::zeros(3, 2));

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random(&mut rng, 3, 2) * random(&mut rng, 2, 5);
        let p = pseudo_inverse(&a, DEFAULT_REL_FLOOR).unwrap();
        assert!((&a * &p * &a - &a).norm() < 1e-7);
        assert!((&p * &a * &p - &p).norm() < 1e-7);
        let ap = &a * &p;
        let pa = &p * &a;
        assert!((&ap - ap.transpose()).norm() < 1e-7);
        assert!((&pa - pa.transpose()).norm() < 1e-7);
    }
}
