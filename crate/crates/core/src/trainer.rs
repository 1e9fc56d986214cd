//! Alternating optimization of the projection and the data description.
//!
//! Each round whitens the projected data with `S_Q^(-1/2)`, solves the SVDD
//! dual in the subspace, turns the dual weights into a Laplacian `L_alpha`,
//! and moves the projection `Q` with one of three update rules. Rows of `Q`
//! are re-orthonormalized after every round.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{laplacian_alpha, laplacian_total, scatter, scatter_matrix, LaplacianSpec, DEFAULT_GRAPH_K};
use crate::linalg::{
    default_ridge, gen_eig, qr_orthonormalize_rows, ridge_solve, spd_inv_sqrt, sym_eig, symmetrize, SpectrumEnd,
    DEFAULT_REL_FLOOR,
};
use crate::model::{Diagnostics, GessvddModel, IterationRecord};
use crate::npt::NptState;
use crate::svdd::{classify, solve_dual, sphere_from_dual, Decision, DualSolution};

/// How `Q` moves each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// Step along the gradient of the trace-ratio criterion.
    Gradient,
    /// Generalized eigenvectors of `(S_alpha, S_x)`.
    Spectral,
    /// Generalized eigenvectors of `(L_alpha, L_x)` followed by ridge regression.
    SpectralRegression,
}

impl UpdateRule {
    pub const ALL: [UpdateRule; 3] = [UpdateRule::Gradient, UpdateRule::Spectral, UpdateRule::SpectralRegression];

    pub fn token(self) -> &'static str {
        match self {
            UpdateRule::Gradient => "gr",
            UpdateRule::Spectral => "s",
            UpdateRule::SpectralRegression => "sr",
        }
    }

    /// Whether `eta` has any effect on this rule.
    pub fn uses_eta(self) -> bool {
        !matches!(self, UpdateRule::Spectral)
    }
}

/// Whether the criterion is minimized or maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Min,
    Max,
}

impl Direction {
    pub fn token(self) -> &'static str {
        match self {
            Direction::Min => "min",
            Direction::Max => "max",
        }
    }

    fn spectrum_end(self) -> SpectrumEnd {
        match self {
            Direction::Min => SpectrumEnd::SmallestPositive,
            Direction::Max => SpectrumEnd::Largest,
        }
    }
}

/// Input representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    /// RBF kernel made explicit through an eigendecomposed embedding.
    Rbf { sigma: f64 },
}

impl Kernel {
    pub fn is_linear(self) -> bool {
        matches!(self, Kernel::Linear)
    }
}

/// A `graph-update-direction` triple such as `knn-gr-min`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub graph: LaplacianSpec,
    pub update: UpdateRule,
    pub direction: Direction,
}

pub const GRAPH_TOKENS: [&str; 6] = ["0", "i", "pca", "sw", "sb", "knn"];
pub const UPDATE_TOKENS: [&str; 3] = ["gr", "s", "sr"];
pub const DIRECTION_TOKENS: [&str; 2] = ["min", "max"];

impl Variant {
    pub fn new(graph: LaplacianSpec, update: UpdateRule, direction: Direction) -> Self {
        Variant { graph, update, direction }
    }

    /// Parses a variant, giving cluster graphs `clusters` clusters and the
    /// neighbor graph `neighbors` neighbors.
    pub fn parse_with(text: &str, clusters: usize, neighbors: usize) -> Result<Self> {
        let parts: Vec<&str> = text.trim().split('-').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidParameter(format!(
                "variant {text:?} must look like graph-update-direction, e.g. knn-gr-min"
            )));
        }
        let lower: Vec<String> = parts.iter().map(|p| p.to_ascii_lowercase()).collect();
        let graph = match lower[0].as_str() {
            "0" => LaplacianSpec::Zero,
            "i" => LaplacianSpec::Identity,
            "pca" => LaplacianSpec::Pca,
            "sw" => LaplacianSpec::WithinCluster { clusters },
            "sb" => LaplacianSpec::BetweenCluster { clusters },
            "knn" => LaplacianSpec::Knn { neighbors },
            other => return Err(unknown("graph", other, &GRAPH_TOKENS)),
        };
        let update = match lower[1].as_str() {
            "gr" => UpdateRule::Gradient,
            "s" => UpdateRule::Spectral,
            "sr" => UpdateRule::SpectralRegression,
            other => return Err(unknown("update", other, &UPDATE_TOKENS)),
        };
        let direction = match lower[2].as_str() {
            "min" => Direction::Min,
            "max" => Direction::Max,
            other => return Err(unknown("direction", other, &DIRECTION_TOKENS)),
        };
        Ok(Variant { graph, update, direction })
    }

    /// Every graph, update and direction combination with default graph sizes.
    pub fn all() -> Vec<Variant> {
        let mut out = Vec::new();
        for g in GRAPH_TOKENS {
            for u in UPDATE_TOKENS {
                for d in DIRECTION_TOKENS {
                    out.push(format!("{g}-{u}-{d}").parse().expect("static token"));
                }
            }
        }
        out
    }
}

fn unknown(what: &str, token: &str, valid: &[&str]) -> Error {
    Error::InvalidParameter(format!("unknown {what} token {token:?}; expected one of {}", valid.join(", ")))
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::parse_with(s, DEFAULT_GRAPH_K, DEFAULT_GRAPH_K)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.graph.token(), self.update.token(), self.direction.token())
    }
}

/// Everything `train` needs besides the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    #[serde(rename = "C")]
    pub c: f64,
    pub d: usize,
    pub eta: f64,
    pub iterations: usize,
    pub graph: LaplacianSpec,
    pub update: UpdateRule,
    pub direction: Direction,
    pub kernel: Kernel,
    pub seed: u64,
}

impl Hyperparams {
    /// Defaults: `C = 0.5`, `d = 2`, `eta = 0.1`, five rounds, linear, seed 0.
    pub fn new(variant: Variant) -> Self {
        Hyperparams {
            c: 0.5,
            d: 2,
            eta: 0.1,
            iterations: 5,
            graph: variant.graph,
            update: variant.update,
            direction: variant.direction,
            kernel: Kernel::Linear,
            seed: 0,
        }
    }

    pub fn variant(&self) -> Variant {
        Variant::new(self.graph, self.update, self.direction)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.c > 0.0) || !self.c.is_finite() {
            return bad(format!("C must be > 0, got {}", self.c));
        }
        if self.d == 0 {
            return bad("d must be >= 1".into());
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return bad(format!("eta must be > 0, got {}", self.eta));
        }
        if let Kernel::Rbf { sigma } = self.kernel {
            if !(sigma > 0.0) || !sigma.is_finite() {
                return bad(format!("sigma must be > 0, got {sigma}"));
            }
        }
        Ok(())
    }
}

/// Top-`d` principal directions of centered `x` as rows, variance-descending.
///
/// Missing directions are filled deterministically from the standard basis
/// and reported through `warnings`.
pub fn init_projection_pca(x: &DMatrix<f64>, d: usize, warnings: &mut Vec<String>) -> Result<DMatrix<f64>> {
    let (dim, n) = x.shape();
    if d == 0 || d > dim {
        return Err(Error::InvalidParameter(format!("d must be in [1, {dim}], got {d}")));
    }
    let cov = scatter_matrix(x, &laplacian_total(n).matrix)? / n.max(1) as f64;
    let eig = sym_eig(&cov)?;
    let max = eig.values.max();
    let rank = eig.values.iter().filter(|&&v| max > 0.0 && v > 1e-10 * max).count();
    let take = d.min(rank);
    let mut rows: Vec<DVector<f64>> = (0..take).map(|k| eig.vectors.column(dim - 1 - k).into_owned()).collect();
    if take < d {
        warnings.push(format!(
            "covariance rank {rank} is below d = {d}; padded the initial projection with {} complement directions",
            d - take
        ));
        for axis in 0..dim {
            if rows.len() == d {
                break;
            }
            let mut v = DVector::zeros(dim);
            v[axis] = 1.0;
            for _ in 0..2 {
                for r in &rows {
                    v -= r * r.dot(&v);
                }
            }
            let norm = v.norm();
            if norm > 1e-8 {
                rows.push(v / norm);
            }
        }
    }
    Ok(DMatrix::from_fn(d, dim, |r, c| rows[r][c]))
}

/// `z = W Q x` for each column of `x`.
pub fn project(q: &DMatrix<f64>, whitener: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if q.ncols() != x.nrows() {
        return Err(Error::DimensionMismatch {
            context: "projection input",
            expected: q.ncols(),
            found: x.nrows(),
        });
    }
    if whitener.nrows() != q.nrows() || whitener.ncols() != q.nrows() {
        return Err(Error::DimensionMismatch {
            context: "whitener",
            expected: q.nrows(),
            found: whitener.nrows(),
        });
    }
    Ok(whitener * (q * x))
}

/// Regularized `Q S_x Q^T` with its inverse square root and inverse.
#[derive(Debug, Clone)]
pub struct Whitening {
    pub s_q: DMatrix<f64>,
    pub whitener: DMatrix<f64>,
    pub s_inv: DMatrix<f64>,
    pub epsilon: f64,
}

/// `S_Q + eps I` with `eps = 1e-6 * max(trace / d, 1e-12)`, then its inverse square root.
pub fn whitening(q: &DMatrix<f64>, s_x: &DMatrix<f64>) -> Result<Whitening> {
    let d = q.nrows();
    let raw = symmetrize(&(q * s_x * q.transpose()));
    let epsilon = 1e-6 * (raw.trace() / d as f64).max(1e-12);
    let s_q = raw + DMatrix::identity(d, d) * epsilon;
    let whitener = spd_inv_sqrt(&s_q, DEFAULT_REL_FLOOR)?;
    let s_inv = symmetrize(&(&whitener * &whitener));
    Ok(Whitening { s_q, whitener, s_inv, epsilon })
}

/// The trace-ratio criterion `Tr((Q S_x Q^T)^-1 Q S_alpha Q^T)`.
pub fn criterion(q: &DMatrix<f64>, s_x: &DMatrix<f64>, s_alpha: &DMatrix<f64>) -> Result<f64> {
    let s_q = symmetrize(&(q * s_x * q.transpose()));
    let num = q * s_alpha * q.transpose();
    let chol = s_q
        .cholesky()
        .ok_or_else(|| Error::non_finite("criterion: Q S_x Q^T is not positive definite"))?;
    Ok(chol.solve(&num).trace())
}

/// Gradient of the criterion at `Q` for symmetric `S_x`, `S_alpha`.
pub fn criterion_gradient(
    q: &DMatrix<f64>,
    s_x: &DMatrix<f64>,
    s_inv: &DMatrix<f64>,
    s_alpha: &DMatrix<f64>,
) -> DMatrix<f64> {
    let a = s_inv * q * s_alpha;
    let first = &a * 2.0;
    let second = &a * q.transpose() * s_inv * q * s_x * 2.0;
    first - second
}

/// One gradient step: `Q - eta dL` for `Min`, `Q + eta dL` for `Max`.
pub fn update_gradient(
    q: &DMatrix<f64>,
    s_x: &DMatrix<f64>,
    s_inv: &DMatrix<f64>,
    s_alpha: &DMatrix<f64>,
    eta: f64,
    direction: Direction,
) -> Result<DMatrix<f64>> {
    let grad = criterion_gradient(q, s_x, s_inv, s_alpha);
    let step = match direction {
        Direction::Min => q - grad * eta,
        Direction::Max => q + grad * eta,
    };
    if step.iter().any(|v| !v.is_finite()) {
        return Err(Error::non_finite("gradient update"));
    }
    Ok(step)
}

fn unit_rows(m: DMatrix<f64>) -> DMatrix<f64> {
    let mut m = m;
    for mut row in m.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    m
}

/// Rows are the selected generalized eigenvectors of `S_alpha q = v S_x q`,
/// scaled to unit length. `padded` counts selections taken from outside the
/// strictly positive part of the spectrum.
pub fn update_spectral(
    s_x: &DMatrix<f64>,
    s_alpha: &DMatrix<f64>,
    d: usize,
    direction: Direction,
) -> Result<(DMatrix<f64>, usize)> {
    let eig = gen_eig(&symmetrize(s_alpha), &symmetrize(s_x), default_ridge(s_x))?;
    let sel = eig.select(direction.spectrum_end(), d);
    if sel.indices.len() < d {
        return Err(Error::RankDeficient { rank: sel.indices.len(), expected: d });
    }
    Ok((unit_rows(eig.columns(&sel.indices).transpose()), sel.padded))
}

/// Targets from `L_alpha t = v L_x t` regressed back onto the samples.
pub fn update_spectral_regression(
    x: &DMatrix<f64>,
    l_x: &DMatrix<f64>,
    l_alpha: &DMatrix<f64>,
    d: usize,
    eta: f64,
    direction: Direction,
) -> Result<(DMatrix<f64>, usize)> {
    let eig = gen_eig(&symmetrize(l_alpha), &symmetrize(l_x), default_ridge(l_x))?;
    let sel = eig.select(direction.spectrum_end(), d);
    if sel.indices.len() < d {
        return Err(Error::RankDeficient { rank: sel.indices.len(), expected: d });
    }
    let t = eig.columns(&sel.indices);
    Ok((ridge_solve(x, &t, eta)?, sel.padded))
}

/// Centered training data in the space the projection acts on.
struct Prepared {
    mean: DVector<f64>,
    features: DMatrix<f64>,
    kernel_state: Option<NptState>,
}

fn prepare(x_raw: &DMatrix<f64>, kernel: Kernel) -> Result<Prepared> {
    let n = x_raw.ncols();
    let mean = DVector::from_iterator(x_raw.nrows(), x_raw.row_iter().map(|r| r.sum() / n as f64));
    let mut centered = x_raw.clone();
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }
    match kernel {
        Kernel::Linear => Ok(Prepared { mean, features: centered, kernel_state: None }),
        Kernel::Rbf { sigma } => {
            let state = NptState::fit(&centered, sigma)?;
            Ok(Prepared { mean, features: state.basis.clone(), kernel_state: Some(state) })
        }
    }
}

fn check_dual(sol: &DualSolution, round: usize, warnings: &mut Vec<String>) {
    if !sol.converged {
        warnings.push(format!(
            "round {round}: dual solver hit its iteration cap (KKT violation {:e})",
            sol.kkt_violation
        ));
    }
}

/// Fits a model on the positive samples in the columns of `x_raw` (`D x N`).
pub fn train(x_raw: &DMatrix<f64>, params: &Hyperparams) -> Result<GessvddModel> {
    params.validate()?;
    let n = x_raw.ncols();
    if n < 2 {
        return Err(Error::TooFewSamples { class: "positive".into(), count: n });
    }
    if params.c * (n as f64) < 1.0 {
        return Err(Error::InfeasibleC { c: params.c, n });
    }
    if x_raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::non_finite("training data"));
    }

    let prepared = prepare(x_raw, params.kernel)?;
    let x = &prepared.features;
    if params.d > x.nrows() {
        return Err(Error::InvalidParameter(format!(
            "d = {} exceeds the feature dimension {}",
            params.d,
            x.nrows()
        )));
    }
    let mut warnings = Vec::new();
    let graph = params.graph.realize(x, params.seed)?;
    let s_x = scatter(x, &graph)?;
    let l_x = match params.graph {
        LaplacianSpec::Zero => DMatrix::identity(n, n),
        _ => graph.matrix.clone(),
    };
    let mut q = init_projection_pca(x, params.d, &mut warnings)?;
    let mut records = Vec::with_capacity(params.iterations);

    for round in 0..params.iterations {
        let w = whitening(&q, &s_x)?;
        let z = project(&q, &w.whitener, x)?;
        let sol = solve_dual(&z, params.c)?;
        check_dual(&sol, round, &mut warnings);
        let l_alpha = laplacian_alpha(&sol)?;
        let s_alpha = scatter_matrix(x, &l_alpha.matrix)?;
        let trace_ratio = (&w.s_inv * &q * &s_alpha * q.transpose()).trace();
        records.push(IterationRecord {
            iteration: round,
            objective: sol.objective,
            trace_ratio,
            kkt_violation: sol.kkt_violation,
            converged: sol.converged,
        });

        let (next, padded) = match params.update {
            UpdateRule::Gradient => {
                (update_gradient(&q, &s_x, &w.s_inv, &s_alpha, params.eta, params.direction)?, 0)
            }
            UpdateRule::Spectral => update_spectral(&s_x, &s_alpha, params.d, params.direction)?,
            UpdateRule::SpectralRegression => {
                update_spectral_regression(x, &l_x, &l_alpha.matrix, params.d, params.eta, params.direction)?
            }
        };
        if padded > 0 {
            warnings.push(format!(
                "round {round}: only {} strictly positive eigenvalues, {padded} direction(s) taken from the null space",
                params.d - padded
            ));
        }
        q = qr_orthonormalize_rows(&next).map_err(|e| match e {
            Error::NonFinite { context } => Error::non_finite(format!("round {round}: {context}")),
            other => other,
        })?;
    }

    let w = whitening(&q, &s_x)?;
    let z = project(&q, &w.whitener, x)?;
    let sol = solve_dual(&z, params.c)?;
    check_dual(&sol, params.iterations, &mut warnings);
    let sphere = sphere_from_dual(&z, &sol, params.c)?;
    if records.iter().any(|r| !r.objective.is_finite()) || !sol.objective.is_finite() {
        return Err(Error::non_finite("dual objective"));
    }

    Ok(GessvddModel {
        params: *params,
        mean: prepared.mean,
        projection: q,
        whitener: w.whitener,
        sphere,
        kernel_state: prepared.kernel_state,
        diagnostics: Diagnostics {
            iterations: records,
            final_objective: sol.objective,
            final_kkt_violation: sol.kkt_violation,
            training_alpha: sol.alpha,
            regularization: w.epsilon,
            cluster_labels: graph.cluster_labels,
            warnings,
        },
    })
}

/// Per-sample decisions for the columns of `x_test`.
pub fn predict(model: &GessvddModel, x_test: &DMatrix<f64>) -> Result<Vec<Decision>> {
    let z = model.embed(x_test)?;
    z.column_iter()
        .map(|col| classify(&col.into_owned(), &model.sphere))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    fn spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
        let a = random(rng, n, n);
        &a * a.transpose() + DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn variant_tokens_round_trip() {
        let v: Variant = "knn-gr-min".parse().unwrap();
        assert_eq!(v.graph, LaplacianSpec::Knn { neighbors: 5 });
        assert_eq!(v.to_string(), "knn-gr-min");
        assert_eq!(Variant::all().len(), 36);
        for v in Variant::all() {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
        let err = "knn-xx-min".parse::<Variant>().unwrap_err().to_string();
        assert!(err.contains("gr, s, sr"), "{err}");
        assert!("knn-gr".parse::<Variant>().is_err());
        assert!("foo-gr-min".parse::<Variant>().is_err());
    }

    #[test]
    fn pca_single_axis_and_full_rank() {
        let x = DMatrix::from_fn(3, 6, |r, c| if r == 0 { c as f64 - 2.5 } else { 0.0 });
        let mut warnings = Vec::new();
        let q = init_projection_pca(&x, 1, &mut warnings).unwrap();
        assert!((q[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!(warnings.is_empty());

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random(&mut rng, 4, 30);
        let q = init_projection_pca(&x, 4, &mut warnings).unwrap();
        assert!((&q * q.transpose() - DMatrix::<f64>::identity(4, 4)).amax() < 1e-10);
    }

    #[test]
    fn pca_variance_matches_top_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut x = random(&mut rng, 4, 50);
        let mean = DVector::from_iterator(4, x.row_iter().map(|r| r.mean()));
        for mut c in x.column_iter_mut() {
            c -= &mean;
        }
        let q = init_projection_pca(&x, 2, &mut Vec::new()).unwrap();
        let cov = &x * x.transpose() / 50.0;
        let projected = (&q * &cov * q.transpose()).trace();
        let eig = sym_eig(&cov).unwrap();
        assert!((projected - eig.values[3] - eig.values[2]).abs() < 1e-8);
    }

    #[test]
    fn pca_pads_rank_deficient_data() {
        let x = DMatrix::from_fn(3, 4, |r, c| if r == 1 { c as f64 } else { 0.0 });
        let mut warnings = Vec::new();
        let q = init_projection_pca(&x, 3, &mut warnings).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!((&q * q.transpose() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn projection_identities() {
        let eye = DMatrix::<f64>::identity(3, 3);
        let x = DMatrix::from_row_slice(3, 1, &[1.0, -2.0, 0.5]);
        assert_eq!(project(&eye, &eye, &x).unwrap(), x);
        assert_eq!(project(&eye, &eye, &DMatrix::zeros(3, 1)).unwrap(), DMatrix::zeros(3, 1));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = qr_orthonormalize_rows(&random(&mut rng, 2, 4)).unwrap();
        let s_x = spd(&mut rng, 4);
        let w = whitening(&q, &s_x).unwrap();
        let x = random(&mut rng, 4, 1);
        let z = project(&q, &w.whitener, &x).unwrap();
        let qx = &q * &x;
        let expected = (qx.transpose() * w.s_q.clone().try_inverse().unwrap() * &qx)[(0, 0)];
        assert!((z.norm_squared() - expected).abs() < 1e-10);
        assert!(project(&q, &w.whitener, &DMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn gradient_cancels_at_full_rank_and_for_zero_alpha() {
        let eye = DMatrix::<f64>::identity(3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s_alpha = spd(&mut rng, 3);
        let g = criterion_gradient(&eye, &eye, &eye, &s_alpha);
        assert!(g.amax() < 1e-12);

        let q = random(&mut rng, 2, 3);
        let s_x = spd(&mut rng, 3);
        let s_inv = (&q * &s_x * q.transpose()).try_inverse().unwrap();
        let stepped = update_gradient(&q, &s_x, &s_inv, &DMatrix::zeros(3, 3), 10.0, Direction::Min).unwrap();
        assert_eq!(stepped, q);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = random(&mut rng, 2, 5);
        let s_x = spd(&mut rng, 5);
        let b = random(&mut rng, 5, 3);
        let s_alpha = &b * b.transpose();
        let s_inv = (&q * &s_x * q.transpose()).try_inverse().unwrap();
        let g = criterion_gradient(&q, &s_x, &s_inv, &s_alpha);
        let h = 1e-6;
        for i in 0..2 {
            for j in 0..5 {
                let mut plus = q.clone();
                plus[(i, j)] += h;
                let mut minus = q.clone();
                minus[(i, j)] -= h;
                let fd = (criterion(&plus, &s_x, &s_alpha).unwrap() - criterion(&minus, &s_x, &s_alpha).unwrap())
                    / (2.0 * h);
                assert!((fd - g[(i, j)]).abs() <= 1e-4 * g[(i, j)].abs().max(1e-3), "{fd} vs {}", g[(i, j)]);
            }
        }
    }

    #[test]
    fn spectral_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = spd(&mut rng, 4);
        let (q, _) = update_spectral(&s, &s, 2, Direction::Min).unwrap();
        assert!((criterion(&q, &s, &s).unwrap() - 2.0).abs() < 1e-8);

        let s_alpha = spd(&mut rng, 4);
        let eye = DMatrix::<f64>::identity(4, 4);
        let (q, _) = update_spectral(&eye, &s_alpha, 1, Direction::Max).unwrap();
        let top = sym_eig(&s_alpha).unwrap();
        let v = top.vectors.column(3);
        assert!((q.row(0).transpose() - v).amax() < 1e-8);

        let s_x = spd(&mut rng, 4);
        let (q, _) = update_spectral(&s_x, &s_alpha, 2, Direction::Min).unwrap();
        let ge = gen_eig(&s_alpha, &s_x, default_ridge(&s_x)).unwrap();
        let expected = ge.values[0] + ge.values[1];
        assert!((criterion(&q, &s_x, &s_alpha).unwrap() - expected).abs() < 1e-8);
        for r in q.row_iter() {
            assert!((r.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_regression_with_identity_graph() {
        let alpha = DVector::from_vec(vec![0.4, 0.3, 0.2, 0.1]);
        let l_alpha = DMatrix::from_diagonal(&alpha) - &alpha * alpha.transpose();
        let eye = DMatrix::<f64>::identity(4, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random(&mut rng, 4, 4);
        let (q, padded) = update_spectral_regression(&x, &eye, &l_alpha, 2, 1e-10, Direction::Max).unwrap();
        assert_eq!(padded, 0);
        let eig = sym_eig(&l_alpha).unwrap();
        for (row, idx) in [3usize, 2].iter().enumerate() {
            let t = eig.vectors.column(*idx);
            let recovered = x.transpose() * q.row(row).transpose();
            assert!((recovered - t).amax() < 1e-6);
        }
        let (q, _) = update_spectral_regression(&x, &eye, &l_alpha, 3, 1e-10, Direction::Min).unwrap();
        for r in q.row_iter() {
            assert!(r.norm() > 1e-6);
        }
    }

    fn mirrored() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 2.0, -2.0])
    }

    #[test]
    fn two_mirrored_points() {
        for spec in ["0-gr-min", "i-s-max", "pca-sr-min", "knn-gr-max"] {
            let variant = Variant::parse_with(spec, 1, 1).unwrap();
            let mut p = Hyperparams::new(variant);
            p.d = 1;
            p.c = 1.0;
            let m = train(&mirrored(), &p).unwrap();
            let a = &m.diagnostics.training_alpha;
            assert!((a[0] - 0.5).abs() < 1e-9 && (a[1] - 0.5).abs() < 1e-9, "{spec}");
            let z = m.embed(&mirrored()).unwrap();
            let half = (z[(0, 0)] - z[(0, 1)]).abs() / 2.0;
            assert!((m.sphere.radius - half).abs() < 1e-9, "{spec}");
        }
    }

    #[test]
    fn orthonormal_rows_and_finite_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = DMatrix::from_fn(7, 49, |_, _| rng.random_range(0.0..5.0));
        let mut p = Hyperparams::new("knn-gr-min".parse().unwrap());
        p.d = 3;
        p.c = 0.2;
        let m = train(&x, &p).unwrap();
        let qq = &m.projection * m.projection.transpose();
        assert!((qq - DMatrix::<f64>::identity(3, 3)).amax() < 1e-8);
        assert!(m.sphere.radius > 0.0);
        assert_eq!(m.diagnostics.iterations.len(), 5);
        for r in &m.diagnostics.iterations {
            assert!(r.objective.is_finite());
            assert!((r.objective - r.trace_ratio).abs() < 1e-8 * r.objective.abs().max(1.0));
        }
        let again = train(&x, &p).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn structural_special_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random(&mut rng, 3, 10);
        let q = random(&mut rng, 2, 3);
        let zero = LaplacianSpec::Zero.realize(&x, 0).unwrap();
        let s0 = scatter(&x, &zero).unwrap();
        assert!((&q * s0 * q.transpose() - &q * q.transpose()).amax() < 1e-12);
        let id = LaplacianSpec::Identity.realize(&x, 0).unwrap();
        let si = scatter(&x, &id).unwrap();
        assert!((&q * si * q.transpose() - &q * &x * x.transpose() * q.transpose()).amax() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = DMatrix::from_fn(2, 4, |r, c| (r + c) as f64);
        let mut p = Hyperparams::new("0-gr-min".parse().unwrap());
        p.c = 0.1;
        assert!(matches!(train(&x, &p), Err(Error::InfeasibleC { .. })));
        p.c = 0.5;
        p.d = 3;
        assert!(train(&x, &p).is_err());
        p.d = 1;
        p.eta = 0.0;
        assert!(train(&x, &p).is_err());
        p.eta = 1.0;
        assert!(train(&DMatrix::zeros(2, 1), &p).is_err());
    }

    #[test]
    fn rbf_training_sample_maps_to_its_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = random(&mut rng, 3, 20);
        let mut p = Hyperparams::new("pca-gr-min".parse().unwrap());
        p.kernel = Kernel::Rbf { sigma: 1.0 };
        p.d = 3;
        p.c = 0.2;
        let m = train(&x, &p).unwrap();
        let state = m.kernel_state.as_ref().unwrap();
        let emb = m.to_feature_space(&x).unwrap();
        assert!((emb - &state.basis).amax() < 1e-6);
        let decisions = predict(&m, &x).unwrap();
        for (i, dec) in decisions.iter().enumerate() {
            if m.diagnostics.training_alpha[i] < 1e-9 {
                assert!(dec.score > -1e-6 * m.sphere.radius_squared);
            }
        }
    }
}
