//! The trained artifact and its JSON document form.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::npt::NptState;
use crate::svdd::SphereDescription;
use crate::trainer::{Hyperparams, Kernel};

pub const FORMAT: &str = "gessvdd-model";
pub const FORMAT_VERSION: u32 = 1;

/// Values recorded at the start of one optimization round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Dual objective in the whitened subspace.
    pub objective: f64,
    /// `Tr(S_Q^-1 Q S_alpha Q^T)`; equals `objective` up to rounding.
    pub trace_ratio: f64,
    pub kkt_violation: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: Vec<IterationRecord>,
    pub final_objective: f64,
    pub final_kkt_violation: f64,
    /// Dual weights of the final description, one per training sample.
    #[serde(with = "crate::matrix_serde::vector")]
    pub training_alpha: DVector<f64>,
    /// Ridge added to `S_Q` for the final whitener.
    pub regularization: f64,
    pub cluster_labels: Option<Vec<usize>>,
    pub warnings: Vec<String>,
}

/// A fitted description: `z = W Q phi(x - mu)` is positive iff it falls in the sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GessvddModel {
    pub params: Hyperparams,
    /// Training mean in input space.
    #[serde(with = "crate::matrix_serde::vector")]
    pub mean: DVector<f64>,
    /// `Q`, `d x D'` with orthonormal rows; `D'` is the input or embedding dimension.
    #[serde(with = "crate::matrix_serde::matrix")]
    pub projection: DMatrix<f64>,
    /// `S_Q^(-1/2)`, `d x d`.
    #[serde(with = "crate::matrix_serde::matrix")]
    pub whitener: DMatrix<f64>,
    pub sphere: SphereDescription,
    pub kernel_state: Option<NptState>,
    pub diagnostics: Diagnostics,
}

#[derive(Serialize)]
struct DocumentRef<'a> {
    format: &'static str,
    version: u32,
    model: &'a GessvddModel,
}

#[derive(Deserialize)]
struct Document {
    format: String,
    version: u32,
    model: GessvddModel,
}

impl GessvddModel {
    /// Input feature count.
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn subspace_dim(&self) -> usize {
        self.projection.nrows()
    }

    /// Maps raw samples (columns) into the space `Q` acts on.
    pub fn to_feature_space(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "test samples",
                expected: self.input_dim(),
                found: x.nrows(),
            });
        }
        let mut centered = x.clone();
        for mut col in centered.column_iter_mut() {
            col -= &self.mean;
        }
        match &self.kernel_state {
            None => Ok(centered),
            Some(state) => {
                let mut out = DMatrix::zeros(state.retained_rank, x.ncols());
                for (j, col) in centered.column_iter().enumerate() {
                    out.set_column(j, &state.embed(&col.into_owned())?);
                }
                Ok(out)
            }
        }
    }

    /// Whitened subspace coordinates for raw samples (columns).
    pub fn embed(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let features = self.to_feature_space(x)?;
        crate::trainer::project(&self.projection, &self.whitener, &features)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&DocumentRef {
            format: FORMAT,
            version: FORMAT_VERSION,
            model: self,
        })
        .map_err(|e| Error::Model(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        if doc.format != FORMAT {
            return Err(Error::Model(format!("unexpected format {:?}", doc.format)));
        }
        if doc.version != FORMAT_VERSION {
            return Err(Error::Model(format!("unsupported version {}", doc.version)));
        }
        doc.model.check_shapes()?;
        Ok(doc.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn check_shapes(&self) -> Result<()> {
        let d = self.projection.nrows();
        let feature_dim = match (&self.kernel_state, self.params.kernel) {
            (None, Kernel::Linear) => self.input_dim(),
            (Some(state), Kernel::Rbf { .. }) => {
                if state.training_x.nrows() != self.input_dim() {
                    return Err(Error::Model("kernel training data does not match the mean".into()));
                }
                state.retained_rank
            }
            _ => return Err(Error::Model("kernel state does not match the kernel parameter".into())),
        };
        if self.projection.ncols() != feature_dim
            || self.whitener.shape() != (d, d)
            || self.sphere.center.len() != d
        {
            return Err(Error::Model("inconsistent matrix dimensions".into()));
        }
        Ok(())
    }
}
