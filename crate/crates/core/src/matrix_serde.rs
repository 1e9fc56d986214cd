//! Row-major `{rows, cols, entries}` encoding for dense matrices and vectors.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct Dense {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl Dense {
    fn check<E: serde::de::Error>(&self) -> Result<(), E> {
        if self.rows.checked_mul(self.cols) != Some(self.entries.len()) {
            return Err(E::custom(format!(
                "declared {}x{} but found {} entries",
                self.rows,
                self.cols,
                self.entries.len()
            )));
        }
        if self.entries.iter().any(|v| !v.is_finite()) {
            return Err(E::custom("non-finite matrix entry"));
        }
        Ok(())
    }
}

pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        Dense {
            rows: m.nrows(),
            cols: m.ncols(),
            entries: m.transpose().as_slice().to_vec(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let dense = Dense::deserialize(d)?;
        dense.check()?;
        Ok(DMatrix::from_row_slice(dense.rows, dense.cols, &dense.entries))
    }
}

pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        Dense {
            rows: v.len(),
            cols: 1,
            entries: v.as_slice().to_vec(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        let dense = Dense::deserialize(d)?;
        dense.check()?;
        if dense.cols != 1 {
            return Err(D::Error::custom(format!("expected a column vector, got {} columns", dense.cols)));
        }
        Ok(DVector::from_vec(dense.entries))
    }
}
