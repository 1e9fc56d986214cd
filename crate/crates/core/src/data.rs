//! Labeled tabular data: features in leading columns, class label last.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Multi-class samples, stored `D x N` with one sample per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: DMatrix<f64>,
    /// Index into `class_names` per sample.
    pub labels: Vec<usize>,
    /// Class names in order of first appearance.
    pub class_names: Vec<String>,
    /// Column names when the source had a header row.
    pub header: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, features: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != features.ncols() {
            return Err(Error::LengthMismatch { left: features.ncols(), right: labels.len() });
        }
        let mut class_names: Vec<String> = Vec::new();
        let ids = labels
            .iter()
            .map(|l| match class_names.iter().position(|c| c == l) {
                Some(i) => i,
                None => {
                    class_names.push(l.clone());
                    class_names.len() - 1
                }
            })
            .collect();
        Ok(Dataset { name: name.into(), features, labels: ids, class_names, header: None })
    }

    pub fn dim(&self) -> usize {
        self.features.nrows()
    }

    pub fn len(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == name)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Indices of samples in class `class`.
    pub fn members(&self, class: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == class).collect()
    }

    /// Columns at `indices`, in that order.
    pub fn columns(&self, indices: &[usize]) -> DMatrix<f64> {
        self.features.select_columns(indices)
    }

    /// Writes the data back out as `f1,...,fD,label` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(file)?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        if let Some(h) = &self.header {
            w.write_record(h)?;
        }
        for (j, col) in self.features.column_iter().enumerate() {
            let mut record: Vec<String> = col.iter().map(|v| v.to_string()).collect();
            record.push(self.class_names[self.labels[j]].clone());
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

/// Reads a dataset; its name is the file stem.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_csv(file, name)
}

/// Parses comma-separated rows. A first row is a header only when none of its
/// feature fields parse as numbers. Errors carry 1-based row and column.
pub fn parse_csv<R: Read>(reader: R, name: impl Into<String>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<(usize, csv::StringRecord)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(rows.len() + 1);
        rows.push((line, rec));
    }
    let Some((_, first)) = rows.first() else {
        return Err(Error::Parse { row: 1, column: 1, message: "no data rows".into() });
    };
    let width = first.len();
    if width < 2 {
        return Err(Error::Parse {
            row: 1,
            column: 1,
            message: "need at least one feature column and a label column".into(),
        });
    }
    let header = if first.iter().take(width - 1).all(|f| f.parse::<f64>().is_err()) {
        Some(first.iter().map(str::to_owned).collect::<Vec<_>>())
    } else {
        None
    };
    let data = &rows[usize::from(header.is_some())..];
    let dim = width - 1;
    let mut values = Vec::with_capacity(data.len() * dim);
    let mut labels = Vec::with_capacity(data.len());
    for (line, rec) in data {
        if rec.len() != width {
            return Err(Error::RaggedRows { row: *line, expected: width, found: rec.len() });
        }
        for (c, field) in rec.iter().take(dim).enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row: *line,
                column: c + 1,
                message: format!("{field:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { row: *line, column: c + 1, message: "value is not finite".into() });
            }
            values.push(v);
        }
        let label = &rec[dim];
        if label.is_empty() {
            return Err(Error::Parse { row: *line, column: width, message: "empty class label".into() });
        }
        labels.push(label.to_owned());
    }
    let features = DMatrix::from_column_slice(dim, labels.len(), &values);
    let mut ds = Dataset::new(name, features, labels)?;
    ds.header = header;
    Ok(ds)
}
