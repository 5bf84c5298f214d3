//! Embedding-space containers and normalization.

use std::collections::HashMap;

use crate::error::{Diagnostic, Error, Result};
use crate::linalg::{dot, KahanSum};

/// Read-only view shared by absolute and relative spaces: a set of identified
/// sample vectors with a fixed dimension.
pub trait VectorSet {
    fn name(&self) -> &str;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn dim(&self) -> usize;
    fn ids(&self) -> &[String];
    fn vector(&self, i: usize) -> &[f64];
    fn index_of(&self, id: &str) -> Option<usize>;
}

/// A named N×d matrix of sample embeddings, one row per id.
///
/// Construction goes through [`EmbeddingSpace::from_rows`], which rejects
/// malformed input, so downstream code can assume unique ids and finite,
/// equally sized rows. Zero rows are allowed here and rejected only where the
/// math needs them nonzero (projection).
#[derive(Debug, Clone)]
pub struct EmbeddingSpace {
    name: String,
    ids: Vec<String>,
    data: Vec<f64>,
    dim: usize,
    index: HashMap<String, usize>,
}

/// Checks candidate space parts and reports every violation, not just the
/// first: duplicate ids, ragged rows, non-finite entries, emptiness.
pub fn validate_rows(ids: &[String], rows: &[Vec<f64>]) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if ids.is_empty() || rows.is_empty() {
        diags.push(Diagnostic::Empty);
        return diags;
    }
    let dim = rows[0].len();
    if dim == 0 {
        diags.push(Diagnostic::ZeroDimension);
    }
    if ids.len() != rows.len() {
        diags.push(Diagnostic::RaggedRow {
            row: ids.len().min(rows.len()),
            expected: ids.len(),
            actual: rows.len(),
        });
    }
    let mut seen: HashMap<&str, usize> = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if seen.insert(id.as_str(), i).is_some() {
            diags.push(Diagnostic::DuplicateId {
                id: id.clone(),
                row: i,
            });
        }
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            diags.push(Diagnostic::RaggedRow {
                row: i,
                expected: dim,
                actual: row.len(),
            });
            continue;
        }
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() {
                diags.push(Diagnostic::NonFinite { row: i, col: j });
            }
        }
    }
    diags
}

impl EmbeddingSpace {
    pub fn from_rows(
        name: impl Into<String>,
        ids: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let diags = validate_rows(&ids, &rows);
        if !diags.is_empty() {
            return Err(Error::InvalidSpace(diags));
        }
        let dim = rows[0].len();
        let mut data = Vec::with_capacity(ids.len() * dim);
        for row in &rows {
            data.extend_from_slice(row);
        }
        Ok(Self::from_flat_unchecked(name.into(), ids, data, dim))
    }

    /// Internal constructor for generators whose output is valid by
    /// construction (transform application, synthetic datasets).
    pub(crate) fn from_flat_unchecked(
        name: String,
        ids: Vec<String>,
        data: Vec<f64>,
        dim: usize,
    ) -> Self {
        debug_assert_eq!(data.len(), ids.len() * dim);
        let index = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        EmbeddingSpace {
            name,
            ids,
            data,
            dim,
            index,
        }
    }

    /// Re-checks the invariants of an already constructed space.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let mut seen: HashMap<&str, usize> = HashMap::with_capacity(self.ids.len());
        for (i, id) in self.ids.iter().enumerate() {
            if seen.insert(id.as_str(), i).is_some() {
                diags.push(Diagnostic::DuplicateId {
                    id: id.clone(),
                    row: i,
                });
            }
        }
        for (i, row) in self.rows().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    diags.push(Diagnostic::NonFinite { row: i, col: j });
                }
            }
        }
        diags
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Per-dimension mean subtraction. Returns the centered space and the
    /// subtracted mean vector.
    pub fn center(&self) -> (EmbeddingSpace, Vec<f64>) {
        let n = self.len() as f64;
        let mut sums = vec![KahanSum::new(); self.dim];
        for row in self.rows() {
            for (acc, v) in sums.iter_mut().zip(row) {
                acc.add(*v);
            }
        }
        let mean: Vec<f64> = sums.iter().map(|acc| acc.value() / n).collect();
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.rows() {
            for (v, m) in row.iter().zip(&mean) {
                data.push(v - m);
            }
        }
        let centered =
            Self::from_flat_unchecked(self.name.clone(), self.ids.clone(), data, self.dim);
        (centered, mean)
    }

    /// Euclidean norm of every row.
    pub fn l2_norms(&self) -> Vec<f64> {
        self.rows().map(|r| dot(r, r).sqrt()).collect()
    }

    /// The sub-space holding `ids`, in the order given.
    pub fn subspace(&self, ids: &[String]) -> Result<EmbeddingSpace> {
        let mut data = Vec::with_capacity(ids.len() * self.dim);
        for id in ids {
            let i = self
                .index_of(id)
                .ok_or_else(|| Error::UnknownId(id.clone()))?;
            data.extend_from_slice(self.row(i));
        }
        Ok(Self::from_flat_unchecked(
            self.name.clone(),
            ids.to_vec(),
            data,
            self.dim,
        ))
    }

    pub fn renamed(mut self, name: impl Into<String>) -> EmbeddingSpace {
        self.name = name.into();
        self
    }
}

impl VectorSet for EmbeddingSpace {
    fn name(&self) -> &str {
        &self.name
    }

    fn len(&self) -> usize {
        self.ids.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn ids(&self) -> &[String] {
        &self.ids
    }

    fn vector(&self, i: usize) -> &[f64] {
        self.row(i)
    }

    fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}
