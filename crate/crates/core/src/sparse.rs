//! Compressed sparse row storage for feature matrices.

use serde::{Deserialize, Serialize};

use crate::label::{class_counts, Label};
use crate::{Error, Result};

/// A borrowed sparse row: parallel slices of strictly increasing column
/// indices and their values.
#[derive(Debug, Clone, Copy)]
pub struct SparseRow<'a> {
    pub indices: &'a [u32],
    pub values: &'a [f64],
}

impl<'a> SparseRow<'a> {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        let (idx, val) = (self.indices, self.values);
        idx.iter().zip(val.iter()).map(|(&c, &v)| (c as usize, v))
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn dot(&self, other: &SparseRow<'_>) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Exact squared Euclidean distance by merging the two index lists.
    pub fn squared_distance(&self, other: &SparseRow<'_>) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.indices.len() || j < other.indices.len() {
            let a = self.indices.get(i).copied().unwrap_or(u32::MAX);
            let b = other.indices.get(j).copied().unwrap_or(u32::MAX);
            let d = if a < b {
                i += 1;
                self.values[i - 1]
            } else if b < a {
                j += 1;
                -other.values[j - 1]
            } else {
                i += 1;
                j += 1;
                self.values[i - 1] - other.values[j - 1]
            };
            acc += d * d;
        }
        acc
    }

    /// Value at `col`, zero when absent.
    pub fn get(&self, col: usize) -> f64 {
        match self.indices.binary_search(&(col as u32)) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self, width: usize) -> Vec<f64> {
        let mut out = vec![0.0; width];
        for (c, v) in self.iter() {
            out[c] = v;
        }
        out
    }
}

/// CSR matrix of `f64` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn empty(n_cols: usize) -> Self {
        SparseMatrix {
            n_cols,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(column, value)` rows. Entries within a row may arrive in
    /// any order; duplicates are summed and explicit zeros dropped.
    pub fn from_rows<I, R>(n_cols: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = (usize, f64)>,
    {
        let mut m = SparseMatrix::empty(n_cols);
        let mut buf: Vec<(usize, f64)> = Vec::new();
        for row in rows {
            buf.clear();
            buf.extend(row);
            m.push_unsorted(&mut buf)?;
        }
        Ok(m)
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::WidthMismatch {
                expected: n_cols,
                got: bad.len(),
            });
        }
        Self::from_rows(
            n_cols,
            rows.iter().map(|r| r.iter().copied().enumerate()),
        )
    }

    fn push_unsorted(&mut self, buf: &mut [(usize, f64)]) -> Result<()> {
        buf.sort_unstable_by_key(|e| e.0);
        let mut last: Option<usize> = None;
        for &(c, v) in buf.iter() {
            if c >= self.n_cols {
                return Err(Error::WidthMismatch {
                    expected: self.n_cols,
                    got: c + 1,
                });
            }
            if last == Some(c) {
                *self.values.last_mut().expect("entry exists") += v;
            } else {
                self.indices.push(c as u32);
                self.values.push(v);
                last = Some(c);
            }
        }
        self.drop_trailing_zeros();
        self.indptr.push(self.indices.len());
        Ok(())
    }

    fn drop_trailing_zeros(&mut self) {
        let start = *self.indptr.last().expect("indptr never empty");
        let mut write = start;
        for read in start..self.indices.len() {
            if self.values[read] != 0.0 {
                self.indices[write] = self.indices[read];
                self.values[write] = self.values[read];
                write += 1;
            }
        }
        self.indices.truncate(write);
        self.values.truncate(write);
    }

    /// Appends a row whose indices are already strictly increasing.
    pub fn push_row(&mut self, row: SparseRow<'_>) {
        debug_assert!(row.indices.windows(2).all(|w| w[0] < w[1]));
        for (c, v) in row.iter() {
            if v != 0.0 {
                debug_assert!(c < self.n_cols);
                self.indices.push(c as u32);
                self.values.push(v);
            }
        }
        self.indptr.push(self.indices.len());
    }

    /// Appends a row from sorted `(column, value)` pairs.
    pub fn push_sorted(&mut self, entries: &[(u32, f64)]) {
        for &(c, v) in entries {
            if v != 0.0 {
                self.indices.push(c);
                self.values.push(v);
            }
        }
        self.indptr.push(self.indices.len());
    }

    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> SparseRow<'_> {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        SparseRow {
            indices: &self.indices[a..b],
            values: &self.values[a..b],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = SparseRow<'_>> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    /// New matrix holding the given rows in the given order.
    pub fn select(&self, rows: &[usize]) -> SparseMatrix {
        let mut m = SparseMatrix::empty(self.n_cols);
        for &r in rows {
            m.push_row(self.row(r));
        }
        m
    }

    pub fn append(&mut self, other: &SparseMatrix) {
        assert_eq!(self.n_cols, other.n_cols, "column count mismatch");
        for row in other.rows() {
            self.push_row(row);
        }
    }

    pub fn row_norms_squared(&self) -> Vec<f64> {
        self.rows().map(|r| r.squared_norm()).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.to_dense(self.n_cols)).collect()
    }

    pub fn min_value(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.n_rows() {
            for (c, v) in self.row(i).iter() {
                if best.map_or(true, |b| v < b.2) {
                    best = Some((i, c, v));
                }
            }
        }
        best
    }

    /// Transposed view as column lists of `(row, value)`.
    pub fn to_columns(&self) -> Vec<Vec<(u32, f64)>> {
        let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); self.n_cols];
        for i in 0..self.n_rows() {
            for (c, v) in self.row(i).iter() {
                cols[c].push((i as u32, v));
            }
        }
        cols
    }

    /// Writes `row col value` triplets, one per line.
    pub fn write_triplets<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# rows={} cols={} nnz={}", self.n_rows(), self.n_cols, self.nnz())?;
        for i in 0..self.n_rows() {
            for (c, v) in self.row(i).iter() {
                writeln!(w, "{i} {c} {v:e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse features plus the label of every row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub x: SparseMatrix,
    pub labels: Vec<Label>,
}

impl FeatureMatrix {
    pub fn new(x: SparseMatrix, labels: Vec<Label>) -> Result<Self> {
        if x.n_rows() != labels.len() {
            return Err(Error::LengthMismatch {
                left: x.n_rows(),
                right: labels.len(),
            });
        }
        Ok(FeatureMatrix { x, labels })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.x.n_cols()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        class_counts(&self.labels)
    }

    pub fn select(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            x: self.x.select(rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        }
    }

    pub fn rows_of(&self, label: Label) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.labels[i] == label).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m() -> SparseMatrix {
        SparseMatrix::from_rows(4, vec![vec![(2, 1.0), (0, 3.0)], vec![], vec![(1, 2.0), (1, 1.0), (3, 0.0)]]).unwrap()
    }

    #[test]
    fn builds_sorted_merged_rows() {
        let m = m();
        assert_eq!(m.n_rows(), 3);
        assert_eq!(m.row(0).indices, &[0, 2]);
        assert_eq!(m.row(1).nnz(), 0);
        assert_eq!(m.row(2).indices, &[1]);
        assert_eq!(m.row(2).values, &[3.0]);
    }

    #[test]
    fn rejects_out_of_range_columns() {
        assert!(SparseMatrix::from_rows(2, vec![vec![(2usize, 1.0)]]).is_err());
    }

    #[test]
    fn distances_and_dots() {
        let m = m();
        let (a, b) = (m.row(0), m.row(2));
        assert_eq!(a.dot(&b), 0.0);
        assert_eq!(a.squared_distance(&b), 9.0 + 1.0 + 9.0);
        assert_eq!(a.squared_distance(&a), 0.0);
        assert_eq!(a.squared_distance(&m.row(1)), 10.0);
    }

    #[test]
    fn select_and_columns() {
        let m = m();
        let s = m.select(&[2, 0]);
        assert_eq!(s.row(0).values, &[3.0]);
        let cols = m.to_columns();
        assert_eq!(cols[0], vec![(0, 3.0)]);
        assert_eq!(cols[1], vec![(2, 3.0)]);
    }
}
