use serde::{Deserialize, Serialize};

use super::bits::BitSequence;
use crate::error::{Error, Result};

/// Sparse GF(2) matrix in compressed-row form with sorted supports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseBitMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparseBitMatrix {
    /// Builds a matrix from per-row column supports. Supports are sorted;
    /// duplicate or out-of-range indices are rejected.
    pub fn from_rows(cols: usize, supports: Vec<Vec<usize>>) -> Result<Self> {
        let rows = supports.len();
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::with_capacity(supports.iter().map(Vec::len).sum());
        row_ptr.push(0);
        for (r, mut s) in supports.into_iter().enumerate() {
            s.sort_unstable();
            for w in s.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::InfeasibleCode(format!("row {r} repeats column {}", w[0])));
                }
            }
            if let Some(&last) = s.last() {
                if last >= cols {
                    return Err(Error::DimensionMismatch {
                        expected: cols,
                        actual: last + 1,
                    });
                }
            }
            col_idx.extend(s);
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
        }
    }

    pub fn empty(cols: usize) -> Self {
        Self {
            rows: 0,
            cols,
            row_ptr: vec![0],
            col_idx: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    pub fn row_supports(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row(r).binary_search(&c).is_ok()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut col_idx = vec![0; self.col_idx.len()];
        for r in 0..self.rows {
            for &c in self.row(r) {
                col_idx[fill[c]] = r;
                fill[c] += 1;
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            row_ptr: counts,
            col_idx,
        }
    }

    /// `[self; other]`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.cols,
            });
        }
        let offset = self.col_idx.len();
        let mut row_ptr = self.row_ptr.clone();
        row_ptr.extend(other.row_ptr[1..].iter().map(|p| p + offset));
        let mut col_idx = self.col_idx.clone();
        col_idx.extend_from_slice(&other.col_idx);
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            row_ptr,
            col_idx,
        })
    }

    /// Submatrix made of the listed rows, in the listed order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let supports = rows.iter().map(|&r| self.row(r).to_vec()).collect();
        Self::from_rows(self.cols, supports).expect("rows of a valid matrix")
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut out = vec![vec![0u8; self.cols]; self.rows];
        for (r, row) in out.iter_mut().enumerate() {
            for &c in self.row(r) {
                row[c] = 1;
            }
        }
        out
    }
}

/// `mat * vec` over GF(2).
pub fn matvec_gf2(mat: &SparseBitMatrix, vec: &BitSequence) -> Result<BitSequence> {
    if vec.len() != mat.cols {
        return Err(Error::DimensionMismatch {
            expected: mat.cols,
            actual: vec.len(),
        });
    }
    Ok(BitSequence::from_bools(mat.row_supports().map(|s| vec.parity_at(s))))
}
