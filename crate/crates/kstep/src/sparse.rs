//! CSR sparse matrices, the matrix-vector product with its multiply
//! counter, and the synthetic diagonal test operators.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square sparse matrix in compressed-sparse-row form.
///
/// Immutable after construction: rows are sorted by column index and hold
/// no duplicate entries, so it can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<R> {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<R>,
}

/// Counts matrix-vector products: exactly one tick per [`SparseMatrix::matvec`].
///
/// This is the x-axis of every convergence trace, so it is owned by one
/// solve at a time and never reset mid-solve.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct MatvecCounter(u64);

impl MatvecCounter {
    pub fn new() -> Self {
        MatvecCounter(0)
    }

    pub fn count(&self) -> u64 {
        self.0
    }

    pub(crate) fn tick(&mut self) {
        self.0 += 1;
    }
}

impl<R: Real> SparseMatrix<R> {
    /// Assemble from (row, col, value) triplets. Duplicate coordinates are
    /// summed; out-of-range indices are rejected.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, R)]) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= n || c >= n {
                return Err(Error::InvalidConfig(format!(
                    "triplet index ({r}, {c}) out of range for a {n}x{n} matrix"
                )));
            }
        }
        let mut sorted: Vec<(usize, usize, R)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut dedup: Vec<(usize, usize, R)> = Vec::with_capacity(sorted.len());
        for &(r, c, v) in &sorted {
            if let Some(last) = dedup.last_mut() {
                if last.0 == r && last.1 == c {
                    last.2 = last.2 + v;
                    continue;
                }
            }
            dedup.push((r, c, v));
        }

        let mut row_offsets = vec![0usize; n + 1];
        for &(r, _, _) in &dedup {
            row_offsets[r + 1] += 1;
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        let col_indices = dedup.iter().map(|t| t.1).collect();
        let values = dedup.iter().map(|t| t.2).collect();
        Ok(SparseMatrix {
            n,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![R::one(); n])
    }

    /// Diagonal matrix stored as CSR with one entry per row.
    pub fn from_diagonal(diag: &[R]) -> Self {
        let n = diag.len();
        SparseMatrix {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Average entries per row, the sparsity measure used by [`crate::diagnostics::cost_estimate`].
    pub fn avg_row_nnz(&self) -> u64 {
        if self.n == 0 {
            0
        } else {
            (self.nnz() as u64).div_ceil(self.n as u64)
        }
    }

    /// Iterate stored entries as (row, col, value).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, R)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_offsets[r]..self.row_offsets[r + 1])
                .map(move |k| (r, self.col_indices[k], self.values[k]))
        })
    }

    /// `A x`, ticking the counter once.
    pub fn matvec(&self, x: &[R], counter: &mut MatvecCounter) -> Result<Vec<R>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                n: self.n,
                len: x.len(),
            });
        }
        counter.tick();
        let mut y = vec![R::zero(); self.n];
        for r in 0..self.n {
            let mut acc = R::zero();
            for k in self.row_offsets[r]..self.row_offsets[r + 1] {
                acc = acc + self.values[k] * x[self.col_indices[k]];
            }
            y[r] = acc;
        }
        Ok(y)
    }
}

/// `diag(n, -(n-1), n-2, ..., 2, -1)`: spectral radius `n` at a positive
/// eigenvalue, all magnitudes distinct.
pub fn alternating_diag<R: Real>(n: usize) -> SparseMatrix<R> {
    assert!(n >= 1, "alternating_diag requires n >= 1");
    let diag: Vec<R> = (0..n)
        .map(|i| {
            let mag = R::from_usize(n - i).unwrap();
            if i % 2 == 0 {
                mag
            } else {
                -mag
            }
        })
        .collect();
    SparseMatrix::from_diagonal(&diag)
}

/// Which of the two index-ratio diagonals to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IotaVariant {
    /// `a_ii = n / i`, i = 1..n (largest eigenvalue n).
    NOverI,
    /// `a_ii = i / n`, i = 1..n (largest eigenvalue 1, second 1 - 1/n).
    IOverN,
}

/// Diagonal matrices `diag(n/i)` or `diag(i/n)`, i = 1..n.
pub fn inverse_iota_diag<R: Real>(n: usize, variant: IotaVariant) -> SparseMatrix<R> {
    assert!(n >= 1, "inverse_iota_diag requires n >= 1");
    let nf = R::from_usize(n).unwrap();
    let diag: Vec<R> = (1..=n)
        .map(|i| {
            let fi = R::from_usize(i).unwrap();
            match variant {
                IotaVariant::NOverI => nf / fi,
                IotaVariant::IOverN => fi / nf,
            }
        })
        .collect();
    SparseMatrix::from_diagonal(&diag)
}
