//! Small dense square matrices backing the reduced (projected)
//! eigenproblems. Row-major storage; dimensions stay at the subspace
//! size, so none of this needs to be clever.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<R> {
    dim: usize,
    data: Vec<R>,
}

impl<R: Real> DenseMatrix<R> {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            data: vec![R::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, R::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<R>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "rows must form a square matrix");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> R {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.dim + j] = v;
    }

    pub fn trace(&self) -> R {
        (0..self.dim).fold(R::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn frobenius_norm(&self) -> R {
        self.data
            .iter()
            .fold(R::zero(), |acc, &v| acc + v * v)
            .sqrt()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut acc = R::zero();
                for l in 0..self.dim {
                    acc = acc + self.get(i, l) * other.get(l, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn apply(&self, x: &[R]) -> Vec<R> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                (0..self.dim).fold(R::zero(), |acc, j| acc + self.get(i, j) * x[j])
            })
            .collect()
    }

    pub fn is_symmetric(&self, tol: R) -> bool {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Max |entry| below the first subdiagonal; zero for Hessenberg input.
    pub fn below_hessenberg_max(&self) -> R {
        let mut m = R::zero();
        for i in 2..self.dim {
            for j in 0..(i - 1) {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }

    /// Lower Cholesky factor of a symmetric positive definite matrix.
    /// A non-positive pivot reports the conditioning failure.
    pub fn cholesky(&self) -> Result<DenseMatrix<R>> {
        let n = self.dim;
        let mut l = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = self.get(i, j);
                for p in 0..j {
                    acc = acc - l.get(i, p) * l.get(j, p);
                }
                if i == j {
                    if acc <= R::zero() || !acc.is_finite() {
                        return Err(Error::IllConditionedGram {
                            cond: f64::INFINITY,
                        });
                    }
                    l.set(i, i, acc.sqrt());
                } else {
                    l.set(i, j, acc / l.get(j, j));
                }
            }
        }
        Ok(l)
    }

    /// Solve `L x = b` with `self` lower triangular.
    pub fn solve_lower(&self, b: &[R]) -> Vec<R> {
        let n = self.dim;
        let mut x = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                let xj = x[j];
                x[i] = x[i] - self.get(i, j) * xj;
            }
            x[i] = x[i] / self.get(i, i);
        }
        x
    }

    /// Solve `L^T x = b` with `self` lower triangular.
    pub fn solve_lower_transpose(&self, b: &[R]) -> Vec<R> {
        let n = self.dim;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let xj = x[j];
                x[i] = x[i] - self.get(j, i) * xj;
            }
            x[i] = x[i] / self.get(i, i);
        }
        x
    }

    /// Solve `R x = b` with `self` upper triangular.
    pub fn solve_upper(&self, b: &[R]) -> Vec<R> {
        let n = self.dim;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let xj = x[j];
                x[i] = x[i] - self.get(i, j) * xj;
            }
            x[i] = x[i] / self.get(i, i);
        }
        x
    }

    /// Determinant by LU with partial pivoting.
    pub fn det_lu(&self) -> R {
        let n = self.dim;
        let mut a = self.clone();
        let mut det = R::one();
        for col in 0..n {
            let mut pivot = col;
            for r in (col + 1)..n {
                if a.get(r, col).abs() > a.get(pivot, col).abs() {
                    pivot = r;
                }
            }
            if a.get(pivot, col) == R::zero() {
                return R::zero();
            }
            if pivot != col {
                for j in 0..n {
                    let tmp = a.get(col, j);
                    a.set(col, j, a.get(pivot, j));
                    a.set(pivot, j, tmp);
                }
                det = -det;
            }
            let p = a.get(col, col);
            det = det * p;
            for r in (col + 1)..n {
                let f = a.get(r, col) / p;
                for j in col..n {
                    let v = a.get(r, j) - f * a.get(col, j);
                    a.set(r, j, v);
                }
            }
        }
        det
    }
}
