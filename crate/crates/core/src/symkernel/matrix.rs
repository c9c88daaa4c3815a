//! Dense matrices over the rational-function field.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::RationalExpr;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<RationalExpr>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![RationalExpr::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                RationalExpr::one()
            } else {
                RationalExpr::zero()
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> RationalExpr) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<RationalExpr>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &RationalExpr {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: RationalExpr) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<RationalExpr> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn entries(&self) -> &[RationalExpr] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix shape mismatch");
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols)
                .filter(|&k| !self.get(i, k).is_zero() && !rhs.get(k, j).is_zero())
                .map(|k| self.get(i, k) * rhs.get(k, j))
                .sum()
        })
    }

    pub fn mul_vec(&self, v: &[RationalExpr]) -> Vec<RationalExpr> {
        assert_eq!(self.cols, v.len(), "matrix shape mismatch");
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .filter(|&k| !self.get(i, k).is_zero() && !v[k].is_zero())
                    .map(|k| self.get(i, k) * &v[k])
                    .sum()
            })
            .collect()
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + rhs.get(i, j))
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - rhs.get(i, j))
    }

    pub fn neg(&self) -> Matrix {
        Self::from_fn(self.rows, self.cols, |i, j| -self.get(i, j))
    }

    pub fn scale(&self, s: &RationalExpr) -> Matrix {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * s)
    }

    /// Block matrix `[[a, b], [c, d]]`.
    pub fn blocks(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Matrix {
        let (r0, c0) = (a.rows, a.cols);
        assert!(b.rows == r0 && c.cols == c0 && d.rows == c.rows && d.cols == b.cols);
        Self::from_fn(r0 + c.rows, c0 + b.cols, |i, j| match (i < r0, j < c0) {
            (true, true) => a.get(i, j).clone(),
            (true, false) => b.get(i, j - c0).clone(),
            (false, true) => c.get(i - r0, j).clone(),
            (false, false) => d.get(i - r0, j - c0).clone(),
        })
    }

    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Matrix {
        Self::from_fn(rows, cols, |i, j| self.get(row0 + i, col0 + j).clone())
    }

    /// Row-reduce `[self | rhs]`; returns the rank of `self` and the reduced
    /// augmented matrix.
    fn reduce(&self, rhs: &Matrix) -> (usize, Matrix, Vec<usize>) {
        let mut m = Self::from_fn(self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                rhs.get(i, j - self.cols).clone()
            }
        });
        let width = m.cols;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for j in 0..width {
                    m.data.swap(p * width + j, row * width + j);
                }
            }
            let inv = m.get(row, col).inv().expect("pivot is nonzero");
            for j in 0..width {
                let v = m.get(row, j) * &inv;
                m.set(row, j, v);
            }
            for r in 0..m.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for j in 0..width {
                    if m.get(row, j).is_zero() {
                        continue;
                    }
                    let v = m.get(r, j) - &(&factor * m.get(row, j));
                    m.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
            if row == m.rows {
                break;
            }
        }
        (row, m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.reduce(&Matrix::zeros(self.rows, 0)).0
    }

    /// Inverse over the rational-function field.
    pub fn inverse(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::Degenerate);
        }
        let (rank, m, _) = self.reduce(&Matrix::identity(self.rows));
        if rank < self.rows {
            return Err(Error::Degenerate);
        }
        Ok(m.submatrix(0, self.cols, self.rows, self.rows))
    }

    /// Solve `self * x = rhs` for a matrix of full column rank; `None` when the
    /// system is inconsistent or underdetermined.
    pub fn solve(&self, rhs: &Matrix) -> Option<Matrix> {
        let (rank, m, pivots) = self.reduce(rhs);
        if rank < self.cols {
            return None;
        }
        for r in rank..self.rows {
            if (self.cols..m.cols).any(|j| !m.get(r, j).is_zero()) {
                return None;
            }
        }
        let mut x = Matrix::zeros(self.cols, rhs.cols);
        for (r, &c) in pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                x.set(c, j, m.get(r, self.cols + j).clone());
            }
        }
        Some(x)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}
