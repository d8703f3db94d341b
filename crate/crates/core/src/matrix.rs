//! Dense row-major matrices over scalars or polynomials.

use std::fmt;

use thiserror::Error;

use crate::scalars::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("matrix is singular over the scalar ring")]
    Singular,
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, MatrixError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(MatrixError::Shape("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Zero-based access.
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    pub fn map<U>(&self, mut f: impl FnMut(usize, usize, &T) -> U) -> Matrix<U> {
        Matrix::from_fn(self.rows, self.cols, |i, j| f(i, j, self.get(i, j)))
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.data
            .iter()
            .enumerate()
            .map(move |(k, t)| (k / self.cols, k % self.cols, t))
    }
}

impl<T: Clone> Matrix<T> {
    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "{}", row.join("\t"))?;
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Matrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("data", &self.data)
            .finish()
    }
}

pub type ScalarMatrix = Matrix<Scalar>;

impl Matrix<Scalar> {
    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                Scalar::one()
            } else {
                Scalar::zero()
            }
        })
    }

    pub fn diagonal(entries: &[Scalar]) -> Self {
        let n = entries.len();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                entries[i].clone()
            } else {
                Scalar::zero()
            }
        })
    }

    pub fn is_identity(&self) -> bool {
        *self == Matrix::identity(self.rows) && self.is_square()
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_square() && self.entries().all(|(i, j, x)| i == j || x.is_zero())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Scalar::zero();
            for k in 0..self.cols {
                acc += &(self.get(i, k) * other.get(k, j));
            }
            acc
        }))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).star())
    }

    /// Gauss-Jordan inverse; pivots must be units of the scalar ring.
    pub fn inverse(&self) -> Result<Self, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find_map(|r| a.get(r, col).inverse().map(|p| (r, p)))
                .ok_or(MatrixError::Singular)?;
            let (prow, pinv) = pivot;
            if prow != col {
                for j in 0..n {
                    a.data.swap(prow * n + j, col * n + j);
                    inv.data.swap(prow * n + j, col * n + j);
                }
            }
            for j in 0..n {
                *a.get_mut(col, j) = a.get(col, j) * &pinv;
                *inv.get_mut(col, j) = inv.get(col, j) * &pinv;
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for j in 0..n {
                    let da = &factor * a.get(col, j);
                    let di = &factor * inv.get(col, j);
                    *a.get_mut(r, j) -= &da;
                    *inv.get_mut(r, j) -= &di;
                }
            }
        }
        Ok(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let m = Matrix::from_rows(vec![
            vec![Scalar::from_int(1), Scalar::from_int(1)],
            vec![Scalar::from_int(0), Scalar::from_int(1)],
        ])
        .unwrap();
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).unwrap().is_identity());
        let r: Scalar = "sqrt(2)".parse().unwrap();
        let d = Matrix::diagonal(&[Scalar::one(), r]);
        assert!(d.mul(&d.inverse().unwrap()).unwrap().is_identity());
    }

    #[test]
    fn singular_detected() {
        let m = Matrix::from_rows(vec![
            vec![Scalar::from_int(1), Scalar::from_int(2)],
            vec![Scalar::from_int(2), Scalar::from_int(4)],
        ])
        .unwrap();
        assert_eq!(m.inverse(), Err(MatrixError::Singular));
    }
}
