//! Dense exact matrices and Gauss–Jordan elimination.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};

/// A coordinate vector.
pub type Vector = Vec<Scalar>;

/// Row-major dense matrix over a single field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

/// Output of [`Matrix::rref`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// A particular solution of `M x = b` together with a basis of `ker M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub particular: Matrix,
    pub kernel: Vec<Vector>,
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field,
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = field.one();
        }
        m
    }

    /// Builds a matrix from rows, checking that rows have equal length and that
    /// every entry belongs to `field`.
    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != c {
                return Err(Error::ShapeError(format!(
                    "row {i} has length {} instead of {c}",
                    row.len()
                )));
            }
            for s in row {
                if s.field() != field {
                    return Err(Error::FieldMismatch(field.to_string(), s.field().to_string()));
                }
                data.push(s);
            }
        }
        Ok(Matrix {
            field,
            rows: r,
            cols: c,
            data,
        })
    }

    /// Like [`Matrix::from_rows`] but with an explicit column count, so that
    /// matrices with zero rows keep their width.
    pub fn from_row_vectors(field: Field, cols: usize, rows: Vec<Vector>) -> Result<Matrix> {
        if rows.is_empty() {
            return Ok(Matrix::zeros(field, 0, cols));
        }
        let m = Matrix::from_rows(field, rows)?;
        if m.cols != cols {
            return Err(Error::ShapeError(format!("expected {cols} columns, found {}", m.cols)));
        }
        Ok(m)
    }

    pub fn from_i64(field: Field, rows: &[&[i64]]) -> Matrix {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.from_i64(v)).collect())
            .collect();
        Matrix::from_rows(field, rows).expect("rectangular integer data")
    }

    pub fn from_fn(field: Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Matrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let s = f(i, j);
                assert_eq!(s.field(), field, "entry from a different field");
                data.push(s);
            }
        }
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    /// Column vector.
    pub fn column(field: Field, v: &[Scalar]) -> Matrix {
        Matrix::from_fn(field, v.len(), 1, |i, _| v[i].clone())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        assert_eq!(v.field(), self.field);
        self.data[r * self.cols + c] = v;
    }

    pub fn entry_mut(&mut self, r: usize, c: usize) -> &mut Scalar {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vectors(&self) -> Vec<Vector> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn column_vector(&self, c: usize) -> Vector {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn column_vectors(&self) -> Vec<Vector> {
        (0..self.cols).map(|c| self.column_vector(c)).collect()
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    /// Reshapes a row-major entry list.
    pub fn from_entries(field: Field, rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Matrix> {
        if data.len() != rows * cols {
            return Err(Error::ShapeError(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(s) = data.iter().find(|s| s.field() != field) {
            return Err(Error::FieldMismatch(field.to_string(), s.field().to_string()));
        }
        Ok(Matrix {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.field, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: &Scalar, other: &Matrix) {
        assert_eq!(self.shape(), other.shape(), "add_scaled shape mismatch");
        if s.is_zero() {
            return;
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                a.add_mul(s, b);
            }
        }
    }

    fn check_compatible(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.to_string(), other.field.to_string()));
        }
        Ok(())
    }

    pub fn checked_mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_compatible(other)?;
        if self.cols != other.rows {
            return Err(Error::ShapeError(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j].add_mul(a, b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn checked_add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_compatible(other)?;
        if self.shape() != other.shape() {
            return Err(Error::ShapeError(format!(
                "cannot add {:?} and {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut out = self.clone();
        out.add_scaled(&self.field.one(), other);
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vector {
        assert_eq!(v.len(), self.cols, "mul_vec length mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = self.field.zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc.add_mul(a, b);
                    }
                }
                acc
            })
            .collect()
    }

    /// Kronecker product, with the convention that `(A ⊗ B)(u ⊗ v) = A u ⊗ B v` when
    /// tensor coordinates are flattened lexicographically (first factor major).
    pub fn kron(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.field, other.field, "kron across fields");
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = Matrix::zeros(self.field, r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if !b.is_zero() {
                            out.data[(i * other.rows + k) * c + j * other.cols + l] = a * b;
                        }
                    }
                }
            }
        }
        out
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        self.check_compatible(other)?;
        if self.cols != other.cols {
            return Err(Error::ShapeError("vstack column mismatch".into()));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Matrix {
            field: self.field,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        self.check_compatible(other)?;
        if self.rows != other.rows {
            return Err(Error::ShapeError("hstack row mismatch".into()));
        }
        Ok(Matrix::from_fn(
            self.field,
            self.rows,
            self.cols + other.cols,
            |i, j| {
                if j < self.cols {
                    self.get(i, j).clone()
                } else {
                    other.get(i, j - self.cols).clone()
                }
            },
        ))
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Matrix {
        Matrix::from_fn(self.field, rows.len(), cols.len(), |i, j| {
            self.get(rows.start + i, cols.start + j).clone()
        })
    }

    /// Reduced row-echelon form. Pivots are normalized to one and strictly
    /// increase; zero rows are kept at the bottom.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let pivots = m.rref_in_place(self.cols);
        let rank = pivots.len();
        Rref {
            matrix: m,
            pivots,
            rank,
        }
    }

    /// Eliminates using only the first `limit` columns as pivot candidates.
    fn rref_in_place(&mut self, limit: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..limit.min(self.cols) {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = self.get(row, col).inv().expect("nonzero pivot");
            for j in col..self.cols {
                let v = self.get(row, j) * &inv;
                self.data[row * self.cols + j] = v;
            }
            let pivot_row: Vector = self.row(row)[col..].to_vec();
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col).clone();
                if factor.is_zero() {
                    continue;
                }
                let neg = -&factor;
                for (off, pv) in pivot_row.iter().enumerate() {
                    if !pv.is_zero() {
                        self.data[r * self.cols + col + off].add_mul(&neg, pv);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Basis of `{x : M x = 0}`, one vector per free column, in increasing order
    /// of the free column.
    pub fn kernel(&self) -> Vec<Vector> {
        let Rref { matrix, pivots, .. } = self.rref();
        kernel_from_rref(&matrix, &pivots)
    }

    /// Solves `M x = b` for a (possibly multi-column) right-hand side. Returns
    /// `None` iff some column of `b` lies outside the image of `M`. The particular
    /// solution sets every free variable to zero.
    pub fn solve(&self, b: &Matrix) -> Result<Option<Solution>> {
        self.check_compatible(b)?;
        if self.rows != b.rows {
            return Err(Error::ShapeError(format!(
                "right-hand side has {} rows, matrix has {}",
                b.rows, self.rows
            )));
        }
        let mut aug = self.hstack(b)?;
        let pivots = aug.rref_in_place(self.cols);
        let rank = pivots.len();
        // Inconsistent iff a zero row of M carries a nonzero entry of b.
        for r in rank..self.rows {
            if aug.row(r)[self.cols..].iter().any(|s| !s.is_zero()) {
                return Ok(None);
            }
        }
        let mut particular = Matrix::zeros(self.field, self.cols, b.cols);
        for (r, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                particular.set(pc, j, aug.get(r, self.cols + j).clone());
            }
        }
        let left = aug.submatrix(0..self.rows, 0..self.cols);
        let kernel = kernel_from_rref(&left, &pivots);
        Ok(Some(Solution { particular, kernel }))
    }

    /// Solves `M x = b` for a single vector.
    pub fn solve_vec(&self, b: &[Scalar]) -> Option<(Vector, Vec<Vector>)> {
        let bm = Matrix::column(self.field, b);
        self.solve(&bm)
            .expect("shape checked by caller")
            .map(|s| (s.particular.column_vector(0), s.kernel))
    }

    /// Two-sided inverse of a square matrix.
    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let sol = self.solve(&Matrix::identity(self.field, self.rows)).ok()??;
        if !sol.kernel.is_empty() {
            return None;
        }
        Some(sol.particular)
    }
}

fn kernel_from_rref(m: &Matrix, pivots: &[usize]) -> Vec<Vector> {
    let field = m.field;
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![field.zero(); m.cols];
            v[f] = field.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m.get(r, f);
            }
            v
        })
        .collect()
}

impl<'a> Mul<&'a Matrix> for &'a Matrix {
    type Output = Matrix;

    /// Panics on shape or field mismatch; use [`Matrix::checked_mul`] at API boundaries.
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.checked_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<'a> Add<&'a Matrix> for &'a Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        self.checked_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<'a> Sub<&'a Matrix> for &'a Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        let mut out = self.clone();
        out.add_scaled(&-self.field.one(), rhs);
        out
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        self.scale(&-self.field.one())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}
