//! Dense matrices over `Q(i)` with exact Gaussian elimination.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_traits::{One, Zero};

use crate::field::FieldScalar;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldScalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![FieldScalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, FieldScalar::one());
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<FieldScalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| FieldScalar::from_int(x)).collect())
                .collect(),
        )
    }

    /// Matrix whose columns are the given vectors (each of length `rows`).
    pub fn from_columns(rows: usize, cols: &[Vec<FieldScalar>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
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

    pub fn get(&self, i: usize, j: usize) -> &FieldScalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldScalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[FieldScalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<FieldScalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<FieldScalar>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.rows)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn scale(&self, c: &FieldScalar) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    /// Submatrix with the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m.set(a, b, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn hstack(&self, other: &Matrix) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut m = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        m
    }

    pub fn vstack(&self, other: &Matrix) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Matrix) -> Self {
        let mut m = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        m
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m.get(r, c).inv().expect("nonzero pivot");
            let support: Vec<usize> = (c..m.cols).filter(|&j| !m.get(r, j).is_zero()).collect();
            for &j in &support {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for &j in &support {
                    let v = m.get(i, j) - &(&f * m.get(r, j));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
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
        self.rref().1.len()
    }

    /// Basis of `{x : self · x = 0}`, returned as the columns of a `cols × k` matrix.
    pub fn nullspace(&self) -> Matrix {
        let (r, pivots) = self.rref();
        Self::nullspace_from_rref(&r, &pivots)
    }

    /// [`Matrix::nullspace`] from an already computed reduced row echelon form.
    pub fn nullspace_from_rref(r: &Matrix, pivots: &[usize]) -> Matrix {
        let free: Vec<usize> = (0..r.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Matrix::zeros(r.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            basis.set(f, k, FieldScalar::one());
            for (row, &p) in pivots.iter().enumerate() {
                basis.set(p, k, -r.get(row, f));
            }
        }
        basis
    }

    /// Solves `self · X = rhs` for some `X`, if a solution exists.
    pub fn solve(&self, rhs: &Matrix) -> Option<Matrix> {
        assert_eq!(self.rows, rhs.rows);
        let aug = self.hstack(rhs);
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = Matrix::zeros(self.cols, rhs.cols);
        for (row, &p) in pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                x.set(p, j, r.get(row, self.cols + j).clone());
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let x = self.solve(&Matrix::identity(self.rows))?;
        (self * &x).is_identity().then_some(x)
    }

    /// Column indices forming a basis of the column space (first pivots).
    pub fn column_basis(&self) -> Vec<usize> {
        self.rref().1
    }

    /// Coordinate indices whose unit vectors complete the column space to a basis.
    pub fn complement_coordinates(&self) -> Vec<usize> {
        let pivots = self.transpose().rref().1;
        (0..self.rows).filter(|i| !pivots.contains(i)).collect()
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix shape mismatch");
        let mut m = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * m.cols + j;
                    m.data[idx] += &(a * b);
                }
            }
        }
        m
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| {
                let r: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
                format!("[{}]", r.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// Whether two square matrices are similar, by the dimension test
/// `dim C(A,A) = dim C(B,B) = dim C(A,B)` where `C(X,Y) = {P : XP = PY}`.
pub fn similar(a: &Matrix, b: &Matrix) -> bool {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return false;
    }
    let caa = intertwiner_dim(a, a);
    caa == intertwiner_dim(b, b) && caa == intertwiner_dim(a, b)
}

/// `dim {P : x P = P y}` for square `x` (n×n) and `y` (m×m).
pub fn intertwiner_dim(x: &Matrix, y: &Matrix) -> usize {
    let n = x.rows();
    let m = y.rows();
    // unknown P is n×m, flattened row-major: index i*m + j
    let mut sys = Matrix::zeros(n * m, n * m);
    for i in 0..n {
        for j in 0..m {
            let eq = i * m + j;
            for k in 0..n {
                // (xP)_{ij} = Σ_k x_{ik} P_{kj}
                let v = sys.get(eq, k * m + j) + x.get(i, k);
                sys.set(eq, k * m + j, v);
            }
            for k in 0..m {
                // (Py)_{ij} = Σ_k P_{ik} y_{kj}
                let v = sys.get(eq, i * m + k) - y.get(k, j);
                sys.set(eq, i * m + k, v);
            }
        }
    }
    n * m - sys.rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_nullspace() {
        let m = Matrix::from_int_rows(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(m.rank(), 2);
        let n = m.nullspace();
        assert_eq!(n.cols(), 1);
        assert!((&m * &n).is_zero());
    }

    #[test]
    fn inverse_roundtrip() {
        let m = Matrix::from_int_rows(&[&[1, 1], &[0, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(inv, Matrix::from_int_rows(&[&[1, -1], &[0, 1]]));
        assert!(Matrix::from_int_rows(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn solve_inconsistent() {
        let a = Matrix::from_int_rows(&[&[1, 0], &[0, 0]]);
        let b = Matrix::from_int_rows(&[&[1], &[1]]);
        assert!(a.solve(&b).is_none());
    }

    #[test]
    fn similarity_detects_jordan_blocks() {
        let j = Matrix::from_int_rows(&[&[1, 1], &[0, 1]]);
        let conj = Matrix::from_int_rows(&[&[2, 1], &[1, 1]]);
        let jc = &(&conj * &j) * &conj.inverse().unwrap();
        assert!(similar(&j, &jc));
        assert!(!similar(&j, &Matrix::identity(2)));
    }
}
