use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::Scalar;
use crate::error::{Error, Result};

/// Relative pivot floor below which a factorization is declared singular.
const PIVOT_FLOOR: f64 = 1e-12;
/// Allowed relative asymmetry for matrices handed to the SPD solver.
const SYMMETRY_TOL: f64 = 1e-10;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k, k);
        for i in 0..k {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat<T> {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// `self += w · u vᵀ`
    pub fn add_outer(&mut self, w: T, u: &[T], v: &[T]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for (i, &ui) in u.iter().enumerate() {
            let wu = w * ui;
            for (j, &vj) in v.iter().enumerate() {
                self[(i, j)] = self[(i, j)] + wu * vj;
            }
        }
    }

    pub fn scale(&mut self, s: T) {
        for v in &mut self.data {
            *v = *v * s;
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Largest `|m_ij − m_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let scale = self.max_abs();
        if scale == T::zero() {
            return T::zero();
        }
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }

    /// Copies the lower triangle into the upper one.
    pub fn symmetrize_from_lower(&mut self) {
        for i in 0..self.rows {
            for j in 0..i {
                self[(j, i)] = self[(i, j)];
            }
        }
    }

    /// `vᵀ M v`
    pub fn quad_form(&self, v: &[T]) -> T {
        dot(v, &self.mul_vec(v))
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Cholesky factor `L` with `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    lower: Mat<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors a symmetric positive definite matrix.
    ///
    /// A pivot at or below `1e-12 × max diagonal` is reported as
    /// `SingularMatrix`.
    pub fn factor(m: &Mat<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if !m.is_finite() {
            return Err(Error::InvalidData("non-finite matrix entry".into()));
        }
        let asym = m.asymmetry();
        if asym > T::lit(SYMMETRY_TOL) {
            return Err(Error::NotSymmetric {
                asymmetry: asym.as_f64(),
            });
        }
        let k = m.rows();
        let max_diag = (0..k).fold(T::zero(), |acc, i| acc.max(m[(i, i)].abs()));
        let floor = T::lit(PIVOT_FLOOR) * max_diag;
        let mut lower = Mat::zeros(k, k);
        for j in 0..k {
            let mut pivot = m[(j, j)];
            for c in 0..j {
                pivot = pivot - lower[(j, c)] * lower[(j, c)];
            }
            if !(pivot > floor) || max_diag == T::zero() {
                return Err(Error::SingularMatrix {
                    context: "cholesky",
                    pivot: j,
                    detail: String::new(),
                });
            }
            let ljj = pivot.sqrt();
            lower[(j, j)] = ljj;
            for i in j + 1..k {
                let mut s = m[(i, j)];
                for c in 0..j {
                    s = s - lower[(i, c)] * lower[(j, c)];
                }
                lower[(i, j)] = s / ljj;
            }
        }
        Ok(Self { lower })
    }

    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    pub fn lower(&self) -> &Mat<T> {
        &self.lower
    }

    pub fn solve(&self, v: &[T]) -> Vec<T> {
        let k = self.dim();
        assert_eq!(v.len(), k, "right-hand side length");
        let l = &self.lower;
        let mut y = v.to_vec();
        for i in 0..k {
            let mut s = y[i];
            for c in 0..i {
                s = s - l[(i, c)] * y[c];
            }
            y[i] = s / l[(i, i)];
        }
        for i in (0..k).rev() {
            let mut s = y[i];
            for c in i + 1..k {
                s = s - l[(c, i)] * y[c];
            }
            y[i] = s / l[(i, i)];
        }
        y
    }

    /// `vᵀ M⁻¹ v`, computed as `‖L⁻¹ v‖²`.
    pub fn inv_quad_form(&self, v: &[T]) -> T {
        let k = self.dim();
        let l = &self.lower;
        let mut y = v.to_vec();
        for i in 0..k {
            let mut s = y[i];
            for c in 0..i {
                s = s - l[(i, c)] * y[c];
            }
            y[i] = s / l[(i, i)];
        }
        dot(&y, &y)
    }

    pub fn inverse(&self) -> Mat<T> {
        let k = self.dim();
        let mut inv = Mat::zeros(k, k);
        let mut e = vec![T::zero(); k];
        for j in 0..k {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            let col = self.solve(&e);
            for (i, c) in col.into_iter().enumerate() {
                inv[(i, j)] = c;
            }
        }
        inv
    }
}

/// LU factorization with partial pivoting, for general square systems.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Mat<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(m: &Mat<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let k = m.rows();
        let floor = T::lit(PIVOT_FLOOR) * m.max_abs();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..k).collect();
        for j in 0..k {
            let (p, best) =
                (j..k)
                    .map(|i| (i, lu[(i, j)].abs()))
                    .fold(
                        (j, T::zero()),
                        |acc, cur| if cur.1 > acc.1 { cur } else { acc },
                    );
            if !(best > floor) {
                return Err(Error::SingularMatrix {
                    context: "lu",
                    pivot: j,
                    detail: String::new(),
                });
            }
            if p != j {
                for c in 0..k {
                    let tmp = lu[(j, c)];
                    lu[(j, c)] = lu[(p, c)];
                    lu[(p, c)] = tmp;
                }
                perm.swap(j, p);
            }
            let d = lu[(j, j)];
            for i in j + 1..k {
                let f = lu[(i, j)] / d;
                lu[(i, j)] = f;
                for c in j + 1..k {
                    lu[(i, c)] = lu[(i, c)] - f * lu[(j, c)];
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, v: &[T]) -> Vec<T> {
        let k = self.lu.rows();
        assert_eq!(v.len(), k, "right-hand side length");
        let mut y: Vec<T> = self.perm.iter().map(|&p| v[p]).collect();
        for i in 0..k {
            for c in 0..i {
                y[i] = y[i] - self.lu[(i, c)] * y[c];
            }
        }
        for i in (0..k).rev() {
            for c in i + 1..k {
                y[i] = y[i] - self.lu[(i, c)] * y[c];
            }
            y[i] = y[i] / self.lu[(i, i)];
        }
        y
    }
}

/// Solves `m u = v` for symmetric positive definite `m`.
pub fn solve_spd<T: Scalar>(m: &Mat<T>, v: &[T]) -> Result<Vec<T>> {
    if v.len() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, vector has length {}",
            m.rows(),
            m.cols(),
            v.len()
        )));
    }
    Ok(Cholesky::factor(m)?.solve(v))
}
