//! Dense multiprecision matrices, the cyclic Jacobi eigensolver and Löwdin
//! symmetric orthogonalization.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::precision::{PrecisionContext, Real};

/// Row-major dense matrix of [`Real`].
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Real>,
}

impl Index<(usize, usize)> for Matrix {
    type Output = Real;
    fn index(&self, (i, j): (usize, usize)) -> &Real {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Real {
        &mut self.data[i * self.cols + j]
    }
}

impl Matrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Real) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn zeros(like: &Real, rows: usize, cols: usize) -> Self {
        let z = like.zero_like();
        Matrix {
            rows,
            cols,
            data: vec![z; rows * cols],
        }
    }

    pub fn identity(like: &Real, n: usize) -> Self {
        let mut m = Self::zeros(like, n, n);
        for i in 0..n {
            m[(i, i)] = like.one_like();
        }
        m
    }

    /// Builds from nested rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<Real>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
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

    pub fn data(&self) -> &[Real] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Real> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(&self.data[0], self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        Ok(out)
    }

    /// `Xᵀ A X`.
    pub fn congruence(&self, x: &Matrix) -> Result<Matrix> {
        x.transpose().matmul(&self.matmul(x)?)
    }

    pub fn mat_vec(&self, v: &[Real]) -> Result<Vec<Real>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{} columns against vector of {}",
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = v[0].zero_like();
                for j in 0..self.cols {
                    acc += &self[(i, j)] * &v[j];
                }
                acc
            })
            .collect())
    }

    /// `uᵀ A v`.
    pub fn bilinear(&self, u: &[Real], v: &[Real]) -> Result<Real> {
        let av = self.mat_vec(v)?;
        Ok(dot(u, &av))
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: &Real) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    fn zip(&self, other: &Matrix, f: impl Fn(&Real, &Real) -> Real) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} against {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn frobenius(&self) -> Real {
        let mut acc = self.data[0].zero_like();
        for x in &self.data {
            acc += x.square();
        }
        acc.sqrt()
    }

    pub fn max_abs(&self) -> Real {
        let mut m = self.data[0].zero_like();
        for x in &self.data {
            let a = x.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Frobenius norm of the strictly off-diagonal part.
    pub fn off_diagonal_norm(&self) -> Real {
        let mut acc = self.data[0].zero_like();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    acc += self[(i, j)].square();
                }
            }
        }
        acc.sqrt()
    }

    /// Largest |A_ij − A_ji|.
    pub fn asymmetry(&self) -> Real {
        let mut m = self.data[0].zero_like();
        for i in 0..self.rows {
            for j in 0..i {
                let d = (&self[(i, j)] - &self[(j, i)]).abs();
                if d > m {
                    m = d;
                }
            }
        }
        m
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_f64()).collect())
            .collect()
    }
}

pub fn dot(u: &[Real], v: &[Real]) -> Real {
    let mut acc = u[0].zero_like();
    for (a, b) in u.iter().zip(v) {
        acc += a * b;
    }
    acc
}

/// Eigenvalues in ascending order with the matching eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Real>,
    pub vectors: Matrix,
    pub sweeps: usize,
}

/// Cap on Jacobi sweeps before giving up.
pub const JACOBI_SWEEP_CAP: usize = 100;

/// Cyclic Jacobi diagonalization of a symmetric matrix.
///
/// Iterates until the off-diagonal Frobenius norm drops below
/// `10^(-(digits+guard)+2) · ‖A‖`.
pub fn jacobi_eigensolve(a: &Matrix, ctx: &PrecisionContext) -> Result<Eigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("Jacobi needs a square matrix".into()));
    }
    let n = a.rows();
    let v = Matrix::identity(&a.data[0], n);
    jacobi_core(a.clone(), v, ctx)
}

/// Jacobi started from an approximate eigenbasis `guess` (orthogonal).
///
/// `guessᵀ A guess` is nearly diagonal when the guess comes from a nearby
/// matrix, so only a sweep or two are needed.
pub fn jacobi_eigensolve_from(a: &Matrix, guess: &Matrix, ctx: &PrecisionContext) -> Result<Eigen> {
    if !a.is_square() || guess.rows() != a.rows() || !guess.is_square() {
        return Err(Error::DimensionMismatch("Jacobi warm start shape".into()));
    }
    let rotated = a.congruence(guess)?;
    jacobi_core(rotated, guess.clone(), ctx)
}

fn jacobi_core(mut a: Matrix, mut v: Matrix, ctx: &PrecisionContext) -> Result<Eigen> {
    let n = a.rows();
    let scale = a.frobenius();
    let tol = ctx.pow10(-((ctx.digits() + ctx.guard_digits()) as i32) + 2) * &scale;
    let mut sweeps = 0;
    while a.off_diagonal_norm() > tol && !scale.is_zero() {
        if sweeps == JACOBI_SWEEP_CAP {
            return Err(Error::NoConvergence {
                what: "Jacobi eigensolver",
                iterations: sweeps,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].is_zero() {
                    continue;
                }
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)].clone()).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])].clone());
    Ok(Eigen {
        values,
        vectors,
        sweeps,
    })
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let n = a.rows();
    let apq = a[(p, q)].clone();
    let theta = (&a[(q, q)] - &a[(p, p)]) / (&apq * 2);
    let root = (theta.square() + 1).sqrt();
    let t = if theta.is_sign_negative() {
        -(theta.abs() + root).recip()
    } else {
        (theta.abs() + root).recip()
    };
    let c = (t.square() + 1).sqrt().recip();
    let s = &t * &c;
    let tau = &s / (&c + 1);
    let shift = &t * &apq;
    a[(p, p)] -= &shift;
    a[(q, q)] += &shift;
    a[(p, q)] = apq.zero_like();
    a[(q, p)] = apq.zero_like();
    for r in 0..n {
        if r != p && r != q {
            let g = a[(r, p)].clone();
            let h = a[(r, q)].clone();
            let new_rp = &g - &s * (&h + &g * &tau);
            let new_rq = &h + &s * (&g - &h * &tau);
            a[(p, r)] = new_rp.clone();
            a[(r, p)] = new_rp;
            a[(q, r)] = new_rq.clone();
            a[(r, q)] = new_rq;
        }
        let g = v[(r, p)].clone();
        let h = v[(r, q)].clone();
        v[(r, p)] = &g - &s * (&h + &g * &tau);
        v[(r, q)] = &h + &s * (&g - &h * &tau);
    }
}

/// X = S^(-1/2) by eigendecomposition of the overlap matrix.
pub fn lowdin_orthogonalizer(s: &Matrix, ctx: &PrecisionContext) -> Result<Matrix> {
    let eig = jacobi_eigensolve(s, ctx)?;
    let floor = ctx.pow10(-(ctx.digits() as i32) / 2);
    let smallest = &eig.values[0];
    if *smallest < floor {
        return Err(Error::SingularOverlap(smallest.to_sci(6)));
    }
    let n = s.rows();
    let inv_sqrt: Vec<Real> = eig.values.iter().map(|l| l.sqrt().recip()).collect();
    let u = &eig.vectors;
    Ok(Matrix::from_fn(n, n, |i, j| {
        let mut acc = smallest.zero_like();
        for k in 0..n {
            acc += &u[(i, k)] * &inv_sqrt[k] * &u[(j, k)];
        }
        acc
    }))
}

/// 2×2 blocked matrix; block (0,0) is large-large, (1,1) small-small.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    pub blocks: [[Matrix; 2]; 2],
}

impl BlockMatrix {
    pub fn new(ll: Matrix, ls: Matrix, sl: Matrix, ss: Matrix) -> Self {
        BlockMatrix {
            blocks: [[ll, ls], [sl, ss]],
        }
    }

    /// Block index for a component label β ∈ {+1, −1}.
    pub fn slot(beta: i32) -> usize {
        usize::from(beta < 0)
    }

    pub fn block(&self, beta: i32, beta_prime: i32) -> &Matrix {
        &self.blocks[Self::slot(beta)][Self::slot(beta_prime)]
    }

    /// Dimension M of one block.
    pub fn dim(&self) -> usize {
        self.blocks[0][0].rows()
    }

    /// Dense 2M×2M form.
    pub fn assemble(&self) -> Matrix {
        let m = self.dim();
        Matrix::from_fn(2 * m, 2 * m, |i, j| self.blocks[i / m][j / m][(i % m, j % m)].clone())
    }

    pub fn from_dense(full: &Matrix) -> Result<Self> {
        if !full.is_square() || !full.rows().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(
                "blocked matrix needs even square shape".into(),
            ));
        }
        let m = full.rows() / 2;
        let blk = |bi: usize, bj: usize| Matrix::from_fn(m, m, |i, j| full[(bi * m + i, bj * m + j)].clone());
        Ok(BlockMatrix::new(blk(0, 0), blk(0, 1), blk(1, 0), blk(1, 1)))
    }
}
