//! Small dense matrices over `f64` and `Complex64`, with the handful of
//! factorizations the solver needs: partial-pivoted LU, cyclic Jacobi for
//! symmetric eigenproblems, and one-sided Jacobi for singular values.

use num_complex::Complex64;
use num_traits::NumAssign;
use serde::{Deserialize, Serialize};
use std::fmt::Debug;

use crate::error::{Error, Result};

/// Field scalar used by the integrator and the determinant code.
pub trait Scalar: Copy + NumAssign + Debug + Send + Sync + 'static {
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;
    fn scale(self, s: f64) -> Self;
    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        Complex64::new(self.re * s, self.im * s)
    }
    #[inline]
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// Square matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat<T> {
    order: usize,
    data: Vec<T>,
}

pub type RealMatrix = Mat<f64>;
pub type ComplexMatrix = Mat<Complex64>;

impl<T: Scalar> Mat<T> {
    pub fn zeros(order: usize) -> Self {
        Mat {
            order,
            data: vec![T::zero(); order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.data[i * order + i] = T::one();
        }
        m
    }

    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(order * order);
        for i in 0..order {
            for j in 0..order {
                data.push(f(i, j));
            }
        }
        Mat { order, data }
    }

    pub fn from_row_major(order: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != order * order {
            return Err(Error::InvalidProblem(format!(
                "expected {} entries for order {order}, got {}",
                order * order,
                data.len()
            )));
        }
        Ok(Mat { order, data })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.order + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.order + j] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.order, |i, j| self.get(j, i))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.order, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.order, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::from_fn(self.order, |i, j| self.get(i, j) * s)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.order;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.order)
            .map(|i| (0..self.order).map(|j| self.get(i, j).modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.modulus()))
    }

    pub fn trace(&self) -> T {
        (0..self.order).fold(T::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        Mat {
            order: self.order,
            data: self.data.iter().map(|v| v.to_complex()).collect(),
        }
    }

    pub fn determinant(&self) -> T {
        Lu::factor(self).determinant()
    }
}

impl RealMatrix {
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.order;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }
}

/// Real symmetric matrix. Symmetry is exact: the constructor averages the
/// off-diagonal pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RealMatrix", into = "RealMatrix")]
pub struct SymMatrix(RealMatrix);

impl TryFrom<RealMatrix> for SymMatrix {
    type Error = Error;
    fn try_from(m: RealMatrix) -> Result<Self> {
        SymMatrix::new(m)
    }
}

impl From<SymMatrix> for RealMatrix {
    fn from(s: SymMatrix) -> Self {
        s.0
    }
}

impl SymMatrix {
    pub fn new(m: RealMatrix) -> Result<Self> {
        if m.order == 0 {
            return Err(Error::InvalidProblem("matrix order must be positive".into()));
        }
        if !m.is_finite() {
            return Err(Error::InvalidProblem("matrix entries must be finite".into()));
        }
        let n = m.order;
        let mut out = m;
        for i in 0..n {
            for j in i + 1..n {
                let avg = 0.5 * (out.get(i, j) + out.get(j, i));
                out.set(i, j, avg);
                out.set(j, i, avg);
            }
        }
        Ok(SymMatrix(out))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidProblem("matrix rows must form a square".into()));
        }
        Self::new(RealMatrix::from_row_major(n, rows.concat())?)
    }

    pub fn zeros(order: usize) -> Self {
        SymMatrix(RealMatrix::zeros(order))
    }

    pub fn identity(order: usize) -> Self {
        SymMatrix(RealMatrix::identity(order))
    }

    pub fn scaled_identity(order: usize, s: f64) -> Self {
        SymMatrix(RealMatrix::identity(order).scaled(s))
    }

    pub fn diagonal(d: &[f64]) -> Self {
        SymMatrix(RealMatrix::from_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 }))
    }

    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.0
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(self.0.sub(&other.0))
    }

    pub fn scaled(&self, s: f64) -> SymMatrix {
        SymMatrix(self.0.scaled(s))
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.order();
        (0..n).all(|i| (0..n).all(|j| i == j || self.get(i, j) == 0.0))
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.order()).map(|i| self.get(i, i)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let n = self.order();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect()
    }
}

/// Partial-pivoted LU factorization `P A = L U`.
pub struct Lu<T> {
    lu: Mat<T>,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(a: &Mat<T>) -> Self {
        let n = a.order;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu.get(i, k).modulus()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let f = lu.get(i, k) / pivot;
                lu.set(i, k, f);
                for j in k + 1..n {
                    let v = lu.get(i, j) - f * lu.get(k, j);
                    lu.set(i, j, v);
                }
            }
        }
        Lu {
            lu,
            perm,
            sign,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn determinant(&self) -> T {
        if self.singular {
            return T::zero();
        }
        let mut d = T::from_real(self.sign);
        for i in 0..self.lu.order {
            d *= self.lu.get(i, i);
        }
        d
    }

    /// Solves `A X = B` column by column. Returns `None` when `A` is exactly singular.
    pub fn solve(&self, b: &Mat<T>) -> Option<Mat<T>> {
        if self.singular {
            return None;
        }
        let n = self.lu.order;
        let mut x = Mat::zeros(n);
        let mut col = vec![T::zero(); n];
        for c in 0..n {
            for i in 0..n {
                col[i] = b.get(self.perm[i], c);
            }
            for i in 0..n {
                let mut s = col[i];
                for j in 0..i {
                    s -= self.lu.get(i, j) * col[j];
                }
                col[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = col[i];
                for j in i + 1..n {
                    s -= self.lu.get(i, j) * col[j];
                }
                col[i] = s / self.lu.get(i, i);
            }
            for i in 0..n {
                x.set(i, c, col[i]);
            }
        }
        Some(x)
    }
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and an
/// orthogonal matrix whose columns are the eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: RealMatrix,
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
/// `1e-13` times the matrix norm. Columns are sorted by eigenvalue and signed so
/// that the first nonzero component is positive.
pub fn symmetric_eigen(a: &SymMatrix) -> SymEigen {
    let n = a.order();
    let mut m = a.matrix().clone();
    let mut v = RealMatrix::identity(n);
    let total: f64 = m.data.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-13 * total.max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    idx.sort_by(|&i, &j| {
        diag[i].total_cmp(&diag[j]).then_with(|| {
            let ci: Vec<f64> = (0..n).map(|k| v.get(k, i).abs()).collect();
            let cj: Vec<f64> = (0..n).map(|k| v.get(k, j).abs()).collect();
            cj.partial_cmp(&ci).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let values: Vec<f64> = idx.iter().map(|&i| diag[i]).collect();
    let mut vectors = RealMatrix::zeros(n);
    for (c, &src) in idx.iter().enumerate() {
        let first = (0..n)
            .map(|k| v.get(k, src))
            .find(|x| x.abs() > 1e-14)
            .unwrap_or(1.0);
        let s = if first < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            vectors.set(k, c, s * v.get(k, src));
        }
    }
    SymEigen { values, vectors }
}

/// Singular values of a real square matrix in ascending order
/// (one-sided Jacobi on the columns).
pub fn singular_values(a: &RealMatrix) -> Vec<f64> {
    let n = a.order();
    // column-major working copy
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| a.get(i, j)).collect()).collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..n {
                    let xp = cols[p][k];
                    let xq = cols[q][k];
                    cols[p][k] = c * xp - s * xq;
                    cols[q][k] = s * xp + c * xq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(f64::total_cmp);
    sv
}
