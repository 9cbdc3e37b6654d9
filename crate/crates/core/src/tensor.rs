//! Dense small tensors. Index order is always contravariant first, then the
//! covariant slots in the order they are written (`N^i_j` is `(i, j)`,
//! `L^i_jk` is `(i, j, k)`).

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{check_dim, Error, Result};

/// An `n x n` field value such as `N^i_j`, `M^i_j` or `g_ij`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareField {
    n: usize,
    data: Vec<f64>,
}

impl SquareField {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            check_dim(n, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    /// Builds from a flat row-major slice of length `n*n`.
    pub fn from_flat(n: usize, flat: &[f64]) -> Result<Self> {
        check_dim(n * n, flat.len())?;
        Ok(Self {
            n,
            data: flat.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.n, |i, j| 0.5 * (self.get(i, j) + self.get(j, i)))
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `(A v)^i = A^i_j v^j`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n);
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Add for &SquareField {
    type Output = SquareField;
    fn add(self, rhs: &SquareField) -> SquareField {
        debug_assert_eq!(self.n, rhs.n);
        SquareField {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &SquareField {
    type Output = SquareField;
    fn sub(self, rhs: &SquareField) -> SquareField {
        debug_assert_eq!(self.n, rhs.n);
        SquareField {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &SquareField {
    type Output = SquareField;
    fn neg(self) -> SquareField {
        self.scale(-1.0)
    }
}

/// Matrix product `(AB)^i_j = A^i_k B^k_j`.
impl Mul for &SquareField {
    type Output = SquareField;
    fn mul(self, rhs: &SquareField) -> SquareField {
        debug_assert_eq!(self.n, rhs.n);
        let n = self.n;
        SquareField::from_fn(n, |i, j| (0..n).map(|k| self.get(i, k) * rhs.get(k, j)).sum())
    }
}

/// An `n x n x n` field value such as `L^i_jk` or `R^i_jk`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeField {
    n: usize,
    data: Vec<f64>,
}

impl CubeField {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Nested `[i][j][k]` arrays.
    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| (0..self.n).map(|k| self.get(i, j, k)).collect())
                    .collect()
            })
            .collect()
    }

    /// Symmetrizes the two covariant slots.
    pub fn symmetrized_lower(&self) -> Self {
        Self::from_fn(self.n, |i, j, k| 0.5 * (self.get(i, j, k) + self.get(i, k, j)))
    }

    pub fn lower_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..j {
                    worst = worst.max((self.get(i, j, k) - self.get(i, k, j)).abs());
                }
            }
        }
        worst
    }

    /// `T^i_j = C^i_jk v^k`.
    pub fn contract_last(&self, v: &[f64]) -> SquareField {
        SquareField::from_fn(self.n, |i, j| (0..self.n).map(|k| self.get(i, j, k) * v[k]).sum())
    }

    /// `T^i_k = v^j C^i_jk`.
    pub fn contract_middle(&self, v: &[f64]) -> SquareField {
        SquareField::from_fn(self.n, |i, k| (0..self.n).map(|j| v[j] * self.get(i, j, k)).sum())
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }
}

impl Sub for &CubeField {
    type Output = CubeField;
    fn sub(self, rhs: &CubeField) -> CubeField {
        CubeField {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Rank-4 array with all four slots of extent `n`, indexed `(a, b, c, d)`.
/// Which slot is contravariant depends on the quantity; see the producer.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n * n * n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        data.push(f(a, b, c, d));
                    }
                }
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub(crate) fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| a * xi + yi).collect()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn ensure_finite(v: &[f64], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
