//! Small dense symmetric matrices: storage, Jacobi eigendecomposition and the
//! SPD square root.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::Scalar;

/// Symmetric positive definite matrix stored row-major.
///
/// Construction symmetrizes the input, so `a_ij == a_ji` holds bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpdMatrix<T> {
    dim: usize,
    entries: Vec<T>,
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns of
/// `vectors`, row-major).
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<T>,
    pub dim: usize,
}

impl<T: Scalar> SymmetricEigen<T> {
    /// The `k`-th eigenvector.
    pub fn vector(&self, k: usize) -> Vec<T> {
        (0..self.dim).map(|i| self.vectors[i * self.dim + k]).collect()
    }
}

impl<T: Scalar> SpdMatrix<T> {
    /// Builds a matrix from row-major entries, symmetrizing and checking
    /// positive definiteness.
    pub fn new(dim: usize, entries: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::InvalidParameter("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(LabError::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        let half = T::lit(0.5);
        let mut sym = entries.clone();
        for i in 0..dim {
            for j in 0..dim {
                sym[i * dim + j] = half * (entries[i * dim + j] + entries[j * dim + i]);
            }
        }
        let m = Self { dim, entries: sym };
        let eig = m.eigen();
        let min = eig.values[0];
        if !(min > T::zero()) {
            return Err(LabError::NonSpd { min_eigenvalue: min.as_f64() });
        }
        Ok(m)
    }

    pub fn diagonal(diag: &[T]) -> Result<Self> {
        let d = diag.len();
        let mut e = vec![T::zero(); d * d];
        for (i, &x) in diag.iter().enumerate() {
            e[i * d + i] = x;
        }
        Self::new(d, e)
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![T::one(); dim]).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.dim + j]
    }

    /// `c · a` for `c > 0`.
    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(self.dim, self.entries.iter().map(|&x| x * c).collect())
    }

    /// Quadratic form `yᵀ a y`.
    #[inline]
    pub fn quad_form(&self, y: &[T]) -> T {
        quad_form(&self.entries, self.dim, y)
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn eigen(&self) -> SymmetricEigen<T> {
        jacobi_eigen(&self.entries, self.dim)
    }
}

#[inline]
pub(crate) fn quad_form<T: Scalar>(m: &[T], dim: usize, y: &[T]) -> T {
    let mut acc = T::zero();
    for i in 0..dim {
        let mut row = T::zero();
        for j in 0..dim {
            row = row + m[i * dim + j] * y[j];
        }
        acc = acc + y[i] * row;
    }
    acc
}

#[cfg(test)]
pub(crate) fn matmul<T: Scalar>(a: &[T], b: &[T], dim: usize) -> Vec<T> {
    let mut c = vec![T::zero(); dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            for j in 0..dim {
                c[i * dim + j] = c[i * dim + j] + aik * b[k * dim + j];
            }
        }
    }
    c
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn jacobi_eigen<T: Scalar>(m: &[T], dim: usize) -> SymmetricEigen<T> {
    let mut a = m.to_vec();
    let mut v = vec![T::zero(); dim * dim];
    for i in 0..dim {
        v[i * dim + i] = T::one();
    }
    let two = T::lit(2.0);
    for _sweep in 0..64 {
        let off: T = (0..dim)
            .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * dim + j] * a[i * dim + j])
            .sum();
        let scale: T = a.iter().map(|&x| x * x).sum();
        if off <= T::epsilon() * T::epsilon() * scale || off == T::zero() {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[p * dim + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * dim + p];
                let aqq = a[q * dim + q];
                let theta = (aqq - app) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p * dim + k];
                    let aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| a[i * dim + i].partial_cmp(&a[j * dim + j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| a[k * dim + k]).collect();
    let mut vectors = vec![T::zero(); dim * dim];
    for (new_k, &k) in order.iter().enumerate() {
        for i in 0..dim {
            vectors[i * dim + new_k] = v[i * dim + k];
        }
    }
    SymmetricEigen { values, vectors, dim }
}

/// Principal square root `B = a^{1/2}` via eigendecomposition, symmetrized.
pub fn spd_sqrt<T: Scalar>(a: &SpdMatrix<T>) -> Result<Vec<T>> {
    let eig = a.eigen();
    let dim = a.dim();
    if let Some(&min) = eig.values.first() {
        if !(min > T::zero()) {
            return Err(LabError::NonSpd { min_eigenvalue: min.as_f64() });
        }
    }
    let roots: Vec<T> = eig.values.iter().map(|&l| l.sqrt()).collect();
    let mut b = vec![T::zero(); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = T::zero();
            for k in 0..dim {
                acc = acc + eig.vectors[i * dim + k] * roots[k] * eig.vectors[j * dim + k];
            }
            b[i * dim + j] = acc;
        }
    }
    let half = T::lit(0.5);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let s = half * (b[i * dim + j] + b[j * dim + i]);
            b[i * dim + j] = s;
            b[j * dim + i] = s;
        }
    }
    Ok(b)
}
