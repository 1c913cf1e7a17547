//! Dense square complex matrices, row-major storage.
//!
//! Sizes in this crate stay small (at most 2^11), so everything is a plain
//! `Vec` with naive O(n^3) products.

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square complex matrix of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

#[inline]
pub fn c<T: Scalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub fn czero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Scalar>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub fn ci<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

impl<T: Scalar> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![czero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = cone();
        }
        m
    }

    /// Builds from a row-major entry list; length must be `dim * dim`.
    pub fn from_vec(dim: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimMismatch {
                expected: dim * dim,
                actual: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for col in 0..dim {
                m[(r, col)] = f(r, col);
            }
        }
        m
    }

    /// 2x2 Pauli matrices in the sigma_z eigenbasis {|+>, |->}.
    pub fn pauli(axis: usize) -> Self {
        match axis {
            0 => Self::from_vec(2, vec![czero(), cone(), cone(), czero()]).unwrap(),
            1 => Self::from_vec(2, vec![czero(), -ci::<T>(), ci(), czero()]).unwrap(),
            2 => Self::from_vec(2, vec![cone(), czero(), czero(), -cone::<T>()]).unwrap(),
            _ => panic!("pauli axis must be 0, 1 or 2"),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, col| self[(col, r)].conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| *a + *b)
            .collect();
        Self {
            dim: self.dim,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| *a - *b)
            .collect();
        Self {
            dim: self.dim,
            data,
        }
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        let data = self.data.iter().map(|a| *a * factor).collect();
        Self {
            dim: self.dim,
            data,
        }
    }

    /// `self += factor * other`, the RK4 workhorse.
    pub fn axpy(&mut self, factor: Complex<T>, other: &Self) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * *b;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik == czero() {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += aik * *b;
                }
            }
        }
        out
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                if a == czero() {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Largest entrywise deviation from Hermiticity, max |M - M^dagger|.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.dim {
            for col in r..self.dim {
                let d = (self[(r, col)] - self[(col, r)].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Replaces the matrix by its Hermitian part (M + M^dagger)/2.
    pub fn hermitize(&mut self) {
        let half = T::lit(0.5);
        for r in 0..self.dim {
            for col in r..self.dim {
                let avg = (self[(r, col)] + self[(col, r)].conj()) * Complex::new(half, T::zero());
                self[(r, col)] = avg;
                self[(col, r)] = avg.conj();
            }
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|a| a.norm()).fold(T::zero(), T::max)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
            .sqrt()
    }
}

impl<T: Scalar> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.dim + c]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.dim + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = CMatrix<f64>;

    #[test]
    fn pauli_algebra() {
        let sx = M::pauli(0);
        let sy = M::pauli(1);
        let sz = M::pauli(2);
        // sx sy = i sz
        let prod = sx.matmul(&sy);
        let expect = sz.scale(ci());
        assert!(prod.max_abs_diff(&expect) < 1e-15);
        for p in [&sx, &sy, &sz] {
            assert!(p.matmul(p).max_abs_diff(&M::identity(2)) < 1e-15);
            assert!(p.hermiticity_defect() < 1e-15);
            assert!(p.trace().norm() < 1e-15);
        }
    }

    #[test]
    fn kron_dims_and_trace() {
        let a = M::from_fn(2, |r, col| c::<f64>((r + col) as f64, 0.3 * r as f64));
        let b = M::identity(3);
        let k = a.kron(&b);
        assert_eq!(k.dim(), 6);
        assert!((k.trace() - a.trace() * b.trace()).norm() < 1e-14);
    }

    #[test]
    fn from_vec_rejects_bad_length() {
        assert!(M::from_vec(2, vec![czero(); 3]).is_err());
    }
}
