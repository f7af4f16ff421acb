//! Dense 2×N matrices holding one planar vector per lattice site.
//!
//! Storage is column-major (`[x0, y0, x1, y1, ...]`), so the two components
//! of a site are adjacent in memory and the dot-product kernels vectorize.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A 2×N matrix of per-site planar vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix2xN<T> {
    data: Vec<T>,
    n: usize,
}

impl<T: Real> Matrix2xN<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            data: vec![T::zero(); 2 * n],
            n,
        }
    }

    /// Builds from interleaved `[x0, y0, x1, y1, ...]` storage.
    pub fn from_interleaved(data: Vec<T>) -> Result<Self> {
        if data.len() % 2 != 0 {
            return Err(Error::DimensionMismatch {
                what: "interleaved 2xN storage",
                expected: data.len() + 1,
                got: data.len(),
            });
        }
        let n = data.len() / 2;
        Ok(Self { data, n })
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn col(&self, i: usize) -> [T; 2] {
        [self.data[2 * i], self.data[2 * i + 1]]
    }

    #[inline]
    pub fn set_col(&mut self, i: usize, v: [T; 2]) {
        self.data[2 * i] = v[0];
        self.data[2 * i + 1] = v[1];
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn columns(&self) -> impl Iterator<Item = [T; 2]> + '_ {
        self.data.chunks_exact(2).map(|c| [c[0], c[1]])
    }

    /// Frobenius inner product `Σ_i u_i·v_i`.
    pub fn fdot(&self, other: &Self) -> T {
        debug_assert_eq!(self.n, other.n);
        let mut acc = T::zero();
        for (a, b) in self.data.iter().zip(&other.data) {
            acc += *a * *b;
        }
        acc
    }

    pub fn fnorm(&self) -> T {
        self.fdot(self).sqrt()
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: T, x: &Self) {
        debug_assert_eq!(self.n, x.n);
        for (s, v) in self.data.iter_mut().zip(&x.data) {
            *s += a * *v;
        }
    }

    pub fn scale(&mut self, a: T) {
        for v in &mut self.data {
            *v *= a;
        }
    }

    pub fn fill_zero(&mut self) {
        self.data.fill(T::zero());
    }

    pub fn copy_from(&mut self, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        self.data.copy_from_slice(&other.data);
    }

    /// Largest column-norm deviation from 1.
    pub fn max_unit_deviation(&self) -> T {
        let mut worst = T::zero();
        for c in self.columns() {
            let dev = ((c[0] * c[0] + c[1] * c[1]).sqrt() - T::one()).abs();
            if dev > worst {
                worst = dev;
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fdot_and_axpy() {
        let mut a = Matrix2xN::<f64>::zeros(2);
        a.set_col(0, [1.0, 2.0]);
        a.set_col(1, [3.0, 4.0]);
        let b = a.clone();
        assert_eq!(a.fdot(&b), 1.0 + 4.0 + 9.0 + 16.0);
        a.axpy(-1.0, &b);
        assert_eq!(a.fnorm(), 0.0);
    }

    #[test]
    fn interleaved_requires_even_length() {
        assert!(Matrix2xN::<f64>::from_interleaved(vec![1.0, 2.0, 3.0]).is_err());
        let m = Matrix2xN::<f64>::from_interleaved(vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(m.n_cols(), 2);
        assert_eq!(m.max_unit_deviation(), 0.0);
    }
}
