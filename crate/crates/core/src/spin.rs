//! Spin configurations in their two interchangeable representations:
//! a vector of angles, or a 2×N matrix of unit columns `(cos θ_i, sin θ_i)`.

use crate::error::{Error, Result};
use crate::matrix::Matrix2xN;
use crate::scalar::{wrap_angle, Real};

/// Angular representation: one angle per site.
///
/// Angles are unconstrained reals; the energy is 2π-periodic in each of them.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularConfig<T> {
    angles: Vec<T>,
}

impl<T: Real> AngularConfig<T> {
    pub fn new(angles: Vec<T>) -> Self {
        Self { angles }
    }

    pub fn constant(n_sites: usize, angle: T) -> Self {
        Self {
            angles: vec![angle; n_sites],
        }
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.angles.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.angles
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.angles
    }

    pub fn into_vec(self) -> Vec<T> {
        self.angles
    }

    /// Same configuration with every angle wrapped into `[0, 2π)`.
    pub fn wrapped(&self) -> Self {
        Self {
            angles: self.angles.iter().map(|&a| wrap_angle(a)).collect(),
        }
    }

    pub fn to_cartesian(&self) -> CartesianConfig<T> {
        CartesianConfig::from_angles(self)
    }
}

/// Cartesian representation: a 2×N matrix whose columns are unit vectors.
///
/// The unit-norm invariant is maintained by construction; fallible entry
/// points validate it once so the evaluation kernels never have to.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianConfig<T> {
    mat: Matrix2xN<T>,
}

impl<T: Real> CartesianConfig<T> {
    pub fn from_angles(theta: &AngularConfig<T>) -> Self {
        let mut mat = Matrix2xN::zeros(theta.n_sites());
        for (i, &a) in theta.as_slice().iter().enumerate() {
            mat.set_col(i, [a.cos(), a.sin()]);
        }
        Self { mat }
    }

    /// Accepts a matrix whose columns are already unit within `tol`.
    pub fn try_from_matrix(mat: Matrix2xN<T>, tol: T) -> Result<Self> {
        let dev = mat.max_unit_deviation();
        if !dev.is_finite() || dev > tol {
            return Err(Error::InvalidConfig(format!(
                "column norm deviates from 1 by {dev:e} (tolerance {tol:e})"
            )));
        }
        Ok(Self { mat })
    }

    /// Normalizes every column of `mat`; errors on a zero column.
    pub fn normalized_from(mut mat: Matrix2xN<T>) -> Result<Self> {
        for i in 0..mat.n_cols() {
            let c = mat.col(i);
            let norm = (c[0] * c[0] + c[1] * c[1]).sqrt();
            if !(norm.is_finite() && norm > T::zero()) {
                return Err(Error::InvalidConfig(format!(
                    "column {i} cannot be normalized (norm {norm})"
                )));
            }
            mat.set_col(i, [c[0] / norm, c[1] / norm]);
        }
        Ok(Self { mat })
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.mat.n_cols()
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix2xN<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix2xN<T> {
        self.mat
    }

    #[inline]
    pub fn col(&self, i: usize) -> [T; 2] {
        self.mat.col(i)
    }

    /// Angles recovered by `atan2`, wrapped into `[0, 2π)`.
    pub fn to_angles(&self) -> AngularConfig<T> {
        let angles = self
            .mat
            .columns()
            .map(|c| wrap_angle(c[1].atan2(c[0])))
            .collect();
        AngularConfig::new(angles)
    }

    pub fn max_unit_deviation(&self) -> T {
        self.mat.max_unit_deviation()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::angle_distance;
    use proptest::prelude::*;

    #[test]
    fn cartesian_columns_are_unit() {
        let theta = AngularConfig::new(vec![0.0, 1.3, 4.0, 6.1]);
        let x = theta.to_cartesian();
        assert!(x.max_unit_deviation() <= 1e-12);
    }

    #[test]
    fn rejects_non_unit_matrix() {
        let mut m = Matrix2xN::<f64>::zeros(2);
        m.set_col(0, [1.0, 0.0]);
        m.set_col(1, [0.5, 0.5]);
        assert!(CartesianConfig::try_from_matrix(m.clone(), 1e-6).is_err());
        let normalized = CartesianConfig::normalized_from(m).unwrap();
        assert!(normalized.max_unit_deviation() <= 1e-12);
    }

    proptest! {
        /// Round-trip angular -> cartesian -> angular preserves each angle
        /// mod 2π within 1e-10.
        #[test]
        fn roundtrip_preserves_angles(angles in proptest::collection::vec(-10.0f64..10.0, 1..40)) {
            let theta = AngularConfig::new(angles);
            let back = theta.to_cartesian().to_angles();
            for (&a, &b) in theta.as_slice().iter().zip(back.as_slice()) {
                prop_assert!(angle_distance(a, b) <= 1e-10);
            }
        }
    }
}
