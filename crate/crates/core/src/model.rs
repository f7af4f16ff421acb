//! The random-field XY objective in both formulations, its Euclidean
//! derivatives, disorder generation, and the analytic energy bounds.
//!
//! The energy of a configuration is
//!
//! ```text
//! f(θ) = -1/2 Σ_i Σ_{j∈N(i)} cos(θ_i - θ_j) - Δ Σ_i cos(θ_i - φ_i)
//!      = f1(θ) + Δ f2(θ; φ)
//! ```
//!
//! and, writing `x_i = (cos θ_i, sin θ_i)` and `h_i = (cos φ_i, sin φ_i)`,
//!
//! ```text
//! f(X) = -1/2 Σ_i Σ_{j∈N(i)} x_j·x_i - Δ Σ_i h_i·x_i,
//! ```
//!
//! which needs dot products only. Accumulation order is fixed (site-major,
//! neighbors in table order), so serial evaluations are bit-reproducible.

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::matrix::Matrix2xN;
use crate::rng::{substream, Purpose};
use crate::scalar::Real;
use crate::spin::{AngularConfig, CartesianConfig};

/// A problem realization: lattice, disorder strength, and the frozen
/// random-field orientations.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T> {
    lattice: Lattice,
    delta: T,
    field_angles: Vec<T>,
    field: Matrix2xN<T>,
    disorder_seed: u64,
}

impl<T: Real> Instance<T> {
    /// Draws the field orientations i.i.d. uniform on `[0, 2π)`.
    ///
    /// Deterministic: the same `(lattice, seed)` yields bit-identical angles.
    /// `delta = 0` is accepted for test and certificate work; solver-facing
    /// instances use `delta > 0`.
    pub fn generate(lattice: Lattice, delta: T, seed: u64) -> Result<Self> {
        if !(delta >= T::zero()) {
            return Err(Error::param(
                "delta",
                format!("disorder strength must be >= 0, got {delta}"),
            ));
        }
        let mut rng = substream(seed, Purpose::Disorder, 0, 0);
        let tau = std::f64::consts::TAU;
        let field_angles: Vec<T> = (0..lattice.n_sites())
            .map(|_| T::from64(rng.random::<f64>() * tau))
            .collect();
        Ok(Self::assemble(lattice, delta, field_angles, seed))
    }

    /// Rebuilds an instance from explicit field angles (e.g. a loaded file).
    /// The angles are stored exactly as given.
    pub fn from_field_angles(
        lattice: Lattice,
        delta: T,
        field_angles: Vec<T>,
        disorder_seed: u64,
    ) -> Result<Self> {
        if !(delta >= T::zero()) {
            return Err(Error::param(
                "delta",
                format!("disorder strength must be >= 0, got {delta}"),
            ));
        }
        if field_angles.len() != lattice.n_sites() {
            return Err(Error::DimensionMismatch {
                what: "field angles",
                expected: lattice.n_sites(),
                got: field_angles.len(),
            });
        }
        if field_angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidConfig("non-finite field angle".into()));
        }
        Ok(Self::assemble(lattice, delta, field_angles, disorder_seed))
    }

    fn assemble(lattice: Lattice, delta: T, field_angles: Vec<T>, disorder_seed: u64) -> Self {
        let mut field = Matrix2xN::zeros(lattice.n_sites());
        for (i, &phi) in field_angles.iter().enumerate() {
            field.set_col(i, [phi.cos(), phi.sin()]);
        }
        Self {
            lattice,
            delta,
            field_angles,
            field,
            disorder_seed,
        }
    }

    #[inline]
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    #[inline]
    pub fn delta(&self) -> T {
        self.delta
    }

    #[inline]
    pub fn field_angles(&self) -> &[T] {
        &self.field_angles
    }

    #[inline]
    pub fn field_matrix(&self) -> &Matrix2xN<T> {
        &self.field
    }

    #[inline]
    pub fn disorder_seed(&self) -> u64 {
        self.disorder_seed
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.lattice.n_sites()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    /// Same realization with a different disorder strength.
    pub fn with_delta(&self, delta: T) -> Result<Self> {
        Self::from_field_angles(
            self.lattice.clone(),
            delta,
            self.field_angles.clone(),
            self.disorder_seed,
        )
    }

    /// Analytic lower bound `f_low = -(d + Δ) L^d` on the global minimum.
    pub fn lower_bound(&self) -> T {
        -(T::from_count(self.dim()) + self.delta) * T::from_count(self.n_sites())
    }

    fn check_sites(&self, got: usize, what: &'static str) -> Result<()> {
        if got != self.n_sites() {
            return Err(Error::DimensionMismatch {
                what,
                expected: self.n_sites(),
                got,
            });
        }
        Ok(())
    }

    /// Energy in the angular formulation.
    pub fn energy_angular(&self, theta: &AngularConfig<T>) -> Result<T> {
        let (f1, f2) = self.energy_terms_angular(theta)?;
        Ok(f1 + self.delta * f2)
    }

    /// The two energy terms `(f1, f2)` with `f = f1 + Δ f2`.
    ///
    /// `f1 ∈ [-dL^d, dL^d]` and `f2 ∈ [-L^d, L^d]` for every configuration.
    pub fn energy_terms_angular(&self, theta: &AngularConfig<T>) -> Result<(T, T)> {
        self.check_sites(theta.n_sites(), "angular configuration")?;
        let angles = theta.as_slice();
        let mut coupling = T::zero();
        let mut field = T::zero();
        for (i, row) in self.lattice.neighbor_rows().enumerate() {
            let ti = angles[i];
            for &j in row {
                coupling += (ti - angles[j as usize]).cos();
            }
            field += (ti - self.field_angles[i]).cos();
        }
        Ok((-T::half() * coupling, -field))
    }

    /// Energy in the Cartesian formulation (dot products only, no trig).
    pub fn energy_cartesian(&self, x: &CartesianConfig<T>) -> Result<T> {
        self.energy_ambient(x.matrix())
    }

    /// The objective extended to arbitrary 2×N matrices.
    ///
    /// On unit columns it equals [`Self::energy_cartesian`]; off the manifold
    /// it is the same quadratic form, which is what finite-difference checks
    /// of the Euclidean derivatives need.
    pub fn energy_ambient(&self, m: &Matrix2xN<T>) -> Result<T> {
        self.check_sites(m.n_cols(), "cartesian configuration")?;
        Ok(self.energy_mat(m))
    }

    #[inline]
    pub(crate) fn energy_mat(&self, m: &Matrix2xN<T>) -> T {
        let s = m.as_slice();
        let h = self.field.as_slice();
        let mut coupling = T::zero();
        let mut field = T::zero();
        for (i, row) in self.lattice.neighbor_rows().enumerate() {
            let xi = [s[2 * i], s[2 * i + 1]];
            let mut acc = [T::zero(); 2];
            for &j in row {
                let j = j as usize;
                acc[0] += s[2 * j];
                acc[1] += s[2 * j + 1];
            }
            coupling += xi[0] * acc[0] + xi[1] * acc[1];
            field += xi[0] * h[2 * i] + xi[1] * h[2 * i + 1];
        }
        -T::half() * coupling - self.delta * field
    }

    /// Euclidean gradient: column `i` is `-Σ_{j∈N(i)} x_j - Δ h_i`.
    pub fn euclidean_gradient(&self, x: &CartesianConfig<T>) -> Result<Matrix2xN<T>> {
        self.check_sites(x.n_sites(), "cartesian configuration")?;
        let mut out = Matrix2xN::zeros(self.n_sites());
        self.euclidean_gradient_into(x.matrix(), &mut out);
        Ok(out)
    }

    #[inline]
    pub(crate) fn euclidean_gradient_into(&self, m: &Matrix2xN<T>, out: &mut Matrix2xN<T>) {
        let s = m.as_slice();
        let h = self.field.as_slice();
        let o = out.as_mut_slice();
        for (i, row) in self.lattice.neighbor_rows().enumerate() {
            let mut acc = [T::zero(); 2];
            for &j in row {
                let j = j as usize;
                acc[0] += s[2 * j];
                acc[1] += s[2 * j + 1];
            }
            o[2 * i] = -acc[0] - self.delta * h[2 * i];
            o[2 * i + 1] = -acc[1] - self.delta * h[2 * i + 1];
        }
    }

    /// Euclidean Hessian operator applied to a direction: column `i` is
    /// `-Σ_{j∈N(i)} v_j`. Linear in `V` and independent of the base point.
    pub fn euclidean_hessian_vec(&self, v: &Matrix2xN<T>) -> Result<Matrix2xN<T>> {
        self.check_sites(v.n_cols(), "direction matrix")?;
        let mut out = Matrix2xN::zeros(self.n_sites());
        self.euclidean_hessian_into(v, &mut out);
        Ok(out)
    }

    #[inline]
    pub(crate) fn euclidean_hessian_into(&self, v: &Matrix2xN<T>, out: &mut Matrix2xN<T>) {
        let s = v.as_slice();
        let o = out.as_mut_slice();
        for (i, row) in self.lattice.neighbor_rows().enumerate() {
            let mut acc = [T::zero(); 2];
            for &j in row {
                let j = j as usize;
                acc[0] += s[2 * j];
                acc[1] += s[2 * j + 1];
            }
            o[2 * i] = -acc[0];
            o[2 * i + 1] = -acc[1];
        }
    }

    /// Gradient of the angular formulation:
    /// `g_i = Σ_{j∈N(i)} sin(θ_i - θ_j) + Δ sin(θ_i - φ_i)`.
    pub fn euclidean_gradient_angular(&self, theta: &AngularConfig<T>) -> Result<Vec<T>> {
        self.check_sites(theta.n_sites(), "angular configuration")?;
        let angles = theta.as_slice();
        let mut out = Vec::with_capacity(self.n_sites());
        for (i, row) in self.lattice.neighbor_rows().enumerate() {
            let ti = angles[i];
            let mut g = T::zero();
            for &j in row {
                g += (ti - angles[j as usize]).sin();
            }
            out.push(g + self.delta * (ti - self.field_angles[i]).sin());
        }
        Ok(out)
    }

    /// Hessian of the angular formulation applied to a vector.
    pub fn euclidean_hessian_vec_angular(
        &self,
        theta: &AngularConfig<T>,
        v: &[T],
    ) -> Result<Vec<T>> {
        self.check_sites(theta.n_sites(), "angular configuration")?;
        self.check_sites(v.len(), "direction vector")?;
        let angles = theta.as_slice();
        let mut out = Vec::with_capacity(self.n_sites());
        for (i, row) in self.lattice.neighbor_rows().enumerate() {
            let ti = angles[i];
            let mut diag = self.delta * (ti - self.field_angles[i]).cos();
            let mut off = T::zero();
            for &j in row {
                let j = j as usize;
                let c = (ti - angles[j]).cos();
                diag += c;
                off += c * v[j];
            }
            out.push(diag * v[i] - off);
        }
        Ok(out)
    }

    /// The two analytic reference configurations and the upper bound
    /// `min{f(θ^(1)), f(θ^(2))}` they give on the global minimum.
    ///
    /// `θ^(1)` is the constant-angle coupling minimizer (constant fixed at 0
    /// for determinism) and `θ^(2)` aligns every spin with its field.
    pub fn reference_configs(&self) -> Result<ReferenceConfigs<T>> {
        self.reference_configs_scanned(1)
    }

    /// Like [`Self::reference_configs`], but picks the constant of `θ^(1)`
    /// as the best of `steps` evenly spaced angles, tightening the bound.
    pub fn reference_configs_scanned(&self, steps: usize) -> Result<ReferenceConfigs<T>> {
        let steps = steps.max(1);
        let n = self.n_sites();
        let mut best_angle = T::zero();
        let mut best_energy = T::infinity();
        for k in 0..steps {
            let angle = T::tau() * T::from_count(k) / T::from_count(steps);
            let e = self.energy_angular(&AngularConfig::constant(n, angle))?;
            if e < best_energy {
                best_energy = e;
                best_angle = angle;
            }
        }
        let aligned = AngularConfig::constant(n, best_angle);
        let field_aligned = AngularConfig::new(self.field_angles.clone());
        let energy_aligned = best_energy;
        let energy_field_aligned = self.energy_angular(&field_aligned)?;
        Ok(ReferenceConfigs {
            aligned,
            field_aligned,
            energy_aligned,
            energy_field_aligned,
            upper_bound: energy_aligned.min(energy_field_aligned),
        })
    }
}

/// Output of [`Instance::reference_configs`].
#[derive(Debug, Clone)]
pub struct ReferenceConfigs<T> {
    /// Constant-angle configuration minimizing the coupling term.
    pub aligned: AngularConfig<T>,
    /// Field-aligned configuration minimizing the disorder term.
    pub field_aligned: AngularConfig<T>,
    pub energy_aligned: T,
    pub energy_field_aligned: T,
    /// `min{f(θ^(1)), f(θ^(2))}`, an upper bound on the global minimum.
    pub upper_bound: T,
}

/// Disorder strength at which the minima of the two energy terms carry equal
/// weight: `min f1 / min f2 = d`. Exposed for reporting only.
pub fn term_balance_delta(d: usize) -> f64 {
    d as f64
}
