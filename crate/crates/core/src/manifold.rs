//! Geometry of the product of circles embedded columnwise in 2×N matrices:
//! tangent projection, retraction, Riemannian derivatives, transport, and
//! random points.
//!
//! The metric is the embedded Frobenius metric, so the Riemannian gradient is
//! the tangent projection of the Euclidean one. The retraction normalizes
//! each column (the metric projection retraction), and the Hessian carries
//! the exact sphere curvature correction `-(x_i·∇_i f) v_i`, making the
//! trust-region model genuinely second order.

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::matrix::Matrix2xN;
use crate::model::Instance;
use crate::rng::{substream, Purpose};
use crate::scalar::Real;
use crate::spin::CartesianConfig;

/// A tangent direction: per column, `x_i · v_i = 0` at its base point.
///
/// The base is not stored; producers guarantee tangency by construction and
/// checked-mode callers can re-validate with [`is_tangent_at`].
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<T> {
    value: Matrix2xN<T>,
}

impl<T: Real> TangentVector<T> {
    pub fn zero(n_sites: usize) -> Self {
        Self {
            value: Matrix2xN::zeros(n_sites),
        }
    }

    #[inline]
    pub fn value(&self) -> &Matrix2xN<T> {
        &self.value
    }

    pub fn into_value(self) -> Matrix2xN<T> {
        self.value
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.value.n_cols()
    }

    /// Scales in place; tangency is preserved.
    pub fn scale(&mut self, a: T) {
        self.value.scale(a);
    }

    pub(crate) fn from_raw(value: Matrix2xN<T>) -> Self {
        Self { value }
    }
}

/// Frobenius inner product `Σ_i u_i·v_i` of two tangent vectors.
pub fn inner<T: Real>(u: &TangentVector<T>, v: &TangentVector<T>) -> T {
    u.value.fdot(&v.value)
}

pub fn norm<T: Real>(v: &TangentVector<T>) -> T {
    v.value.fnorm()
}

/// Removes the normal component of every column: `u_i - (x_i·u_i) x_i`.
pub fn project_tangent<T: Real>(
    x: &CartesianConfig<T>,
    u: &Matrix2xN<T>,
) -> Result<TangentVector<T>> {
    check_sites(x, u.n_cols())?;
    let mut out = Matrix2xN::zeros(x.n_sites());
    project_into(x, u, &mut out);
    Ok(TangentVector::from_raw(out))
}

#[inline]
pub(crate) fn project_into<T: Real>(
    x: &CartesianConfig<T>,
    u: &Matrix2xN<T>,
    out: &mut Matrix2xN<T>,
) {
    let xs = x.matrix().as_slice();
    let us = u.as_slice();
    let os = out.as_mut_slice();
    for i in 0..x.n_sites() {
        let (xi, yi) = (xs[2 * i], xs[2 * i + 1]);
        let (ui, vi) = (us[2 * i], us[2 * i + 1]);
        let dot = xi * ui + yi * vi;
        os[2 * i] = ui - dot * xi;
        os[2 * i + 1] = vi - dot * yi;
    }
}

/// Moves along `v` and renormalizes each column: `(x_i + v_i)/‖x_i + v_i‖`.
///
/// For tangent `v_i` the denominator is `√(1 + ‖v_i‖²) ≥ 1`, so the map is
/// always defined; `retract(x, 0) = x` exactly.
pub fn retract<T: Real>(x: &CartesianConfig<T>, v: &TangentVector<T>) -> Result<CartesianConfig<T>> {
    check_sites(x, v.n_sites())?;
    Ok(retract_unchecked(x, v.value()))
}

pub(crate) fn retract_unchecked<T: Real>(
    x: &CartesianConfig<T>,
    v: &Matrix2xN<T>,
) -> CartesianConfig<T> {
    let xs = x.matrix().as_slice();
    let vs = v.as_slice();
    let mut out = Matrix2xN::zeros(x.n_sites());
    let os = out.as_mut_slice();
    for i in 0..x.n_sites() {
        let (vx, vy) = (vs[2 * i], vs[2 * i + 1]);
        if vx == T::zero() && vy == T::zero() {
            // Zero step: the identity axiom holds bit-for-bit.
            os[2 * i] = xs[2 * i];
            os[2 * i + 1] = xs[2 * i + 1];
            continue;
        }
        let a = xs[2 * i] + vx;
        let b = xs[2 * i + 1] + vy;
        let norm = (a * a + b * b).sqrt();
        debug_assert!(norm > T::zero(), "retraction hit a zero column");
        os[2 * i] = a / norm;
        os[2 * i + 1] = b / norm;
    }
    CartesianConfig::try_from_matrix(out, T::from64(1e-6)).expect("normalized columns")
}

/// Tangent projection of the Euclidean gradient; its norm vanishing
/// characterizes first-order critical points on the manifold.
pub fn riemannian_gradient<T: Real>(
    inst: &Instance<T>,
    x: &CartesianConfig<T>,
) -> Result<TangentVector<T>> {
    check_sites(x, inst.n_sites())?;
    let egrad = inst.euclidean_gradient(x)?;
    project_tangent(x, &egrad)
}

/// Riemannian Hessian operator at a fixed base point.
///
/// Column `i` of the output is `P_{x_i}(H_f[V]_i) - (x_i·∇_i f) v_i`. The
/// normal coefficients `x_i·∇_i f` depend only on the base point, so they are
/// computed once and reused across the many applications a trust-region
/// subproblem makes.
pub struct RiemannianHessian<'a, T> {
    inst: &'a Instance<T>,
    x: &'a CartesianConfig<T>,
    normal_coeff: Vec<T>,
}

impl<'a, T: Real> RiemannianHessian<'a, T> {
    pub fn at(inst: &'a Instance<T>, x: &'a CartesianConfig<T>) -> Result<Self> {
        check_sites(x, inst.n_sites())?;
        let egrad = inst.euclidean_gradient(x)?;
        Ok(Self::with_euclidean_gradient(inst, x, &egrad))
    }

    /// Reuses an already-computed Euclidean gradient at `x`.
    pub fn with_euclidean_gradient(
        inst: &'a Instance<T>,
        x: &'a CartesianConfig<T>,
        egrad: &Matrix2xN<T>,
    ) -> Self {
        let xs = x.matrix().as_slice();
        let gs = egrad.as_slice();
        let normal_coeff = (0..x.n_sites())
            .map(|i| xs[2 * i] * gs[2 * i] + xs[2 * i + 1] * gs[2 * i + 1])
            .collect();
        Self {
            inst,
            x,
            normal_coeff,
        }
    }

    pub fn apply(&self, v: &TangentVector<T>) -> TangentVector<T> {
        let mut out = Matrix2xN::zeros(v.n_sites());
        self.apply_raw(v.value(), &mut out);
        TangentVector::from_raw(out)
    }

    pub(crate) fn apply_raw(&self, v: &Matrix2xN<T>, out: &mut Matrix2xN<T>) {
        debug_assert_eq!(v.n_cols(), self.inst.n_sites());
        self.inst.euclidean_hessian_into(v, out);
        let xs = self.x.matrix().as_slice();
        let vs = v.as_slice();
        let os = out.as_mut_slice();
        for i in 0..self.inst.n_sites() {
            let (xi, yi) = (xs[2 * i], xs[2 * i + 1]);
            let c = self.normal_coeff[i];
            // Project after the curvature term: a stray normal component of
            // v would otherwise be scaled by c on every application and grow
            // exponentially across CG iterations.
            let a = os[2 * i] - c * vs[2 * i];
            let b = os[2 * i + 1] - c * vs[2 * i + 1];
            let dot = xi * a + yi * b;
            os[2 * i] = a - dot * xi;
            os[2 * i + 1] = b - dot * yi;
        }
    }
}

/// Riemannian Hessian applied to a single direction.
pub fn riemannian_hessian_vec<T: Real>(
    inst: &Instance<T>,
    x: &CartesianConfig<T>,
    v: &TangentVector<T>,
) -> Result<TangentVector<T>> {
    check_sites(x, v.n_sites())?;
    Ok(RiemannianHessian::at(inst, x)?.apply(v))
}

/// Projects a tangent vector from a previous base point onto the tangent
/// space at `x_new` (the transport used by the conjugate-gradient solver).
pub fn transport<T: Real>(
    x_new: &CartesianConfig<T>,
    v: &TangentVector<T>,
) -> Result<TangentVector<T>> {
    project_tangent(x_new, v.value())
}

/// Uniform random configuration: every column i.i.d. uniform on the circle.
///
/// Deterministic per seed; the stream is independent of the disorder stream
/// even when the seeds coincide.
pub fn random_point<T: Real>(lat: &Lattice, seed: u64) -> CartesianConfig<T> {
    random_point_indexed(lat, seed, 0)
}

/// The `index`-th point of the seed's start stream: a whole family of
/// independent starting points from one seed.
pub fn random_point_indexed<T: Real>(lat: &Lattice, seed: u64, index: u64) -> CartesianConfig<T> {
    let mut rng = substream(seed, Purpose::Start, 0, index);
    random_point_rng(lat, &mut rng)
}

pub(crate) fn random_point_rng<T: Real>(lat: &Lattice, rng: &mut impl Rng) -> CartesianConfig<T> {
    let tau = std::f64::consts::TAU;
    let mut mat = Matrix2xN::zeros(lat.n_sites());
    for i in 0..lat.n_sites() {
        let a = T::from64(rng.random::<f64>() * tau);
        mat.set_col(i, [a.cos(), a.sin()]);
    }
    CartesianConfig::try_from_matrix(mat, T::from64(1e-12)).expect("unit columns by construction")
}

/// Whether `v` is tangent at `x` within `tol` per column (checked mode).
pub fn is_tangent_at<T: Real>(x: &CartesianConfig<T>, v: &Matrix2xN<T>, tol: T) -> bool {
    if x.n_sites() != v.n_cols() {
        return false;
    }
    x.matrix()
        .columns()
        .zip(v.columns())
        .all(|(xc, vc)| {
            let dot = (xc[0] * vc[0] + xc[1] * vc[1]).abs();
            let scale = T::one() + (vc[0] * vc[0] + vc[1] * vc[1]).sqrt();
            dot <= tol * scale
        })
}

fn check_sites<T: Real>(x: &CartesianConfig<T>, got: usize) -> Result<()> {
    if x.n_sites() != got {
        return Err(Error::DimensionMismatch {
            what: "tangent/base site count",
            expected: x.n_sites(),
            got,
        });
    }
    Ok(())
}
