//! Ground-state search for the random-field XY model on periodic lattices.
//!
//! The model places a planar unit-vector spin on every site of a periodic
//! `d`-dimensional lattice; spins couple ferromagnetically to their nearest
//! neighbors and to a frozen random field of strength Δ. Finding the
//! lowest-energy configuration is a large non-convex problem, tackled here
//! by reformulating it on the product of circles (a 2×N matrix with unit
//! columns) and combining Riemannian local solvers with MultiStart and
//! Monotonic Basin Hopping global frameworks.
//!
//! The crate is organized along the problem structure:
//!
//! - [`lattice`]: periodic grids, site indexing, neighbor tables.
//! - [`model`]: the energy in angular and Cartesian form, its Euclidean
//!   derivatives, disorder generation, and the analytic bounds.
//! - [`certificates`]: ε-global-minimizer thresholds and gap reports.
//! - [`manifold`]: tangent projection, retraction, Riemannian gradient and
//!   Hessian, random points.
//! - [`local_solvers`]: trust-region (with truncated CG) and
//!   conjugate-gradient minimizers.
//! - [`global_solvers`]: MultiStart and Monotonic Basin Hopping with
//!   fair-budget accounting.
//! - [`oracle`]: exhaustive grid search for desk-scale validation.
//!
//! All kernels are generic over the [`Real`] scalar; the `*64` aliases fix
//! `f64`, which is what the CLI and the file formats use.

pub mod certificates;
pub mod error;
pub mod global_solvers;
pub mod lattice;
pub mod local_solvers;
pub mod manifold;
pub mod matrix;
pub mod model;
pub mod oracle;
mod rng;
pub mod scalar;
pub mod spin;

pub use error::{Error, Result};
pub use lattice::Lattice;
pub use scalar::Real;

/// Default-precision aliases of the core types.
pub type Matrix2xN64 = matrix::Matrix2xN<f64>;
pub type AngularConfig64 = spin::AngularConfig<f64>;
pub type CartesianConfig64 = spin::CartesianConfig<f64>;
pub type Instance64 = model::Instance<f64>;
pub type TangentVector64 = manifold::TangentVector<f64>;
pub type SolverOptions64 = local_solvers::SolverOptions<f64>;
pub type LocalResult64 = local_solvers::LocalResult<f64>;
pub type GlobalOptions64 = global_solvers::GlobalOptions<f64>;
pub type GlobalResult64 = global_solvers::GlobalResult<f64>;
pub type EpsCertificate64 = certificates::EpsCertificate<f64>;
