//! Variational finite element discretization of Lagrangian field theories.
//!
//! This crate discretizes the action principle of a Lagrangian field theory on
//! a tensor-product spacetime mesh using the lowest-order finite element de Rham
//! complex, whose degree-of-freedom interpolations are cochain projections
//! (they commute with the exterior derivative). Because the projections are
//! cochain maps, the discrete equations inherit the variational structure of
//! the continuum theory, and that structure is exposed here as executable
//! diagnostics rather than prose:
//!
//! * [`covariant`] assembles and solves the discrete Euler-Lagrange equations
//!   of the spacetime action, with Dirichlet trace data and Newton iteration.
//! * [`structures`] evaluates the discrete Cartan form, the Euler-Lagrange
//!   one-form, first variations, the multisymplectic form formula, Noether
//!   pairings, and projection-equivariance residuals.
//! * [`canonical`] carries the semi-discrete (method-of-lines) side: the
//!   instantaneous Lagrangian, the mass-matrix symplectic structure, the
//!   Legendre transform, symplectic time stepping, and momentum/energy maps,
//!   together with the tensor-product equivalence between the two routes.
//!
//! The building blocks live in [`mesh`] (interval and tensor-product meshes,
//! regular regions), [`feec`] (the discrete complex: derivative matrices, mass
//! matrices with metric signature, cochain projections), and [`lagrangian`]
//! (density families and their symmetry generators).
//!
//! The `examples/` directory contains one runnable program per capability;
//! the `varfem` binary drives the same machinery from JSON experiment configs.

pub mod canonical;
pub mod covariant;
pub mod feec;
pub mod lagrangian;
pub mod linalg;
pub mod mesh;
pub mod quad;
pub mod run;
pub mod structures;

pub use covariant::{DirichletData, Problem, SolveReport};
pub use feec::{CochainComplex2d, FieldSet, FormField, MetricSignature};
pub use lagrangian::{LagrangianDensity, SymmetryGenerator};
pub use mesh::{IntervalMesh, RegularRegion, TensorMesh2D};
