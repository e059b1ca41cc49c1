//! Lowest-order tensor-product finite element de Rham complex.
//!
//! The concrete family: bilinear (Q1) 0-forms with nodal values, tensor edge
//! 1-forms constant along their edge direction and hat-profiled transversely
//! with signed edge-integral dofs, and piecewise-constant 2-forms with cell
//! integrals. The degree-of-freedom interpolations of this family commute with
//! the exterior derivative, which is what the variational structure downstream
//! relies on.
//!
//! Inner products carry a diagonal metric signature; under a Lorentzian
//! signature the 1-form mass matrix is indefinite and solvers must not assume
//! otherwise.

mod complex;
mod project;
mod space1;
mod space2;

pub use complex::{
    assemble_derivative, assemble_derivative_1d, assemble_mass, assemble_mass_1d,
    CochainComplex1d, CochainComplex2d,
};
pub use project::{evaluate, project, SampledForm};
pub use space1::{FeSpace1d, FormDegree1d};
pub use space2::{FeSpace2d, FieldSet, FormDegree, FormField};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeecError {
    #[error("metric signature entries must be +1 or -1, got {0}")]
    InvalidSignature(i8),
    #[error("metric signature has {got} entries, expected {expected}")]
    SignatureDimension { got: usize, expected: usize },
    #[error("no space of degree {0} exists on this mesh")]
    MissingSpace(usize),
    #[error("coefficient vector has length {got}, space has {expected} dofs")]
    CoefficientLength { got: usize, expected: usize },
    #[error("sampled form degree does not match the requested projection degree")]
    DegreeMismatch,
    #[error(
        "quadrature insufficient for non-polynomial input: commutation residual {residual:.3e}"
    )]
    QuadratureInsufficient { residual: f64 },
    #[error(transparent)]
    Mesh(#[from] crate::mesh::MeshError),
}

/// Diagonal metric signature, one `+1`/`-1` entry per coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricSignature {
    entries: Vec<i8>,
}

impl MetricSignature {
    pub fn new(entries: &[i8]) -> Result<Self, FeecError> {
        for &s in entries {
            if s != 1 && s != -1 {
                return Err(FeecError::InvalidSignature(s));
            }
        }
        Ok(Self {
            entries: entries.to_vec(),
        })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self {
            entries: vec![1; dim],
        }
    }

    /// The 2D spacetime signature `diag(1, eps)`: `eps = +1` for elliptic
    /// problems, `-1` for hyperbolic ones.
    pub fn spacetime(eps: i8) -> Result<Self, FeecError> {
        Self::new(&[1, eps])
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, axis: usize) -> f64 {
        f64::from(self.entries[axis])
    }

    /// Product of all entries (the 2-form pairing weight in 2D).
    pub fn volume_weight(&self) -> f64 {
        self.entries.iter().map(|&s| f64::from(s)).product()
    }
}
