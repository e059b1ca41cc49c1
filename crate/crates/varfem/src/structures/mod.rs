//! The discrete variational structures as executable diagnostics.
//!
//! Everything here lives in coefficient space: with the region's dofs split
//! into boundary-trace and interior parts, the variation of the localized
//! action along a constant vertical vector field `V` decomposes as
//!
//! ```text
//! dS_U . V  =  EL(V)  +  Theta(V)
//! ```
//!
//! where `EL` pairs the residual with the interior part (the Euler-Lagrange
//! one-form; zero at solutions) and `Theta` pairs it with the boundary part
//! (the discrete Cartan form). The Cartan form also has a density-level
//! realization as a boundary flux plus a boundary-ring sum over the weak
//! Euler-Lagrange expression; both are computed here and cross-validated.

mod current;
mod equivariance;
mod first_variation;
mod multisymplectic;
mod noether;
mod weak_el;

pub use current::{noether_current_norms, CurrentDecayEntry};
pub use equivariance::{equivariance_check, SmoothSample};
pub use first_variation::first_variation_basis;
pub use multisymplectic::multisymplectic_residual;
pub use noether::{noether_check, noether_rearrangement, NoetherReport};
pub use weak_el::{boundary_flux, symmetry_variation_integral, weak_el_pairing};

use crate::covariant::{CovariantError, Problem};
use crate::feec::{FeecError, FieldSet};
use crate::linalg::norm2;
use crate::mesh::{boundary_dof_sets, MeshError, RegularRegion};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StructuresError {
    #[error("state does not satisfy the localized equations: interior residual {residual:.3e} exceeds {threshold:.3e}")]
    NotASolution { residual: f64, threshold: f64 },
    #[error("interior block of the action Hessian is singular")]
    SingularInteriorBlock,
    #[error("generator is not projection-equivariant: residual {residual:.3e}")]
    NotEquivariant { residual: f64 },
    #[error("meshes are not nested: coarse {coarse} elements do not divide fine {fine}")]
    MeshNotNested { coarse: usize, fine: usize },
    #[error("variation has {got} coefficients, expected {expected}")]
    VariationLength { got: usize, expected: usize },
    #[error(transparent)]
    Covariant(#[from] CovariantError),
    #[error(transparent)]
    Feec(#[from] FeecError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}

/// Default tolerance used when gating operations that require a solved state.
pub const DEFAULT_SOLUTION_TOL: f64 = 1e-10;

/// A constant vertical vector field, identified with a coefficient vector of
/// the same shape as a state.
#[derive(Clone, Debug)]
pub struct VariationField {
    field: FieldSet,
}

impl VariationField {
    pub fn from_field(field: FieldSet) -> Self {
        Self { field }
    }

    pub fn from_coeffs(problem: &Problem, coeffs: Vec<f64>) -> Result<Self, StructuresError> {
        if coeffs.len() != problem.dof_count() {
            return Err(StructuresError::VariationLength {
                got: coeffs.len(),
                expected: problem.dof_count(),
            });
        }
        let mut field = problem.zero_state();
        field.coeffs_mut().copy_from_slice(&coeffs);
        Ok(Self { field })
    }

    /// Nodal sampling of per-component closures.
    pub fn from_fn(problem: &Problem, f: impl Fn(f64, f64, usize) -> f64) -> Self {
        Self {
            field: FieldSet::from_fn(problem.space(), problem.components(), f),
        }
    }

    pub fn field(&self) -> &FieldSet {
        &self.field
    }

    pub fn coeffs(&self) -> &[f64] {
        self.field.coeffs()
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        self.field.coeffs_mut()
    }

    /// The part supported on the region's boundary-trace dofs.
    pub fn boundary_part(&self, dofs: &RegionDofs) -> VariationField {
        let mut out = self.field.clone();
        out.coeffs_mut().fill(0.0);
        for &d in &dofs.boundary {
            out.coeffs_mut()[d] = self.field.coeffs()[d];
        }
        Self { field: out }
    }

    /// The part supported on the region's interior dofs.
    pub fn interior_part(&self, dofs: &RegionDofs) -> VariationField {
        let mut out = self.field.clone();
        out.coeffs_mut().fill(0.0);
        for &d in &dofs.interior {
            out.coeffs_mut()[d] = self.field.coeffs()[d];
        }
        Self { field: out }
    }
}

/// Region-relative dof partition expanded over field components.
#[derive(Clone, Debug)]
pub struct RegionDofs {
    /// Flat dof indices with nonvanishing trace on the region boundary.
    pub boundary: Vec<usize>,
    /// Flat dof indices interior to the region.
    pub interior: Vec<usize>,
    /// The boundary one-ring elements.
    pub ring_elements: Vec<usize>,
}

/// Expand the scalar-space dof partition over all components of a problem.
pub fn region_dofs(
    problem: &Problem,
    region: &RegularRegion,
) -> Result<RegionDofs, StructuresError> {
    let sets = boundary_dof_sets(region, problem.space())?;
    let n = problem.space().dof_count();
    let m = problem.components();
    let expand = |nodes: &[usize]| -> Vec<usize> {
        let mut out = Vec::with_capacity(m * nodes.len());
        for c in 0..m {
            for &node in nodes {
                out.push(c * n + node);
            }
        }
        out.sort_unstable();
        out
    };
    Ok(RegionDofs {
        boundary: expand(&sets.boundary_dofs),
        interior: expand(&sets.interior_dofs),
        ring_elements: sets.boundary_elements,
    })
}

/// `dS_U . V`: the full residual pairing over the region's dofs.
pub fn action_variation(
    problem: &Problem,
    region: &RegularRegion,
    state: &FieldSet,
    variation: &VariationField,
) -> Result<f64, StructuresError> {
    let r = problem.assemble_residual(state, region)?;
    Ok(r.iter()
        .zip(variation.coeffs().iter())
        .map(|(ri, vi)| ri * vi)
        .sum())
}

/// The Euler-Lagrange one-form `dS_U . V_in`: residual paired with the
/// interior part of the variation. Vanishes for all `V` exactly when the
/// state solves the localized equations.
pub fn el_one_form(
    problem: &Problem,
    region: &RegularRegion,
    state: &FieldSet,
    variation: &VariationField,
) -> Result<f64, StructuresError> {
    let dofs = region_dofs(problem, region)?;
    let r = problem.assemble_residual(state, region)?;
    Ok(dofs
        .interior
        .iter()
        .map(|&d| r[d] * variation.coeffs()[d])
        .sum())
}

/// The coefficient-space discrete Cartan form `Theta(V) = dS_U . V_boundary`
/// without a solution gate; building block for the public operations.
pub fn boundary_pairing(
    problem: &Problem,
    region: &RegularRegion,
    state: &FieldSet,
    variation: &VariationField,
) -> Result<f64, StructuresError> {
    let dofs = region_dofs(problem, region)?;
    let r = problem.assemble_residual(state, region)?;
    Ok(dofs
        .boundary
        .iter()
        .map(|&d| r[d] * variation.coeffs()[d])
        .sum())
}

/// Interior residual norm of a state on a region.
pub fn interior_residual_norm(
    problem: &Problem,
    region: &RegularRegion,
    state: &FieldSet,
) -> Result<f64, StructuresError> {
    let dofs = region_dofs(problem, region)?;
    let r = problem.assemble_residual(state, region)?;
    let restricted: Vec<f64> = dofs.interior.iter().map(|&d| r[d]).collect();
    Ok(norm2(&restricted))
}

/// The discrete Cartan form at a solution of the localized equations.
///
/// Computed in coefficient space as the boundary-dof residual pairing; errors
/// if the interior residual exceeds ten times the tolerance.
pub fn cartan_form(
    problem: &Problem,
    region: &RegularRegion,
    state: &FieldSet,
    variation: &VariationField,
    tol: f64,
) -> Result<f64, StructuresError> {
    let residual = interior_residual_norm(problem, region, state)?;
    let threshold = 10.0 * tol;
    if residual > threshold {
        return Err(StructuresError::NotASolution {
            residual,
            threshold,
        });
    }
    boundary_pairing(problem, region, state, variation)
}

/// The density-level realization of the discrete Cartan form: the boundary
/// flux of the momenta against the variation plus the weak Euler-Lagrange
/// pairing with the variation's boundary part over the ring elements.
///
/// Independent of the assembled residual; agrees with [`cartan_form`] to
/// quadrature accuracy (round-off for polynomial densities).
pub fn cartan_form_density_route(
    problem: &Problem,
    region: &RegularRegion,
    state: &FieldSet,
    variation: &VariationField,
) -> Result<f64, StructuresError> {
    let dofs = region_dofs(problem, region)?;
    let v_boundary = variation.boundary_part(&dofs);
    let flux = boundary_flux(problem, region, state, v_boundary.field())?;
    let ring = weak_el_pairing(problem, region, state, v_boundary.field())?;
    Ok(flux + ring)
}
