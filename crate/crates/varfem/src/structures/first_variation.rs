//! First variations: directions whose flow preserves the localized equations.
//!
//! At a solution, a first variation is a kernel vector of the interior rows of
//! the action Hessian. The basis built here is constructive: one vector per
//! boundary dof, unit on that dof, with interior coefficients solving the
//! linearized interior equations.

use super::{region_dofs, StructuresError, VariationField};
use crate::covariant::Problem;
use crate::feec::FieldSet;
use crate::linalg::{self, TripletBuilder};
use crate::mesh::RegularRegion;

/// One basis vector per boundary dof of the region: unit boundary coefficient,
/// interior coefficients solving the linearized interior equations. Each
/// returned direction satisfies `||(H V)|_interior||_inf <= 1e-8 ||H||_inf`.
pub fn first_variation_basis(
    problem: &Problem,
    region: &RegularRegion,
    state: &FieldSet,
) -> Result<Vec<VariationField>, StructuresError> {
    let dofs = region_dofs(problem, region)?;
    let hessian = problem.assemble_jacobian(state, region)?;
    let total = problem.dof_count();

    let mut local_of = vec![usize::MAX; total];
    for (local, &d) in dofs.interior.iter().enumerate() {
        local_of[d] = local;
    }
    let ni = dofs.interior.len();

    // interior block and its coupling columns to each boundary dof
    let mut block = TripletBuilder::new(ni, ni);
    for (local_row, &d) in dofs.interior.iter().enumerate() {
        for (col, v) in hessian.row(d) {
            let lc = local_of[col];
            if lc != usize::MAX {
                block.push(local_row, lc, v);
            }
        }
    }
    let block = block.build();

    let mut basis = Vec::with_capacity(dofs.boundary.len());
    for &b in &dofs.boundary {
        let mut rhs = vec![0.0; ni];
        for (local_row, &d) in dofs.interior.iter().enumerate() {
            rhs[local_row] = -hessian.get(d, b);
        }
        let interior = if ni == 0 {
            Vec::new()
        } else {
            linalg::solve_symmetric(&block, &rhs)
                .map_err(|_| StructuresError::SingularInteriorBlock)?
        };
        let mut coeffs = vec![0.0; total];
        coeffs[b] = 1.0;
        for (local, &d) in dofs.interior.iter().enumerate() {
            coeffs[d] = interior[local];
        }
        basis.push(VariationField::from_coeffs(problem, coeffs)?);
    }
    Ok(basis)
}
