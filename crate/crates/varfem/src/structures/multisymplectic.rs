//! The discrete multisymplectic form formula.
//!
//! The exterior derivative of the boundary one-form `Theta`, evaluated on
//! constant vector fields `V, W`, is the boundary-row antisymmetrization of
//! the action Hessian. Evaluated on first variations it vanishes; on generic
//! directions it does not, which the negative controls exploit.

use super::{region_dofs, StructuresError, VariationField};
use crate::covariant::Problem;
use crate::feec::FieldSet;
use crate::mesh::RegularRegion;

/// `d Theta (V, W) = sum_{j in boundary} sum_k H_{jk} (V^k W^j - W^k V^j)`.
pub fn multisymplectic_residual(
    problem: &Problem,
    region: &RegularRegion,
    state: &FieldSet,
    v: &VariationField,
    w: &VariationField,
) -> Result<f64, StructuresError> {
    let dofs = region_dofs(problem, region)?;
    let hessian = problem.assemble_jacobian(state, region)?;
    let hv = hessian.mul_vec(v.coeffs());
    let hw = hessian.mul_vec(w.coeffs());
    let mut total = 0.0;
    for &j in &dofs.boundary {
        total += hv[j] * w.coeffs()[j] - hw[j] * v.coeffs()[j];
    }
    Ok(total)
}
