//! Equivalence of temporal-Galerkin semi-discretization with the covariant
//! spacetime equations on tensor-product elements.
//!
//! Discretizing the semi-discrete Euler-Lagrange equations in time with hat
//! test functions produces, row for row, the covariant residual assembled on
//! the tensor-product spacetime space with the same density and quadrature.
//! The identity holds at arbitrary coefficients, not only solutions, and is
//! checked on the rows whose temporal test functions vanish at the ends of
//! the time interval.

use super::{CanonicalError, HamiltonianSystem};
use crate::covariant::Problem;
use crate::feec::FieldSet;
use crate::mesh::full_domain;
use crate::quad::gauss_on_interval;
use std::sync::Arc;

/// Outcome of the equivalence check.
#[derive(Clone, Debug)]
pub struct TensorEquivalence {
    /// Rows compared (flat dof indices with time-interior test functions).
    pub compared_dofs: Vec<usize>,
    /// Temporal-Galerkin residual of the semi-discrete equations.
    pub galerkin: Vec<f64>,
    /// Covariant residual on the tensor-product space.
    pub covariant: Vec<f64>,
    /// Maximum absolute difference over compared rows.
    pub max_difference: f64,
    /// Maximum absolute compared entry, for relative comparisons.
    pub scale: f64,
}

/// Assemble both residual routes for one coefficient set and compare.
///
/// The covariant problem must share the density object with the semi-discrete
/// system and its spatial mesh must match the system's slice.
pub fn tensor_product_equivalence(
    system: &HamiltonianSystem,
    problem: &Problem,
    coeffs: &FieldSet,
) -> Result<TensorEquivalence, CanonicalError> {
    if !Arc::ptr_eq(&system.density_handle(), &problem.density_handle()) {
        return Err(CanonicalError::BasisMismatch(
            "the two routes must share one density object".into(),
        ));
    }
    if problem.mesh().x_mesh() != system.space().mesh() {
        return Err(CanonicalError::BasisMismatch(
            "spatial meshes differ".into(),
        ));
    }
    if coeffs.space().mesh() != problem.mesh() {
        return Err(CanonicalError::BasisMismatch(
            "coefficients live on a different spacetime mesh".into(),
        ));
    }

    let mesh = problem.mesh();
    let m = system.components();
    let nx = mesh.x_mesh().node_count();
    let nt = mesh.t_mesh().node_count();
    let n2d = mesh.node_count();
    let n_spatial = system.dof_count();
    let dt = mesh.dt();

    // temporal-Galerkin residual
    let q = system.density().quadrature_points();
    let mut galerkin = vec![0.0; m * n2d];
    let mut phi = vec![0.0; n_spatial];
    let mut phi_dot = vec![0.0; n_spatial];
    for et in 0..mesh.m() {
        let (t0, t1) = mesh.t_mesh().element_bounds(et);
        for (t, w) in gauss_on_interval(q, t0, t1) {
            let a = (t - t0) / dt;
            let hats = [1.0 - a, a];
            let hat_dots = [-1.0 / dt, 1.0 / dt];
            for c in 0..m {
                for xi in 0..nx {
                    let lo = coeffs.coeff(c, mesh.node_id(et, xi));
                    let hi = coeffs.coeff(c, mesh.node_id(et + 1, xi));
                    phi[c * nx + xi] = lo * hats[0] + hi * hats[1];
                    phi_dot[c * nx + xi] = lo * hat_dots[0] + hi * hat_dots[1];
                }
            }
            let g = system.lagrangian_phi_gradient(t, &phi, &phi_dot)?;
            let b = system.lagrangian_velocity_gradient(t, &phi, &phi_dot)?;
            for c in 0..m {
                for xi in 0..nx {
                    for (local, ti) in [et, et + 1].into_iter().enumerate() {
                        galerkin[c * n2d + mesh.node_id(ti, xi)] += w
                            * (g[c * nx + xi] * hats[local]
                                + b[c * nx + xi] * hat_dots[local]);
                    }
                }
            }
        }
    }

    // covariant residual on the same coefficients
    let region = full_domain(mesh);
    let covariant = problem
        .assemble_residual(coeffs, &region)
        .map_err(|e| CanonicalError::BasisMismatch(e.to_string()))?;

    // compare rows whose temporal test functions vanish at the interval ends
    let mut compared_dofs = Vec::new();
    for c in 0..m {
        for ti in 1..nt.saturating_sub(1) {
            for xi in 0..nx {
                compared_dofs.push(c * n2d + mesh.node_id(ti, xi));
            }
        }
    }
    let mut max_difference = 0.0f64;
    let mut scale = 0.0f64;
    for &d in &compared_dofs {
        max_difference = max_difference.max((galerkin[d] - covariant[d]).abs());
        scale = scale.max(galerkin[d].abs()).max(covariant[d].abs());
    }
    Ok(TensorEquivalence {
        compared_dofs,
        galerkin,
        covariant,
        max_difference,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::SpatialSpace;
    use crate::lagrangian::{builtin_nonlinear_wave_poisson, Nonlinearity};
    use crate::mesh::build_tensor_mesh;

    fn setup(
        nonlin: Nonlinearity,
        periodic: bool,
    ) -> (HamiltonianSystem, Problem, FieldSet) {
        let density = Arc::new(builtin_nonlinear_wave_poisson(-1, nonlin).unwrap());
        let mesh = build_tensor_mesh((0.0, 0.7), (0.0, 1.0), 5, 6, periodic).unwrap();
        let space = SpatialSpace::new(
            mesh.x_mesh(),
            crate::feec::MetricSignature::euclidean(1),
        )
        .unwrap();
        let system = HamiltonianSystem::new(space, density.clone()).unwrap();
        let problem = Problem::new(&mesh, density).unwrap();
        let coeffs = FieldSet::from_fn(problem.space(), 1, |t, x, _| {
            (2.7 * t - 1.0).sin() * (1.9 * x).cos() + 0.4 * t * x
        });
        (system, problem, coeffs)
    }

    #[test]
    fn zero_coefficients_give_zero_residuals() {
        let (system, problem, _) = setup(Nonlinearity::zero(), false);
        let zeros = problem.zero_state();
        let eq = tensor_product_equivalence(&system, &problem, &zeros).unwrap();
        assert_eq!(eq.scale, 0.0);
        assert_eq!(eq.max_difference, 0.0);
    }

    #[test]
    fn linear_wave_routes_agree_to_round_off() {
        for periodic in [false, true] {
            let (system, problem, coeffs) = setup(Nonlinearity::zero(), periodic);
            let eq = tensor_product_equivalence(&system, &problem, &coeffs).unwrap();
            assert!(
                eq.max_difference <= 1e-13 * eq.scale.max(1.0),
                "difference {:.3e} at scale {:.3e}",
                eq.max_difference,
                eq.scale
            );
        }
    }

    #[test]
    fn quartic_routes_agree_to_round_off() {
        let (system, problem, coeffs) = setup(Nonlinearity::power(4, 0.25), false);
        let eq = tensor_product_equivalence(&system, &problem, &coeffs).unwrap();
        assert!(
            eq.max_difference <= 1e-13 * eq.scale.max(1.0),
            "difference {:.3e} at scale {:.3e}",
            eq.max_difference,
            eq.scale
        );
    }

    #[test]
    fn mismatched_density_objects_are_rejected() {
        let (system, _, coeffs) = setup(Nonlinearity::zero(), false);
        let other_density = builtin_nonlinear_wave_poisson(-1, Nonlinearity::zero()).unwrap();
        let mesh = build_tensor_mesh((0.0, 0.7), (0.0, 1.0), 5, 6, false).unwrap();
        let other = Problem::new(&mesh, other_density).unwrap();
        assert!(matches!(
            tensor_product_equivalence(&system, &other, &coeffs),
            Err(CanonicalError::BasisMismatch(_))
        ));
    }
}
