//! Quadrature-approximated actions and the variational ordering property.
//!
//! Applying a quadrature rule to the action and then taking variations keeps
//! the system variational: the residual is the exact gradient of the
//! quadrature action. Applying the same rule to the strong-form equations
//! instead (collocating the pointwise Euler-Lagrange expression) generally
//! yields a different, non-variational system. For the nodal-vertex rule with
//! nodal shape functions the two orderings coincide, because the distributional
//! part of the weak codifferential is exactly captured by the rule's trace on
//! the element edges.

use super::{CovariantError, Problem};
use crate::feec::FieldSet;
use crate::mesh::{EdgeKind, RegularRegion};
use crate::quad::gauss_legendre;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureKind {
    /// The four element corners with equal weights (tensor trapezoid).
    NodalVertex,
    /// Tensor Gauss rule with `p` points per direction.
    Gauss(usize),
}

/// Per-element quadrature nodes in reference coordinates with weights that
/// sum to one (scaled by the element measure at evaluation time).
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    kind: QuadratureKind,
    ref_points: Vec<([f64; 2], f64)>,
}

impl QuadratureRule {
    pub fn nodal_vertex() -> Self {
        let c = [
            ([0.0, 0.0], 0.25),
            ([1.0, 0.0], 0.25),
            ([0.0, 1.0], 0.25),
            ([1.0, 1.0], 0.25),
        ];
        Self {
            kind: QuadratureKind::NodalVertex,
            ref_points: c.to_vec(),
        }
    }

    pub fn gauss(points_per_direction: usize) -> Self {
        let (nodes, weights) = gauss_legendre(points_per_direction);
        let mut ref_points = Vec::with_capacity(points_per_direction * points_per_direction);
        for (i, &ti) in nodes.iter().enumerate() {
            for (j, &xj) in nodes.iter().enumerate() {
                ref_points.push((
                    [0.5 * (ti + 1.0), 0.5 * (xj + 1.0)],
                    0.25 * weights[i] * weights[j],
                ));
            }
        }
        Self {
            kind: QuadratureKind::Gauss(points_per_direction),
            ref_points,
        }
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    /// Reference points and weights; weights sum to 1.
    pub fn ref_points(&self) -> &[([f64; 2], f64)] {
        &self.ref_points
    }
}

/// The action approximated by the rule over the region's elements.
pub fn quadrature_action(
    problem: &Problem,
    state: &FieldSet,
    region: &RegularRegion,
    rule: &QuadratureRule,
) -> Result<f64, CovariantError> {
    let m = problem.components();
    let mut values = vec![0.0; m];
    let mut grads = vec![[0.0; 2]; m];
    let mut total = 0.0;
    for &e in region.elements() {
        let (t0, t1, x0, x1) = problem.mesh().element_bounds(e);
        let measure = (t1 - t0) * (x1 - x0);
        for &([rt, rx], w) in rule.ref_points() {
            let t = t0 + rt * (t1 - t0);
            let x = x0 + rx * (x1 - x0);
            state.eval_in_element(e, t, x, &mut values, &mut grads);
            total += w * measure * problem.density().value(t, x, &values, &grads);
        }
    }
    Ok(total)
}

/// Gradient of [`quadrature_action`] with respect to the coefficients: the
/// variational (quadrature-before-variation) residual.
pub fn quadrature_residual(
    problem: &Problem,
    state: &FieldSet,
    region: &RegularRegion,
    rule: &QuadratureRule,
) -> Result<Vec<f64>, CovariantError> {
    let m = problem.components();
    let n = problem.space().dof_count();
    let mut residual = vec![0.0; m * n];
    let mut values = vec![0.0; m];
    let mut grads = vec![[0.0; 2]; m];
    let mut d_phi = vec![0.0; m];
    let mut d_grad = vec![[0.0; 2]; m];
    for &e in region.elements() {
        let (t0, t1, x0, x1) = problem.mesh().element_bounds(e);
        let measure = (t1 - t0) * (x1 - x0);
        let nodes = problem.mesh().element_corner_nodes(e);
        for &([rt, rx], w) in rule.ref_points() {
            let t = t0 + rt * (t1 - t0);
            let x = x0 + rx * (x1 - x0);
            state.eval_in_element(e, t, x, &mut values, &mut grads);
            problem.density().d_phi(t, x, &values, &grads, &mut d_phi);
            problem.density().d_grad(t, x, &values, &grads, &mut d_grad);
            let (basis, bg) = problem.space().scalar_basis(e, t, x);
            for c in 0..m {
                for k in 0..4 {
                    residual[c * n + nodes[k]] += w
                        * measure
                        * (d_phi[c] * basis[k]
                            + d_grad[c][0] * bg[k][0]
                            + d_grad[c][1] * bg[k][1]);
                }
            }
        }
    }
    Ok(residual)
}

/// The non-variational ordering: apply the rule to the strong-form
/// Euler-Lagrange integrand `(d2L - div p) v` after integrating by parts.
///
/// For rules with nodes on the element boundary (the nodal-vertex rule), the
/// weak codifferential's edge-jump distribution is integrated with the rule's
/// trace on the edges (endpoint trapezoid); for interior-node Gauss rules the
/// jumps are invisible to the rule, which is exactly why this ordering fails
/// to be variational.
pub fn strong_form_quadrature_residual(
    problem: &Problem,
    state: &FieldSet,
    region: &RegularRegion,
    rule: &QuadratureRule,
) -> Result<Vec<f64>, CovariantError> {
    let m = problem.components();
    let n = problem.space().dof_count();
    let mut residual = vec![0.0; m * n];
    let mut values = vec![0.0; m];
    let mut grads = vec![[0.0; 2]; m];
    let mut d_phi = vec![0.0; m];
    for &e in region.elements() {
        let (t0, t1, x0, x1) = problem.mesh().element_bounds(e);
        let measure = (t1 - t0) * (x1 - x0);
        let nodes = problem.mesh().element_corner_nodes(e);
        for &([rt, rx], w) in rule.ref_points() {
            let t = t0 + rt * (t1 - t0);
            let x = x0 + rx * (x1 - x0);
            state.eval_in_element(e, t, x, &mut values, &mut grads);
            problem.density().d_phi(t, x, &values, &grads, &mut d_phi);
            let div = problem.momentum_divergence_in_element(state, e, t, x)?;
            let (basis, _) = problem.space().scalar_basis(e, t, x);
            for c in 0..m {
                for k in 0..4 {
                    residual[c * n + nodes[k]] +=
                        w * measure * (d_phi[c] - div[c]) * basis[k];
                }
            }
        }
    }
    if rule.kind() == QuadratureKind::NodalVertex {
        // endpoint-trapezoid integration of the codifferential's edge jumps
        for edge in region.interior_mesh_edges() {
            let axis = match edge.kind {
                EdgeKind::Temporal => 1, // jump in the dx momentum component
                EdgeKind::Spatial => 0,
            };
            let length = match edge.kind {
                EdgeKind::Temporal => edge.end.0 - edge.start.0,
                EdgeKind::Spatial => edge.end.1 - edge.start.1,
            };
            let (minus, plus) = edge.elements;
            for (endpoint, point) in [(edge.endpoints.0, edge.start), (edge.endpoints.1, edge.end)]
            {
                let p_minus = problem.momenta_in_element(state, minus, point.0, point.1);
                let p_plus = problem.momenta_in_element(state, plus, point.0, point.1);
                for c in 0..m {
                    let jump = p_minus[c][axis] - p_plus[c][axis];
                    residual[c * n + endpoint] += 0.5 * length * jump;
                }
            }
        }
    }
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{builtin_nonlinear_wave_poisson, Nonlinearity};
    use crate::mesh::{boundary_dof_sets, build_tensor_mesh, full_domain};

    fn test_state(problem: &Problem) -> FieldSet {
        FieldSet::from_fn(problem.space(), 1, |t, x, _| {
            (2.3 * t - 0.7).sin() + 0.4 * x * x - 0.9 * t * x
        })
    }

    #[test]
    fn rule_weights_sum_to_one() {
        for rule in [
            QuadratureRule::nodal_vertex(),
            QuadratureRule::gauss(1),
            QuadratureRule::gauss(3),
        ] {
            let total: f64 = rule.ref_points().iter().map(|(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn quadrature_residual_is_gradient_of_quadrature_action() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 3, 3, false).unwrap();
        let density = builtin_nonlinear_wave_poisson(-1, Nonlinearity::power(4, 1.0)).unwrap();
        let problem = Problem::new(&mesh, density).unwrap();
        let region = full_domain(&mesh);
        let state = test_state(&problem);
        for rule in [QuadratureRule::nodal_vertex(), QuadratureRule::gauss(1)] {
            let r = quadrature_residual(&problem, &state, &region, &rule).unwrap();
            let step = 1e-6;
            for dof in (0..problem.dof_count()).step_by(3) {
                let mut plus = state.clone();
                plus.coeffs_mut()[dof] += step;
                let mut minus = state.clone();
                minus.coeffs_mut()[dof] -= step;
                let fd = (quadrature_action(&problem, &plus, &region, &rule).unwrap()
                    - quadrature_action(&problem, &minus, &region, &rule).unwrap())
                    / (2.0 * step);
                assert!((fd - r[dof]).abs() < 1e-6 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn exact_rule_reproduces_exact_residual_for_massless_wave() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 3, 2, false).unwrap();
        let density = builtin_nonlinear_wave_poisson(-1, Nonlinearity::zero()).unwrap();
        let problem = Problem::new(&mesh, density).unwrap();
        let region = full_domain(&mesh);
        let state = test_state(&problem);
        let exact = problem.assemble_residual(&state, &region).unwrap();
        let quad = quadrature_residual(&problem, &state, &region, &QuadratureRule::gauss(2))
            .unwrap();
        for (a, b) in exact.iter().zip(quad.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn vertex_rule_orderings_coincide_on_interior_dofs() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.3), 4, 4, false).unwrap();
        let density = builtin_nonlinear_wave_poisson(-1, Nonlinearity::power(4, 0.25)).unwrap();
        let problem = Problem::new(&mesh, density).unwrap();
        let region = full_domain(&mesh);
        let state = test_state(&problem);
        let rule = QuadratureRule::nodal_vertex();
        let variational = quadrature_residual(&problem, &state, &region, &rule).unwrap();
        let strong = strong_form_quadrature_residual(&problem, &state, &region, &rule).unwrap();
        let sets = boundary_dof_sets(&region, problem.space()).unwrap();
        let scale = variational.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for &node in &sets.interior_dofs {
            let d = (variational[node] - strong[node]).abs();
            assert!(d <= 1e-13 * scale.max(1.0), "node {node}: {d:.3e}");
        }
    }

    #[test]
    fn one_point_gauss_orderings_differ_for_quartic() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 4, 4, false).unwrap();
        let density = builtin_nonlinear_wave_poisson(-1, Nonlinearity::power(4, 0.25)).unwrap();
        let problem = Problem::new(&mesh, density).unwrap();
        let region = full_domain(&mesh);
        let state = test_state(&problem);
        let rule = QuadratureRule::gauss(1);
        let variational = quadrature_residual(&problem, &state, &region, &rule).unwrap();
        let strong = strong_form_quadrature_residual(&problem, &state, &region, &rule).unwrap();
        let sets = boundary_dof_sets(&region, problem.space()).unwrap();
        let max_diff = sets
            .interior_dofs
            .iter()
            .map(|&node| (variational[node] - strong[node]).abs())
            .fold(0.0f64, f64::max);
        assert!(max_diff > 1e-8, "orderings unexpectedly agree: {max_diff:.3e}");
    }
}
