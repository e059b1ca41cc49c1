//! Quadrature realizations of the boundary flux and the weak Euler-Lagrange
//! pairing.
//!
//! For piecewise-bilinear fields the momenta `p = d3L(j1 phi_h)` are smooth
//! inside elements but jump across mesh edges, so the weak codifferential
//! splits into a cellwise strong divergence plus edge-jump distributions.
//! Integrating both against a test field reproduces the residual pairing
//! `sum_j r_j w^j` minus the region-boundary flux; the functions here compute
//! those pieces by direct quadrature, independently of the assembled residual.

use crate::covariant::{CovariantError, Problem};
use crate::feec::FieldSet;
use crate::mesh::{EdgeKind, RegularRegion};
use crate::quad::{gauss_on_interval, gauss_on_rect};

/// Boundary flux `\oint_{dU} (p . n) w dS`, summed over components, with the
/// momenta evaluated from the inside element.
pub fn boundary_flux(
    problem: &Problem,
    region: &RegularRegion,
    state: &FieldSet,
    test: &FieldSet,
) -> Result<f64, CovariantError> {
    let m = problem.components();
    let q = problem.density().quadrature_points().max(3);
    let mut total = 0.0;
    let mut w_values = vec![0.0; m];
    let mut w_grads = vec![[0.0; 2]; m];
    for edge in region.boundary_edges() {
        let rule = match edge.kind {
            EdgeKind::Temporal => gauss_on_interval(q, edge.start.0, edge.end.0),
            EdgeKind::Spatial => gauss_on_interval(q, edge.start.1, edge.end.1),
        };
        for (s, w) in rule {
            let (t, x) = match edge.kind {
                EdgeKind::Temporal => (s, edge.start.1),
                EdgeKind::Spatial => (edge.start.0, s),
            };
            let p = problem.momenta_in_element(state, edge.inside_element, t, x);
            test.eval_in_element(edge.inside_element, t, x, &mut w_values, &mut w_grads);
            for c in 0..m {
                let flux =
                    p[c][0] * edge.outward_normal[0] + p[c][1] * edge.outward_normal[1];
                total += w * flux * w_values[c];
            }
        }
    }
    Ok(total)
}

/// The weak Euler-Lagrange pairing `int_U EL(j1 phi_h) ^ star w` realized as
/// cellwise `(d2L - div p) w` plus interior-edge jump integrals `[[p . n]] w`.
///
/// Cells and edges where the test field vanishes identically contribute
/// nothing and are skipped, so a test field supported on the boundary ring
/// localizes the sum to the ring automatically.
pub fn weak_el_pairing(
    problem: &Problem,
    region: &RegularRegion,
    state: &FieldSet,
    test: &FieldSet,
) -> Result<f64, CovariantError> {
    let m = problem.components();
    let n = problem.space().dof_count();
    let mesh = problem.mesh();
    let q = problem.density().quadrature_points().max(3);
    let mut total = 0.0;
    let mut w_values = vec![0.0; m];
    let mut w_grads = vec![[0.0; 2]; m];

    let test_vanishes_on = |nodes: &[usize]| -> bool {
        nodes
            .iter()
            .all(|&node| (0..m).all(|c| test.coeffs()[c * n + node] == 0.0))
    };

    for &e in region.elements() {
        let nodes = mesh.element_corner_nodes(e);
        if test_vanishes_on(&nodes) {
            continue;
        }
        let (t0, t1, x0, x1) = mesh.element_bounds(e);
        for ((t, x), w) in gauss_on_rect(q, t0, t1, x0, x1) {
            let d_phi = problem.d_phi_in_element(state, e, t, x);
            let div = problem.momentum_divergence_in_element(state, e, t, x)?;
            test.eval_in_element(e, t, x, &mut w_values, &mut w_grads);
            for c in 0..m {
                total += w * (d_phi[c] - div[c]) * w_values[c];
            }
        }
    }

    for edge in region.interior_mesh_edges() {
        if test_vanishes_on(&[edge.endpoints.0, edge.endpoints.1]) {
            continue;
        }
        let (minus, plus) = edge.elements;
        let axis = match edge.kind {
            EdgeKind::Temporal => 1,
            EdgeKind::Spatial => 0,
        };
        let rule = match edge.kind {
            EdgeKind::Temporal => gauss_on_interval(q, edge.start.0, edge.end.0),
            EdgeKind::Spatial => gauss_on_interval(q, edge.start.1, edge.end.1),
        };
        for (s, w) in rule {
            let (t, x) = match edge.kind {
                EdgeKind::Temporal => (s, edge.start.1),
                EdgeKind::Spatial => (edge.start.0, s),
            };
            let p_minus = problem.momenta_in_element(state, minus, t, x);
            let p_plus = problem.momenta_in_element(state, plus, t, x);
            test.eval_in_element(minus, t, x, &mut w_values, &mut w_grads);
            for c in 0..m {
                let jump = p_minus[c][axis] - p_plus[c][axis];
                total += w * jump * w_values[c];
            }
        }
    }
    Ok(total)
}

/// `int_U delta_xi L`: the variation of the density along the vertical
/// generator field `a = xi_Y(phi_h)`, integrated by quadrature.
pub fn symmetry_variation_integral(
    problem: &Problem,
    region: &RegularRegion,
    state: &FieldSet,
    generator_field: &FieldSet,
) -> Result<f64, CovariantError> {
    let m = problem.components();
    let q = problem.density().quadrature_points().max(3);
    let mut values = vec![0.0; m];
    let mut grads = vec![[0.0; 2]; m];
    let mut a_values = vec![0.0; m];
    let mut a_grads = vec![[0.0; 2]; m];
    let mut d_phi = vec![0.0; m];
    let mut d_grad = vec![[0.0; 2]; m];
    let mut total = 0.0;
    for &e in region.elements() {
        let (t0, t1, x0, x1) = problem.mesh().element_bounds(e);
        for ((t, x), w) in gauss_on_rect(q, t0, t1, x0, x1) {
            state.eval_in_element(e, t, x, &mut values, &mut grads);
            generator_field.eval_in_element(e, t, x, &mut a_values, &mut a_grads);
            problem.density().d_phi(t, x, &values, &grads, &mut d_phi);
            problem.density().d_grad(t, x, &values, &grads, &mut d_grad);
            for c in 0..m {
                total += w
                    * (d_phi[c] * a_values[c]
                        + d_grad[c][0] * a_grads[c][0]
                        + d_grad[c][1] * a_grads[c][1]);
            }
        }
    }
    Ok(total)
}
