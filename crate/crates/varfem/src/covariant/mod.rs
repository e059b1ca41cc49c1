//! Assembly and Newton solution of the covariant discrete Euler-Lagrange
//! equations on spacetime meshes.
//!
//! The residual entry for dof `j` is `(d2L, v_j) + (d3L, dv_j)` integrated
//! over a regular region; it is literally the gradient of the assembled
//! action with respect to the coefficients, which the tests exploit through
//! finite-difference cross-checks.

mod newton;
mod quadrature;

pub use newton::{newton_solve, DirichletData, NewtonOptions, SolveReport};
pub use quadrature::{
    quadrature_action, quadrature_residual, strong_form_quadrature_residual, QuadratureKind,
    QuadratureRule,
};

use crate::feec::{CochainComplex2d, FeSpace2d, FeecError, FieldSet, FormDegree};
use crate::lagrangian::{LagrangianDensity, LagrangianError};
use crate::linalg::{CsrMatrix, LinalgError, TripletBuilder};
use crate::mesh::{boundary_dof_sets, MeshError, RegularRegion, TensorMesh2D};
use crate::quad::gauss_on_rect;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CovariantError {
    #[error("newton iteration failed to converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("jacobian interior block is singular at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("state has {got} components, density expects {expected}")]
    ComponentMismatch { got: usize, expected: usize },
    #[error("dirichlet keys must be exactly the global boundary dofs ({0})")]
    BadDirichletKeys(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Feec(#[from] FeecError),
    #[error(transparent)]
    Lagrangian(#[from] LagrangianError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A density tied to the discrete complex it is solved on.
pub struct Problem {
    complex: CochainComplex2d,
    density: std::sync::Arc<LagrangianDensity>,
}

impl Problem {
    pub fn new(
        mesh: &TensorMesh2D,
        density: impl Into<std::sync::Arc<LagrangianDensity>>,
    ) -> Result<Self, CovariantError> {
        let density = density.into();
        let complex = CochainComplex2d::new(mesh, density.metric().clone())?;
        Ok(Self { complex, density })
    }

    /// Shared handle to the density, for pairing with a semi-discrete system.
    pub fn density_handle(&self) -> std::sync::Arc<LagrangianDensity> {
        self.density.clone()
    }

    pub fn mesh(&self) -> &TensorMesh2D {
        self.complex.mesh()
    }

    pub fn complex(&self) -> &CochainComplex2d {
        &self.complex
    }

    pub fn density(&self) -> &LagrangianDensity {
        &self.density
    }

    pub fn space(&self) -> &FeSpace2d {
        self.complex.space(FormDegree::Zero)
    }

    pub fn components(&self) -> usize {
        self.density.components()
    }

    /// Total coefficient count of a state (components x nodes).
    pub fn dof_count(&self) -> usize {
        self.components() * self.space().dof_count()
    }

    pub fn zero_state(&self) -> FieldSet {
        FieldSet::zeros(self.space(), self.components())
    }

    fn check_state(&self, state: &FieldSet) -> Result<(), CovariantError> {
        if state.components() != self.components() {
            return Err(CovariantError::ComponentMismatch {
                got: state.components(),
                expected: self.components(),
            });
        }
        Ok(())
    }

    /// Localized action `S_U` by exact Gauss integration over the region.
    pub fn assemble_action(
        &self,
        state: &FieldSet,
        region: &RegularRegion,
    ) -> Result<f64, CovariantError> {
        self.check_state(state)?;
        let m = self.components();
        let q = self.density.quadrature_points();
        let mut values = vec![0.0; m];
        let mut grads = vec![[0.0; 2]; m];
        let mut total = 0.0;
        for &e in region.elements() {
            let (t0, t1, x0, x1) = self.mesh().element_bounds(e);
            for ((t, x), w) in gauss_on_rect(q, t0, t1, x0, x1) {
                state.eval_in_element(e, t, x, &mut values, &mut grads);
                total += w * self.density.value(t, x, &values, &grads);
            }
        }
        Ok(total)
    }

    /// Gradient of the localized action: a full-length coefficient vector with
    /// nonzero entries only at dofs supported on the region.
    pub fn assemble_residual(
        &self,
        state: &FieldSet,
        region: &RegularRegion,
    ) -> Result<Vec<f64>, CovariantError> {
        self.check_state(state)?;
        let m = self.components();
        let n = self.space().dof_count();
        let q = self.density.quadrature_points();
        let mut residual = vec![0.0; m * n];
        let mut values = vec![0.0; m];
        let mut grads = vec![[0.0; 2]; m];
        let mut d_phi = vec![0.0; m];
        let mut d_grad = vec![[0.0; 2]; m];
        for &e in region.elements() {
            let (t0, t1, x0, x1) = self.mesh().element_bounds(e);
            let nodes = self.mesh().element_corner_nodes(e);
            for ((t, x), w) in gauss_on_rect(q, t0, t1, x0, x1) {
                state.eval_in_element(e, t, x, &mut values, &mut grads);
                self.density.d_phi(t, x, &values, &grads, &mut d_phi);
                self.density.d_grad(t, x, &values, &grads, &mut d_grad);
                let (basis, basis_grads) = self.space().scalar_basis(e, t, x);
                for c in 0..m {
                    for k in 0..4 {
                        residual[c * n + nodes[k]] += w
                            * (d_phi[c] * basis[k]
                                + d_grad[c][0] * basis_grads[k][0]
                                + d_grad[c][1] * basis_grads[k][1]);
                    }
                }
            }
        }
        Ok(residual)
    }

    /// Hessian of the localized action over the full dof index space, with
    /// entries only for dofs supported on the region. Falls back to
    /// finite-difference columns when the density has no second partials.
    pub fn assemble_jacobian(
        &self,
        state: &FieldSet,
        region: &RegularRegion,
    ) -> Result<CsrMatrix, CovariantError> {
        self.check_state(state)?;
        if self.density.has_second_partials() {
            self.analytic_jacobian(state, region)
        } else {
            self.finite_difference_jacobian(state, region)
        }
    }

    fn analytic_jacobian(
        &self,
        state: &FieldSet,
        region: &RegularRegion,
    ) -> Result<CsrMatrix, CovariantError> {
        let m = self.components();
        let n = self.space().dof_count();
        let q = self.density.quadrature_points();
        let mut builder = TripletBuilder::new(m * n, m * n);
        let mut values = vec![0.0; m];
        let mut grads = vec![[0.0; 2]; m];
        let mut phi_phi = vec![0.0; m * m];
        let mut phi_grad = vec![0.0; m * m * 2];
        let mut grad_grad = vec![0.0; m * 2 * m * 2];
        for &e in region.elements() {
            let (t0, t1, x0, x1) = self.mesh().element_bounds(e);
            let nodes = self.mesh().element_corner_nodes(e);
            for ((t, x), w) in gauss_on_rect(q, t0, t1, x0, x1) {
                state.eval_in_element(e, t, x, &mut values, &mut grads);
                self.density.second_partials_at(
                    t,
                    x,
                    &values,
                    &grads,
                    &mut phi_phi,
                    &mut phi_grad,
                    &mut grad_grad,
                )?;
                let (basis, bg) = self.space().scalar_basis(e, t, x);
                for a in 0..m {
                    for k in 0..4 {
                        let row = a * n + nodes[k];
                        for b in 0..m {
                            for l in 0..4 {
                                let col = b * n + nodes[l];
                                let mut v = phi_phi[a * m + b] * basis[k] * basis[l];
                                for nu in 0..2 {
                                    v += phi_grad[a * m * 2 + b * 2 + nu] * basis[k] * bg[l][nu];
                                    v += phi_grad[b * m * 2 + a * 2 + nu] * bg[k][nu] * basis[l];
                                    for mu in 0..2 {
                                        v += grad_grad[((a * 2 + mu) * m + b) * 2 + nu]
                                            * bg[k][mu]
                                            * bg[l][nu];
                                    }
                                }
                                builder.push(row, col, w * v);
                            }
                        }
                    }
                }
            }
        }
        Ok(builder.build())
    }

    fn finite_difference_jacobian(
        &self,
        state: &FieldSet,
        region: &RegularRegion,
    ) -> Result<CsrMatrix, CovariantError> {
        let total = self.dof_count();
        let scale = state.coeffs().iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let step = 1e-6 * (1.0 + scale);
        let mut builder = TripletBuilder::new(total, total);
        // region dofs only: all others have identically zero residual entries
        let sets = boundary_dof_sets(region, self.space())?;
        let mut region_nodes: Vec<usize> = sets
            .boundary_dofs
            .iter()
            .chain(sets.interior_dofs.iter())
            .copied()
            .collect();
        region_nodes.sort_unstable();
        let n = self.space().dof_count();
        for c in 0..self.components() {
            for &node in &region_nodes {
                let col = c * n + node;
                let mut plus = state.clone();
                plus.coeffs_mut()[col] += step;
                let mut minus = state.clone();
                minus.coeffs_mut()[col] -= step;
                let rp = self.assemble_residual(&plus, region)?;
                let rm = self.assemble_residual(&minus, region)?;
                for (row, (a, b)) in rp.iter().zip(rm.iter()).enumerate() {
                    let v = (a - b) / (2.0 * step);
                    if v.abs() > 1e-300 {
                        builder.push(row, col, v);
                    }
                }
            }
        }
        Ok(builder.build())
    }

    /// Pointwise divergence of the momenta `p_c = d3L_c(x, phi_h, dphi_h)`
    /// inside an element, per component. Uses the density's second partials
    /// when available, otherwise central differences of the composition
    /// (exact-polynomial extension of the bilinear field keeps the stencil
    /// well defined near element edges).
    pub fn momentum_divergence_in_element(
        &self,
        state: &FieldSet,
        element: usize,
        t: f64,
        x: f64,
    ) -> Result<Vec<f64>, CovariantError> {
        let m = self.components();
        let mut values = vec![0.0; m];
        let mut grads = vec![[0.0; 2]; m];
        state.eval_in_element(element, t, x, &mut values, &mut grads);
        if self.density.has_second_partials() {
            let mut phi_phi = vec![0.0; m * m];
            let mut phi_grad = vec![0.0; m * m * 2];
            let mut grad_grad = vec![0.0; m * 2 * m * 2];
            self.density.second_partials_at(
                t,
                x,
                &values,
                &grads,
                &mut phi_phi,
                &mut phi_grad,
                &mut grad_grad,
            )?;
            // second derivatives of a bilinear field: only the mixed one
            let nodes = self.mesh().element_corner_nodes(element);
            let (t0, t1, x0, x1) = self.mesh().element_bounds(element);
            let measure = (t1 - t0) * (x1 - x0);
            let mixed: Vec<f64> = (0..m)
                .map(|b| {
                    (state.coeff(b, nodes[0]) - state.coeff(b, nodes[1])
                        - state.coeff(b, nodes[2])
                        + state.coeff(b, nodes[3]))
                        / measure
                })
                .collect();
            let mut out = vec![0.0; m];
            for c in 0..m {
                let mut div = 0.0;
                for mu in 0..2 {
                    for b in 0..m {
                        // d/dx_mu phi_b contracted with d2L/dpsi_{c,mu} dphi_b
                        div += phi_grad[b * m * 2 + c * 2 + mu] * grads[b][mu];
                        for nu in 0..2 {
                            // d_mu d_nu phi_b vanishes for mu == nu on Q1
                            if mu != nu {
                                div += grad_grad[((c * 2 + mu) * m + b) * 2 + nu] * mixed[b];
                            }
                        }
                    }
                }
                out[c] = div;
            }
            Ok(out)
        } else {
            let (t0, t1, x0, x1) = self.mesh().element_bounds(element);
            let step = 1e-6 * (t1 - t0).min(x1 - x0);
            let mut out = vec![0.0; m];
            let mut p = vec![[0.0; 2]; m];
            for mu in 0..2 {
                let (dtp, dxp) = if mu == 0 { (step, 0.0) } else { (0.0, step) };
                let mut hi = vec![0.0; m];
                let mut hig = vec![[0.0; 2]; m];
                state.eval_in_element(element, t + dtp, x + dxp, &mut hi, &mut hig);
                self.density.d_grad(t + dtp, x + dxp, &hi, &hig, &mut p);
                let p_hi: Vec<f64> = p.iter().map(|g| g[mu]).collect();
                state.eval_in_element(element, t - dtp, x - dxp, &mut hi, &mut hig);
                self.density.d_grad(t - dtp, x - dxp, &hi, &hig, &mut p);
                for c in 0..m {
                    out[c] += (p_hi[c] - p[c][mu]) / (2.0 * step);
                }
            }
            Ok(out)
        }
    }

    /// Momenta components `p_c` at a point of an element.
    pub fn momenta_in_element(
        &self,
        state: &FieldSet,
        element: usize,
        t: f64,
        x: f64,
    ) -> Vec<[f64; 2]> {
        let m = self.components();
        let mut values = vec![0.0; m];
        let mut grads = vec![[0.0; 2]; m];
        state.eval_in_element(element, t, x, &mut values, &mut grads);
        let mut p = vec![[0.0; 2]; m];
        self.density.d_grad(t, x, &values, &grads, &mut p);
        p
    }

    /// `d_phi` values at a point of an element, per component.
    pub fn d_phi_in_element(
        &self,
        state: &FieldSet,
        element: usize,
        t: f64,
        x: f64,
    ) -> Vec<f64> {
        let m = self.components();
        let mut values = vec![0.0; m];
        let mut grads = vec![[0.0; 2]; m];
        state.eval_in_element(element, t, x, &mut values, &mut grads);
        let mut d = vec![0.0; m];
        self.density.d_phi(t, x, &values, &grads, &mut d);
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{builtin_nonlinear_wave_poisson, Nonlinearity};
    use crate::linalg::norm_inf;
    use crate::mesh::{build_tensor_mesh, full_domain};

    fn unit_problem(eps: i8, nonlin: Nonlinearity, m: usize, n: usize) -> Problem {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), m, n, false).unwrap();
        let density = builtin_nonlinear_wave_poisson(eps, nonlin).unwrap();
        Problem::new(&mesh, density).unwrap()
    }

    #[test]
    fn action_vanishes_at_zero_field() {
        let problem = unit_problem(1, Nonlinearity::power(4, 1.0), 2, 2);
        let region = full_domain(problem.mesh());
        let state = problem.zero_state();
        assert_eq!(problem.assemble_action(&state, &region).unwrap(), 0.0);
    }

    #[test]
    fn action_of_linear_time_profile_is_half() {
        // massless wave, phi = t on the unit single-element mesh: S = 1/2
        let problem = unit_problem(-1, Nonlinearity::zero(), 1, 1);
        let region = full_domain(problem.mesh());
        let state = FieldSet::from_fn(problem.space(), 1, |t, _, _| t);
        let s = problem.assemble_action(&state, &region).unwrap();
        assert!((s - 0.5).abs() < 1e-14);
    }

    #[test]
    fn action_of_linear_space_profile_is_half_for_poisson() {
        let problem = unit_problem(1, Nonlinearity::zero(), 1, 1);
        let region = full_domain(problem.mesh());
        let state = FieldSet::from_fn(problem.space(), 1, |_, x, _| x);
        let s = problem.assemble_action(&state, &region).unwrap();
        assert!((s - 0.5).abs() < 1e-14);
    }

    #[test]
    fn residual_of_constant_field_vanishes_for_massless_wave() {
        let problem = unit_problem(-1, Nonlinearity::zero(), 3, 3);
        let region = full_domain(problem.mesh());
        let state = FieldSet::from_fn(problem.space(), 1, |_, _, _| 2.5);
        let r = problem.assemble_residual(&state, &region).unwrap();
        assert!(norm_inf(&r) < 1e-14);
    }

    #[test]
    fn residual_is_gradient_of_action() {
        let problem = unit_problem(-1, Nonlinearity::power(4, 1.0), 3, 2);
        let region = full_domain(problem.mesh());
        let state = FieldSet::from_fn(problem.space(), 1, |t, x, _| {
            (1.7 * t - 0.3).sin() * (x + 0.4)
        });
        let r = problem.assemble_residual(&state, &region).unwrap();
        let step = 1e-6;
        for dof in 0..problem.dof_count() {
            let mut plus = state.clone();
            plus.coeffs_mut()[dof] += step;
            let mut minus = state.clone();
            minus.coeffs_mut()[dof] -= step;
            let fd = (problem.assemble_action(&plus, &region).unwrap()
                - problem.assemble_action(&minus, &region).unwrap())
                / (2.0 * step);
            assert!(
                (fd - r[dof]).abs() <= 1e-6 * (1.0 + r[dof].abs()),
                "dof {dof}: fd {fd} vs analytic {}",
                r[dof]
            );
        }
    }

    #[test]
    fn jacobian_matches_finite_difference_columns() {
        let problem = unit_problem(-1, Nonlinearity::power(4, 0.7), 2, 3);
        let region = full_domain(problem.mesh());
        let state = FieldSet::from_fn(problem.space(), 1, |t, x, _| 0.3 * t + x * x - 0.2);
        let h = problem.assemble_jacobian(&state, &region).unwrap();
        let fd = problem.finite_difference_jacobian(&state, &region).unwrap();
        let scale = h.max_abs();
        let diff = (&h.to_dense() - fd.to_dense()).abs().max();
        assert!(diff < 1e-5 * scale, "diff {diff} at scale {scale}");
    }

    #[test]
    fn jacobian_is_symmetric() {
        let problem = unit_problem(1, Nonlinearity::power(3, 1.3), 3, 3);
        let region = full_domain(problem.mesh());
        let state = FieldSet::from_fn(problem.space(), 1, |t, x, _| t * t - 0.5 * x);
        let h = problem.assemble_jacobian(&state, &region).unwrap().to_dense();
        let asym = (&h - h.transpose()).abs().max();
        assert!(asym < 1e-12 * h.abs().max().max(1.0));
    }

    #[test]
    fn quartic_jacobian_at_zero_equals_massless_jacobian() {
        let quartic = unit_problem(-1, Nonlinearity::power(4, 1.0), 2, 2);
        let massless = unit_problem(-1, Nonlinearity::zero(), 2, 2);
        let region = full_domain(quartic.mesh());
        let state = quartic.zero_state();
        let hq = quartic.assemble_jacobian(&state, &region).unwrap().to_dense();
        let hm = massless
            .assemble_jacobian(&state, &region)
            .unwrap()
            .to_dense();
        assert!((hq - hm).abs().max() < 1e-13);
    }
}
