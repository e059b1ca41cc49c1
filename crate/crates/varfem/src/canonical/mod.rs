//! Semi-discrete (method-of-lines) formulation on a spatial Cauchy slice.
//!
//! Spatially projecting the instantaneous variational principle yields a
//! finite-dimensional Lagrangian system whose Legendre transform produces a
//! Hamiltonian flow on the phase space with symplectic form built from the
//! spatial mass matrix. This module carries that chain end to end: the
//! instantaneous Lagrangian, the semi-discrete Euler-Lagrange residual, the
//! Legendre transform and its inverse, the Hamiltonian and its vector field,
//! momentum and energy-momentum maps, and symplectic time stepping. The same
//! density object drives the covariant spacetime solver, which is what makes
//! the tensor-product equivalence an executable identity.

mod maps;
mod stepper;
mod tensor_product;

pub use maps::{energy_momentum_pairing, momentum_map, spatial_equivariance_residual, ExtendedVector};
pub use stepper::{
    simulate, step_explicit_euler, step_implicit_midpoint, symplecticity_check, StepperKind,
    Trajectory,
};
pub use tensor_product::{tensor_product_equivalence, TensorEquivalence};

use crate::feec::{CochainComplex1d, FeSpace1d, FeecError, MetricSignature};
use crate::lagrangian::{LagrangianDensity, LagrangianError, SymmetryGenerator};
use crate::linalg::LinalgError;
use crate::mesh::{IntervalMesh, MeshError};
use crate::quad::gauss_on_interval;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CanonicalError {
    #[error("spatial mass matrix is singular")]
    SingularMass,
    #[error("legendre inversion failed: residual {residual:.3e}")]
    LegendreInversionFailed { residual: f64 },
    #[error(
        "implicit step failed to converge: residual {residual:.3e} after {iterations} iterations"
    )]
    NoConvergence { residual: f64, iterations: usize },
    #[error("state vectors have wrong length: got {got}, expected {expected}")]
    StateLength { got: usize, expected: usize },
    #[error("at least {needed} trajectory samples are required, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("generator is not equivariant for this system: residual {residual:.3e}")]
    NotEquivariant { residual: f64 },
    #[error("temporal/spatial bases do not match the covariant problem: {0}")]
    BasisMismatch(String),
    #[error(transparent)]
    Feec(#[from] FeecError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Lagrangian(#[from] LagrangianError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The spatial complex of a Cauchy slice: hat functions, their derivative
/// matrix, and the mass matrices.
#[derive(Clone, Debug)]
pub struct SpatialSpace {
    complex: CochainComplex1d,
}

impl SpatialSpace {
    pub fn new(mesh: &IntervalMesh, metric: MetricSignature) -> Result<Self, CanonicalError> {
        Ok(Self {
            complex: CochainComplex1d::new(mesh, metric)?,
        })
    }

    /// Euclidean spatial metric.
    pub fn uniform(
        x_min: f64,
        x_max: f64,
        elements: usize,
        periodic: bool,
    ) -> Result<Self, CanonicalError> {
        let mesh = IntervalMesh::new(x_min, x_max, elements, periodic)?;
        Self::new(&mesh, MetricSignature::euclidean(1))
    }

    pub fn mesh(&self) -> &IntervalMesh {
        self.complex.mesh()
    }

    pub fn complex(&self) -> &CochainComplex1d {
        &self.complex
    }

    pub fn space0(&self) -> &FeSpace1d {
        self.complex.space0()
    }

    pub fn node_count(&self) -> usize {
        self.complex.space0().dof_count()
    }
}

/// A point of the semi-discrete phase space: field and momentum coefficients
/// (component-major) at a time.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseState {
    pub time: f64,
    pub phi: Vec<f64>,
    pub pi: Vec<f64>,
}

impl PhaseState {
    pub fn new(time: f64, phi: Vec<f64>, pi: Vec<f64>) -> Self {
        assert_eq!(phi.len(), pi.len());
        Self { time, phi, pi }
    }
}

/// A density on a spatial slice with the mass-matrix duality structure.
pub struct HamiltonianSystem {
    space: SpatialSpace,
    density: Arc<LagrangianDensity>,
    mass_dense: DMatrix<f64>,
    mass_chol: Cholesky<f64, Dyn>,
}

impl HamiltonianSystem {
    pub fn new(
        space: SpatialSpace,
        density: impl Into<Arc<LagrangianDensity>>,
    ) -> Result<Self, CanonicalError> {
        let density = density.into();
        // generators must commute with the spatial projection for the
        // momentum-map structure to restrict
        for generator in density.generators() {
            let residual =
                maps::spatial_equivariance_residual(&space, density.components(), generator)?;
            if residual > 1e-8 {
                return Err(CanonicalError::NotEquivariant { residual });
            }
        }
        let mass_dense = space.complex().mass0().to_dense();
        let mass_chol = mass_dense
            .clone()
            .cholesky()
            .ok_or(CanonicalError::SingularMass)?;
        Ok(Self {
            space,
            density,
            mass_dense,
            mass_chol,
        })
    }

    pub fn space(&self) -> &SpatialSpace {
        &self.space
    }

    pub fn density(&self) -> &LagrangianDensity {
        &self.density
    }

    pub fn density_handle(&self) -> Arc<LagrangianDensity> {
        self.density.clone()
    }

    pub fn components(&self) -> usize {
        self.density.components()
    }

    pub fn node_count(&self) -> usize {
        self.space.node_count()
    }

    /// Total coefficient count per phase-space leg.
    pub fn dof_count(&self) -> usize {
        self.components() * self.node_count()
    }

    pub fn mass_matrix(&self) -> &DMatrix<f64> {
        &self.mass_dense
    }

    pub fn generators(&self) -> &[SymmetryGenerator] {
        self.density.generators()
    }

    pub fn zero_state(&self) -> PhaseState {
        PhaseState::new(0.0, vec![0.0; self.dof_count()], vec![0.0; self.dof_count()])
    }

    /// Nodal sampling of initial data closures.
    pub fn state_from_fns(
        &self,
        time: f64,
        phi: impl Fn(f64, usize) -> f64,
        pi: impl Fn(f64, usize) -> f64,
    ) -> PhaseState {
        let n = self.node_count();
        let m = self.components();
        let mut phi_v = vec![0.0; m * n];
        let mut pi_v = vec![0.0; m * n];
        for node in 0..n {
            let x = self.space.mesh().node_coord(node);
            for c in 0..m {
                phi_v[c * n + node] = phi(x, c);
                pi_v[c * n + node] = pi(x, c);
            }
        }
        PhaseState::new(time, phi_v, pi_v)
    }

    fn check_len(&self, v: &[f64]) -> Result<(), CanonicalError> {
        if v.len() != self.dof_count() {
            return Err(CanonicalError::StateLength {
                got: v.len(),
                expected: self.dof_count(),
            });
        }
        Ok(())
    }

    fn quad_points(&self) -> usize {
        self.density.quadrature_points()
    }

    /// Solve `M y_c = b_c` per component.
    pub fn mass_solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.node_count();
        let mut out = vec![0.0; b.len()];
        for c in 0..self.components() {
            let rhs = DVector::from_column_slice(&b[c * n..(c + 1) * n]);
            let y = self.mass_chol.solve(&rhs);
            out[c * n..(c + 1) * n].copy_from_slice(y.as_slice());
        }
        out
    }

    /// Apply the block mass matrix per component.
    pub fn mass_apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.node_count();
        let mut out = vec![0.0; v.len()];
        for c in 0..self.components() {
            let x = DVector::from_column_slice(&v[c * n..(c + 1) * n]);
            let y = &self.mass_dense * x;
            out[c * n..(c + 1) * n].copy_from_slice(y.as_slice());
        }
        out
    }

    /// Evaluate all components' values, velocities, and spatial derivatives at
    /// a point of a spatial element.
    fn eval_fields(
        &self,
        element: usize,
        x: f64,
        phi: &[f64],
        phi_dot: &[f64],
        values: &mut [f64],
        psi: &mut [[f64; 2]],
    ) {
        let n = self.node_count();
        let space = self.space.space0();
        let (basis, derivs) = space.scalar_basis(element, x);
        let (a, b) = self.space.mesh().element_nodes(element);
        for c in 0..self.components() {
            let ca = phi[c * n + a];
            let cb = phi[c * n + b];
            values[c] = ca * basis[0] + cb * basis[1];
            psi[c][0] = phi_dot[c * n + a] * basis[0] + phi_dot[c * n + b] * basis[1];
            psi[c][1] = ca * derivs[0] + cb * derivs[1];
        }
    }

    /// The instantaneous Lagrangian `L_h(t, phi, phi_dot)` by exact spatial
    /// quadrature.
    pub fn instantaneous_lagrangian(
        &self,
        t: f64,
        phi: &[f64],
        phi_dot: &[f64],
    ) -> Result<f64, CanonicalError> {
        self.check_len(phi)?;
        self.check_len(phi_dot)?;
        let m = self.components();
        let mut values = vec![0.0; m];
        let mut psi = vec![[0.0; 2]; m];
        let mut total = 0.0;
        for e in 0..self.space.mesh().element_count() {
            let (x0, x1) = self.space.mesh().element_bounds(e);
            for (x, w) in gauss_on_interval(self.quad_points(), x0, x1) {
                self.eval_fields(e, x, phi, phi_dot, &mut values, &mut psi);
                total += w * self.density.value(t, x, &values, &psi);
            }
        }
        Ok(total)
    }

    /// `dL_h/dphi^j = (d2L, v_j) + (d4L, dv_j)` for every dof.
    pub fn lagrangian_phi_gradient(
        &self,
        t: f64,
        phi: &[f64],
        phi_dot: &[f64],
    ) -> Result<Vec<f64>, CanonicalError> {
        self.check_len(phi)?;
        self.check_len(phi_dot)?;
        let m = self.components();
        let n = self.node_count();
        let mut out = vec![0.0; m * n];
        let mut values = vec![0.0; m];
        let mut psi = vec![[0.0; 2]; m];
        let mut d_phi = vec![0.0; m];
        let mut d_grad = vec![[0.0; 2]; m];
        for e in 0..self.space.mesh().element_count() {
            let (x0, x1) = self.space.mesh().element_bounds(e);
            let (na, nb) = self.space.mesh().element_nodes(e);
            for (x, w) in gauss_on_interval(self.quad_points(), x0, x1) {
                self.eval_fields(e, x, phi, phi_dot, &mut values, &mut psi);
                self.density.d_phi(t, x, &values, &psi, &mut d_phi);
                self.density.d_grad(t, x, &values, &psi, &mut d_grad);
                let (basis, derivs) = self.space.space0().scalar_basis(e, x);
                for c in 0..m {
                    out[c * n + na] += w * (d_phi[c] * basis[0] + d_grad[c][1] * derivs[0]);
                    out[c * n + nb] += w * (d_phi[c] * basis[1] + d_grad[c][1] * derivs[1]);
                }
            }
        }
        Ok(out)
    }

    /// `dL_h/dphi_dot^j = (d3L, v_j)` for every dof.
    pub fn lagrangian_velocity_gradient(
        &self,
        t: f64,
        phi: &[f64],
        phi_dot: &[f64],
    ) -> Result<Vec<f64>, CanonicalError> {
        self.check_len(phi)?;
        self.check_len(phi_dot)?;
        let m = self.components();
        let n = self.node_count();
        let mut out = vec![0.0; m * n];
        let mut values = vec![0.0; m];
        let mut psi = vec![[0.0; 2]; m];
        let mut d_grad = vec![[0.0; 2]; m];
        for e in 0..self.space.mesh().element_count() {
            let (x0, x1) = self.space.mesh().element_bounds(e);
            let (na, nb) = self.space.mesh().element_nodes(e);
            for (x, w) in gauss_on_interval(self.quad_points(), x0, x1) {
                self.eval_fields(e, x, phi, phi_dot, &mut values, &mut psi);
                self.density.d_grad(t, x, &values, &psi, &mut d_grad);
                let (basis, _) = self.space.space0().scalar_basis(e, x);
                for c in 0..m {
                    out[c * n + na] += w * d_grad[c][0] * basis[0];
                    out[c * n + nb] += w * d_grad[c][0] * basis[1];
                }
            }
        }
        Ok(out)
    }

    /// Legendre transform: momenta solving `M pi_c = (d3L, v)` per component.
    pub fn legendre_transform(
        &self,
        t: f64,
        phi: &[f64],
        phi_dot: &[f64],
    ) -> Result<Vec<f64>, CanonicalError> {
        let b = self.lagrangian_velocity_gradient(t, phi, phi_dot)?;
        Ok(self.mass_solve(&b))
    }

    /// Invert the Legendre transform: velocities from momenta.
    ///
    /// Densities with the unit-quadratic kinetic term invert in closed form
    /// (`phi_dot = pi`); other hyperregular densities go through Newton on the
    /// velocity gradient to tolerance `1e-12`.
    pub fn velocity_from_momentum(
        &self,
        t: f64,
        phi: &[f64],
        pi: &[f64],
    ) -> Result<Vec<f64>, CanonicalError> {
        self.check_len(phi)?;
        self.check_len(pi)?;
        if self.density.velocity_quadratic_unit() {
            return Ok(pi.to_vec());
        }
        // Newton on  b(phi_dot) - M pi = 0  with finite-difference Jacobian
        let target = self.mass_apply(pi);
        let total = self.dof_count();
        let mut vel = pi.to_vec();
        let scale = 1.0 + crate::linalg::norm_inf(pi);
        for _ in 0..50 {
            let b = self.lagrangian_velocity_gradient(t, phi, &vel)?;
            let residual: Vec<f64> = b.iter().zip(target.iter()).map(|(a, b)| a - b).collect();
            let norm = crate::linalg::norm_inf(&residual);
            if norm <= 1e-12 * scale {
                return Ok(vel);
            }
            let step = 1e-6 * scale;
            let mut jac = DMatrix::zeros(total, total);
            for j in 0..total {
                let mut hi = vel.clone();
                hi[j] += step;
                let bh = self.lagrangian_velocity_gradient(t, phi, &hi)?;
                for i in 0..total {
                    jac[(i, j)] = (bh[i] - b[i]) / step;
                }
            }
            let rhs = DVector::from_iterator(total, residual.iter().map(|v| -v));
            let delta = jac
                .lu()
                .solve(&rhs)
                .ok_or(CanonicalError::LegendreInversionFailed { residual: norm })?;
            for (v, d) in vel.iter_mut().zip(delta.iter()) {
                *v += d;
            }
        }
        let b = self.lagrangian_velocity_gradient(t, phi, &vel)?;
        let diff: Vec<f64> = b.iter().zip(target.iter()).map(|(a, b)| a - b).collect();
        Err(CanonicalError::LegendreInversionFailed {
            residual: crate::linalg::norm_inf(&diff),
        })
    }

    /// `H_h = phi_dot^T M pi - L_h` with velocities from the inverse Legendre
    /// transform.
    pub fn hamiltonian(&self, state: &PhaseState) -> Result<f64, CanonicalError> {
        let vel = self.velocity_from_momentum(state.time, &state.phi, &state.pi)?;
        let m_pi = self.mass_apply(&state.pi);
        let pairing: f64 = vel.iter().zip(m_pi.iter()).map(|(a, b)| a * b).sum();
        Ok(pairing - self.instantaneous_lagrangian(state.time, &state.phi, &vel)?)
    }

    /// The Hamiltonian vector field `(phi_dot, pi_dot)` at a state:
    /// `M phi_dot = dH/dpi` and `M pi_dot = -dH/dphi`.
    pub fn hamiltonian_vector_field(
        &self,
        state: &PhaseState,
    ) -> Result<(Vec<f64>, Vec<f64>), CanonicalError> {
        let vel = self.velocity_from_momentum(state.time, &state.phi, &state.pi)?;
        let g = self.lagrangian_phi_gradient(state.time, &state.phi, &vel)?;
        let pi_dot = self.mass_solve(&g);
        Ok((vel, pi_dot))
    }

    /// Residual of the semi-discrete Euler-Lagrange equations along a sampled
    /// curve, with the time derivative taken by central differences on the
    /// sample grid. Returns one residual vector per interior sample.
    pub fn semidiscrete_residual(
        &self,
        samples: &[(f64, Vec<f64>, Vec<f64>)],
    ) -> Result<Vec<(f64, Vec<f64>)>, CanonicalError> {
        if samples.len() < 3 {
            return Err(CanonicalError::InsufficientSamples {
                needed: 3,
                got: samples.len(),
            });
        }
        let total = self.dof_count();
        let mut velocity_gradients = Vec::with_capacity(samples.len());
        for (t, phi, phi_dot) in samples {
            velocity_gradients.push(self.lagrangian_velocity_gradient(*t, phi, phi_dot)?);
        }
        let mut out = Vec::with_capacity(samples.len() - 2);
        for k in 1..samples.len() - 1 {
            let (t, phi, phi_dot) = &samples[k];
            let dt = samples[k + 1].0 - samples[k - 1].0;
            let b = self.lagrangian_phi_gradient(*t, phi, phi_dot)?;
            let mut r = vec![0.0; total];
            for j in 0..total {
                r[j] = (velocity_gradients[k + 1][j] - velocity_gradients[k - 1][j]) / dt - b[j];
            }
            out.push((*t, r));
        }
        Ok(out)
    }
}

impl std::fmt::Debug for HamiltonianSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HamiltonianSystem")
            .field("nodes", &self.node_count())
            .field("components", &self.components())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{builtin_nonlinear_wave_poisson, Nonlinearity};

    fn wave_system(nodes: usize, periodic: bool) -> HamiltonianSystem {
        let space = SpatialSpace::uniform(0.0, 1.0, nodes, periodic).unwrap();
        let density = builtin_nonlinear_wave_poisson(-1, Nonlinearity::zero()).unwrap();
        HamiltonianSystem::new(space, density).unwrap()
    }

    #[test]
    fn zero_state_has_zero_lagrangian_and_hamiltonian() {
        let system = wave_system(8, true);
        let zeros = vec![0.0; system.dof_count()];
        assert_eq!(
            system
                .instantaneous_lagrangian(0.0, &zeros, &zeros)
                .unwrap(),
            0.0
        );
        assert_eq!(system.hamiltonian(&system.zero_state()).unwrap(), 0.0);
    }

    #[test]
    fn unit_velocity_on_unit_circle_gives_half() {
        let system = wave_system(16, true);
        let zeros = vec![0.0; system.dof_count()];
        let ones = vec![1.0; system.dof_count()];
        let l = system.instantaneous_lagrangian(0.0, &zeros, &ones).unwrap();
        assert!((l - 0.5).abs() < 1e-13);
        // pi = phi_dot = 1, phi = 0: H = 1/2 1^T M 1 = 1/2 (total mass one)
        let state = PhaseState::new(0.0, zeros, ones);
        let h = system.hamiltonian(&state).unwrap();
        assert!((h - 0.5).abs() < 1e-13);
    }

    #[test]
    fn velocity_gradient_matches_finite_differences() {
        let system = wave_system(6, false);
        let n = system.dof_count();
        let phi: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let vel: Vec<f64> = (0..n).map(|i| 0.3 - 0.1 * i as f64).collect();
        let analytic = system
            .lagrangian_velocity_gradient(0.2, &phi, &vel)
            .unwrap();
        let step = 1e-6;
        for j in 0..n {
            let mut hi = vel.clone();
            hi[j] += step;
            let mut lo = vel.clone();
            lo[j] -= step;
            let fd = (system.instantaneous_lagrangian(0.2, &phi, &hi).unwrap()
                - system.instantaneous_lagrangian(0.2, &phi, &lo).unwrap())
                / (2.0 * step);
            assert!((fd - analytic[j]).abs() < 1e-7 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn legendre_round_trip_is_identity_for_wave() {
        let system = wave_system(10, true);
        let n = system.dof_count();
        let phi: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let vel: Vec<f64> = (0..n).map(|i| 0.2 * i as f64 - 0.9).collect();
        // kinetic term 1/2 phi_dot^2: pi = phi_dot exactly
        let pi = system.legendre_transform(0.0, &phi, &vel).unwrap();
        for (a, b) in pi.iter().zip(vel.iter()) {
            assert!((a - b).abs() < 1e-11);
        }
        let back = system.velocity_from_momentum(0.0, &phi, &pi).unwrap();
        for (a, b) in back.iter().zip(vel.iter()) {
            assert!((a - b).abs() < 1e-11);
        }
        // zero velocity maps to zero momentum
        let zero_pi = system.legendre_transform(0.0, &phi, &vec![0.0; n]).unwrap();
        assert!(crate::linalg::norm_inf(&zero_pi) < 1e-13);
    }

    #[test]
    fn hamiltonian_splits_into_kinetic_and_stiffness_parts() {
        let system = wave_system(12, true);
        let n = system.dof_count();
        let phi: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin())
            .collect();
        let pi: Vec<f64> = (0..n).map(|i| 0.1 * (i as f64 * 0.9).cos()).collect();
        let state = PhaseState::new(0.0, phi.clone(), pi.clone());
        let h = system.hamiltonian(&state).unwrap();
        let m_pi = system.mass_apply(&pi);
        let kinetic: f64 = 0.5
            * pi.iter()
                .zip(m_pi.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>();
        let k_phi = system.space().complex().stiffness().mul_vec(&phi);
        let potential: f64 = 0.5
            * phi
                .iter()
                .zip(k_phi.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>();
        assert!((h - (kinetic + potential)).abs() < 1e-12);
    }

    #[test]
    fn vector_field_matches_symplectic_gradient() {
        let space = SpatialSpace::uniform(0.0, 1.0, 8, true).unwrap();
        let density = builtin_nonlinear_wave_poisson(-1, Nonlinearity::power(4, 0.7)).unwrap();
        let system = HamiltonianSystem::new(space, density).unwrap();
        let n = system.dof_count();
        let phi: Vec<f64> = (0..n).map(|i| 0.4 * (1.3 * i as f64).sin()).collect();
        let pi: Vec<f64> = (0..n).map(|i| 0.2 * (0.7 * i as f64).cos()).collect();
        let state = PhaseState::new(0.0, phi, pi);
        let (phi_dot, pi_dot) = system.hamiltonian_vector_field(&state).unwrap();
        // finite-difference symplectic gradient: M phi_dot = dH/dpi,
        // M pi_dot = -dH/dphi
        let step = 1e-6;
        let m_phi_dot = system.mass_apply(&phi_dot);
        let m_pi_dot = system.mass_apply(&pi_dot);
        for j in (0..n).step_by(3) {
            let mut hi = state.clone();
            hi.pi[j] += step;
            let mut lo = state.clone();
            lo.pi[j] -= step;
            let dh_dpi = (system.hamiltonian(&hi).unwrap() - system.hamiltonian(&lo).unwrap())
                / (2.0 * step);
            assert!((m_phi_dot[j] - dh_dpi).abs() < 1e-6 * (1.0 + dh_dpi.abs()));
            let mut hi = state.clone();
            hi.phi[j] += step;
            let mut lo = state.clone();
            lo.phi[j] -= step;
            let dh_dphi = (system.hamiltonian(&hi).unwrap() - system.hamiltonian(&lo).unwrap())
                / (2.0 * step);
            assert!((m_pi_dot[j] + dh_dphi).abs() < 1e-6 * (1.0 + dh_dphi.abs()));
        }
        // a critical point of H has zero vector field
        let rest = system.zero_state();
        let (v, w) = system.hamiltonian_vector_field(&rest).unwrap();
        assert!(crate::linalg::norm_inf(&v) < 1e-14);
        assert!(crate::linalg::norm_inf(&w) < 1e-14);
    }

    #[test]
    fn constant_curve_with_no_potential_has_zero_residual() {
        let system = wave_system(8, true);
        let n = system.dof_count();
        let phi = vec![0.7; n];
        let zero = vec![0.0; n];
        let samples: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..5)
            .map(|k| (0.1 * k as f64, phi.clone(), zero.clone()))
            .collect();
        let residuals = system.semidiscrete_residual(&samples).unwrap();
        assert_eq!(residuals.len(), 3);
        for (_, r) in residuals {
            assert!(crate::linalg::norm_inf(&r) < 1e-14);
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        let system = wave_system(4, true);
        let n = system.dof_count();
        let samples = vec![(0.0, vec![0.0; n], vec![0.0; n])];
        assert!(matches!(
            system.semidiscrete_residual(&samples),
            Err(CanonicalError::InsufficientSamples { .. })
        ));
    }
}
