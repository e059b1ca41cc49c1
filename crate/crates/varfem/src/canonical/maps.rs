//! Momentum and energy-momentum maps on the semi-discrete phase space.

use super::{CanonicalError, HamiltonianSystem, PhaseState};
use crate::lagrangian::SymmetryGenerator;
use crate::structures::{equivariance_check, SmoothSample};

/// `<J_h, xi> = xi_Y(phi)^T M pi` for an affine vertical generator.
///
/// The generator's flow must commute with the spatial projection; this is
/// probed on a smooth sample before evaluating.
pub fn momentum_map(
    system: &HamiltonianSystem,
    state: &PhaseState,
    generator: &SymmetryGenerator,
) -> Result<f64, CanonicalError> {
    if !generator.claimed_equivariant() {
        return Err(CanonicalError::NotEquivariant { residual: f64::NAN });
    }
    let n = system.node_count();
    let m = system.components();
    let mut xi = vec![0.0; m * n];
    let mut phi_at = vec![0.0; m];
    let mut out = vec![0.0; m];
    for node in 0..n {
        for c in 0..m {
            phi_at[c] = state.phi[c * n + node];
        }
        generator.vertical_value_at(&phi_at, &mut out);
        for c in 0..m {
            xi[c * n + node] = out[c];
        }
    }
    let m_pi = system.mass_apply(&state.pi);
    Ok(xi.iter().zip(m_pi.iter()).map(|(a, b)| a * b).sum())
}

/// Equivariance probe of a generator against the spatial projection, realized
/// on a throwaway spacetime space sharing the spatial mesh (the flow acts
/// pointwise, so the temporal direction is immaterial).
pub fn spatial_equivariance_residual(
    space: &super::SpatialSpace,
    components: usize,
    generator: &SymmetryGenerator,
) -> Result<f64, CanonicalError> {
    let mesh = space.mesh();
    let (x0, x1) = mesh.range();
    let spacetime = crate::mesh::build_tensor_mesh(
        (0.0, 1.0),
        (x0, x1),
        1,
        mesh.element_count(),
        mesh.is_periodic(),
    )?;
    let fe_space = crate::feec::FeSpace2d::new(&spacetime, crate::feec::FormDegree::Zero);
    let probe = |_t: f64, x: f64, c: usize| (1.7 * x + 0.3 * c as f64).sin() + 0.2;
    let samples = [SmoothSample { eval: &probe }];
    let action = generator.pointwise_flow();
    Ok(equivariance_check(
        &fe_space,
        components,
        &action,
        &samples,
        &[1e-3, 1e-4],
    ))
}

/// A vector field on the extended phase space `(t, phi, pi)`.
#[derive(Clone, Debug)]
pub struct ExtendedVector {
    /// Component along the time direction.
    pub v_t: f64,
    /// Vertical components over the field leg.
    pub v_phi: Vec<f64>,
    /// Vertical components over the momentum leg (does not enter the
    /// canonical one-form, but is accepted for generality).
    pub v_pi: Vec<f64>,
}

impl ExtendedVector {
    /// The Hamiltonian flow generator `X_H = (1, phi_dot, pi_dot)`.
    pub fn hamiltonian_generator(
        system: &HamiltonianSystem,
        state: &PhaseState,
    ) -> Result<Self, CanonicalError> {
        let (v_phi, v_pi) = system.hamiltonian_vector_field(state)?;
        Ok(Self {
            v_t: 1.0,
            v_phi,
            v_pi,
        })
    }

    /// A vertical generator direction `(0, xi_Y(phi), 0)`.
    pub fn vertical(system: &HamiltonianSystem, state: &PhaseState, generator: &SymmetryGenerator) -> Self {
        let n = system.node_count();
        let m = system.components();
        let mut v_phi = vec![0.0; m * n];
        let mut phi_at = vec![0.0; m];
        let mut out = vec![0.0; m];
        for node in 0..n {
            for c in 0..m {
                phi_at[c] = state.phi[c * n + node];
            }
            generator.vertical_value_at(&phi_at, &mut out);
            for c in 0..m {
                v_phi[c * n + node] = out[c];
            }
        }
        Self {
            v_t: 0.0,
            v_phi,
            v_pi: vec![0.0; m * n],
        }
    }
}

/// The energy-momentum pairing
/// `<J_h(t, phi, pi), V> = (V . theta_h) - V_t L_h(t, phi, phi_dot(phi, pi))`.
///
/// With `V = X_H` this returns the Hamiltonian exactly; with a vertical `V`
/// it returns the momentum-map pairing.
pub fn energy_momentum_pairing(
    system: &HamiltonianSystem,
    state: &PhaseState,
    vector: &ExtendedVector,
) -> Result<f64, CanonicalError> {
    let m_pi = system.mass_apply(&state.pi);
    let contraction: f64 = vector
        .v_phi
        .iter()
        .zip(m_pi.iter())
        .map(|(a, b)| a * b)
        .sum();
    if vector.v_t == 0.0 {
        return Ok(contraction);
    }
    let vel = system.velocity_from_momentum(state.time, &state.phi, &state.pi)?;
    let lagrangian = system.instantaneous_lagrangian(state.time, &state.phi, &vel)?;
    Ok(contraction - vector.v_t * lagrangian)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{simulate, SpatialSpace, StepperKind};
    use crate::lagrangian::{
        builtin_shift_symmetric_wave, builtin_so2_pair, Nonlinearity,
    };

    fn shift_wave_system(nodes: usize) -> HamiltonianSystem {
        let space = SpatialSpace::uniform(0.0, 1.0, nodes, true).unwrap();
        let density = builtin_shift_symmetric_wave(-1).unwrap();
        HamiltonianSystem::new(space, density).unwrap()
    }

    #[test]
    fn zero_momentum_gives_zero_map() {
        let system = shift_wave_system(8);
        let state = system.state_from_fns(0.0, |x, _| x.sin(), |_, _| 0.0);
        let g = SymmetryGenerator::shift();
        assert_eq!(momentum_map(&system, &state, &g).unwrap(), 0.0);
    }

    #[test]
    fn shift_momentum_is_total_momentum_and_conserved() {
        let system = shift_wave_system(24);
        let tau = 2.0 * std::f64::consts::PI;
        // give the slice a nonzero net momentum so the relative drift is
        // meaningful
        let state = system.state_from_fns(
            0.0,
            |x, _| (tau * x).sin(),
            |x, _| 0.3 + 0.4 * (tau * x).cos(),
        );
        let g = SymmetryGenerator::shift();
        let j0 = momentum_map(&system, &state, &g).unwrap();
        // 1^T M pi: total momentum
        let m_pi = system.mass_apply(&state.pi);
        let total: f64 = m_pi.iter().sum();
        assert!((j0 - total).abs() < 1e-14);
        let trajectory = simulate(&system, state, 0.02, 150, StepperKind::ImplicitMidpoint)
            .unwrap();
        assert!(
            trajectory.momentum_drift(0) < 1e-12,
            "shift momentum drift {:.3e}",
            trajectory.momentum_drift(0)
        );
    }

    #[test]
    fn so2_momentum_has_the_bilinear_form_and_is_conserved() {
        let space = SpatialSpace::uniform(0.0, 1.0, 16, true).unwrap();
        let density = builtin_so2_pair(-1, Nonlinearity::power(2, 0.5), false).unwrap();
        let system = HamiltonianSystem::new(space, density).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        let state = system.state_from_fns(
            0.0,
            |x, c| if c == 0 { (tau * x).sin() } else { 0.3 * (tau * x).cos() },
            |x, c| if c == 0 { 0.2 * (tau * x).cos() } else { -0.1 * (tau * x).sin() },
        );
        let g = SymmetryGenerator::rotation_pair();
        let j = momentum_map(&system, &state, &g).unwrap();
        // -phi2^T M pi1 + phi1^T M pi2
        let n = system.node_count();
        let m_pi = system.mass_apply(&state.pi);
        let expected: f64 = (0..n)
            .map(|i| -state.phi[n + i] * m_pi[i] + state.phi[i] * m_pi[n + i])
            .sum();
        assert!((j - expected).abs() < 1e-13);
        let trajectory = simulate(&system, state, 0.02, 120, StepperKind::ImplicitMidpoint)
            .unwrap();
        let gi = system
            .generators()
            .iter()
            .position(|g| g.name() == "so2_rotation")
            .unwrap();
        assert!(
            trajectory.momentum_drift(gi) < 1e-12,
            "rotation momentum drift {:.3e}",
            trajectory.momentum_drift(gi)
        );
    }

    #[test]
    fn energy_momentum_pairing_recovers_hamiltonian_and_momentum() {
        let system = shift_wave_system(12);
        let state = system.state_from_fns(0.0, |x, _| (x * 5.0).sin(), |x, _| (x * 3.0).cos());
        let xh = ExtendedVector::hamiltonian_generator(&system, &state).unwrap();
        let pairing = energy_momentum_pairing(&system, &state, &xh).unwrap();
        let h = system.hamiltonian(&state).unwrap();
        assert!((pairing - h).abs() <= 1e-12 * (1.0 + h.abs()));
        let g = SymmetryGenerator::shift();
        let vertical = ExtendedVector::vertical(&system, &state, &g);
        let p2 = energy_momentum_pairing(&system, &state, &vertical).unwrap();
        let j = momentum_map(&system, &state, &g).unwrap();
        assert_eq!(p2, j);
        // the zero vector pairs to zero
        let zero = ExtendedVector {
            v_t: 0.0,
            v_phi: vec![0.0; system.dof_count()],
            v_pi: vec![0.0; system.dof_count()],
        };
        assert_eq!(energy_momentum_pairing(&system, &state, &zero).unwrap(), 0.0);
    }

    #[test]
    fn spatial_equivariance_probe_accepts_affine_generators() {
        let system = shift_wave_system(8);
        let r = spatial_equivariance_residual(system.space(), 1, &SymmetryGenerator::shift())
            .unwrap();
        assert!(r < 1e-10);
    }
}
