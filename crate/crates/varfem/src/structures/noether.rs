//! Discrete momentum-map conservation.
//!
//! For a vertical generator `xi` whose flow commutes with the projection, the
//! boundary pairing `Theta . xi_Y(phi_h)` of a solved state vanishes. The
//! report also carries the two density-level terms whose difference equals
//! the pairing as an algebraic identity, independent of any symmetry: the
//! region integral of the weak Euler-Lagrange expression against the
//! Lie-derivative direction plus the density variation along the generator,
//! minus the boundary-ring part of the same pairing.

use super::{
    boundary_flux, boundary_pairing, equivariance_check, interior_residual_norm, region_dofs,
    symmetry_variation_integral, weak_el_pairing, SmoothSample, StructuresError, VariationField,
};
use crate::covariant::Problem;
use crate::feec::FieldSet;
use crate::lagrangian::SymmetryGenerator;
use crate::mesh::RegularRegion;

/// Results of a Noether conservation check on one region.
#[derive(Clone, Debug)]
pub struct NoetherReport {
    /// `Theta . xi_Y(phi_h)`, the conserved pairing (zero for true symmetries
    /// at solutions).
    pub cartan_pairing: f64,
    /// The region term: weak Euler-Lagrange pairing with the Lie-derivative
    /// direction plus the density variation along the generator.
    pub interior_term: f64,
    /// The boundary-ring part of the weak Euler-Lagrange pairing.
    pub boundary_ring_term: f64,
    /// `|cartan_pairing - (interior_term - boundary_ring_term)|`; an algebraic
    /// identity, near round-off for any state.
    pub rearrangement_residual: f64,
    /// Cancellation-free magnitude of the boundary pairing, for relative
    /// comparisons.
    pub scale: f64,
    /// Flux of the conserved current through the region boundary (equals the
    /// interior term by the divergence structure).
    pub current_flux: f64,
}

impl NoetherReport {
    /// The pairing relative to its cancellation-free scale.
    pub fn relative_pairing(&self) -> f64 {
        self.cartan_pairing.abs() / self.scale.max(1e-300)
    }
}

/// The rearrangement identity terms for an arbitrary (not necessarily solved)
/// state: `(pairing, interior_term, boundary_ring_term)`.
pub fn noether_rearrangement(
    problem: &Problem,
    region: &RegularRegion,
    state: &FieldSet,
    generator: &SymmetryGenerator,
) -> Result<(f64, f64, f64), StructuresError> {
    let dofs = region_dofs(problem, region)?;
    let xi = VariationField::from_coeffs(problem, generator.vertical_value(state))?;

    let pairing = boundary_pairing(problem, region, state, &xi)?;

    // the Lie-derivative direction is minus the vertical generator value
    let v_full = xi.field().clone();
    let xi_boundary = xi.boundary_part(&dofs);
    let el_full = weak_el_pairing(problem, region, state, &v_full)?;
    let el_boundary = weak_el_pairing(problem, region, state, xi_boundary.field())?;
    let variation = symmetry_variation_integral(problem, region, state, &v_full)?;

    let interior_term = -el_full + variation;
    let boundary_ring_term = -el_boundary;
    Ok((pairing, interior_term, boundary_ring_term))
}

/// Check momentum-map conservation for a solved state.
///
/// Requires the generator to claim projection equivariance; a quick
/// equivariance probe on smooth samples rejects generators whose flow does
/// not commute with the nodal projection.
pub fn noether_check(
    problem: &Problem,
    region: &RegularRegion,
    state: &FieldSet,
    generator: &SymmetryGenerator,
    tol: f64,
) -> Result<NoetherReport, StructuresError> {
    if !generator.claimed_equivariant() {
        return Err(StructuresError::NotEquivariant { residual: f64::NAN });
    }
    let m = problem.components();
    let probe = |t: f64, x: f64, c: usize| {
        (1.3 * t + 0.4 * c as f64).sin() * (0.9 * x - 0.2).cos() + 0.3 * c as f64
    };
    let samples = [SmoothSample { eval: &probe }];
    let action = generator.pointwise_flow();
    let residual = equivariance_check(problem.space(), m, &action, &samples, &[1e-3, 1e-4]);
    if residual > 1e-8 {
        return Err(StructuresError::NotEquivariant { residual });
    }

    let interior_residual = interior_residual_norm(problem, region, state)?;
    let threshold = 10.0 * tol;
    if interior_residual > threshold {
        return Err(StructuresError::NotASolution {
            residual: interior_residual,
            threshold,
        });
    }

    let (pairing, interior_term, boundary_ring_term) =
        noether_rearrangement(problem, region, state, generator)?;

    // cancellation-free scale of the boundary pairing
    let dofs = region_dofs(problem, region)?;
    let residual_vec = problem.assemble_residual(state, region)?;
    let xi = generator.vertical_value(state);
    let scale: f64 = dofs
        .boundary
        .iter()
        .map(|&d| (residual_vec[d] * xi[d]).abs())
        .sum();

    let xi_field = VariationField::from_coeffs(problem, xi)?;
    let current_flux = boundary_flux(problem, region, state, xi_field.field())?;

    Ok(NoetherReport {
        cartan_pairing: pairing,
        interior_term,
        boundary_ring_term,
        rearrangement_residual: (pairing - (interior_term - boundary_ring_term)).abs(),
        scale,
        current_flux,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariant::{newton_solve, DirichletData, NewtonOptions};
    use crate::lagrangian::{builtin_shift_symmetric_wave, builtin_so2_pair, Nonlinearity};
    use crate::mesh::{build_tensor_mesh, full_domain, rect_region};

    fn solved_shift_wave() -> (Problem, FieldSet) {
        let mesh = build_tensor_mesh((0.0, 0.618), (0.0, 1.0), 6, 6, false).unwrap();
        let density = builtin_shift_symmetric_wave(-1).unwrap();
        let problem = Problem::new(&mesh, density).unwrap();
        let dirichlet = DirichletData::from_trace(&problem, |t, x, _| {
            0.7 * (std::f64::consts::PI * (x - t)).sin() + 0.3
        });
        let region = full_domain(&mesh);
        let (state, _) = newton_solve(
            &problem,
            &region,
            &dirichlet,
            &problem.zero_state(),
            NewtonOptions::default(),
        )
        .unwrap();
        (problem, state)
    }

    #[test]
    fn shift_pairing_vanishes_at_solutions() {
        let (problem, state) = solved_shift_wave();
        let generator = SymmetryGenerator::shift();
        for region in [
            full_domain(problem.mesh()),
            rect_region(problem.mesh(), 1, 1, 3, 3).unwrap(),
        ] {
            let report = noether_check(&problem, &region, &state, &generator, 1e-9).unwrap();
            assert!(
                report.relative_pairing() <= 1e-8,
                "pairing {:.3e} at scale {:.3e}",
                report.cartan_pairing,
                report.scale
            );
        }
    }

    #[test]
    fn rearrangement_identity_holds_off_solution() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 5, 5, false).unwrap();
        let density = builtin_shift_symmetric_wave(-1).unwrap();
        let problem = Problem::new(&mesh, density).unwrap();
        let generator = SymmetryGenerator::shift();
        let region = rect_region(&mesh, 1, 1, 3, 3).unwrap();
        let state = FieldSet::from_fn(problem.space(), 1, |t, x, _| {
            (4.2 * t).sin() * (1.7 * x).cos() + 0.2 * t
        });
        let (pairing, a, b) = noether_rearrangement(&problem, &region, &state, &generator).unwrap();
        let scale = pairing.abs().max(a.abs()).max(b.abs()).max(1e-12);
        assert!(
            (pairing - (a - b)).abs() <= 1e-12 * scale,
            "identity violated: {pairing} vs {a} - {b}"
        );
    }

    #[test]
    fn so2_pairing_vanishes_and_broken_variant_does_not() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 6, 6, false).unwrap();
        let trace = |t: f64, x: f64, c: usize| {
            let base = (std::f64::consts::PI * t).sin() * (std::f64::consts::PI * x).sin();
            if c == 0 {
                0.5 * base + 0.2
            } else {
                -0.3 * base + 0.1
            }
        };
        for broken in [false, true] {
            let density = builtin_so2_pair(1, Nonlinearity::power(2, 0.4), broken).unwrap();
            let problem = Problem::new(&mesh, density).unwrap();
            let dirichlet = DirichletData::from_trace(&problem, trace);
            let region = full_domain(&mesh);
            let (state, report) = newton_solve(
                &problem,
                &region,
                &dirichlet,
                &problem.zero_state(),
                NewtonOptions::default(),
            )
            .unwrap();
            assert!(report.converged);
            let generator = SymmetryGenerator::rotation_pair();
            let check = noether_check(&problem, &region, &state, &generator, 1e-9).unwrap();
            if broken {
                assert!(
                    check.relative_pairing() > 1e-4,
                    "broken symmetry still conserved: {:.3e}",
                    check.relative_pairing()
                );
            } else {
                assert!(
                    check.relative_pairing() <= 1e-8,
                    "pairing {:.3e} at scale {:.3e}",
                    check.cartan_pairing,
                    check.scale
                );
            }
        }
    }
}
