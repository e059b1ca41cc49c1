//! Convergence of the conserved current under mesh refinement.
//!
//! For a vertical generator the conserved current of a state is the 1-form
//! `J = a . (star p)`: in coordinates `J_t = -sum_c a_c p_c^x`,
//! `J_x = sum_c a_c p_c^t`, with `a = xi_Y(phi)` pointwise and `p = d3L`.
//! Against a fine reference solution this module measures the L2 distance of
//! currents and a computable surrogate of the dual norm of `dJ`: the norm of
//! the functional `alpha -> (dJ, alpha)` over a fine test space of two-forms
//! with vanishing boundary trace, realized through the Gram matrix of their
//! graph inner products. Norms use the Euclidean L2 structure.

use super::StructuresError;
use crate::covariant::Problem;
use crate::feec::FieldSet;
use crate::lagrangian::SymmetryGenerator;
use crate::linalg::{conjugate_gradient, dot, TripletBuilder};
use crate::mesh::TensorMesh2D;
use crate::quad::gauss_on_rect;

/// Per-mesh entry of a current-decay study.
#[derive(Clone, Debug)]
pub struct CurrentDecayEntry {
    /// Mesh parameter of the coarse solution (max of the two spacings).
    pub h: f64,
    /// `||J(phi_h, xi) - J(phi, xi)||_{L2}` on the fine mesh.
    pub l2_distance: f64,
    /// Dual-norm surrogate of `dJ(phi_h, xi)` over the fine test space.
    pub dual_surrogate: f64,
}

/// Current components `[J_t, J_x]` of a state at a point.
fn current_at(
    problem: &Problem,
    state: &FieldSet,
    generator: &SymmetryGenerator,
    t: f64,
    x: f64,
) -> Result<[f64; 2], StructuresError> {
    let m = problem.components();
    let element = problem.mesh().locate(t, x)?;
    let mut values = vec![0.0; m];
    let mut grads = vec![[0.0; 2]; m];
    state.eval_in_element(element, t, x, &mut values, &mut grads);
    let p = problem.momenta_in_element(state, element, t, x);
    let mut a = vec![0.0; m];
    generator.vertical_value_at(&values, &mut a);
    let mut jt = 0.0;
    let mut jx = 0.0;
    for c in 0..m {
        jt -= a[c] * p[c][1];
        jx += a[c] * p[c][0];
    }
    Ok([jt, jx])
}

fn check_nested(fine: &TensorMesh2D, coarse: &TensorMesh2D) -> Result<(), StructuresError> {
    let ranges_match = |a: (f64, f64), b: (f64, f64)| {
        (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12
    };
    if !ranges_match(fine.t_mesh().range(), coarse.t_mesh().range())
        || !ranges_match(fine.x_mesh().range(), coarse.x_mesh().range())
        || fine.x_mesh().is_periodic() != coarse.x_mesh().is_periodic()
        || fine.m() % coarse.m() != 0
        || fine.n() % coarse.n() != 0
    {
        return Err(StructuresError::MeshNotNested {
            coarse: coarse.element_count(),
            fine: fine.element_count(),
        });
    }
    Ok(())
}

/// Measure current norms of coarse solutions against a fine reference.
///
/// All meshes must be nested refinements of the coarse ones; coarse fields are
/// evaluated pointwise at the fine quadrature nodes. The fine mesh hosts both
/// the quadrature and the dual-norm test space (interior bilinear nodes).
pub fn noether_current_norms(
    fine_problem: &Problem,
    fine_state: &FieldSet,
    coarse: &[(&Problem, &FieldSet)],
    generator: &SymmetryGenerator,
) -> Result<Vec<CurrentDecayEntry>, StructuresError> {
    let fine_mesh = fine_problem.mesh();
    for (p, _) in coarse {
        check_nested(fine_mesh, p.mesh())?;
    }

    // fine test space: interior nodes, H(graph) Gram matrix M + K
    let interior: Vec<usize> = {
        let boundary = fine_mesh.global_boundary_nodes();
        (0..fine_mesh.node_count())
            .filter(|n| boundary.binary_search(n).is_err())
            .collect()
    };
    let mut local_of = vec![usize::MAX; fine_mesh.node_count()];
    for (l, &n) in interior.iter().enumerate() {
        local_of[n] = l;
    }
    let space = fine_problem.space();
    let mut gram_builder = TripletBuilder::new(interior.len(), interior.len());
    for e in 0..fine_mesh.element_count() {
        let (t0, t1, x0, x1) = fine_mesh.element_bounds(e);
        let nodes = fine_mesh.element_corner_nodes(e);
        for ((t, x), w) in gauss_on_rect(2, t0, t1, x0, x1) {
            let (basis, grads) = space.scalar_basis(e, t, x);
            for i in 0..4 {
                let li = local_of[nodes[i]];
                if li == usize::MAX {
                    continue;
                }
                for j in 0..4 {
                    let lj = local_of[nodes[j]];
                    if lj == usize::MAX {
                        continue;
                    }
                    gram_builder.push(
                        li,
                        lj,
                        w * (basis[i] * basis[j]
                            + grads[i][0] * grads[j][0]
                            + grads[i][1] * grads[j][1]),
                    );
                }
            }
        }
    }
    let gram = gram_builder.build();

    let mut out = Vec::with_capacity(coarse.len());
    for (coarse_problem, coarse_state) in coarse {
        let mut distance_sq = 0.0;
        let mut rho = vec![0.0; interior.len()];
        for e in 0..fine_mesh.element_count() {
            let (t0, t1, x0, x1) = fine_mesh.element_bounds(e);
            let nodes = fine_mesh.element_corner_nodes(e);
            for ((t, x), w) in gauss_on_rect(3, t0, t1, x0, x1) {
                let j_fine = current_at(fine_problem, fine_state, generator, t, x)?;
                let j_coarse = current_at(coarse_problem, coarse_state, generator, t, x)?;
                let dt_comp = j_coarse[0] - j_fine[0];
                let dx_comp = j_coarse[1] - j_fine[1];
                distance_sq += w * (dt_comp * dt_comp + dx_comp * dx_comp);
                let (_, grads) = space.scalar_basis(e, t, x);
                for k in 0..4 {
                    let lk = local_of[nodes[k]];
                    if lk != usize::MAX {
                        rho[lk] += w * (j_coarse[0] * grads[k][1] - j_coarse[1] * grads[k][0]);
                    }
                }
            }
        }
        let dual = if interior.is_empty() {
            0.0
        } else {
            let c =
                conjugate_gradient(&gram, &rho, 1e-12 * (1.0 + dot(&rho, &rho).sqrt()), 20_000)?;
            dot(&rho, &c).max(0.0).sqrt()
        };
        out.push(CurrentDecayEntry {
            h: coarse_problem.mesh().dt().max(coarse_problem.mesh().dx()),
            l2_distance: distance_sq.sqrt(),
            dual_surrogate: dual,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::builtin_shift_symmetric_wave;
    use crate::mesh::build_tensor_mesh;
    use nalgebra::DMatrix;

    fn wave_problem(m: usize, n: usize) -> Problem {
        let mesh = build_tensor_mesh((0.0, 0.618), (0.0, 1.0), m, n, false).unwrap();
        Problem::new(&mesh, builtin_shift_symmetric_wave(-1).unwrap()).unwrap()
    }

    #[test]
    fn identical_states_have_zero_norms() {
        let fine = wave_problem(8, 8);
        let state = FieldSet::from_fn(fine.space(), 1, |t, x, _| t * x + 0.3 * x);
        let entries = noether_current_norms(
            &fine,
            &state,
            &[(&fine, &state)],
            &SymmetryGenerator::shift(),
        )
        .unwrap();
        assert!(entries[0].l2_distance < 1e-14);
    }

    #[test]
    fn zero_generator_gives_zero_current() {
        let fine = wave_problem(6, 6);
        let coarse = wave_problem(3, 3);
        let fine_state = FieldSet::from_fn(fine.space(), 1, |t, x, _| (t - x).sin());
        let coarse_state = FieldSet::from_fn(coarse.space(), 1, |t, x, _| (t + x).cos());
        let zero = SymmetryGenerator::new("zero", DMatrix::zeros(1, 1), vec![0.0], true);
        let entries =
            noether_current_norms(&fine, &fine_state, &[(&coarse, &coarse_state)], &zero).unwrap();
        assert_eq!(entries[0].l2_distance, 0.0);
        assert_eq!(entries[0].dual_surrogate, 0.0);
    }

    #[test]
    fn non_nested_meshes_rejected() {
        let fine = wave_problem(8, 8);
        let coarse = wave_problem(3, 8);
        let fine_state = fine.zero_state();
        let coarse_state = coarse.zero_state();
        assert!(matches!(
            noether_current_norms(
                &fine,
                &fine_state,
                &[(&coarse, &coarse_state)],
                &SymmetryGenerator::shift()
            ),
            Err(StructuresError::MeshNotNested { .. })
        ));
    }
}
