//! Newton iteration with backtracking line search for the discrete
//! Euler-Lagrange system.
//!
//! Dirichlet dofs are eliminated from the system: the interior block of the
//! Hessian is solved for the update while frozen dofs keep their prescribed
//! values. Under a Lorentzian signature the interior block is symmetric
//! indefinite, so the linear solves go through the signature-agnostic path.

use super::{CovariantError, Problem};
use crate::feec::FieldSet;
use crate::linalg::{self, norm2, TripletBuilder};
use crate::mesh::{boundary_dof_sets, RegularRegion};
use std::collections::BTreeMap;

/// Prescribed coefficient values on the global-boundary dofs of the scalar
/// space, per component. Keys are flat dof indices `component * nodes + node`.
#[derive(Clone, Debug, Default)]
pub struct DirichletData {
    values: BTreeMap<usize, f64>,
}

impl DirichletData {
    /// Sample a trace closure on every global-boundary node, all components.
    pub fn from_trace(
        problem: &Problem,
        trace: impl Fn(f64, f64, usize) -> f64,
    ) -> Self {
        let mesh = problem.mesh();
        let n = problem.space().dof_count();
        let mut values = BTreeMap::new();
        for node in mesh.global_boundary_nodes() {
            let (t, x) = mesh.node_coords(node);
            for c in 0..problem.components() {
                values.insert(c * n + node, trace(t, x, c));
            }
        }
        Self { values }
    }

    pub fn zero(problem: &Problem) -> Self {
        Self::from_trace(problem, |_, _, _| 0.0)
    }

    pub fn values(&self) -> &BTreeMap<usize, f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Verify the key set is exactly the global-boundary dofs of the problem.
    pub fn validate(&self, problem: &Problem) -> Result<(), CovariantError> {
        let n = problem.space().dof_count();
        let mut expected = Vec::new();
        for node in problem.mesh().global_boundary_nodes() {
            for c in 0..problem.components() {
                expected.push(c * n + node);
            }
        }
        expected.sort_unstable();
        let got: Vec<usize> = self.values.keys().copied().collect();
        if got != expected {
            return Err(CovariantError::BadDirichletKeys(format!(
                "got {} keys, expected {}",
                got.len(),
                expected.len()
            )));
        }
        Ok(())
    }

    /// Overwrite prescribed dofs in a state.
    pub fn apply(&self, state: &mut FieldSet) {
        for (&dof, &v) in &self.values {
            state.coeffs_mut()[dof] = v;
        }
    }
}

/// Iteration diagnostics returned alongside a solution.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    pub step_sizes: Vec<f64>,
    pub residual_history: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Smallest backtracking step before the step is taken regardless.
    pub step_floor: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 50,
            step_floor: 1e-4,
        }
    }
}

/// Solve the localized discrete Euler-Lagrange equations on a region.
///
/// Unknowns are the dofs interior to the region (all components); every other
/// dof keeps its value from the initial guess, with `dirichlet` values taking
/// precedence where prescribed. The converged state satisfies the interior
/// residual to `options.tolerance` and matches the Dirichlet data exactly.
pub fn newton_solve(
    problem: &Problem,
    region: &RegularRegion,
    dirichlet: &DirichletData,
    initial: &FieldSet,
    options: NewtonOptions,
) -> Result<(FieldSet, SolveReport), CovariantError> {
    let sets = boundary_dof_sets(region, problem.space())?;
    let n = problem.space().dof_count();
    let m = problem.components();
    let mut free: Vec<usize> = Vec::with_capacity(m * sets.interior_dofs.len());
    for c in 0..m {
        for &node in &sets.interior_dofs {
            free.push(c * n + node);
        }
    }
    free.sort_unstable();
    let mut local_of = vec![usize::MAX; m * n];
    for (local, &dof) in free.iter().enumerate() {
        local_of[dof] = local;
    }

    let mut state = initial.clone();
    dirichlet.apply(&mut state);

    let restrict = |r: &[f64]| -> Vec<f64> { free.iter().map(|&d| r[d]).collect() };

    let mut residual = restrict(&problem.assemble_residual(&state, region)?);
    let mut res_norm = norm2(&residual);
    let mut report = SolveReport {
        iterations: 0,
        final_residual: res_norm,
        converged: res_norm <= options.tolerance,
        step_sizes: Vec::new(),
        residual_history: vec![res_norm],
    };
    if report.converged || free.is_empty() {
        report.converged = true;
        return Ok((state, report));
    }

    for iteration in 0..options.max_iterations {
        let jacobian = problem.assemble_jacobian(&state, region)?;
        // interior block in local indexing
        let mut block = TripletBuilder::new(free.len(), free.len());
        for (local_row, &dof) in free.iter().enumerate() {
            for (col, v) in jacobian.row(dof) {
                let local_col = local_of[col];
                if local_col != usize::MAX {
                    block.push(local_row, local_col, v);
                }
            }
        }
        let block = block.build();
        let rhs: Vec<f64> = residual.iter().map(|v| -v).collect();
        let delta = linalg::solve_symmetric(&block, &rhs)
            .map_err(|_| CovariantError::SingularJacobian { iteration })?;

        // backtracking: halve until the residual decreases or the floor hits
        let mut alpha = 1.0;
        let (next_state, next_residual, next_norm) = loop {
            let mut candidate = state.clone();
            for (local, &dof) in free.iter().enumerate() {
                candidate.coeffs_mut()[dof] += alpha * delta[local];
            }
            let r = restrict(&problem.assemble_residual(&candidate, region)?);
            let norm = norm2(&r);
            if norm < res_norm || alpha * 0.5 < options.step_floor {
                break (candidate, r, norm);
            }
            alpha *= 0.5;
        };
        state = next_state;
        residual = next_residual;
        res_norm = next_norm;
        report.iterations = iteration + 1;
        report.step_sizes.push(alpha);
        report.residual_history.push(res_norm);
        report.final_residual = res_norm;
        if res_norm <= options.tolerance {
            report.converged = true;
            return Ok((state, report));
        }
    }
    Err(CovariantError::NoConvergence {
        residual: res_norm,
        iterations: report.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{
        builtin_nonlinear_wave_poisson, builtin_shift_symmetric_wave, Nonlinearity,
    };
    use crate::linalg::norm_inf;
    use crate::mesh::{build_tensor_mesh, full_domain};

    #[test]
    fn zero_boundary_data_gives_zero_solution_in_one_iteration() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 4, 4, false).unwrap();
        let density = builtin_nonlinear_wave_poisson(1, Nonlinearity::power(4, 1.0)).unwrap();
        let problem = Problem::new(&mesh, density).unwrap();
        let region = full_domain(&mesh);
        let dirichlet = DirichletData::zero(&problem);
        dirichlet.validate(&problem).unwrap();
        let initial = problem.zero_state();
        let (solution, report) =
            newton_solve(&problem, &region, &dirichlet, &initial, NewtonOptions::default())
                .unwrap();
        assert!(report.converged);
        assert!(report.iterations <= 1);
        assert!(norm_inf(solution.coeffs()) < 1e-12);
    }

    #[test]
    fn linear_wave_converges_in_one_newton_step() {
        // boundary data sampled from an exact traveling wave; quadratic
        // action means a single Newton step solves the system
        let mesh = build_tensor_mesh((0.0, 0.618), (0.0, 1.0), 6, 6, false).unwrap();
        let density = builtin_shift_symmetric_wave(-1).unwrap();
        let problem = Problem::new(&mesh, density).unwrap();
        let region = full_domain(&mesh);
        let wave = |t: f64, x: f64| (std::f64::consts::PI * (x - t)).sin();
        let dirichlet = DirichletData::from_trace(&problem, |t, x, _| wave(t, x));
        let initial = problem.zero_state();
        let (solution, report) = newton_solve(
            &problem,
            &region,
            &dirichlet,
            &initial,
            NewtonOptions::default(),
        )
        .unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
        // Dirichlet dofs match the data exactly
        for (&dof, &v) in dirichlet.values() {
            assert_eq!(solution.coeffs()[dof], v);
        }
    }

    #[test]
    fn dirichlet_keys_validated() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 2, 2, false).unwrap();
        let density = builtin_nonlinear_wave_poisson(1, Nonlinearity::zero()).unwrap();
        let problem = Problem::new(&mesh, density).unwrap();
        let mut bad = DirichletData::zero(&problem);
        bad.values.remove(&0);
        assert!(bad.validate(&problem).is_err());
    }
}
