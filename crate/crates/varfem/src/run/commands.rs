//! The four experiment commands: covariant solves, canonical simulations,
//! structure verification, and refinement studies.

use super::config::{
    BoundaryConfig, CheckName, ExperimentConfig, Family, NonlinearityConfig, NonlinearityKind,
    StepperConfig, StudyTarget,
};
use super::report::{sig17, write_csv, CheckResult, RunReport, SolveSummary, Table};
use super::RunError;
use crate::canonical::{
    energy_momentum_pairing, momentum_map, simulate, symplecticity_check,
    tensor_product_equivalence, ExtendedVector, HamiltonianSystem, SpatialSpace, StepperKind,
};
use crate::covariant::{
    newton_solve, quadrature_residual, strong_form_quadrature_residual, DirichletData,
    NewtonOptions, Problem, QuadratureRule,
};
use crate::feec::{
    assemble_derivative, project, FeSpace2d, FieldSet, FormDegree, MetricSignature,
    SampledForm,
};
use crate::lagrangian::{
    builtin_nonlinear_wave_poisson, builtin_shift_symmetric_wave, builtin_so2_pair,
    manufactured_poisson_problem, LagrangianDensity, Nonlinearity, PointwiseAction,
    SymmetryGenerator,
};
use crate::linalg::{log_log_slope, norm2, norm_inf};
use crate::mesh::{build_tensor_mesh, full_domain, rect_region, RegularRegion, TensorMesh2D};
use crate::quad::gauss_on_rect;
use crate::structures::{
    boundary_flux, cartan_form_density_route, equivariance_check, first_variation_basis,
    interior_residual_norm, multisymplectic_residual, noether_check, noether_current_norms,
    noether_rearrangement, region_dofs, weak_el_pairing, SmoothSample, VariationField,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

/// Exact solution attached to a problem when one is known analytically.
type ExactSolution = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

fn nonlinearity(config: &NonlinearityConfig) -> Nonlinearity {
    match config.kind {
        NonlinearityKind::Zero => Nonlinearity::zero(),
        NonlinearityKind::Power => Nonlinearity::power(config.degree, config.coefficient),
    }
}

fn build_density(
    config: &ExperimentConfig,
) -> Result<(Arc<LagrangianDensity>, Option<ExactSolution>), RunError> {
    let nonlin = nonlinearity(&config.problem.nonlinearity);
    let eps = config.problem.epsilon;
    let result = match config.problem.family {
        Family::NonlinearWave => builtin_nonlinear_wave_poisson(eps, nonlin).map(|d| (d, None)),
        Family::ShiftWave => builtin_shift_symmetric_wave(eps).map(|d| (d, None)),
        Family::So2Pair => builtin_so2_pair(eps, nonlin, false).map(|d| (d, None)),
        Family::So2PairBroken => builtin_so2_pair(eps, nonlin, true).map(|d| (d, None)),
        Family::ManufacturedPoisson => manufactured_poisson_problem(nonlin)
            .map(|p| (p.density, Some(p.exact as ExactSolution))),
    };
    let (density, exact) = result.map_err(|e| RunError::Config(e.to_string()))?;
    Ok((Arc::new(density), exact))
}

fn build_problem(
    config: &ExperimentConfig,
) -> Result<(Problem, Option<ExactSolution>), RunError> {
    let (density, exact) = build_density(config)?;
    let mesh = build_tensor_mesh(
        (config.mesh.t_range[0], config.mesh.t_range[1]),
        (config.mesh.x_range[0], config.mesh.x_range[1]),
        config.mesh.elements_t,
        config.mesh.elements_x,
        config.mesh.periodic_x,
    )
    .map_err(|e| RunError::Config(e.to_string()))?;
    let problem = Problem::new(&mesh, density).map_err(|e| RunError::Config(e.to_string()))?;
    Ok((problem, exact))
}

fn dirichlet_for(
    problem: &Problem,
    boundary: &BoundaryConfig,
    exact: Option<&ExactSolution>,
) -> DirichletData {
    match exact {
        Some(exact) => {
            let exact = exact.clone();
            DirichletData::from_trace(problem, move |t, x, _| exact(t, x))
        }
        None => DirichletData::from_trace(problem, |t, x, c| boundary.trace(t, x, c)),
    }
}

fn solve(
    problem: &Problem,
    dirichlet: &DirichletData,
    config: &ExperimentConfig,
) -> Result<(FieldSet, SolveSummary), RunError> {
    let options = NewtonOptions {
        tolerance: config.solver.tol,
        max_iterations: config.solver.max_iter,
        ..NewtonOptions::default()
    };
    let region = full_domain(problem.mesh());
    let (state, report) = newton_solve(problem, &region, dirichlet, &problem.zero_state(), options)
        .map_err(|e| RunError::Solver(e.to_string()))?;
    let summary = SolveSummary {
        dofs: problem.dof_count(),
        iterations: report.iterations,
        final_residual: report.final_residual,
        converged: report.converged,
        step_sizes: report.step_sizes,
    };
    Ok((state, summary))
}

/// L2 distance between a state and an exact scalar solution.
fn l2_error(problem: &Problem, state: &FieldSet, exact: &ExactSolution) -> f64 {
    let mesh = problem.mesh();
    let m = problem.components();
    let mut values = vec![0.0; m];
    let mut grads = vec![[0.0; 2]; m];
    let mut total = 0.0;
    for e in 0..mesh.element_count() {
        let (t0, t1, x0, x1) = mesh.element_bounds(e);
        for ((t, x), w) in gauss_on_rect(4, t0, t1, x0, x1) {
            state.eval_in_element(e, t, x, &mut values, &mut grads);
            let d = values[0] - exact(t, x);
            total += w * d * d;
        }
    }
    total.sqrt()
}

fn random_state(problem: &Problem, rng: &mut ChaCha8Rng, amplitude: f64) -> FieldSet {
    let mut state = problem.zero_state();
    for c in state.coeffs_mut() {
        *c = amplitude * (rng.random::<f64>() - 0.5);
    }
    state
}

/// Named verification regions: the full domain plus config rectangles, or a
/// pair of default interior blocks when none are configured.
fn resolve_regions(
    config: &ExperimentConfig,
    mesh: &TensorMesh2D,
) -> Result<Vec<(String, RegularRegion)>, RunError> {
    let mut out = vec![("full".to_string(), full_domain(mesh))];
    if config.verify.regions.is_empty() {
        let m = mesh.m();
        let n = mesh.n();
        if m >= 4 && n >= 4 {
            let te = (m - 2).min(3);
            let xe = (n - 2).min(3);
            out.push((
                "block_a".into(),
                rect_region(mesh, 1, 1, te, xe).map_err(|e| RunError::Config(e.to_string()))?,
            ));
        }
        if m >= 6 && n >= 6 {
            out.push((
                "block_b".into(),
                rect_region(mesh, m / 2, 1, 2, (n - 2).min(4))
                    .map_err(|e| RunError::Config(e.to_string()))?,
            ));
        }
    } else {
        for (k, spec) in config.verify.regions.iter().enumerate() {
            let region = rect_region(mesh, spec.t0, spec.x0, spec.t_elements, spec.x_elements)
                .map_err(|e| RunError::Config(format!("region {k}: {e}")))?;
            out.push((format!("region{k}"), region));
        }
    }
    Ok(out)
}

fn applicable_checks(config: &ExperimentConfig) -> Result<Vec<CheckName>, RunError> {
    let has_generators = matches!(
        config.problem.family,
        Family::ShiftWave | Family::So2Pair | Family::So2PairBroken
    );
    if config.verify.checks.is_empty() {
        let mut checks = CheckName::all();
        if !has_generators {
            checks.retain(|c| !matches!(c, CheckName::Noether | CheckName::Equivariance));
        }
        Ok(checks)
    } else {
        for check in &config.verify.checks {
            if matches!(check, CheckName::Noether | CheckName::Equivariance) && !has_generators {
                return Err(RunError::Config(format!(
                    "check {} needs a family with symmetry generators",
                    check.label()
                )));
            }
        }
        Ok(config.verify.checks.clone())
    }
}

pub fn cmd_solve_covariant(
    config: &ExperimentConfig,
    out_dir: &Path,
    seed: u64,
) -> Result<RunReport, RunError> {
    let (problem, exact) = build_problem(config)?;
    let dirichlet = dirichlet_for(&problem, &config.boundary, exact.as_ref());
    let (state, summary) = solve(&problem, &dirichlet, config)?;

    let mut report = RunReport::new("solve", seed);
    report.push_check(CheckResult::at_most(
        "solver_residual",
        summary.final_residual,
        config.solver.tol,
    ));
    if let Some(exact) = &exact {
        let error = l2_error(&problem, &state, exact);
        report.push_check(
            CheckResult::at_most("l2_error", error, f64::INFINITY)
                .with_detail("informational: distance to the exact solution"),
        );
    }
    report.solve = Some(summary);

    let mesh = problem.mesh();
    let n = problem.space().dof_count();
    let rows = (0..problem.components()).flat_map(|c| {
        (0..n).map(move |node| (c, node))
    });
    let state_ref = &state;
    write_csv(
        &out_dir.join("fields.csv"),
        &["node", "t", "x", "component", "value"],
        rows.map(|(c, node)| {
            let (t, x) = mesh.node_coords(node);
            vec![
                node.to_string(),
                sig17(t),
                sig17(x),
                c.to_string(),
                sig17(state_ref.coeff(c, node)),
            ]
        }),
    )
    .map_err(RunError::Io)?;
    report.outputs.push("fields.csv".into());
    Ok(report)
}

pub fn cmd_simulate_canonical(
    config: &ExperimentConfig,
    out_dir: &Path,
    seed: u64,
) -> Result<RunReport, RunError> {
    let (density, _) = build_density(config)?;
    let space = SpatialSpace::uniform(
        config.canonical.x_range[0],
        config.canonical.x_range[1],
        config.canonical.elements,
        config.canonical.periodic,
    )
    .map_err(|e| RunError::Config(e.to_string()))?;
    let system =
        HamiltonianSystem::new(space, density).map_err(|e| RunError::Config(e.to_string()))?;

    let (x0, x1) = (config.canonical.x_range[0], config.canonical.x_range[1]);
    let length = x1 - x0;
    let mode = config.canonical.mode as f64;
    let amp = config.canonical.amplitude;
    let offset = config.canonical.velocity_offset;
    let initial = system.state_from_fns(
        0.0,
        |x, c| amp * (2.0 * PI * mode * (x - x0) / length + 0.7 * c as f64).sin(),
        |x, c| offset + 0.5 * amp * (2.0 * PI * mode * (x - x0) / length + 0.3 * c as f64).cos(),
    );

    let kind = match config.canonical.stepper {
        StepperConfig::Midpoint => StepperKind::ImplicitMidpoint,
        StepperConfig::ExplicitEuler => StepperKind::ExplicitEuler,
    };
    let trajectory = simulate(
        &system,
        initial.clone(),
        config.canonical.dt,
        config.canonical.steps,
        kind,
    )
    .map_err(|e| RunError::Solver(e.to_string()))?;

    let mut report = RunReport::new("simulate", seed);

    // energy-momentum identity at seeded random states
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut identity_worst = 0.0f64;
    for _ in 0..5 {
        let a1 = rng.random::<f64>() - 0.5;
        let a2 = rng.random::<f64>() - 0.5;
        let t0 = rng.random::<f64>();
        let state = system.state_from_fns(
            t0,
            |x, c| a1 * (x * (3.0 + c as f64)).sin(),
            |x, c| a2 * (x * (2.0 + c as f64)).cos(),
        );
        let xh = ExtendedVector::hamiltonian_generator(&system, &state)
            .map_err(|e| RunError::Solver(e.to_string()))?;
        let pairing = energy_momentum_pairing(&system, &state, &xh)
            .map_err(|e| RunError::Solver(e.to_string()))?;
        let h = system
            .hamiltonian(&state)
            .map_err(|e| RunError::Solver(e.to_string()))?;
        identity_worst = identity_worst.max((pairing - h).abs() / (1.0 + h.abs()));
        for generator in system.generators() {
            let vertical = ExtendedVector::vertical(&system, &state, generator);
            let p = energy_momentum_pairing(&system, &state, &vertical)
                .map_err(|e| RunError::Solver(e.to_string()))?;
            let j = momentum_map(&system, &state, generator)
                .map_err(|e| RunError::Solver(e.to_string()))?;
            identity_worst = identity_worst.max((p - j).abs() / (1.0 + j.abs()));
        }
    }
    report.push_check(CheckResult::at_most(
        "energy_momentum_identity",
        identity_worst,
        1e-12,
    ));

    // symplecticity of the flow map over a short window
    let deviation = symplecticity_check(
        &system,
        &initial,
        config.canonical.dt,
        config.canonical.steps.min(10),
        kind,
    )
    .map_err(|e| RunError::Solver(e.to_string()))?;
    report.push_check(CheckResult::at_most(
        "symplecticity",
        deviation,
        if kind == StepperKind::ImplicitMidpoint {
            1e-6
        } else {
            f64::INFINITY
        },
    ));
    let conservative = kind == StepperKind::ImplicitMidpoint;
    let quadratic = system
        .density()
        .polynomial_degree()
        .map_or(false, |d| d <= 2);
    let h_tol = if !conservative {
        f64::INFINITY
    } else if quadratic {
        1e-10
    } else {
        1e-4
    };
    report.push_check(CheckResult::at_most(
        "hamiltonian_drift",
        trajectory.hamiltonian_drift(),
        h_tol,
    ));
    for (gi, generator) in system.generators().iter().enumerate() {
        report.push_check(CheckResult::at_most(
            format!("momentum_drift_{}", generator.name()),
            trajectory.momentum_drift(gi),
            if conservative { 1e-10 } else { f64::INFINITY },
        ));
    }

    let names: Vec<String> = system
        .generators()
        .iter()
        .map(|g| format!("momentum_{}", g.name()))
        .collect();
    let mut columns = vec!["step".to_string(), "time".to_string(), "hamiltonian".to_string()];
    columns.extend(names);
    columns.push("phi_norm".into());
    columns.push("pi_norm".into());
    let column_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    write_csv(
        &out_dir.join("trajectory.csv"),
        &column_refs,
        (0..trajectory.states.len()).map(|k| {
            let mut row = vec![
                k.to_string(),
                sig17(trajectory.states[k].time),
                sig17(trajectory.hamiltonians[k]),
            ];
            for series in &trajectory.momentum_maps {
                row.push(sig17(series[k]));
            }
            row.push(sig17(norm2(&trajectory.states[k].phi)));
            row.push(sig17(norm2(&trajectory.states[k].pi)));
            row
        }),
    )
    .map_err(RunError::Io)?;
    report.outputs.push("trajectory.csv".into());
    Ok(report)
}

pub fn cmd_verify(
    config: &ExperimentConfig,
    out_dir: &Path,
    seed: u64,
) -> Result<RunReport, RunError> {
    let checks = applicable_checks(config)?;
    let (problem, exact) = build_problem(config)?;
    let regions = resolve_regions(config, problem.mesh())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = RunReport::new("verify", seed);

    // a solved state is shared by the solution-gated checks
    let needs_solution = checks.iter().any(|c| {
        matches!(
            c,
            CheckName::LocalGlobal
                | CheckName::CartanCrossValidation
                | CheckName::Multisymplectic
                | CheckName::Noether
        )
    });
    let solved = if needs_solution {
        let dirichlet = dirichlet_for(&problem, &config.boundary, exact.as_ref());
        Some(solve(&problem, &dirichlet, config)?)
    } else {
        None
    };
    if let Some((_, summary)) = &solved {
        report.solve = Some(summary.clone());
    }

    for check in &checks {
        match check {
            CheckName::Stencil => check_stencil(config, &mut rng, &mut report)?,
            CheckName::Cochain => check_cochain(&mut rng, &mut report),
            CheckName::Naturality => check_naturality(&problem, &mut report)?,
            CheckName::LocalGlobal => {
                let (state, _) = solved.as_ref().expect("solution available");
                for (name, region) in &regions {
                    let r = interior_residual_norm(&problem, region, state)
                        .map_err(|e| RunError::Solver(e.to_string()))?;
                    report.push_check(CheckResult::at_most(
                        format!("local_global_{name}"),
                        r,
                        10.0 * config.solver.tol,
                    ));
                }
            }
            CheckName::CartanCrossValidation => {
                let (state, _) = solved.as_ref().expect("solution available");
                for (name, region) in &regions {
                    let mut worst = 0.0f64;
                    for _ in 0..3 {
                        let v = VariationField::from_field(random_state(&problem, &mut rng, 1.0));
                        let route1 = crate::structures::boundary_pairing(
                            &problem, region, state, &v,
                        )
                        .map_err(|e| RunError::Solver(e.to_string()))?;
                        let route2 = cartan_form_density_route(&problem, region, state, &v)
                            .map_err(|e| RunError::Solver(e.to_string()))?;
                        let scale = route1.abs().max(route2.abs()).max(1e-14);
                        worst = worst.max((route1 - route2).abs() / scale);
                    }
                    report.push_check(CheckResult::at_most(
                        format!("cartan_cross_validation_{name}"),
                        worst,
                        1e-8,
                    ));
                }
            }
            CheckName::Multisymplectic => {
                let (state, _) = solved.as_ref().expect("solution available");
                for (name, region) in &regions {
                    check_multisymplectic(&problem, region, state, name, &mut rng, &mut report)?;
                }
            }
            CheckName::Noether => {
                check_noether(config, &problem, &regions, solved.as_ref(), &mut rng, &mut report)?
            }
            CheckName::Equivariance => check_equivariance(&problem, &mut report),
            CheckName::TensorProduct => check_tensor_product(config, &mut rng, &mut report)?,
            CheckName::QuadratureOrdering => {
                check_quadrature_ordering(&problem, &mut rng, &mut report)?
            }
        }
    }

    write_checks_csv(&report, out_dir)?;
    Ok(report)
}

fn write_checks_csv(report: &RunReport, out_dir: &Path) -> Result<(), RunError> {
    write_csv(
        &out_dir.join("checks.csv"),
        &["name", "measured", "tolerance", "passed"],
        report.checks.iter().map(|c| {
            vec![
                c.name.clone(),
                sig17(c.measured),
                sig17(c.tolerance),
                if c.passed { "1" } else { "0" }.to_string(),
            ]
        }),
    )
    .map_err(RunError::Io)
}

fn check_stencil(
    config: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
    report: &mut RunReport,
) -> Result<(), RunError> {
    let eps = config.problem.epsilon;
    let mesh = build_tensor_mesh(
        (config.mesh.t_range[0], config.mesh.t_range[1]),
        (config.mesh.x_range[0], config.mesh.x_range[1]),
        config.mesh.elements_t.max(3),
        config.mesh.elements_x.max(3),
        false,
    )
    .map_err(|e| RunError::Config(e.to_string()))?;
    let density = builtin_nonlinear_wave_poisson(eps, Nonlinearity::zero())
        .map_err(|e| RunError::Config(e.to_string()))?;
    let problem = Problem::new(&mesh, density).map_err(|e| RunError::Config(e.to_string()))?;
    let dt = mesh.dt();
    let dx = mesh.dx();

    // 1D factors via the interval complexes
    let t_complex = crate::feec::CochainComplex1d::new(
        mesh.t_mesh(),
        MetricSignature::euclidean(1),
    )
    .map_err(|e| RunError::Config(e.to_string()))?;
    let stiff = t_complex.stiffness();
    let mass = t_complex.mass0();
    let mut worst = 0.0f64;
    let row = mesh.m() / 2;
    let rel = |got: f64, want: f64| (got - want).abs() / want.abs().max(1e-300);
    worst = worst.max(rel(stiff.get(row, row), 2.0 / dt));
    worst = worst.max(rel(stiff.get(row, row - 1), -1.0 / dt));
    worst = worst.max(rel(stiff.get(row, row + 1), -1.0 / dt));
    worst = worst.max(rel(mass.get(row, row), 2.0 * dt / 3.0));
    worst = worst.max(rel(mass.get(row, row - 1), dt / 6.0));
    worst = worst.max(rel(mass.get(row, row + 1), dt / 6.0));

    // nine-point update at a random lattice field
    let state = random_state(&problem, rng, 1.0);
    let region = full_domain(&mesh);
    let residual = problem
        .assemble_residual(&state, &region)
        .map_err(|e| RunError::Solver(e.to_string()))?;
    let avg_x = |ti: usize, xi: usize| {
        (state.coeff(0, mesh.node_id(ti, xi + 1))
            + 4.0 * state.coeff(0, mesh.node_id(ti, xi))
            + state.coeff(0, mesh.node_id(ti, xi - 1)))
            / 6.0
    };
    let avg_t = |ti: usize, xi: usize| {
        (state.coeff(0, mesh.node_id(ti + 1, xi))
            + 4.0 * state.coeff(0, mesh.node_id(ti, xi))
            + state.coeff(0, mesh.node_id(ti - 1, xi)))
            / 6.0
    };
    for ti in 1..mesh.t_mesh().node_count() - 1 {
        for xi in 1..mesh.x_mesh().node_count() - 1 {
            let second_t = (avg_x(ti + 1, xi) - 2.0 * avg_x(ti, xi) + avg_x(ti - 1, xi))
                / (dt * dt);
            let second_x = (avg_t(ti, xi + 1) - 2.0 * avg_t(ti, xi) + avg_t(ti, xi - 1))
                / (dx * dx);
            let expected = -dt * dx * (second_t + f64::from(eps) * second_x);
            let got = residual[mesh.node_id(ti, xi)];
            worst = worst.max((got - expected).abs() / expected.abs().max(1e-12));
        }
    }
    report.push_check(CheckResult::at_most("stencil", worst, 1e-13));
    Ok(())
}

fn check_cochain(rng: &mut ChaCha8Rng, report: &mut RunReport) {
    let mut worst = 0.0f64;
    let mut worst_composite = 0.0f64;
    for _ in 0..10 {
        let m = rng.random_range(1..=6);
        let n = rng.random_range(1..=6);
        let t1 = 0.5 + rng.random::<f64>();
        let x1 = 0.5 + rng.random::<f64>();
        let periodic = rng.random::<bool>();
        let mesh = build_tensor_mesh((0.0, t1), (0.0, x1), m, n, periodic).unwrap();
        let space0 = FeSpace2d::new(&mesh, FormDegree::Zero);
        let space1 = FeSpace2d::new(&mesh, FormDegree::One);
        let d0 = assemble_derivative(&space0).unwrap();
        let d1 = assemble_derivative(&space1).unwrap();
        // u = t^2 x + random low-order polynomial terms
        let (a, b, c) = (rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
        let u = move |t: f64, x: f64| t * t * x + a * t + b * x * x + c;
        let du = move |t: f64, x: f64| [2.0 * t * x + a, t * t + 2.0 * b * x];
        let p0 = project(
            &space0,
            &SampledForm::Scalar {
                eval: &u,
                derivative: None,
                polynomial: true,
            },
        )
        .unwrap();
        let p1 = project(
            &space1,
            &SampledForm::OneForm {
                eval: &du,
                derivative: None,
                polynomial: true,
            },
        )
        .unwrap();
        let lhs = d0.mul_vec(p0.coeffs());
        let diff: Vec<f64> = lhs
            .iter()
            .zip(p1.coeffs().iter())
            .map(|(a, b)| a - b)
            .collect();
        worst = worst.max(norm_inf(&diff));
        for node in 0..space0.dof_count() {
            let mut e = vec![0.0; space0.dof_count()];
            e[node] = 1.0;
            worst_composite = worst_composite.max(norm_inf(&d1.mul_vec(&d0.mul_vec(&e))));
        }
    }
    report.push_check(CheckResult::at_most("cochain_commutation", worst, 1e-12));
    report.push_check(CheckResult::at_most(
        "cochain_d_squared",
        worst_composite,
        0.0,
    ));
}

fn check_naturality(problem: &Problem, report: &mut RunReport) -> Result<(), RunError> {
    // project a smooth field two ways: through the scalar space (then let the
    // assembly differentiate) and through the edge space (the projected
    // derivative); with cochain projections both factorizations give the same
    // action value
    let mesh = problem.mesh();
    let m = problem.components();
    let u = |t: f64, x: f64, c: usize| (1.1 * t + 0.2 * c as f64).sin() * (0.8 * x).cos();
    let du = |t: f64, x: f64, c: usize| {
        [
            1.1 * (1.1 * t + 0.2 * c as f64).cos() * (0.8 * x).cos(),
            -0.8 * (1.1 * t + 0.2 * c as f64).sin() * (0.8 * x).sin(),
        ]
    };
    let state = FieldSet::from_fn(problem.space(), m, u);
    let region = full_domain(mesh);
    let direct = problem
        .assemble_action(&state, &region)
        .map_err(|e| RunError::Solver(e.to_string()))?;

    let space1 = FeSpace2d::new(mesh, FormDegree::One);
    let mut projected_derivatives = Vec::with_capacity(m);
    for c in 0..m {
        let eval = |t: f64, x: f64| du(t, x, c);
        let field = project(
            &space1,
            &SampledForm::OneForm {
                eval: &eval,
                derivative: None,
                polynomial: false,
            },
        )
        .map_err(|e| RunError::Solver(e.to_string()))?;
        projected_derivatives.push(field);
    }
    let q = problem.density().quadrature_points();
    let mut degenerate = 0.0;
    let mut values = vec![0.0; m];
    let mut grads = vec![[0.0; 2]; m];
    let mut psi = vec![[0.0; 2]; m];
    for e in 0..mesh.element_count() {
        let (t0, t1, x0, x1) = mesh.element_bounds(e);
        for ((t, x), w) in gauss_on_rect(q, t0, t1, x0, x1) {
            state.eval_in_element(e, t, x, &mut values, &mut grads);
            for c in 0..m {
                let comps = projected_derivatives[c].eval_in_element(e, t, x);
                psi[c] = [comps[0], comps[1]];
            }
            degenerate += w * problem.density().value(t, x, &values, &psi);
        }
    }
    let scale = direct.abs().max(degenerate.abs()).max(1e-14);
    report.push_check(CheckResult::at_most(
        "naturality",
        (direct - degenerate).abs() / scale,
        1e-12,
    ));
    Ok(())
}

fn check_multisymplectic(
    problem: &Problem,
    region: &RegularRegion,
    state: &FieldSet,
    name: &str,
    rng: &mut ChaCha8Rng,
    report: &mut RunReport,
) -> Result<(), RunError> {
    let basis =
        first_variation_basis(problem, region, state).map_err(|e| RunError::Solver(e.to_string()))?;
    let hessian = problem
        .assemble_jacobian(state, region)
        .map_err(|e| RunError::Solver(e.to_string()))?;
    let h_scale = hessian.max_abs();
    let mut worst = 0.0f64;
    let stride = (basis.len() / 8).max(1);
    for i in (0..basis.len()).step_by(stride) {
        for j in (i..basis.len()).step_by(stride) {
            let r = multisymplectic_residual(problem, region, state, &basis[i], &basis[j])
                .map_err(|e| RunError::Solver(e.to_string()))?;
            let scale = h_scale * norm2(basis[i].coeffs()) * norm2(basis[j].coeffs());
            worst = worst.max(r.abs() / scale.max(1e-300));
        }
    }
    report.push_check(CheckResult::at_most(
        format!("multisymplectic_{name}"),
        worst,
        1e-8,
    ));

    // negative control: a boundary bump with random interior extension
    let dofs = region_dofs(problem, region).map_err(|e| RunError::Solver(e.to_string()))?;
    let mut coeffs = vec![0.0; problem.dof_count()];
    coeffs[dofs.boundary[dofs.boundary.len() / 3]] = 1.0;
    for &d in &dofs.interior {
        coeffs[d] = rng.random::<f64>() - 0.5;
    }
    let w = VariationField::from_coeffs(problem, coeffs)
        .map_err(|e| RunError::Solver(e.to_string()))?;
    let r = multisymplectic_residual(problem, region, state, &basis[0], &w)
        .map_err(|e| RunError::Solver(e.to_string()))?;
    let scale = h_scale * norm2(basis[0].coeffs()) * norm2(w.coeffs());
    report.push_check(CheckResult::exceeds(
        format!("multisymplectic_control_{name}"),
        r.abs() / scale.max(1e-300),
        1e-4,
    ));
    Ok(())
}

fn check_noether(
    config: &ExperimentConfig,
    problem: &Problem,
    regions: &[(String, RegularRegion)],
    solved: Option<&(FieldSet, SolveSummary)>,
    rng: &mut ChaCha8Rng,
    report: &mut RunReport,
) -> Result<(), RunError> {
    let (state, _) = solved.expect("solution available");
    let negative_family = config.problem.family == Family::So2PairBroken;
    for generator in problem.density().generators() {
        for (name, region) in regions {
            let check = noether_check(problem, region, state, generator, config.solver.tol)
                .map_err(|e| RunError::Solver(e.to_string()))?;
            let label = format!("noether_{}_{name}", generator.name());
            if negative_family {
                report.push_check(
                    CheckResult::exceeds(label, check.relative_pairing(), 1e-4)
                        .with_detail("broken symmetry: the pairing must not vanish"),
                );
            } else {
                report.push_check(CheckResult::at_most(label, check.relative_pairing(), 1e-8));
            }
            let identity_scale = check
                .scale
                .max(check.interior_term.abs())
                .max(check.boundary_ring_term.abs())
                .max(1e-14);
            report.push_check(CheckResult::at_most(
                format!("noether_identity_{}_{name}", generator.name()),
                check.rearrangement_residual / identity_scale,
                1e-10,
            ));
        }
        // the rearrangement identity holds on arbitrary fields too
        let arbitrary = random_state(problem, rng, 1.0);
        let (pairing, a, b) = noether_rearrangement(
            problem,
            &regions[0].1,
            &arbitrary,
            generator,
        )
        .map_err(|e| RunError::Solver(e.to_string()))?;
        let scale = pairing.abs().max(a.abs()).max(b.abs()).max(1e-14);
        report.push_check(CheckResult::at_most(
            format!("noether_identity_offsolution_{}", generator.name()),
            (pairing - (a - b)).abs() / scale,
            1e-12,
        ));
    }
    Ok(())
}

fn check_equivariance(problem: &Problem, report: &mut RunReport) {
    let m = problem.components();
    let probe = |t: f64, x: f64, c: usize| {
        (1.7 * t - 0.2 * c as f64).sin() * (0.6 * x + 0.1).cos() + 0.2
    };
    let samples = [SmoothSample { eval: &probe }];
    for generator in problem.density().generators() {
        let action = generator.pointwise_flow();
        let r = equivariance_check(problem.space(), m, &action, &samples, &[1e-3, 1e-4]);
        report.push_check(CheckResult::at_most(
            format!("equivariance_{}", generator.name()),
            r,
            1e-8,
        ));
    }
    // nonlinear pointwise action: a genuine commutation failure
    let cubic = PointwiseAction::new(Box::new(|s, input, output| {
        for (o, &v) in output.iter_mut().zip(input.iter()) {
            *o = v + s * v * v * v;
        }
    }));
    let r = equivariance_check(problem.space(), m, &cubic, &samples, &[1e-3, 1e-4]);
    report.push_check(CheckResult::exceeds("equivariance_cubic_control", r, 1e-4));
}

fn check_tensor_product(
    config: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
    report: &mut RunReport,
) -> Result<(), RunError> {
    let (density, _) = build_density(config)?;
    let mesh = build_tensor_mesh(
        (config.mesh.t_range[0], config.mesh.t_range[1]),
        (config.mesh.x_range[0], config.mesh.x_range[1]),
        config.mesh.elements_t,
        config.mesh.elements_x,
        config.mesh.periodic_x,
    )
    .map_err(|e| RunError::Config(e.to_string()))?;
    let problem =
        Problem::new(&mesh, density.clone()).map_err(|e| RunError::Config(e.to_string()))?;
    let space = SpatialSpace::new(mesh.x_mesh(), MetricSignature::euclidean(1))
        .map_err(|e| RunError::Config(e.to_string()))?;
    let system = HamiltonianSystem::new(space, density)
        .map_err(|e| RunError::Config(e.to_string()))?;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let coeffs = random_state(&problem, rng, 1.0);
        let eq = tensor_product_equivalence(&system, &problem, &coeffs)
            .map_err(|e| RunError::Solver(e.to_string()))?;
        worst = worst.max(eq.max_difference / eq.scale.max(1.0));
    }
    report.push_check(CheckResult::at_most("tensor_product", worst, 1e-12));
    Ok(())
}

fn check_quadrature_ordering(
    problem: &Problem,
    rng: &mut ChaCha8Rng,
    report: &mut RunReport,
) -> Result<(), RunError> {
    let region = full_domain(problem.mesh());
    let state = random_state(problem, rng, 1.0);
    let sets = crate::mesh::boundary_dof_sets(&region, problem.space())
        .map_err(|e| RunError::Solver(e.to_string()))?;
    let compare = |rule: &QuadratureRule| -> Result<(f64, f64), RunError> {
        let variational = quadrature_residual(problem, &state, &region, rule)
            .map_err(|e| RunError::Solver(e.to_string()))?;
        let strong = strong_form_quadrature_residual(problem, &state, &region, rule)
            .map_err(|e| RunError::Solver(e.to_string()))?;
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        let n = problem.space().dof_count();
        for c in 0..problem.components() {
            for &node in &sets.interior_dofs {
                let d = c * n + node;
                diff = diff.max((variational[d] - strong[d]).abs());
                scale = scale.max(variational[d].abs());
            }
        }
        Ok((diff, scale))
    };
    let (vertex_diff, vertex_scale) = compare(&QuadratureRule::nodal_vertex())?;
    report.push_check(CheckResult::at_most(
        "quadrature_vertex_orderings_coincide",
        vertex_diff / vertex_scale.max(1.0),
        1e-13,
    ));
    let (gauss_diff, _) = compare(&QuadratureRule::gauss(1))?;
    report.push_check(CheckResult::exceeds(
        "quadrature_gauss_orderings_differ",
        gauss_diff,
        1e-8,
    ));
    Ok(())
}

pub fn cmd_converge(
    config: &ExperimentConfig,
    out_dir: &Path,
    seed: u64,
) -> Result<RunReport, RunError> {
    let mut report = RunReport::new("converge", seed);
    let targets = if config.study.targets.is_empty() {
        match config.problem.family {
            Family::ManufacturedPoisson => {
                vec![StudyTarget::ManufacturedL2, StudyTarget::CartanRing]
            }
            Family::ShiftWave => vec![StudyTarget::NoetherCurrent, StudyTarget::CartanRing],
            _ => vec![StudyTarget::CartanRing],
        }
    } else {
        config.study.targets.clone()
    };
    for target in targets {
        match target {
            StudyTarget::ManufacturedL2 => study_manufactured(config, &mut report)?,
            StudyTarget::NoetherCurrent => study_noether_current(config, &mut report)?,
            StudyTarget::CartanRing => study_cartan_ring(config, &mut report)?,
        }
    }
    for table in report.tables.clone() {
        let columns: Vec<&str> = table.columns.iter().map(|s| s.as_str()).collect();
        write_csv(
            &out_dir.join(format!("{}.csv", table.name)),
            &columns,
            table
                .rows
                .iter()
                .map(|row| row.iter().map(|v| sig17(*v)).collect()),
        )
        .map_err(RunError::Io)?;
        report.outputs.push(format!("{}.csv", table.name));
    }
    Ok(report)
}

fn study_manufactured(
    config: &ExperimentConfig,
    report: &mut RunReport,
) -> Result<(), RunError> {
    if config.problem.family != Family::ManufacturedPoisson {
        return Err(RunError::Config(
            "the manufactured study needs the manufactured_poisson family".into(),
        ));
    }
    let mut errors: Vec<f64> = Vec::new();
    let mut spacings: Vec<f64> = Vec::new();
    let mut rows = Vec::new();
    for level in 0..config.study.levels {
        let factor = 1usize << level;
        let mut scaled = config.clone();
        scaled.mesh.elements_t = config.study.coarsest_t * factor;
        scaled.mesh.elements_x = config.study.coarsest_x * factor;
        let (problem, exact) = build_problem(&scaled)?;
        let exact = exact.expect("manufactured family has an exact solution");
        let dirichlet = dirichlet_for(&problem, &scaled.boundary, Some(&exact));
        let (state, _) = solve(&problem, &dirichlet, &scaled)?;
        let error = l2_error(&problem, &state, &exact);
        let h = problem.mesh().dt().max(problem.mesh().dx());
        let rate = match (errors.last(), spacings.last()) {
            (Some(&e0), Some(&h0)) => (error / e0).ln() / (h / h0).ln(),
            _ => f64::NAN,
        };
        rows.push(vec![level as f64, h, error, rate]);
        errors.push(error);
        spacings.push(h);
    }
    let rate = log_log_slope(&spacings, &errors);
    report.tables.push(Table {
        name: "manufactured_l2".into(),
        columns: vec!["level".into(), "h".into(), "l2_error".into(), "rate".into()],
        rows,
    });
    report.push_check(CheckResult::within("manufactured_l2_rate", rate, 1.8, 2.2));
    Ok(())
}

fn study_noether_current(
    config: &ExperimentConfig,
    report: &mut RunReport,
) -> Result<(), RunError> {
    if config.problem.family != Family::ShiftWave {
        return Err(RunError::Config(
            "the current-decay study needs the shift_wave family".into(),
        ));
    }
    // coarse solves plus a reference one refinement beyond the finest
    let mut solves = Vec::new();
    for level in 0..=config.study.levels {
        let factor = 1usize << level;
        let mut scaled = config.clone();
        scaled.mesh.elements_t = config.study.coarsest_t * factor;
        scaled.mesh.elements_x = config.study.coarsest_x * factor;
        let (problem, _) = build_problem(&scaled)?;
        let dirichlet = dirichlet_for(&problem, &scaled.boundary, None);
        let (state, _) = solve(&problem, &dirichlet, &scaled)?;
        solves.push((problem, state));
    }
    let (fine_problem, fine_state) = solves.last().unwrap();
    let coarse: Vec<(&Problem, &FieldSet)> = solves[..solves.len() - 1]
        .iter()
        .map(|(p, s)| (p, s))
        .collect();
    let generator = SymmetryGenerator::shift();
    let entries = noether_current_norms(fine_problem, fine_state, &coarse, &generator)
        .map_err(|e| RunError::Solver(e.to_string()))?;
    let hs: Vec<f64> = entries.iter().map(|e| e.h).collect();
    let l2: Vec<f64> = entries.iter().map(|e| e.l2_distance).collect();
    let dual: Vec<f64> = entries.iter().map(|e| e.dual_surrogate).collect();
    report.tables.push(Table {
        name: "noether_current".into(),
        columns: vec!["h".into(), "l2_distance".into(), "dual_surrogate".into()],
        rows: entries
            .iter()
            .map(|e| vec![e.h, e.l2_distance, e.dual_surrogate])
            .collect(),
    });
    let max_ratio = |series: &[f64]| {
        series
            .windows(2)
            .map(|w| w[1] / w[0].max(1e-300))
            .fold(0.0f64, f64::max)
    };
    report.push_check(CheckResult::at_most(
        "noether_current_l2_monotone",
        max_ratio(&l2),
        0.999,
    ));
    report.push_check(CheckResult::within(
        "noether_current_l2_rate",
        log_log_slope(&hs, &l2),
        1.0,
        f64::INFINITY,
    ));
    report.push_check(CheckResult::at_most(
        "noether_current_dual_monotone",
        max_ratio(&dual),
        0.999,
    ));
    report.push_check(CheckResult::within(
        "noether_current_dual_rate",
        log_log_slope(&hs, &dual),
        1.0,
        f64::INFINITY,
    ));
    Ok(())
}

fn study_cartan_ring(config: &ExperimentConfig, report: &mut RunReport) -> Result<(), RunError> {
    if config.study.coarsest_t % 4 != 0 || config.study.coarsest_x % 4 != 0 {
        return Err(RunError::Config(
            "the ring study needs coarsest element counts divisible by 4".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    let mut spacings = Vec::new();
    for level in 0..config.study.levels {
        let factor = 1usize << level;
        let mut scaled = config.clone();
        scaled.mesh.elements_t = config.study.coarsest_t * factor;
        scaled.mesh.elements_x = config.study.coarsest_x * factor;
        let (problem, exact) = build_problem(&scaled)?;
        let dirichlet = dirichlet_for(&problem, &scaled.boundary, exact.as_ref());
        let (state, _) = solve(&problem, &dirichlet, &scaled)?;
        // the same physical region at every refinement
        let m = scaled.mesh.elements_t;
        let n = scaled.mesh.elements_x;
        let region = rect_region(problem.mesh(), m / 4, n / 4, m / 2, n / 2)
            .map_err(|e| RunError::Config(e.to_string()))?;
        // a fixed smooth boundary variation
        let v = VariationField::from_fn(&problem, |t, x, c| {
            (2.3 * t + 0.3 * c as f64).cos() * (1.7 * x).sin() + 0.5
        });
        let dofs = region_dofs(&problem, &region).map_err(|e| RunError::Solver(e.to_string()))?;
        let v_boundary = v.boundary_part(&dofs);
        let ring = weak_el_pairing(&problem, &region, &state, v_boundary.field())
            .map_err(|e| RunError::Solver(e.to_string()))?;
        let flux = boundary_flux(&problem, &region, &state, v_boundary.field())
            .map_err(|e| RunError::Solver(e.to_string()))?;
        let ratio = ring.abs() / flux.abs().max(1e-300);
        let h = problem.mesh().dt().max(problem.mesh().dx());
        rows.push(vec![level as f64, h, ring.abs(), flux.abs(), ratio]);
        ratios.push(ratio);
        spacings.push(h);
    }
    report.tables.push(Table {
        name: "cartan_ring".into(),
        columns: vec![
            "level".into(),
            "h".into(),
            "ring_term".into(),
            "boundary_term".into(),
            "ratio".into(),
        ],
        rows,
    });
    report.push_check(CheckResult::within(
        "cartan_ring_rate",
        log_log_slope(&spacings, &ratios),
        1.0,
        f64::INFINITY,
    ));
    let max_ratio = ratios
        .windows(2)
        .map(|w| w[1] / w[0].max(1e-300))
        .fold(0.0f64, f64::max);
    report.push_check(CheckResult::at_most(
        "cartan_ring_monotone",
        max_ratio,
        0.999,
    ));
    Ok(())
}

