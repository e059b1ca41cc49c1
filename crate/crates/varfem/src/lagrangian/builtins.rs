//! Built-in density families.

use super::symmetry::SymmetryGenerator;
use super::{LagrangianDensity, LagrangianError, SecondPartials};
use crate::feec::MetricSignature;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type SourceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A potential `N` with its first two derivatives.
#[derive(Clone)]
pub struct Nonlinearity {
    n: ScalarFn,
    n_prime: ScalarFn,
    n_second: ScalarFn,
    /// Polynomial degree of `N`, when polynomial.
    degree: Option<usize>,
}

impl Nonlinearity {
    pub fn zero() -> Self {
        Self {
            n: Arc::new(|_| 0.0),
            n_prime: Arc::new(|_| 0.0),
            n_second: Arc::new(|_| 0.0),
            degree: Some(0),
        }
    }

    /// `N(u) = c u^p / p`, so `N'(u) = c u^(p-1)`.
    pub fn power(p: u32, c: f64) -> Self {
        assert!(p >= 1);
        Self {
            n: Arc::new(move |u| c * u.powi(p as i32) / f64::from(p)),
            n_prime: Arc::new(move |u| c * u.powi(p as i32 - 1)),
            n_second: Arc::new(move |u| {
                if p >= 2 {
                    c * f64::from(p - 1) * u.powi(p as i32 - 2)
                } else {
                    0.0
                }
            }),
            degree: Some(p as usize),
        }
    }

    pub fn from_fns(
        n: ScalarFn,
        n_prime: ScalarFn,
        n_second: ScalarFn,
        degree: Option<usize>,
    ) -> Result<Self, LagrangianError> {
        let candidate = Self {
            n,
            n_prime,
            n_second,
            degree,
        };
        candidate.check_consistency()?;
        Ok(candidate)
    }

    pub fn value(&self, u: f64) -> f64 {
        (self.n)(u)
    }

    pub fn prime(&self, u: f64) -> f64 {
        (self.n_prime)(u)
    }

    pub fn second(&self, u: f64) -> f64 {
        (self.n_second)(u)
    }

    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    fn check_consistency(&self) -> Result<(), LagrangianError> {
        let step = 1e-5;
        for (k, &u) in [-1.4, -0.3, 0.0, 0.6, 1.9].iter().enumerate() {
            let fd1 = ((self.n)(u + step) - (self.n)(u - step)) / (2.0 * step);
            let an1 = (self.n_prime)(u);
            if (fd1 - an1).abs() > 1e-6 * (1.0 + fd1.abs() + an1.abs()) {
                return Err(LagrangianError::InconsistentDerivatives {
                    name: "N'",
                    error: (fd1 - an1).abs(),
                    sample: k,
                });
            }
            let fd2 = ((self.n_prime)(u + step) - (self.n_prime)(u - step)) / (2.0 * step);
            let an2 = (self.n_second)(u);
            if (fd2 - an2).abs() > 1e-6 * (1.0 + fd2.abs() + an2.abs()) {
                return Err(LagrangianError::InconsistentDerivatives {
                    name: "N''",
                    error: (fd2 - an2).abs(),
                    sample: k,
                });
            }
        }
        Ok(())
    }
}

/// Scalar density `L = 1/2 <dphi, dphi>_g - N(phi)` with `g = diag(1, eps)`.
pub fn builtin_nonlinear_wave_poisson(
    eps: i8,
    nonlin: Nonlinearity,
) -> Result<LagrangianDensity, LagrangianError> {
    scalar_family(eps, nonlin, None)
}

/// Same family with an additional forcing term `-s(t, x) phi`, used for
/// manufactured-solution studies.
pub fn nonlinear_wave_poisson_with_source(
    eps: i8,
    nonlin: Nonlinearity,
    source: SourceFn,
) -> Result<LagrangianDensity, LagrangianError> {
    scalar_family(eps, nonlin, Some(source))
}

fn scalar_family(
    eps: i8,
    nonlin: Nonlinearity,
    source: Option<SourceFn>,
) -> Result<LagrangianDensity, LagrangianError> {
    nonlin.check_consistency()?;
    let e = f64::from(eps);
    let metric = MetricSignature::spacetime(eps).expect("eps must be +-1");
    let n = nonlin.clone();
    let src_v = source.clone();
    let value = Box::new(move |t: f64, x: f64, phi: &[f64], psi: &[[f64; 2]]| {
        let kinetic = 0.5 * (psi[0][0] * psi[0][0] + e * psi[0][1] * psi[0][1]);
        let forcing = src_v.as_ref().map_or(0.0, |s| s(t, x) * phi[0]);
        kinetic - n.value(phi[0]) - forcing
    });
    let n2 = nonlin.clone();
    let src_d = source.clone();
    let d_phi = Box::new(
        move |t: f64, x: f64, phi: &[f64], _psi: &[[f64; 2]], out: &mut [f64]| {
            out[0] = -n2.prime(phi[0]) - src_d.as_ref().map_or(0.0, |s| s(t, x));
        },
    );
    let d_grad = Box::new(
        move |_t: f64, _x: f64, _phi: &[f64], psi: &[[f64; 2]], out: &mut [[f64; 2]]| {
            out[0] = [psi[0][0], e * psi[0][1]];
        },
    );
    let n3 = nonlin.clone();
    let second = SecondPartials {
        phi_phi: Box::new(move |_t, _x, phi, _psi, out| {
            out[0] = -n3.second(phi[0]);
        }),
        phi_grad: Box::new(|_t, _x, _phi, _psi, out| out.fill(0.0)),
        grad_grad: Box::new(move |_t, _x, _phi, _psi, out| {
            out.fill(0.0);
            out[0] = 1.0; // psi_{0,0} psi_{0,0}
            out[3] = e; // psi_{0,1} psi_{0,1}
        }),
    };
    let poly = if source.is_some() {
        None
    } else {
        nonlin.degree().map(|d| d.max(2))
    };
    LagrangianDensity::new(
        1,
        metric,
        value,
        d_phi,
        d_grad,
        Some(second),
        poly,
        true,
    )
}

/// Massless scalar density with the constant-shift symmetry generator
/// attached; `N = 0`, so `L` depends on `dphi` only.
pub fn builtin_shift_symmetric_wave(eps: i8) -> Result<LagrangianDensity, LagrangianError> {
    let mut density = builtin_nonlinear_wave_poisson(eps, Nonlinearity::zero())?;
    density.push_generator(SymmetryGenerator::shift());
    Ok(density)
}

/// Two-component density `L = 1/2 |dphi1|^2 + 1/2 |dphi2|^2 - N(phi1^2 + phi2^2)`,
/// rotation-invariant, with the SO(2) generator attached. Passing
/// `broken = true` replaces the potential argument by `phi1^2` alone, which
/// destroys the symmetry while keeping the generator claim; that variant is a
/// negative control.
pub fn builtin_so2_pair(
    eps: i8,
    nonlin: Nonlinearity,
    broken: bool,
) -> Result<LagrangianDensity, LagrangianError> {
    nonlin.check_consistency()?;
    let e = f64::from(eps);
    let metric = MetricSignature::spacetime(eps).expect("eps must be +-1");
    let radius2 = move |phi: &[f64]| {
        if broken {
            phi[0] * phi[0]
        } else {
            phi[0] * phi[0] + phi[1] * phi[1]
        }
    };
    let n1 = nonlin.clone();
    let value = Box::new(move |_t: f64, _x: f64, phi: &[f64], psi: &[[f64; 2]]| {
        let mut kinetic = 0.0;
        for g in psi.iter().take(2) {
            kinetic += 0.5 * (g[0] * g[0] + e * g[1] * g[1]);
        }
        kinetic - n1.value(radius2(phi))
    });
    let n2 = nonlin.clone();
    let d_phi = Box::new(
        move |_t: f64, _x: f64, phi: &[f64], _psi: &[[f64; 2]], out: &mut [f64]| {
            let np = n2.prime(radius2(phi));
            out[0] = -np * 2.0 * phi[0];
            out[1] = if broken { 0.0 } else { -np * 2.0 * phi[1] };
        },
    );
    let d_grad = Box::new(
        move |_t: f64, _x: f64, _phi: &[f64], psi: &[[f64; 2]], out: &mut [[f64; 2]]| {
            for a in 0..2 {
                out[a] = [psi[a][0], e * psi[a][1]];
            }
        },
    );
    let n3 = nonlin.clone();
    let second = SecondPartials {
        phi_phi: Box::new(move |_t, _x, phi, _psi, out| {
            let u = radius2(phi);
            let np = n3.prime(u);
            let npp = n3.second(u);
            let grad_u = if broken {
                [2.0 * phi[0], 0.0]
            } else {
                [2.0 * phi[0], 2.0 * phi[1]]
            };
            let diag2 = if broken { [2.0, 0.0] } else { [2.0, 2.0] };
            for a in 0..2 {
                for b in 0..2 {
                    let mut v = -npp * grad_u[a] * grad_u[b];
                    if a == b {
                        v -= np * diag2[a];
                    }
                    out[a * 2 + b] = v;
                }
            }
        }),
        phi_grad: Box::new(|_t, _x, _phi, _psi, out| out.fill(0.0)),
        grad_grad: Box::new(move |_t, _x, _phi, _psi, out| {
            out.fill(0.0);
            let m = 2;
            for a in 0..2 {
                out[((a * 2) * m + a) * 2] = 1.0;
                out[((a * 2 + 1) * m + a) * 2 + 1] = e;
            }
        }),
    };
    let poly = nonlin.degree().map(|d| (2 * d).max(2));
    let mut density = LagrangianDensity::new(
        2,
        metric,
        value,
        d_phi,
        d_grad,
        Some(second),
        poly,
        true,
    )?;
    density.push_generator(SymmetryGenerator::rotation_pair());
    Ok(density)
}

/// A manufactured elliptic problem: the scalar family at `eps = +1` forced so
/// that `phi*(t, x) = sin(pi t) sin(pi x)` solves it on the unit square with
/// zero Dirichlet data.
pub struct ManufacturedProblem {
    pub density: LagrangianDensity,
    pub exact: SourceFn,
}

pub fn manufactured_poisson_problem(
    nonlin: Nonlinearity,
) -> Result<ManufacturedProblem, LagrangianError> {
    use std::f64::consts::PI;
    let exact: SourceFn = Arc::new(|t, x| (PI * t).sin() * (PI * x).sin());
    let n = nonlin.clone();
    let exact_for_source = exact.clone();
    // the Euler-Lagrange equation is laplace(phi) + N'(phi) + s = 0, so
    // s = 2 pi^2 phi* - N'(phi*)
    let source: SourceFn = Arc::new(move |t, x| {
        let u = exact_for_source(t, x);
        2.0 * PI * PI * u - n.prime(u)
    });
    let density = nonlinear_wave_poisson_with_source(1, nonlin, source)?;
    Ok(ManufacturedProblem { density, exact })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_values() {
        let density =
            builtin_nonlinear_wave_poisson(1, Nonlinearity::power(4, 1.0)).unwrap();
        let phi = [0.0];
        let psi = [[0.0, 0.0]];
        assert_eq!(density.value(0.3, 0.4, &phi, &psi), 0.0);
        let mut d = [0.0];
        density.d_phi(0.3, 0.4, &phi, &psi, &mut d);
        // N'(0) = 0 for the quartic
        assert_eq!(d[0], 0.0);
    }

    #[test]
    fn massless_wave_value_for_unit_time_gradient() {
        let density = builtin_nonlinear_wave_poisson(-1, Nonlinearity::zero()).unwrap();
        let phi = [0.7];
        let psi = [[1.0, 0.0]];
        assert_eq!(density.value(0.0, 0.0, &phi, &psi), 0.5);
    }

    #[test]
    fn quartic_potential_derivative() {
        let density =
            builtin_nonlinear_wave_poisson(-1, Nonlinearity::power(4, 1.0)).unwrap();
        let mut d = [0.0];
        density.d_phi(0.0, 0.0, &[2.0], &[[0.0, 0.0]], &mut d);
        assert_eq!(d[0], -8.0);
    }

    #[test]
    fn shift_wave_is_shift_invariant_with_zero_d_phi() {
        let density = builtin_shift_symmetric_wave(-1).unwrap();
        let psi = [[0.4, -0.9]];
        for c in [-2.0, 0.0, 3.7] {
            let a = density.value(0.1, 0.2, &[1.1], &psi);
            let b = density.value(0.1, 0.2, &[1.1 + c], &psi);
            assert_eq!(a, b);
        }
        let mut d = [1.0];
        density.d_phi(0.1, 0.2, &[5.0], &psi, &mut d);
        assert_eq!(d[0], 0.0);
        assert!(density.generator("shift").is_some());
    }

    #[test]
    fn so2_density_is_rotation_invariant_pointwise() {
        let density = builtin_so2_pair(1, Nonlinearity::power(2, 0.5), false).unwrap();
        let phi = [0.8, -0.3];
        let psi = [[0.2, 0.1], [-0.4, 0.6]];
        let theta: f64 = 0.9;
        let (c, s) = (theta.cos(), theta.sin());
        let phi_rot = [c * phi[0] - s * phi[1], s * phi[0] + c * phi[1]];
        let psi_rot = [
            [c * psi[0][0] - s * psi[1][0], c * psi[0][1] - s * psi[1][1]],
            [s * psi[0][0] + c * psi[1][0], s * psi[0][1] + c * psi[1][1]],
        ];
        let a = density.value(0.0, 0.0, &phi, &psi);
        let b = density.value(0.0, 0.0, &phi_rot, &psi_rot);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn broken_so2_density_is_not_invariant() {
        let density = builtin_so2_pair(1, Nonlinearity::power(2, 0.5), true).unwrap();
        let phi = [0.8, -0.3];
        let psi = [[0.0, 0.0], [0.0, 0.0]];
        let theta: f64 = 0.9;
        let (c, s) = (theta.cos(), theta.sin());
        let phi_rot = [c * phi[0] - s * phi[1], s * phi[0] + c * phi[1]];
        let a = density.value(0.0, 0.0, &phi, &psi);
        let b = density.value(0.0, 0.0, &phi_rot, &psi);
        assert!((a - b).abs() > 1e-3);
    }

    #[test]
    fn inconsistent_nonlinearity_rejected() {
        let bad = Nonlinearity::from_fns(
            Arc::new(|u| u * u),
            Arc::new(|_| 0.0), // wrong derivative
            Arc::new(|_| 0.0),
            Some(2),
        );
        assert!(matches!(
            bad,
            Err(LagrangianError::InconsistentDerivatives { .. })
        ));
    }

    #[test]
    fn manufactured_source_balances_exact_solution() {
        let problem = manufactured_poisson_problem(Nonlinearity::power(4, 1.0)).unwrap();
        // at the solution, d_phi = -N'(phi*) - s = -2 pi^2 phi*, the negative
        // laplacian of the exact solution
        let (t, x) = (0.3, 0.7);
        let u = (problem.exact)(t, x);
        let mut d = [0.0];
        problem
            .density
            .d_phi(t, x, &[u], &[[0.0, 0.0]], &mut d);
        let pi = std::f64::consts::PI;
        assert!((d[0] + 2.0 * pi * pi * u).abs() < 1e-12);
    }
}
