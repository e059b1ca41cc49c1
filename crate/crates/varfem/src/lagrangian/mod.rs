//! Lagrangian densities and their vertical symmetry generators.
//!
//! A density is a pointwise function `L(x, phi, psi)` of the spacetime point,
//! the field components, and the components of their exterior derivatives
//! (`psi[a] = [d_t phi_a, d_x phi_a]`), together with its first partials. The
//! metric signature is folded into the density's formulas, so `d_grad`
//! returns the metric-raised components: the assembled residual is literally
//! the gradient of the assembled action.

mod builtins;
mod symmetry;

pub use builtins::{
    builtin_nonlinear_wave_poisson, builtin_shift_symmetric_wave, builtin_so2_pair,
    manufactured_poisson_problem, Nonlinearity,
};
pub use symmetry::{PointwiseAction, SymmetryGenerator};

use crate::feec::MetricSignature;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LagrangianError {
    #[error("derivative {name} is inconsistent with finite differences of L: error {error:.3e} at sample {sample}")]
    InconsistentDerivatives {
        name: &'static str,
        error: f64,
        sample: usize,
    },
    #[error("second partials were requested but the density does not provide them")]
    MissingSecondPartials,
}

/// Pointwise value of the density.
pub type ValueFn = dyn Fn(f64, f64, &[f64], &[[f64; 2]]) -> f64 + Send + Sync;
/// Partial with respect to the field components, written into the output slice.
pub type DPhiFn = dyn Fn(f64, f64, &[f64], &[[f64; 2]], &mut [f64]) + Send + Sync;
/// Partial with respect to the derivative components (metric-raised).
pub type DGradFn = dyn Fn(f64, f64, &[f64], &[[f64; 2]], &mut [[f64; 2]]) + Send + Sync;

/// Optional second partials, indexed `[component][component]` and
/// `[component][component][axis]` flattened by the accessor methods.
///
/// Pointwise divergence computations assume `d_grad` carries no explicit
/// `(t, x)` dependence (all builtin families put spacetime dependence in
/// `d_phi` via source terms only); densities violating that should omit
/// second partials and rely on the finite-difference paths.
pub struct SecondPartials {
    /// `d2L / dphi_a dphi_b`.
    pub phi_phi: Box<dyn Fn(f64, f64, &[f64], &[[f64; 2]], &mut [f64]) + Send + Sync>,
    /// `d2L / dphi_a dpsi_{b,mu}`; output layout `[a * m * 2 + b * 2 + mu]`.
    pub phi_grad: Box<dyn Fn(f64, f64, &[f64], &[[f64; 2]], &mut [f64]) + Send + Sync>,
    /// `d2L / dpsi_{a,mu} dpsi_{b,nu}`; output layout
    /// `[((a * 2 + mu) * m + b) * 2 + nu]`.
    pub grad_grad: Box<dyn Fn(f64, f64, &[f64], &[[f64; 2]], &mut [f64]) + Send + Sync>,
}

/// A Lagrangian density for an `m`-tuple of 0-form fields.
pub struct LagrangianDensity {
    components: usize,
    metric: MetricSignature,
    value: Box<ValueFn>,
    d_phi: Box<DPhiFn>,
    d_grad: Box<DGradFn>,
    second: Option<SecondPartials>,
    /// Per-direction polynomial degree of the density in `(phi, psi)` jointly,
    /// when polynomial; drives the choice of exact Gauss rules.
    polynomial_degree: Option<usize>,
    /// The density contains the kinetic term `1/2 sum_a psi_{a,0}^2` and no
    /// other dependence on `psi_{.,0}`; enables the closed-form Legendre
    /// inversion in the canonical module.
    velocity_quadratic_unit: bool,
    generators: Vec<SymmetryGenerator>,
}

impl LagrangianDensity {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        components: usize,
        metric: MetricSignature,
        value: Box<ValueFn>,
        d_phi: Box<DPhiFn>,
        d_grad: Box<DGradFn>,
        second: Option<SecondPartials>,
        polynomial_degree: Option<usize>,
        velocity_quadratic_unit: bool,
    ) -> Result<Self, LagrangianError> {
        let density = Self {
            components,
            metric,
            value,
            d_phi,
            d_grad,
            second,
            polynomial_degree,
            velocity_quadratic_unit,
            generators: Vec::new(),
        };
        density.check_first_partials()?;
        Ok(density)
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn metric(&self) -> &MetricSignature {
        &self.metric
    }

    pub fn polynomial_degree(&self) -> Option<usize> {
        self.polynomial_degree
    }

    pub fn velocity_quadratic_unit(&self) -> bool {
        self.velocity_quadratic_unit
    }

    pub fn has_second_partials(&self) -> bool {
        self.second.is_some()
    }

    pub fn generators(&self) -> &[SymmetryGenerator] {
        &self.generators
    }

    pub fn push_generator(&mut self, generator: SymmetryGenerator) {
        self.generators.push(generator);
    }

    pub fn generator(&self, name: &str) -> Option<&SymmetryGenerator> {
        self.generators.iter().find(|g| g.name() == name)
    }

    /// Gauss points per direction sufficient for exact integration of the
    /// assembled action and residual on Q1 fields; a generous default covers
    /// non-polynomial densities.
    pub fn quadrature_points(&self) -> usize {
        match self.polynomial_degree {
            // integrand degree per direction is at most deg + 1 after
            // multiplying by a test function; n points are exact to 2n - 1
            Some(deg) => (deg + 3) / 2 + 1,
            None => 8,
        }
    }

    pub fn value(&self, t: f64, x: f64, phi: &[f64], psi: &[[f64; 2]]) -> f64 {
        (self.value)(t, x, phi, psi)
    }

    pub fn d_phi(&self, t: f64, x: f64, phi: &[f64], psi: &[[f64; 2]], out: &mut [f64]) {
        (self.d_phi)(t, x, phi, psi, out)
    }

    pub fn d_grad(&self, t: f64, x: f64, phi: &[f64], psi: &[[f64; 2]], out: &mut [[f64; 2]]) {
        (self.d_grad)(t, x, phi, psi, out)
    }

    /// Second partials evaluated at a point. Layouts as in [`SecondPartials`].
    pub fn second_partials_at(
        &self,
        t: f64,
        x: f64,
        phi: &[f64],
        psi: &[[f64; 2]],
        phi_phi: &mut [f64],
        phi_grad: &mut [f64],
        grad_grad: &mut [f64],
    ) -> Result<(), LagrangianError> {
        let second = self
            .second
            .as_ref()
            .ok_or(LagrangianError::MissingSecondPartials)?;
        (second.phi_phi)(t, x, phi, psi, phi_phi);
        (second.phi_grad)(t, x, phi, psi, phi_grad);
        (second.grad_grad)(t, x, phi, psi, grad_grad);
        Ok(())
    }

    /// Verify `d_phi` and `d_grad` against central finite differences of the
    /// value at a fixed set of sample arguments, and the symmetry of the
    /// mixed second partials when provided.
    fn check_first_partials(&self) -> Result<(), LagrangianError> {
        let m = self.components;
        let samples = consistency_samples(m);
        let step = 1e-5;
        for (k, (t, x, phi, psi)) in samples.iter().enumerate() {
            let mut dphi = vec![0.0; m];
            self.d_phi(*t, *x, phi, psi, &mut dphi);
            let mut dgrad = vec![[0.0; 2]; m];
            self.d_grad(*t, *x, phi, psi, &mut dgrad);
            for a in 0..m {
                let mut hi = phi.clone();
                let mut lo = phi.clone();
                hi[a] += step;
                lo[a] -= step;
                let fd = (self.value(*t, *x, &hi, psi) - self.value(*t, *x, &lo, psi))
                    / (2.0 * step);
                let scale = 1.0 + dphi[a].abs() + fd.abs();
                if (fd - dphi[a]).abs() > 1e-6 * scale {
                    return Err(LagrangianError::InconsistentDerivatives {
                        name: "d_phi",
                        error: (fd - dphi[a]).abs() / scale,
                        sample: k,
                    });
                }
                for mu in 0..2 {
                    let mut hi = psi.clone();
                    let mut lo = psi.clone();
                    hi[a][mu] += step;
                    lo[a][mu] -= step;
                    let fd = (self.value(*t, *x, phi, &hi) - self.value(*t, *x, phi, &lo))
                        / (2.0 * step);
                    let scale = 1.0 + dgrad[a][mu].abs() + fd.abs();
                    if (fd - dgrad[a][mu]).abs() > 1e-6 * scale {
                        return Err(LagrangianError::InconsistentDerivatives {
                            name: "d_grad",
                            error: (fd - dgrad[a][mu]).abs() / scale,
                            sample: k,
                        });
                    }
                }
            }
        }
        if self.second.is_some() {
            self.check_mixed_symmetry()?;
        }
        Ok(())
    }

    /// `d2L/dphi dpsi` must match finite differences of `d_grad` in `phi`.
    fn check_mixed_symmetry(&self) -> Result<(), LagrangianError> {
        let m = self.components;
        let step = 1e-5;
        for (k, (t, x, phi, psi)) in consistency_samples(m).iter().enumerate() {
            let mut phi_phi = vec![0.0; m * m];
            let mut phi_grad = vec![0.0; m * m * 2];
            let mut grad_grad = vec![0.0; m * 2 * m * 2];
            self.second_partials_at(*t, *x, phi, psi, &mut phi_phi, &mut phi_grad, &mut grad_grad)
                .expect("second partials present");
            for a in 0..m {
                for b in 0..m {
                    for mu in 0..2 {
                        let mut hi = phi.clone();
                        let mut lo = phi.clone();
                        hi[a] += step;
                        lo[a] -= step;
                        let mut ghi = vec![[0.0; 2]; m];
                        let mut glo = vec![[0.0; 2]; m];
                        self.d_grad(*t, *x, &hi, psi, &mut ghi);
                        self.d_grad(*t, *x, &lo, psi, &mut glo);
                        let fd = (ghi[b][mu] - glo[b][mu]) / (2.0 * step);
                        let analytic = phi_grad[a * m * 2 + b * 2 + mu];
                        if (fd - analytic).abs() > 1e-6 * (1.0 + fd.abs() + analytic.abs()) {
                            return Err(LagrangianError::InconsistentDerivatives {
                                name: "phi_grad",
                                error: (fd - analytic).abs(),
                                sample: k,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for LagrangianDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LagrangianDensity")
            .field("components", &self.components)
            .field("metric", &self.metric)
            .field("polynomial_degree", &self.polynomial_degree)
            .field("generators", &self.generators.len())
            .finish()
    }
}

/// Fixed sample arguments for the construction-time derivative cross-checks.
fn consistency_samples(m: usize) -> Vec<(f64, f64, Vec<f64>, Vec<[f64; 2]>)> {
    let mut out = Vec::new();
    let raw = [
        (0.3, 0.7, 0.4, -0.2, 0.9),
        (0.8, 0.1, -1.1, 0.6, 0.3),
        (0.5, 0.5, 0.0, 0.0, 0.0),
        (0.2, 0.9, 1.7, -0.8, -1.3),
    ];
    for (t, x, base, g0, g1) in raw {
        let phi: Vec<f64> = (0..m).map(|a| base + 0.3 * a as f64).collect();
        let psi: Vec<[f64; 2]> = (0..m)
            .map(|a| [g0 - 0.2 * a as f64, g1 + 0.1 * a as f64])
            .collect();
        out.push((t, x, phi, psi));
    }
    out
}
