//! Projection-equivariance residuals.
//!
//! Measures how far the nodal projection is from commuting with a group flow:
//! `||pi_h(flow_s phi) - flow_s(pi_h phi)||_{L2} / s` at small `s`, where the
//! flowed projected field is evaluated pointwise (it need not live in the
//! finite element space, which is exactly what the residual detects for
//! nonlinear actions).

use crate::feec::{FeSpace2d, FieldSet};
use crate::lagrangian::PointwiseAction;
use crate::quad::gauss_on_rect;

/// A smooth multi-component sample field for equivariance probes.
pub struct SmoothSample<'a> {
    pub eval: &'a dyn Fn(f64, f64, usize) -> f64,
}

/// Maximum flow-commutation residual over the samples and flow times.
pub fn equivariance_check(
    space: &FeSpace2d,
    components: usize,
    action: &PointwiseAction,
    samples: &[SmoothSample],
    s_values: &[f64],
) -> f64 {
    let mesh = space.mesh();
    let mut worst = 0.0f64;
    let mut phi_at = vec![0.0; components];
    let mut flowed = vec![0.0; components];
    let mut grads = vec![[0.0; 2]; components];
    for sample in samples {
        let projected = FieldSet::from_fn(space, components, sample.eval);
        for &s in s_values {
            // project the flowed smooth field (nodal interpolation)
            let flowed_projected = FieldSet::from_fn(space, components, |t, x, c| {
                let mut input = vec![0.0; components];
                for (a, slot) in input.iter_mut().enumerate() {
                    *slot = (sample.eval)(t, x, a);
                }
                let mut out = vec![0.0; components];
                action.apply(s, &input, &mut out);
                out[c]
            });
            // L2 distance to the pointwise-flowed projected field
            let mut total = 0.0;
            for e in 0..mesh.element_count() {
                let (t0, t1, x0, x1) = mesh.element_bounds(e);
                for ((t, x), w) in gauss_on_rect(4, t0, t1, x0, x1) {
                    projected.eval_in_element(e, t, x, &mut phi_at, &mut grads);
                    action.apply(s, &phi_at, &mut flowed);
                    let mut lhs = vec![0.0; components];
                    flowed_projected.eval_in_element(e, t, x, &mut lhs, &mut grads);
                    for c in 0..components {
                        let d = lhs[c] - flowed[c];
                        total += w * d * d;
                    }
                }
            }
            worst = worst.max(total.sqrt() / s);
        }
    }
    worst
}
