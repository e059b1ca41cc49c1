//! Vertical symmetry generators acting on coefficient vectors.

use crate::feec::FieldSet;
use nalgebra::DMatrix;

/// A one-parameter pointwise action on field component tuples, used by the
/// projection-equivariance diagnostics. Affine generators build theirs from
/// the exact matrix exponential flow; deliberately nonequivariant nonlinear
/// actions can be supplied directly.
pub struct PointwiseAction {
    map: Box<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>,
}

impl PointwiseAction {
    pub fn new(map: Box<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>) -> Self {
        Self { map }
    }

    /// Apply the time-`s` flow to a component tuple.
    pub fn apply(&self, s: f64, input: &[f64], output: &mut [f64]) {
        (self.map)(s, input, output)
    }
}

/// An affine-linear vertical symmetry generator: the infinitesimal action on
/// coefficient vectors is `V(phi) = A phi + b`, where `A` mixes components
/// nodewise and `b` adds a per-component constant.
pub struct SymmetryGenerator {
    name: String,
    comp_matrix: DMatrix<f64>,
    comp_offset: Vec<f64>,
    claimed_equivariant: bool,
}

impl SymmetryGenerator {
    pub fn new(
        name: impl Into<String>,
        comp_matrix: DMatrix<f64>,
        comp_offset: Vec<f64>,
        claimed_equivariant: bool,
    ) -> Self {
        assert_eq!(comp_matrix.nrows(), comp_matrix.ncols());
        assert_eq!(comp_matrix.nrows(), comp_offset.len());
        Self {
            name: name.into(),
            comp_matrix,
            comp_offset,
            claimed_equivariant,
        }
    }

    /// Constant shift of a single component: `A = 0`, `b = 1`.
    pub fn shift() -> Self {
        Self::new("shift", DMatrix::zeros(1, 1), vec![1.0], true)
    }

    /// Rotation generator on a two-component field:
    /// `(phi1, phi2) -> (-phi2, phi1)`.
    pub fn rotation_pair() -> Self {
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 1)] = -1.0;
        a[(1, 0)] = 1.0;
        Self::new("so2_rotation", a, vec![0.0, 0.0], true)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn components(&self) -> usize {
        self.comp_offset.len()
    }

    pub fn claimed_equivariant(&self) -> bool {
        self.claimed_equivariant
    }

    pub fn comp_matrix(&self) -> &DMatrix<f64> {
        &self.comp_matrix
    }

    pub fn comp_offset(&self) -> &[f64] {
        &self.comp_offset
    }

    /// Vertical generator value at a state: coefficients of `A phi + b`.
    pub fn vertical_value(&self, state: &FieldSet) -> Vec<f64> {
        let m = self.components();
        assert_eq!(m, state.components());
        let n = state.node_count();
        let mut out = vec![0.0; m * n];
        for node in 0..n {
            for a in 0..m {
                let mut v = self.comp_offset[a];
                for b in 0..m {
                    v += self.comp_matrix[(a, b)] * state.coeff(b, node);
                }
                out[a * n + node] = v;
            }
        }
        out
    }

    /// Pointwise value of the generator at field components.
    pub fn vertical_value_at(&self, phi: &[f64], out: &mut [f64]) {
        let m = self.components();
        for a in 0..m {
            let mut v = self.comp_offset[a];
            for b in 0..m {
                v += self.comp_matrix[(a, b)] * phi[b];
            }
            out[a] = v;
        }
    }

    /// Apply the exact time-`s` group flow to a coefficient vector in place:
    /// `phi -> exp(sA) phi + (integral_0^s exp(uA) du) b`, acting nodewise.
    pub fn flow_coeffs(&self, s: f64, state: &mut FieldSet) {
        let (exp_sa, int_b) = self.flow_data(s);
        let m = self.components();
        let n = state.node_count();
        let mut tmp = vec![0.0; m];
        for node in 0..n {
            for a in 0..m {
                let mut v = int_b[a];
                for b in 0..m {
                    v += exp_sa[(a, b)] * state.coeff(b, node);
                }
                tmp[a] = v;
            }
            for a in 0..m {
                state.set_coeff(a, node, tmp[a]);
            }
            let _ = n;
        }
    }

    /// The exact pointwise flow of the affine action.
    pub fn pointwise_flow(&self) -> PointwiseAction {
        let matrix = self.comp_matrix.clone();
        let offset = self.comp_offset.clone();
        let m = self.components();
        PointwiseAction::new(Box::new(move |s, input, output| {
            let (exp_sa, int_b) = affine_flow_data(&matrix, &offset, s);
            for a in 0..m {
                let mut v = int_b[a];
                for b in 0..m {
                    v += exp_sa[(a, b)] * input[b];
                }
                output[a] = v;
            }
        }))
    }

    fn flow_data(&self, s: f64) -> (DMatrix<f64>, Vec<f64>) {
        affine_flow_data(&self.comp_matrix, &self.comp_offset, s)
    }
}

impl std::fmt::Debug for SymmetryGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymmetryGenerator")
            .field("name", &self.name)
            .field("components", &self.components())
            .field("claimed_equivariant", &self.claimed_equivariant)
            .finish()
    }
}

/// `(exp(sA), (integral_0^s exp(uA) du) b)` by scaled series summation; the
/// component matrices here are tiny (m x m), so the series converges fast.
fn affine_flow_data(a: &DMatrix<f64>, b: &[f64], s: f64) -> (DMatrix<f64>, Vec<f64>) {
    let m = a.nrows();
    let sa = a * s;
    let mut exp = DMatrix::<f64>::identity(m, m);
    let mut term = DMatrix::<f64>::identity(m, m);
    // integral series: s * sum_k (sA)^k / (k+1)!
    let mut integral = DMatrix::<f64>::identity(m, m);
    let mut int_term = DMatrix::<f64>::identity(m, m);
    for k in 1..=30 {
        term = &term * &sa / (k as f64);
        exp += &term;
        int_term = &int_term * &sa / ((k + 1) as f64);
        integral += &int_term;
        if term.abs().max() < 1e-18 && int_term.abs().max() < 1e-18 {
            break;
        }
    }
    let bvec = nalgebra::DVector::from_column_slice(b);
    let int_b = (&integral * bvec) * s;
    (exp, int_b.data.into())
}
