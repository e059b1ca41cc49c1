//! Shape functions on interval meshes (the Cauchy-slice complex).

use crate::mesh::IntervalMesh;

/// Form degree on an interval mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormDegree1d {
    Zero,
    One,
}

/// Hat (degree 0) or per-element indicator (degree 1) space on an interval.
#[derive(Clone, Debug, PartialEq)]
pub struct FeSpace1d {
    mesh: IntervalMesh,
    degree: FormDegree1d,
}

impl FeSpace1d {
    pub fn new(mesh: &IntervalMesh, degree: FormDegree1d) -> Self {
        Self {
            mesh: mesh.clone(),
            degree,
        }
    }

    pub fn mesh(&self) -> &IntervalMesh {
        &self.mesh
    }

    pub fn degree(&self) -> FormDegree1d {
        self.degree
    }

    pub fn dof_count(&self) -> usize {
        match self.degree {
            FormDegree1d::Zero => self.mesh.node_count(),
            FormDegree1d::One => self.mesh.element_count(),
        }
    }

    /// Dofs attached to an element: its two endpoint nodes (degree 0) or the
    /// element itself (degree 1).
    pub fn element_dofs(&self, element: usize) -> Vec<usize> {
        match self.degree {
            FormDegree1d::Zero => {
                let (a, b) = self.mesh.element_nodes(element);
                vec![a, b]
            }
            FormDegree1d::One => vec![element],
        }
    }

    /// Values and derivatives of the two hat functions on an element.
    pub fn scalar_basis(&self, element: usize, x: f64) -> ([f64; 2], [f64; 2]) {
        debug_assert_eq!(self.degree, FormDegree1d::Zero);
        let (x0, x1) = self.mesh.element_bounds(element);
        let h = x1 - x0;
        let a = (x - x0) / h;
        ([1.0 - a, a], [-1.0 / h, 1.0 / h])
    }

    /// The `dx` component of the element's indicator shape function.
    pub fn one_form_basis(&self, element: usize) -> f64 {
        debug_assert_eq!(self.degree, FormDegree1d::One);
        let (x0, x1) = self.mesh.element_bounds(element);
        1.0 / (x1 - x0)
    }

    /// Evaluate a degree-0 coefficient vector at a point: `(value, derivative)`.
    pub fn eval_scalar(&self, coeffs: &[f64], x: f64) -> (f64, f64) {
        let element = self.mesh.locate(x).expect("point inside mesh");
        self.eval_scalar_in_element(coeffs, element, x)
    }

    pub fn eval_scalar_in_element(&self, coeffs: &[f64], element: usize, x: f64) -> (f64, f64) {
        let (values, derivs) = self.scalar_basis(element, x);
        let (a, b) = self.mesh.element_nodes(element);
        (
            coeffs[a] * values[0] + coeffs[b] * values[1],
            coeffs[a] * derivs[0] + coeffs[b] * derivs[1],
        )
    }
}
