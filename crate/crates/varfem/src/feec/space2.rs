//! Shape functions and coefficient fields on the 2D tensor-product complex.

use super::FeecError;
use crate::mesh::{MeshError, TensorMesh2D};

/// Form degree on the spacetime mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormDegree {
    Zero,
    One,
    Two,
}

impl FormDegree {
    pub fn index(self) -> usize {
        match self {
            FormDegree::Zero => 0,
            FormDegree::One => 1,
            FormDegree::Two => 2,
        }
    }

    /// Number of pointwise components of a form of this degree in 2D.
    pub fn component_count(self) -> usize {
        match self {
            FormDegree::Zero | FormDegree::Two => 1,
            FormDegree::One => 2,
        }
    }
}

/// A finite element space of one form degree on a tensor mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct FeSpace2d {
    mesh: TensorMesh2D,
    degree: FormDegree,
}

impl FeSpace2d {
    pub fn new(mesh: &TensorMesh2D, degree: FormDegree) -> Self {
        Self {
            mesh: mesh.clone(),
            degree,
        }
    }

    pub fn mesh(&self) -> &TensorMesh2D {
        &self.mesh
    }

    pub fn degree(&self) -> FormDegree {
        self.degree
    }

    pub fn dof_count(&self) -> usize {
        match self.degree {
            FormDegree::Zero => self.mesh.node_count(),
            FormDegree::One => self.mesh.t_edge_count() + self.mesh.x_edge_count(),
            FormDegree::Two => self.mesh.element_count(),
        }
    }

    /// Dof index of the temporal edge from node `(ti, xi)` to `(ti+1, xi)`.
    /// The spatial index wraps on periodic meshes.
    pub fn t_edge_dof(&self, ti: usize, xi: usize) -> usize {
        let nx = self.mesh.x_mesh().node_count();
        let xi = if self.mesh.x_mesh().is_periodic() {
            xi % nx
        } else {
            xi
        };
        self.mesh.t_edge_id(ti, xi)
    }

    /// Dof index of the spatial edge from node `(ti, xb)` to `(ti, xb+1)`.
    pub fn x_edge_dof(&self, ti: usize, xb: usize) -> usize {
        self.mesh.t_edge_count() + self.mesh.x_edge_id(ti, xb)
    }

    /// Dofs attached to an element: corner nodes for 0-forms, the four edges
    /// (bottom, top, left, right) for 1-forms, the cell itself for 2-forms.
    pub fn element_dofs(&self, element: usize) -> Vec<usize> {
        let (ta, xb) = self.mesh.element_grid(element);
        match self.degree {
            FormDegree::Zero => self.mesh.element_corner_nodes(element).to_vec(),
            FormDegree::One => vec![
                self.t_edge_dof(ta, xb),
                self.t_edge_dof(ta, xb + 1),
                self.x_edge_dof(ta, xb),
                self.x_edge_dof(ta + 1, xb),
            ],
            FormDegree::Two => vec![element],
        }
    }

    /// Values and gradients of the four nodal shape functions at a physical
    /// point of `element`, ordered like [`TensorMesh2D::element_corner_nodes`].
    pub fn scalar_basis(&self, element: usize, t: f64, x: f64) -> ([f64; 4], [[f64; 2]; 4]) {
        debug_assert_eq!(self.degree, FormDegree::Zero);
        let (t0, t1, x0, x1) = self.mesh.element_bounds(element);
        let dt = t1 - t0;
        let dx = x1 - x0;
        let a = (t - t0) / dt;
        let b = (x - x0) / dx;
        let values = [
            (1.0 - a) * (1.0 - b),
            a * (1.0 - b),
            (1.0 - a) * b,
            a * b,
        ];
        let grads = [
            [-(1.0 - b) / dt, -(1.0 - a) / dx],
            [(1.0 - b) / dt, -a / dx],
            [-b / dt, (1.0 - a) / dx],
            [b / dt, a / dx],
        ];
        (values, grads)
    }

    /// `(dt, dx)` components of the four edge shape functions at a physical
    /// point of `element`, ordered `[bottom-t, top-t, left-x, right-x]`.
    pub fn one_form_basis(&self, element: usize, t: f64, x: f64) -> [[f64; 2]; 4] {
        debug_assert_eq!(self.degree, FormDegree::One);
        let (t0, t1, x0, x1) = self.mesh.element_bounds(element);
        let dt = t1 - t0;
        let dx = x1 - x0;
        let a = (t - t0) / dt;
        let b = (x - x0) / dx;
        [
            [(1.0 - b) / dt, 0.0],
            [b / dt, 0.0],
            [0.0, (1.0 - a) / dx],
            [0.0, a / dx],
        ]
    }

    /// The `dt ^ dx` component of the cell shape function.
    pub fn two_form_basis(&self, element: usize) -> f64 {
        debug_assert_eq!(self.degree, FormDegree::Two);
        let (t0, t1, x0, x1) = self.mesh.element_bounds(element);
        1.0 / ((t1 - t0) * (x1 - x0))
    }
}

/// Coefficient vector of a single form of one degree.
#[derive(Clone, Debug, PartialEq)]
pub struct FormField {
    space: FeSpace2d,
    coeffs: Vec<f64>,
}

impl FormField {
    pub fn new(space: &FeSpace2d, coeffs: Vec<f64>) -> Result<Self, FeecError> {
        if coeffs.len() != space.dof_count() {
            return Err(FeecError::CoefficientLength {
                got: coeffs.len(),
                expected: space.dof_count(),
            });
        }
        Ok(Self {
            space: space.clone(),
            coeffs,
        })
    }

    pub fn zeros(space: &FeSpace2d) -> Self {
        Self {
            space: space.clone(),
            coeffs: vec![0.0; space.dof_count()],
        }
    }

    pub fn space(&self) -> &FeSpace2d {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Pointwise components within a known element.
    pub fn eval_in_element(&self, element: usize, t: f64, x: f64) -> Vec<f64> {
        let dofs = self.space.element_dofs(element);
        match self.space.degree() {
            FormDegree::Zero => {
                let (values, _) = self.space.scalar_basis(element, t, x);
                let v = dofs
                    .iter()
                    .zip(values.iter())
                    .map(|(&d, &b)| self.coeffs[d] * b)
                    .sum();
                vec![v]
            }
            FormDegree::One => {
                let basis = self.space.one_form_basis(element, t, x);
                let mut out = [0.0, 0.0];
                for (i, &d) in dofs.iter().enumerate() {
                    out[0] += self.coeffs[d] * basis[i][0];
                    out[1] += self.coeffs[d] * basis[i][1];
                }
                out.to_vec()
            }
            FormDegree::Two => {
                let b = self.space.two_form_basis(element);
                vec![self.coeffs[dofs[0]] * b]
            }
        }
    }
}

/// Tuple of `components` degree-0 coefficient fields sharing one space; the
/// unknown of the covariant solver. Coefficients are stored component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSet {
    space: FeSpace2d,
    components: usize,
    coeffs: Vec<f64>,
}

impl FieldSet {
    pub fn zeros(space: &FeSpace2d, components: usize) -> Self {
        assert_eq!(space.degree(), FormDegree::Zero);
        Self {
            space: space.clone(),
            components,
            coeffs: vec![0.0; components * space.dof_count()],
        }
    }

    /// Nodal interpolation of per-component closures.
    pub fn from_fn(
        space: &FeSpace2d,
        components: usize,
        f: impl Fn(f64, f64, usize) -> f64,
    ) -> Self {
        let mut set = Self::zeros(space, components);
        let n = space.dof_count();
        for node in 0..n {
            let (t, x) = space.mesh().node_coords(node);
            for c in 0..components {
                set.coeffs[c * n + node] = f(t, x, c);
            }
        }
        set
    }

    pub fn space(&self) -> &FeSpace2d {
        &self.space
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn node_count(&self) -> usize {
        self.space.dof_count()
    }

    /// Total coefficient count across all components.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn dof_index(&self, component: usize, node: usize) -> usize {
        component * self.node_count() + node
    }

    pub fn coeff(&self, component: usize, node: usize) -> f64 {
        self.coeffs[self.dof_index(component, node)]
    }

    pub fn set_coeff(&mut self, component: usize, node: usize, value: f64) {
        let i = self.dof_index(component, node);
        self.coeffs[i] = value;
    }

    /// Values and gradients of all components at a physical point of a known
    /// element. Output slices must have length `components`.
    pub fn eval_in_element(
        &self,
        element: usize,
        t: f64,
        x: f64,
        values: &mut [f64],
        grads: &mut [[f64; 2]],
    ) {
        let (basis, basis_grads) = self.space.scalar_basis(element, t, x);
        let nodes = self.space.mesh().element_corner_nodes(element);
        let n = self.node_count();
        for c in 0..self.components {
            let mut v = 0.0;
            let mut g = [0.0, 0.0];
            for k in 0..4 {
                let coeff = self.coeffs[c * n + nodes[k]];
                v += coeff * basis[k];
                g[0] += coeff * basis_grads[k][0];
                g[1] += coeff * basis_grads[k][1];
            }
            values[c] = v;
            grads[c] = g;
        }
    }

    /// Values and gradients at an arbitrary point (element located first).
    pub fn evaluate(&self, t: f64, x: f64) -> Result<(Vec<f64>, Vec<[f64; 2]>), MeshError> {
        let element = self.space.mesh().locate(t, x)?;
        let mut values = vec![0.0; self.components];
        let mut grads = vec![[0.0, 0.0]; self.components];
        self.eval_in_element(element, t, x, &mut values, &mut grads);
        Ok((values, grads))
    }

    /// View one component as a standalone [`FormField`].
    pub fn component_field(&self, component: usize) -> FormField {
        let n = self.node_count();
        FormField::new(
            &self.space,
            self.coeffs[component * n..(component + 1) * n].to_vec(),
        )
        .expect("component slice has the right length")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_tensor_mesh;

    #[test]
    fn scalar_basis_is_nodal_and_partitions_unity() {
        let mesh = build_tensor_mesh((0.0, 2.0), (0.0, 3.0), 2, 3, false).unwrap();
        let space = FeSpace2d::new(&mesh, FormDegree::Zero);
        for e in 0..mesh.element_count() {
            let nodes = mesh.element_corner_nodes(e);
            for (k, &node) in nodes.iter().enumerate() {
                let (t, x) = mesh.node_coords(node);
                let (values, _) = space.scalar_basis(e, t, x);
                for (j, &v) in values.iter().enumerate() {
                    let expected = if j == k { 1.0 } else { 0.0 };
                    assert!((v - expected).abs() < 1e-14);
                }
            }
            // partition of unity at an interior point
            let (t0, t1, x0, x1) = mesh.element_bounds(e);
            let (values, grads) = space.scalar_basis(e, 0.3 * t0 + 0.7 * t1, 0.6 * x0 + 0.4 * x1);
            let sum: f64 = values.iter().sum();
            assert!((sum - 1.0).abs() < 1e-14);
            let gsum: f64 = grads.iter().map(|g| g[0].abs() + g[1].abs()).sum();
            assert!(gsum > 0.0);
        }
    }

    #[test]
    fn edge_basis_has_unit_edge_integrals() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 2, 2, false).unwrap();
        let space = FeSpace2d::new(&mesh, FormDegree::One);
        // integrate the bottom t-edge basis along its own edge: element (0,0),
        // edge from (0,0) to (1,0) at x=0
        let rule = crate::quad::gauss_on_interval(4, 0.0, 0.5);
        let mut total = 0.0;
        for &(t, w) in &rule {
            let basis = space.one_form_basis(0, t, 0.0);
            total += w * basis[0][0];
        }
        assert!((total - 1.0).abs() < 1e-13);
        // and zero along the opposite edge (x = 0.5 for element (0,0))
        let mut other = 0.0;
        for &(t, w) in &rule {
            let basis = space.one_form_basis(0, t, 0.5);
            other += w * basis[0][0];
        }
        assert!(other.abs() < 1e-13);
    }

    #[test]
    fn field_set_interpolates_linear_functions_exactly() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 3, 3, false).unwrap();
        let space = FeSpace2d::new(&mesh, FormDegree::Zero);
        let f = FieldSet::from_fn(&space, 1, |t, x, _| 2.0 * t - 3.0 * x + 0.5);
        let (v, g) = f.evaluate(0.37, 0.63).unwrap();
        assert!((v[0] - (2.0 * 0.37 - 3.0 * 0.63 + 0.5)).abs() < 1e-14);
        assert!((g[0][0] - 2.0).abs() < 1e-13);
        assert!((g[0][1] + 3.0).abs() < 1e-13);
    }

    #[test]
    fn hat_interpolation_on_interval_midpoints() {
        // coefficients (0, 1, 0) on a 2-element unit-spacing 1D profile,
        // realized as a t-constant 2D field: value 0.5 a quarter of the way
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 2.0), 1, 2, false).unwrap();
        let space = FeSpace2d::new(&mesh, FormDegree::Zero);
        let f = FieldSet::from_fn(&space, 1, |_, x, _| if (x - 1.0).abs() < 0.5 { 1.0 } else { 0.0 });
        let (v, _) = f.evaluate(0.5, 0.25).unwrap();
        assert!((v[0] - 0.25).abs() < 1e-14);
        let (v, _) = f.evaluate(0.5, 0.5).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-14);
    }
}
