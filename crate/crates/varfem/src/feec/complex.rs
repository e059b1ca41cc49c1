//! Derivative and mass matrices of the discrete complex.
//!
//! Derivative matrices are signed incidence structures with integer entries,
//! so `D_{k+1} D_k = 0` holds exactly in floating point. Mass matrices are
//! assembled with Gauss rules exact for the polynomial integrands.

use super::space1::{FeSpace1d, FormDegree1d};
use super::space2::{FeSpace2d, FormDegree};
use super::{FeecError, MetricSignature};
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::mesh::{IntervalMesh, TensorMesh2D};
use crate::quad::{gauss_on_interval, gauss_on_rect};

/// Signed incidence matrix realizing the exterior derivative on coefficients,
/// from degree `k` to `k + 1`.
pub fn assemble_derivative(space: &FeSpace2d) -> Result<CsrMatrix, FeecError> {
    let mesh = space.mesh();
    match space.degree() {
        FormDegree::Zero => {
            let target = FeSpace2d::new(mesh, FormDegree::One);
            let mut b = TripletBuilder::new(target.dof_count(), space.dof_count());
            for ti in 0..mesh.m() {
                for xi in 0..mesh.x_mesh().node_count() {
                    let row = target.t_edge_dof(ti, xi);
                    b.push(row, mesh.node_id(ti + 1, xi), 1.0);
                    b.push(row, mesh.node_id(ti, xi), -1.0);
                }
            }
            for ti in 0..mesh.t_mesh().node_count() {
                for xb in 0..mesh.n() {
                    let row = target.x_edge_dof(ti, xb);
                    b.push(row, mesh.node_id(ti, xb + 1), 1.0);
                    b.push(row, mesh.node_id(ti, xb), -1.0);
                }
            }
            Ok(b.build())
        }
        FormDegree::One => {
            let mut b = TripletBuilder::new(mesh.element_count(), space.dof_count());
            for e in 0..mesh.element_count() {
                let (ta, xb) = mesh.element_grid(e);
                // counterclockwise circulation in the (t, x) plane
                b.push(e, space.t_edge_dof(ta, xb), 1.0);
                b.push(e, space.t_edge_dof(ta, xb + 1), -1.0);
                b.push(e, space.x_edge_dof(ta + 1, xb), 1.0);
                b.push(e, space.x_edge_dof(ta, xb), -1.0);
            }
            Ok(b.build())
        }
        FormDegree::Two => Err(FeecError::MissingSpace(3)),
    }
}

/// Mass matrix of a space under a diagonal metric signature.
pub fn assemble_mass(space: &FeSpace2d, metric: &MetricSignature) -> Result<CsrMatrix, FeecError> {
    if metric.dim() != 2 {
        return Err(FeecError::SignatureDimension {
            got: metric.dim(),
            expected: 2,
        });
    }
    let mesh = space.mesh();
    let n = space.dof_count();
    let mut builder = TripletBuilder::new(n, n);
    for e in 0..mesh.element_count() {
        let (t0, t1, x0, x1) = mesh.element_bounds(e);
        let dofs = space.element_dofs(e);
        let rule = gauss_on_rect(2, t0, t1, x0, x1);
        let k = dofs.len();
        let mut local = vec![0.0; k * k];
        for &((t, x), w) in &rule {
            match space.degree() {
                FormDegree::Zero => {
                    let (values, _) = space.scalar_basis(e, t, x);
                    for i in 0..4 {
                        for j in 0..4 {
                            local[i * 4 + j] += w * values[i] * values[j];
                        }
                    }
                }
                FormDegree::One => {
                    let basis = space.one_form_basis(e, t, x);
                    for i in 0..4 {
                        for j in 0..4 {
                            local[i * 4 + j] += w
                                * (metric.entry(0) * basis[i][0] * basis[j][0]
                                    + metric.entry(1) * basis[i][1] * basis[j][1]);
                        }
                    }
                }
                FormDegree::Two => {
                    let b = space.two_form_basis(e);
                    local[0] += w * metric.volume_weight() * b * b;
                }
            }
        }
        for i in 0..k {
            for j in 0..k {
                builder.push(dofs[i], dofs[j], local[i * k + j]);
            }
        }
    }
    Ok(builder.build())
}

/// The full 2D complex: spaces of all three degrees with their derivative and
/// mass matrices under one metric signature.
#[derive(Clone, Debug)]
pub struct CochainComplex2d {
    mesh: TensorMesh2D,
    metric: MetricSignature,
    space0: FeSpace2d,
    space1: FeSpace2d,
    space2: FeSpace2d,
    d0: CsrMatrix,
    d1: CsrMatrix,
    m0: CsrMatrix,
    m1: CsrMatrix,
    m2: CsrMatrix,
}

impl CochainComplex2d {
    pub fn new(mesh: &TensorMesh2D, metric: MetricSignature) -> Result<Self, FeecError> {
        let space0 = FeSpace2d::new(mesh, FormDegree::Zero);
        let space1 = FeSpace2d::new(mesh, FormDegree::One);
        let space2 = FeSpace2d::new(mesh, FormDegree::Two);
        let d0 = assemble_derivative(&space0)?;
        let d1 = assemble_derivative(&space1)?;
        let m0 = assemble_mass(&space0, &metric)?;
        let m1 = assemble_mass(&space1, &metric)?;
        let m2 = assemble_mass(&space2, &metric)?;
        Ok(Self {
            mesh: mesh.clone(),
            metric,
            space0,
            space1,
            space2,
            d0,
            d1,
            m0,
            m1,
            m2,
        })
    }

    pub fn mesh(&self) -> &TensorMesh2D {
        &self.mesh
    }

    pub fn metric(&self) -> &MetricSignature {
        &self.metric
    }

    pub fn space(&self, degree: FormDegree) -> &FeSpace2d {
        match degree {
            FormDegree::Zero => &self.space0,
            FormDegree::One => &self.space1,
            FormDegree::Two => &self.space2,
        }
    }

    pub fn derivative(&self, degree: FormDegree) -> Result<&CsrMatrix, FeecError> {
        match degree {
            FormDegree::Zero => Ok(&self.d0),
            FormDegree::One => Ok(&self.d1),
            FormDegree::Two => Err(FeecError::MissingSpace(3)),
        }
    }

    pub fn mass(&self, degree: FormDegree) -> &CsrMatrix {
        match degree {
            FormDegree::Zero => &self.m0,
            FormDegree::One => &self.m1,
            FormDegree::Two => &self.m2,
        }
    }
}

/// 1D analogue of [`assemble_derivative`].
pub fn assemble_derivative_1d(space: &FeSpace1d) -> Result<CsrMatrix, FeecError> {
    match space.degree() {
        FormDegree1d::Zero => {
            let mesh = space.mesh();
            let mut b = TripletBuilder::new(mesh.element_count(), space.dof_count());
            for e in 0..mesh.element_count() {
                let (start, end) = mesh.element_nodes(e);
                if start == end {
                    // single periodic element: d of anything is zero
                    continue;
                }
                b.push(e, end, 1.0);
                b.push(e, start, -1.0);
            }
            Ok(b.build())
        }
        FormDegree1d::One => Err(FeecError::MissingSpace(2)),
    }
}

/// 1D analogue of [`assemble_mass`].
pub fn assemble_mass_1d(
    space: &FeSpace1d,
    metric: &MetricSignature,
) -> Result<CsrMatrix, FeecError> {
    if metric.dim() != 1 {
        return Err(FeecError::SignatureDimension {
            got: metric.dim(),
            expected: 1,
        });
    }
    let mesh = space.mesh();
    let n = space.dof_count();
    let mut builder = TripletBuilder::new(n, n);
    for e in 0..mesh.element_count() {
        let (x0, x1) = mesh.element_bounds(e);
        let dofs = space.element_dofs(e);
        let rule = gauss_on_interval(2, x0, x1);
        match space.degree() {
            FormDegree1d::Zero => {
                let mut local = [[0.0; 2]; 2];
                for &(x, w) in &rule {
                    let (values, _) = space.scalar_basis(e, x);
                    for i in 0..2 {
                        for j in 0..2 {
                            local[i][j] += w * values[i] * values[j];
                        }
                    }
                }
                for i in 0..2 {
                    for j in 0..2 {
                        builder.push(dofs[i], dofs[j], local[i][j]);
                    }
                }
            }
            FormDegree1d::One => {
                let b = space.one_form_basis(e);
                let w: f64 = rule.iter().map(|&(_, w)| w).sum();
                builder.push(dofs[0], dofs[0], w * metric.entry(0) * b * b);
            }
        }
    }
    Ok(builder.build())
}

/// Hat/indicator complex on an interval with derivative, mass, and stiffness.
#[derive(Clone, Debug)]
pub struct CochainComplex1d {
    mesh: IntervalMesh,
    metric: MetricSignature,
    space0: FeSpace1d,
    space1: FeSpace1d,
    d0: CsrMatrix,
    m0: CsrMatrix,
    m1: CsrMatrix,
    stiffness: CsrMatrix,
}

impl CochainComplex1d {
    pub fn new(mesh: &IntervalMesh, metric: MetricSignature) -> Result<Self, FeecError> {
        let space0 = FeSpace1d::new(mesh, FormDegree1d::Zero);
        let space1 = FeSpace1d::new(mesh, FormDegree1d::One);
        let d0 = assemble_derivative_1d(&space0)?;
        let m0 = assemble_mass_1d(&space0, &MetricSignature::euclidean(1))?;
        let m1 = assemble_mass_1d(&space1, &metric)?;
        // K = D0^T M1 D0; with a Euclidean spatial metric this is the usual
        // stiffness matrix
        let h = mesh.spacing();
        let diag: Vec<f64> = (0..mesh.element_count())
            .map(|_| metric.entry(0) / h)
            .collect();
        let stiffness = d0.transpose_diag_product(&diag);
        Ok(Self {
            mesh: mesh.clone(),
            metric,
            space0,
            space1,
            d0,
            m0,
            m1,
            stiffness,
        })
    }

    pub fn mesh(&self) -> &IntervalMesh {
        &self.mesh
    }

    pub fn metric(&self) -> &MetricSignature {
        &self.metric
    }

    pub fn space0(&self) -> &FeSpace1d {
        &self.space0
    }

    pub fn space1(&self) -> &FeSpace1d {
        &self.space1
    }

    pub fn derivative(&self) -> &CsrMatrix {
        &self.d0
    }

    /// Hat mass matrix (always Euclidean: 0-forms pair without signature).
    pub fn mass0(&self) -> &CsrMatrix {
        &self.m0
    }

    pub fn mass1(&self) -> &CsrMatrix {
        &self.m1
    }

    /// `D0^T M1 D0`.
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm_inf;
    use crate::mesh::build_tensor_mesh;

    #[test]
    fn derivative_of_constants_vanishes() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 3, 4, false).unwrap();
        let space0 = FeSpace2d::new(&mesh, FormDegree::Zero);
        let d0 = assemble_derivative(&space0).unwrap();
        let ones = vec![1.0; space0.dof_count()];
        assert_eq!(norm_inf(&d0.mul_vec(&ones)), 0.0);
    }

    #[test]
    fn d1_d0_is_exactly_zero() {
        for periodic in [false, true] {
            let mesh = build_tensor_mesh((0.0, 2.0), (0.0, 1.5), 3, 5, periodic).unwrap();
            let space0 = FeSpace2d::new(&mesh, FormDegree::Zero);
            let space1 = FeSpace2d::new(&mesh, FormDegree::One);
            let d0 = assemble_derivative(&space0).unwrap();
            let d1 = assemble_derivative(&space1).unwrap();
            for node in 0..space0.dof_count() {
                let mut e = vec![0.0; space0.dof_count()];
                e[node] = 1.0;
                let composite = d1.mul_vec(&d0.mul_vec(&e));
                assert_eq!(norm_inf(&composite), 0.0);
            }
        }
    }

    #[test]
    fn edge_integral_dofs_of_gradients_difference_endpoint_values() {
        // 1D profile phi = (0, 1, 0) on two unit elements, lifted to 2D:
        // edge coefficients of d(phi) along x are (1, -1)
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 2.0), 1, 2, false).unwrap();
        let space0 = FeSpace2d::new(&mesh, FormDegree::Zero);
        let space1 = FeSpace2d::new(&mesh, FormDegree::One);
        let d0 = assemble_derivative(&space0).unwrap();
        let mut coeffs = vec![0.0; space0.dof_count()];
        for ti in 0..2 {
            coeffs[mesh.node_id(ti, 1)] = 1.0;
        }
        let dc = d0.mul_vec(&coeffs);
        for ti in 0..2 {
            assert_eq!(dc[space1.x_edge_dof(ti, 0)], 1.0);
            assert_eq!(dc[space1.x_edge_dof(ti, 1)], -1.0);
        }
        // gradients in time vanish for this t-constant field
        for xi in 0..3 {
            assert_eq!(dc[space1.t_edge_dof(0, xi)], 0.0);
        }
    }

    #[test]
    fn hat_mass_rows_interior_and_boundary() {
        let mesh = IntervalMesh::new(0.0, 1.0, 4, false).unwrap();
        let space = FeSpace1d::new(&mesh, FormDegree1d::Zero);
        let m = assemble_mass_1d(&space, &MetricSignature::euclidean(1)).unwrap();
        let h = 0.25;
        // interior row: off-diagonal h/6, diagonal 2h/3
        assert!((m.get(2, 1) - h / 6.0).abs() < 1e-15);
        assert!((m.get(2, 2) - 2.0 * h / 3.0).abs() < 1e-15);
        assert!((m.get(2, 3) - h / 6.0).abs() < 1e-15);
        // boundary row diagonal: h/3
        assert!((m.get(0, 0) - h / 3.0).abs() < 1e-15);
    }

    #[test]
    fn lorentzian_one_form_mass_splits_by_signature() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 2, 2, false).unwrap();
        let space1 = FeSpace2d::new(&mesh, FormDegree::One);
        let euclid = assemble_mass(&space1, &MetricSignature::euclidean(2)).unwrap();
        let lorentz = assemble_mass(&space1, &MetricSignature::spacetime(-1).unwrap()).unwrap();
        let nt = mesh.t_edge_count();
        let total = space1.dof_count();
        for i in 0..total {
            for j in 0..total {
                let e = euclid.get(i, j);
                let l = lorentz.get(i, j);
                if i < nt && j < nt {
                    // temporal-edge block (basis along dt): weight s_t = +1
                    assert!((l - e).abs() < 1e-14);
                } else if i >= nt && j >= nt {
                    // spatial-edge block (basis along dx): weight s_x = -1
                    assert!((l + e).abs() < 1e-14);
                } else {
                    assert!(e.abs() < 1e-14 && l.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn mass_matrices_symmetric_and_m0_positive_definite() {
        let mesh = build_tensor_mesh((0.0, 1.3), (0.0, 0.7), 3, 4, true).unwrap();
        let metric = MetricSignature::spacetime(-1).unwrap();
        let complex = CochainComplex2d::new(&mesh, metric).unwrap();
        for degree in [FormDegree::Zero, FormDegree::One, FormDegree::Two] {
            let m = complex.mass(degree).to_dense();
            let diff = (&m - m.transpose()).abs().max();
            assert!(diff < 1e-14);
        }
        let chol = complex.mass(FormDegree::Zero).to_dense().cholesky();
        assert!(chol.is_some(), "M0 must be positive definite");
    }

    #[test]
    fn periodic_stiffness_annihilates_constants() {
        let mesh = IntervalMesh::new(0.0, 1.0, 8, true).unwrap();
        let complex = CochainComplex1d::new(&mesh, MetricSignature::euclidean(1)).unwrap();
        let ones = vec![1.0; 8];
        assert!(norm_inf(&complex.stiffness().mul_vec(&ones)) < 1e-14);
        // interior-style stencil {-1, 2, -1}/h everywhere on the circle
        let h = mesh.spacing();
        assert!((complex.stiffness().get(3, 3) - 2.0 / h).abs() < 1e-12);
        assert!((complex.stiffness().get(3, 4) + 1.0 / h).abs() < 1e-12);
    }
}
