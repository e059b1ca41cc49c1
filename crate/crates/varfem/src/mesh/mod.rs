//! Tensor-product spacetime meshes, interval Cauchy-slice meshes, and
//! regular-region machinery.
//!
//! Meshes are uniform and immutable after construction. The spatial direction
//! of a [`TensorMesh2D`] may be periodic (nodes identified across the seam);
//! the temporal direction never is, since it carries Dirichlet trace data.

mod region;

pub use region::{
    boundary_dof_sets, classify_region, full_domain, rect_region, BoundaryDofSets, BoundaryEdge,
    EdgeKind, InteriorEdge, RegularRegion,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("degenerate range [{0}, {1}]: length must be positive")]
    DegenerateRange(f64, f64),
    #[error("element count must be at least 1")]
    NoElements,
    #[error("region is not regular: element {witness} is in the symmetric difference of U and its closure")]
    NotRegular { witness: usize },
    #[error("region element set is empty")]
    EmptyRegion,
    #[error("element index {0} does not exist in the mesh")]
    UnknownElement(usize),
    #[error("space was built on a different mesh than the region")]
    SpaceMismatch,
    #[error("point ({0}, {1}) lies outside the mesh")]
    PointOutsideMesh(f64, f64),
}

/// Uniform 1D mesh of an interval, optionally periodic.
///
/// With `N` elements the node count is `N + 1`, or `N` when periodic (the two
/// endpoint nodes are identified).
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMesh {
    x_min: f64,
    x_max: f64,
    elements: usize,
    periodic: bool,
    node_coords: Vec<f64>,
    element_node_pairs: Vec<(usize, usize)>,
    spacing: f64,
}

impl IntervalMesh {
    pub fn new(x_min: f64, x_max: f64, elements: usize, periodic: bool) -> Result<Self, MeshError> {
        if !(x_max - x_min > 0.0) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(MeshError::DegenerateRange(x_min, x_max));
        }
        if elements == 0 {
            return Err(MeshError::NoElements);
        }
        let spacing = (x_max - x_min) / elements as f64;
        let node_count = if periodic { elements } else { elements + 1 };
        let node_coords: Vec<f64> = (0..node_count)
            .map(|i| x_min + i as f64 * spacing)
            .collect();
        let element_node_pairs: Vec<(usize, usize)> = (0..elements)
            .map(|e| (e, if e + 1 == elements && periodic { 0 } else { e + 1 }))
            .collect();
        Ok(Self {
            x_min,
            x_max,
            elements,
            periodic,
            node_coords,
            element_node_pairs,
            spacing,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    pub fn element_count(&self) -> usize {
        self.elements
    }

    pub fn node_count(&self) -> usize {
        self.node_coords.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn node_coord(&self, node: usize) -> f64 {
        self.node_coords[node]
    }

    pub fn element_nodes(&self, element: usize) -> (usize, usize) {
        self.element_node_pairs[element]
    }

    /// Coordinates of an element's endpoints (geometric, not identified).
    pub fn element_bounds(&self, element: usize) -> (f64, f64) {
        let a = self.x_min + element as f64 * self.spacing;
        (a, a + self.spacing)
    }

    /// Owning element of a coordinate; the element whose closed left endpoint
    /// contains the point, with the final element owning the right endpoint.
    pub fn locate(&self, x: f64) -> Result<usize, MeshError> {
        let tol = 1e-12 * (1.0 + self.spacing.abs());
        if x < self.x_min - tol || x > self.x_max + tol {
            return Err(MeshError::PointOutsideMesh(x, 0.0));
        }
        let raw = ((x - self.x_min) / self.spacing).floor() as i64;
        Ok(raw.clamp(0, self.elements as i64 - 1) as usize)
    }

    /// Elements whose closure contains the node, in increasing index order.
    pub fn elements_touching_node(&self, node: usize) -> Vec<usize> {
        let n = self.elements;
        if self.periodic {
            let left = (node + n - 1) % n;
            if n == 1 {
                vec![0]
            } else {
                let mut v = vec![left, node % n];
                v.sort_unstable();
                v
            }
        } else {
            let mut v = Vec::with_capacity(2);
            if node > 0 {
                v.push(node - 1);
            }
            if node < n {
                v.push(node);
            }
            v
        }
    }
}

/// Uniform tensor-product mesh of a spacetime rectangle.
///
/// Element `(a, b)` covers `[t_a, t_{a+1}] x [x_b, x_{b+1}]`; flat indices run
/// spatial-fastest. Node `(i, j)` has flat index `i * nx + j` where `nx` is the
/// spatial node count.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorMesh2D {
    t_mesh: IntervalMesh,
    x_mesh: IntervalMesh,
}

/// Build a uniform tensor mesh; `m` temporal and `n` spatial elements.
pub fn build_tensor_mesh(
    t_range: (f64, f64),
    x_range: (f64, f64),
    m: usize,
    n: usize,
    periodic_x: bool,
) -> Result<TensorMesh2D, MeshError> {
    let t_mesh = IntervalMesh::new(t_range.0, t_range.1, m, false)?;
    let x_mesh = IntervalMesh::new(x_range.0, x_range.1, n, periodic_x)?;
    Ok(TensorMesh2D { t_mesh, x_mesh })
}

impl TensorMesh2D {
    pub fn t_mesh(&self) -> &IntervalMesh {
        &self.t_mesh
    }

    pub fn x_mesh(&self) -> &IntervalMesh {
        &self.x_mesh
    }

    pub fn dt(&self) -> f64 {
        self.t_mesh.spacing()
    }

    pub fn dx(&self) -> f64 {
        self.x_mesh.spacing()
    }

    /// Temporal elements.
    pub fn m(&self) -> usize {
        self.t_mesh.element_count()
    }

    /// Spatial elements.
    pub fn n(&self) -> usize {
        self.x_mesh.element_count()
    }

    fn nx_nodes(&self) -> usize {
        self.x_mesh.node_count()
    }

    pub fn node_count(&self) -> usize {
        self.t_mesh.node_count() * self.x_mesh.node_count()
    }

    pub fn element_count(&self) -> usize {
        self.m() * self.n()
    }

    /// Flat node index from grid indices; the spatial index wraps when periodic.
    pub fn node_id(&self, ti: usize, xi: usize) -> usize {
        let xi = if self.x_mesh.is_periodic() {
            xi % self.nx_nodes()
        } else {
            xi
        };
        ti * self.nx_nodes() + xi
    }

    pub fn node_grid(&self, node: usize) -> (usize, usize) {
        (node / self.nx_nodes(), node % self.nx_nodes())
    }

    pub fn node_coords(&self, node: usize) -> (f64, f64) {
        let (ti, xi) = self.node_grid(node);
        (self.t_mesh.node_coord(ti), self.x_mesh.node_coord(xi))
    }

    pub fn element_id(&self, ta: usize, xb: usize) -> usize {
        ta * self.n() + xb
    }

    pub fn element_grid(&self, element: usize) -> (usize, usize) {
        (element / self.n(), element % self.n())
    }

    pub fn element_bounds(&self, element: usize) -> (f64, f64, f64, f64) {
        let (ta, xb) = self.element_grid(element);
        let (t0, t1) = self.t_mesh.element_bounds(ta);
        let (x0, x1) = self.x_mesh.element_bounds(xb);
        (t0, t1, x0, x1)
    }

    /// Corner nodes of an element ordered `[n00, n10, n01, n11]` where the
    /// first offset is temporal and the second spatial.
    pub fn element_corner_nodes(&self, element: usize) -> [usize; 4] {
        let (ta, xb) = self.element_grid(element);
        [
            self.node_id(ta, xb),
            self.node_id(ta + 1, xb),
            self.node_id(ta, xb + 1),
            self.node_id(ta + 1, xb + 1),
        ]
    }

    /// Elements whose closure contains the node, sorted ascending.
    pub fn elements_touching_node(&self, node: usize) -> Vec<usize> {
        let (ti, xi) = self.node_grid(node);
        let t_els = self.t_mesh.elements_touching_node(ti);
        let x_els = self.x_mesh.elements_touching_node(xi);
        let mut out = Vec::with_capacity(4);
        for &ta in &t_els {
            for &xb in &x_els {
                out.push(self.element_id(ta, xb));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Owning element of a point (lower-left-closed tie break).
    pub fn locate(&self, t: f64, x: f64) -> Result<usize, MeshError> {
        let ta = self
            .t_mesh
            .locate(t)
            .map_err(|_| MeshError::PointOutsideMesh(t, x))?;
        let xb = self
            .x_mesh
            .locate(x)
            .map_err(|_| MeshError::PointOutsideMesh(t, x))?;
        Ok(self.element_id(ta, xb))
    }

    // Edge enumeration. Temporal edges join (ti, xi) to (ti+1, xi) and are
    // indexed ti * nx + xi for ti in 0..m; spatial edges join (ti, xb) to
    // (ti, xb+1) and are indexed ti * n + xb for ti in 0..=m.

    pub fn t_edge_count(&self) -> usize {
        self.m() * self.nx_nodes()
    }

    pub fn x_edge_count(&self) -> usize {
        self.t_mesh.node_count() * self.n()
    }

    pub fn t_edge_id(&self, ti: usize, xi: usize) -> usize {
        ti * self.nx_nodes() + xi
    }

    pub fn t_edge_grid(&self, edge: usize) -> (usize, usize) {
        (edge / self.nx_nodes(), edge % self.nx_nodes())
    }

    pub fn x_edge_id(&self, ti: usize, xb: usize) -> usize {
        ti * self.n() + xb
    }

    pub fn x_edge_grid(&self, edge: usize) -> (usize, usize) {
        (edge / self.n(), edge % self.n())
    }

    /// Cells adjacent to a temporal edge: `[below, above]` in the spatial
    /// direction (wrapping when periodic).
    pub fn t_edge_adjacent_cells(&self, ti: usize, xi: usize) -> [Option<usize>; 2] {
        let n = self.n();
        if self.x_mesh.is_periodic() {
            let below = (xi + n - 1) % n;
            [
                Some(self.element_id(ti, below)),
                Some(self.element_id(ti, xi % n)),
            ]
        } else {
            [
                (xi > 0).then(|| self.element_id(ti, xi - 1)),
                (xi < n).then(|| self.element_id(ti, xi)),
            ]
        }
    }

    /// Cells adjacent to a spatial edge: `[before, after]` in time.
    pub fn x_edge_adjacent_cells(&self, ti: usize, xb: usize) -> [Option<usize>; 2] {
        [
            (ti > 0).then(|| self.element_id(ti - 1, xb)),
            (ti < self.m()).then(|| self.element_id(ti, xb)),
        ]
    }

    /// Nodes with nonvanishing trace on the global boundary of the domain.
    ///
    /// For a spatially periodic mesh only the initial and final time slices
    /// carry boundary nodes.
    pub fn global_boundary_nodes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let nt = self.t_mesh.node_count();
        let nx = self.nx_nodes();
        for ti in 0..nt {
            for xi in 0..nx {
                let on_t = ti == 0 || ti + 1 == nt;
                let on_x = !self.x_mesh.is_periodic() && (xi == 0 || xi + 1 == nx);
                if on_t || on_x {
                    out.push(self.node_id(ti, xi));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_counts() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 1, 1, false).unwrap();
        assert_eq!(mesh.element_count(), 1);
        assert_eq!(mesh.node_count(), 4);
    }

    #[test]
    fn grid_counts_and_spacings() {
        // direct enumeration of a 2x3 grid on [0,2]x[0,3]
        let mesh = build_tensor_mesh((0.0, 2.0), (0.0, 3.0), 2, 3, false).unwrap();
        assert_eq!(mesh.element_count(), 6);
        assert_eq!(mesh.node_count(), 12);
        assert_eq!(mesh.dt(), 1.0);
        assert_eq!(mesh.dx(), 1.0);
        let corners = mesh.element_corner_nodes(mesh.element_id(1, 2));
        let coords: Vec<(f64, f64)> = corners.iter().map(|&n| mesh.node_coords(n)).collect();
        assert_eq!(coords[0], (1.0, 2.0));
        assert_eq!(coords[3], (2.0, 3.0));
        // all four corner nodes distinct
        let mut sorted = corners.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
    }

    #[test]
    fn periodic_identification_reduces_node_count() {
        // 1 temporal x 4 spatial cells, periodic: 2 time levels x 4 nodes
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 1, 4, true).unwrap();
        assert_eq!(mesh.node_count(), 8);
        // wrap-around: the last element's upper-x corner is node column 0
        let corners = mesh.element_corner_nodes(mesh.element_id(0, 3));
        assert_eq!(corners[2], mesh.node_id(0, 0));
    }

    #[test]
    fn degenerate_range_rejected() {
        assert!(matches!(
            build_tensor_mesh((0.0, 0.0), (0.0, 1.0), 1, 1, false),
            Err(MeshError::DegenerateRange(_, _))
        ));
        assert!(matches!(
            build_tensor_mesh((1.0, 0.0), (0.0, 1.0), 1, 1, false),
            Err(MeshError::DegenerateRange(_, _))
        ));
    }

    #[test]
    fn node_element_adjacency() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 3, 3, false).unwrap();
        // corner node touches one element
        assert_eq!(mesh.elements_touching_node(mesh.node_id(0, 0)), vec![0]);
        // interior node touches four
        let inner = mesh.node_id(1, 1);
        assert_eq!(mesh.elements_touching_node(inner).len(), 4);
    }

    #[test]
    fn periodic_node_adjacency_wraps() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 2, 4, true).unwrap();
        let seam = mesh.node_id(1, 0);
        let touching = mesh.elements_touching_node(seam);
        assert_eq!(touching.len(), 4);
        assert!(touching.contains(&mesh.element_id(0, 3)));
        assert!(touching.contains(&mesh.element_id(1, 0)));
    }

    #[test]
    fn locate_uses_lower_left_closed_ownership() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 2, 2, false).unwrap();
        assert_eq!(mesh.locate(0.5, 0.5).unwrap(), mesh.element_id(1, 1));
        assert_eq!(mesh.locate(0.49, 0.5).unwrap(), mesh.element_id(0, 1));
        // the far corner belongs to the last element
        assert_eq!(mesh.locate(1.0, 1.0).unwrap(), mesh.element_id(1, 1));
        assert!(mesh.locate(1.5, 0.5).is_err());
    }
}
