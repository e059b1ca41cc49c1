//! Regular regions: validated element subsets on which the localized
//! variational statements hold.
//!
//! A node is an interior point of a region `U` when every element touching it
//! lies in `U`; the closure of `U` is the union of elements touching interior
//! nodes, and `U` is regular when it equals its closure. Global-boundary nodes
//! follow the same rule: they are interior whenever all of their (one or two)
//! touching elements belong to the region.

use crate::feec::{FeSpace2d, FormDegree};
use crate::mesh::{MeshError, TensorMesh2D};

/// Orientation of a mesh edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    /// Edge running in the time direction.
    Temporal,
    /// Edge running in the space direction.
    Spatial,
}

/// A segment of the region boundary with its inside element and outward
/// Euclidean unit normal.
#[derive(Clone, Debug)]
pub struct BoundaryEdge {
    pub kind: EdgeKind,
    pub start: (f64, f64),
    pub end: (f64, f64),
    pub inside_element: usize,
    pub outward_normal: [f64; 2],
    pub endpoints: (usize, usize),
}

/// A mesh edge whose two adjacent elements both belong to the region.
///
/// `elements` is ordered `(minus, plus)` along the edge's normal axis: for a
/// temporal edge the spatially-lower cell first, for a spatial edge the
/// earlier-in-time cell first. Jump quantities are evaluated as
/// `trace(minus) - trace(plus)` against the `plus`-directed normal.
#[derive(Clone, Debug)]
pub struct InteriorEdge {
    pub kind: EdgeKind,
    pub start: (f64, f64),
    pub end: (f64, f64),
    pub elements: (usize, usize),
    pub endpoints: (usize, usize),
}

/// A validated regular region.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularRegion {
    mesh: TensorMesh2D,
    elements: Vec<usize>,
    in_region: Vec<bool>,
    interior_nodes: Vec<usize>,
    boundary_closure: Vec<usize>,
}

/// Classify an element subset, computing interior nodes and the closure, and
/// failing when the set is not regular.
pub fn classify_region(
    mesh: &TensorMesh2D,
    element_set: &[usize],
) -> Result<RegularRegion, MeshError> {
    if element_set.is_empty() {
        return Err(MeshError::EmptyRegion);
    }
    let total = mesh.element_count();
    let mut elements: Vec<usize> = element_set.to_vec();
    elements.sort_unstable();
    elements.dedup();
    if let Some(&bad) = elements.iter().find(|&&e| e >= total) {
        return Err(MeshError::UnknownElement(bad));
    }
    let mut in_region = vec![false; total];
    for &e in &elements {
        in_region[e] = true;
    }

    // candidate nodes are those of the region's elements
    let mut candidate_nodes: Vec<usize> = elements
        .iter()
        .flat_map(|&e| mesh.element_corner_nodes(e))
        .collect();
    candidate_nodes.sort_unstable();
    candidate_nodes.dedup();

    let interior_nodes: Vec<usize> = candidate_nodes
        .into_iter()
        .filter(|&node| {
            mesh.elements_touching_node(node)
                .iter()
                .all(|&e| in_region[e])
        })
        .collect();

    let mut boundary_closure: Vec<usize> = interior_nodes
        .iter()
        .flat_map(|&node| mesh.elements_touching_node(node))
        .collect();
    boundary_closure.sort_unstable();
    boundary_closure.dedup();

    if boundary_closure != elements {
        let witness = elements
            .iter()
            .find(|e| boundary_closure.binary_search(e).is_err())
            .or_else(|| {
                boundary_closure
                    .iter()
                    .find(|e| elements.binary_search(e).is_err())
            })
            .copied()
            .unwrap_or(elements[0]);
        return Err(MeshError::NotRegular { witness });
    }

    Ok(RegularRegion {
        mesh: mesh.clone(),
        elements,
        in_region,
        interior_nodes,
        boundary_closure,
    })
}

/// The full domain, which is always regular.
pub fn full_domain(mesh: &TensorMesh2D) -> RegularRegion {
    let all: Vec<usize> = (0..mesh.element_count()).collect();
    classify_region(mesh, &all).expect("the full domain is regular")
}

/// Rectangle of elements given by grid offsets and extents. Spatial indices
/// wrap on periodic meshes.
pub fn rect_region(
    mesh: &TensorMesh2D,
    t0_el: usize,
    x0_el: usize,
    t_extent: usize,
    x_extent: usize,
) -> Result<RegularRegion, MeshError> {
    let mut els = Vec::with_capacity(t_extent * x_extent);
    for a in 0..t_extent {
        for b in 0..x_extent {
            let ta = t0_el + a;
            if ta >= mesh.m() {
                return Err(MeshError::UnknownElement(mesh.element_count() + ta));
            }
            let xb = if mesh.x_mesh().is_periodic() {
                (x0_el + b) % mesh.n()
            } else {
                let xb = x0_el + b;
                if xb >= mesh.n() {
                    return Err(MeshError::UnknownElement(mesh.element_count() + xb));
                }
                xb
            };
            els.push(mesh.element_id(ta, xb));
        }
    }
    classify_region(mesh, &els)
}

impl RegularRegion {
    pub fn mesh(&self) -> &TensorMesh2D {
        &self.mesh
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn contains_element(&self, element: usize) -> bool {
        self.in_region.get(element).copied().unwrap_or(false)
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    pub fn boundary_closure(&self) -> &[usize] {
        &self.boundary_closure
    }

    pub fn is_full_domain(&self) -> bool {
        self.elements.len() == self.mesh.element_count()
    }

    /// Segments of the region boundary, each with one inside element.
    pub fn boundary_edges(&self) -> Vec<BoundaryEdge> {
        let mesh = &self.mesh;
        let mut out = Vec::new();
        for ti in 0..mesh.m() {
            for xi in 0..mesh.x_mesh().node_count() {
                let [below, above] = mesh.t_edge_adjacent_cells(ti, xi);
                let inb = below.map_or(false, |e| self.in_region[e]);
                let ina = above.map_or(false, |e| self.in_region[e]);
                if inb == ina {
                    continue;
                }
                let (t0, t1) = mesh.t_mesh().element_bounds(ti);
                let x = mesh.x_mesh().node_coord(xi);
                let (inside, normal) = if inb {
                    (below.unwrap(), [0.0, 1.0])
                } else {
                    (above.unwrap(), [0.0, -1.0])
                };
                out.push(BoundaryEdge {
                    kind: EdgeKind::Temporal,
                    start: (t0, x),
                    end: (t1, x),
                    inside_element: inside,
                    outward_normal: normal,
                    endpoints: (mesh.node_id(ti, xi), mesh.node_id(ti + 1, xi)),
                });
            }
        }
        for ti in 0..mesh.t_mesh().node_count() {
            for xb in 0..mesh.n() {
                let [before, after] = mesh.x_edge_adjacent_cells(ti, xb);
                let inb = before.map_or(false, |e| self.in_region[e]);
                let ina = after.map_or(false, |e| self.in_region[e]);
                if inb == ina {
                    continue;
                }
                let t = mesh.t_mesh().node_coord(ti);
                let (x0, x1) = mesh.x_mesh().element_bounds(xb);
                let (inside, normal) = if inb {
                    (before.unwrap(), [1.0, 0.0])
                } else {
                    (after.unwrap(), [-1.0, 0.0])
                };
                out.push(BoundaryEdge {
                    kind: EdgeKind::Spatial,
                    start: (t, x0),
                    end: (t, x1),
                    inside_element: inside,
                    outward_normal: normal,
                    endpoints: (mesh.node_id(ti, xb), mesh.node_id(ti, xb + 1)),
                });
            }
        }
        out
    }

    /// Mesh edges interior to the region (both adjacent elements inside).
    pub fn interior_mesh_edges(&self) -> Vec<InteriorEdge> {
        let mesh = &self.mesh;
        let mut out = Vec::new();
        for ti in 0..mesh.m() {
            for xi in 0..mesh.x_mesh().node_count() {
                let [below, above] = mesh.t_edge_adjacent_cells(ti, xi);
                if let (Some(b), Some(a)) = (below, above) {
                    if b != a && self.in_region[b] && self.in_region[a] {
                        let (t0, t1) = mesh.t_mesh().element_bounds(ti);
                        let x = mesh.x_mesh().node_coord(xi);
                        out.push(InteriorEdge {
                            kind: EdgeKind::Temporal,
                            start: (t0, x),
                            end: (t1, x),
                            elements: (b, a),
                            endpoints: (mesh.node_id(ti, xi), mesh.node_id(ti + 1, xi)),
                        });
                    }
                }
            }
        }
        for ti in 0..mesh.t_mesh().node_count() {
            for xb in 0..mesh.n() {
                let [before, after] = mesh.x_edge_adjacent_cells(ti, xb);
                if let (Some(b), Some(a)) = (before, after) {
                    if self.in_region[b] && self.in_region[a] {
                        let t = mesh.t_mesh().node_coord(ti);
                        let (x0, x1) = mesh.x_mesh().element_bounds(xb);
                        out.push(InteriorEdge {
                            kind: EdgeKind::Spatial,
                            start: (t, x0),
                            end: (t, x1),
                            elements: (b, a),
                            endpoints: (mesh.node_id(ti, xb), mesh.node_id(ti, xb + 1)),
                        });
                    }
                }
            }
        }
        out
    }

    /// Nodes lying on the region boundary.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut nodes: Vec<usize> = self
            .boundary_edges()
            .iter()
            .flat_map(|e| [e.endpoints.0, e.endpoints.1])
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// All nodes of the region's elements.
    pub fn region_nodes(&self) -> Vec<usize> {
        let mut nodes: Vec<usize> = self
            .elements
            .iter()
            .flat_map(|&e| self.mesh.element_corner_nodes(e))
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }
}

/// Partition of a space's degrees of freedom relative to a region: dofs with
/// nonvanishing trace on the region boundary, the remaining interior dofs, and
/// the elements supporting boundary-trace shape functions.
#[derive(Clone, Debug)]
pub struct BoundaryDofSets {
    pub boundary_dofs: Vec<usize>,
    pub interior_dofs: Vec<usize>,
    pub boundary_elements: Vec<usize>,
}

/// Classify the dofs of `space` restricted to `region`.
pub fn boundary_dof_sets(
    region: &RegularRegion,
    space: &FeSpace2d,
) -> Result<BoundaryDofSets, MeshError> {
    if space.mesh() != region.mesh() {
        return Err(MeshError::SpaceMismatch);
    }
    let mesh = region.mesh();
    match space.degree() {
        FormDegree::Zero => {
            let all = region.region_nodes();
            let boundary = region.boundary_nodes();
            let interior: Vec<usize> = all
                .iter()
                .copied()
                .filter(|n| boundary.binary_search(n).is_err())
                .collect();
            let mut ring: Vec<usize> = boundary
                .iter()
                .flat_map(|&n| mesh.elements_touching_node(n))
                .filter(|&e| region.contains_element(e))
                .collect();
            ring.sort_unstable();
            ring.dedup();
            Ok(BoundaryDofSets {
                boundary_dofs: boundary,
                interior_dofs: interior,
                boundary_elements: ring,
            })
        }
        FormDegree::One => {
            // an edge dof has nonvanishing tangential trace on the boundary
            // exactly when its own edge lies in the boundary
            let mut boundary: Vec<usize> = Vec::new();
            let mut all: Vec<usize> = Vec::new();
            for &e in region.elements() {
                let (ta, xb) = mesh.element_grid(e);
                all.push(space.t_edge_dof(ta, xb));
                all.push(space.t_edge_dof(ta, xb + 1));
                all.push(space.x_edge_dof(ta, xb));
                all.push(space.x_edge_dof(ta + 1, xb));
            }
            all.sort_unstable();
            all.dedup();
            for be in region.boundary_edges() {
                let (ti0, xi0) = mesh.node_grid(be.endpoints.0);
                let dof = match be.kind {
                    EdgeKind::Temporal => space.t_edge_dof(ti0, xi0),
                    EdgeKind::Spatial => space.x_edge_dof(ti0, xi0),
                };
                boundary.push(dof);
            }
            boundary.sort_unstable();
            boundary.dedup();
            let interior: Vec<usize> = all
                .iter()
                .copied()
                .filter(|d| boundary.binary_search(d).is_err())
                .collect();
            let mut ring: Vec<usize> = region
                .boundary_edges()
                .iter()
                .flat_map(|be| {
                    let (ti0, xi0) = mesh.node_grid(be.endpoints.0);
                    match be.kind {
                        EdgeKind::Temporal => mesh.t_edge_adjacent_cells(ti0, xi0),
                        EdgeKind::Spatial => mesh.x_edge_adjacent_cells(ti0, xi0),
                    }
                })
                .flatten()
                .filter(|&e| region.contains_element(e))
                .collect();
            ring.sort_unstable();
            ring.dedup();
            Ok(BoundaryDofSets {
                boundary_dofs: boundary,
                interior_dofs: interior,
                boundary_elements: ring,
            })
        }
        FormDegree::Two => {
            // the pullback of a 2-form to a curve vanishes: no boundary dofs
            Ok(BoundaryDofSets {
                boundary_dofs: Vec::new(),
                interior_dofs: region.elements().to_vec(),
                boundary_elements: Vec::new(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_tensor_mesh;

    #[test]
    fn full_domain_is_regular() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 3, 4, false).unwrap();
        let region = full_domain(&mesh);
        assert_eq!(region.element_count(), 12);
        // literal reading: every node of the full domain is interior
        assert_eq!(region.interior_nodes().len(), mesh.node_count());
    }

    #[test]
    fn single_interior_element_is_not_regular() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 4, 4, false).unwrap();
        let e = mesh.element_id(1, 1);
        match classify_region(&mesh, &[e]) {
            Err(MeshError::NotRegular { witness }) => assert_eq!(witness, e),
            other => panic!("expected NotRegular, got {other:?}"),
        }
    }

    #[test]
    fn three_by_three_block_has_four_interior_nodes() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 5, 5, false).unwrap();
        let region = rect_region(&mesh, 1, 1, 3, 3).unwrap();
        assert_eq!(region.interior_nodes().len(), 4);
        assert_eq!(region.element_count(), 9);
    }

    #[test]
    fn classification_is_idempotent() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 5, 5, false).unwrap();
        let region = rect_region(&mesh, 1, 1, 3, 3).unwrap();
        let again = classify_region(&mesh, region.elements()).unwrap();
        assert_eq!(region, again);
    }

    #[test]
    fn two_by_two_block_is_regular() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 4, 4, false).unwrap();
        let region = rect_region(&mesh, 1, 1, 2, 2).unwrap();
        assert_eq!(region.interior_nodes().len(), 1);
    }

    #[test]
    fn empty_region_rejected() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 2, 2, false).unwrap();
        assert!(matches!(
            classify_region(&mesh, &[]),
            Err(MeshError::EmptyRegion)
        ));
    }

    #[test]
    fn boundary_edge_normals_point_outward() {
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 4, 4, false).unwrap();
        let region = rect_region(&mesh, 1, 1, 2, 2).unwrap();
        let edges = region.boundary_edges();
        // a 2x2 block has 8 boundary segments
        assert_eq!(edges.len(), 8);
        for e in &edges {
            // stepping from the segment midpoint along the normal leaves the region
            let mid = (
                0.5 * (e.start.0 + e.end.0) + 1e-3 * e.outward_normal[0],
                0.5 * (e.start.1 + e.end.1) + 1e-3 * e.outward_normal[1],
            );
            let el = mesh.locate(mid.0, mid.1).unwrap();
            assert!(!region.contains_element(el));
        }
    }

    #[test]
    fn periodic_band_has_only_temporal_trace() {
        // a full spatial circle: the boundary is the two time slices
        let mesh = build_tensor_mesh((0.0, 1.0), (0.0, 1.0), 4, 4, true).unwrap();
        let region = rect_region(&mesh, 1, 0, 2, 4).unwrap();
        assert!(region
            .boundary_edges()
            .iter()
            .all(|e| e.kind == EdgeKind::Spatial));
    }
}
