//! Triangle/quad meshes with element maps from the reference triangle and
//! rectangle, edge tables, admissibility checks, patches and refinement.

mod checks;
mod generators;
mod io;
mod refine;

use std::collections::BTreeMap;

use crate::polyalg::refgeom::{RECT_CORNERS, SQRT3, TRI_VERTS};
use crate::polyalg::AffineMap;

pub use checks::{check_admissibility, check_degree_compat, degree_conflicts, shape_regularity, Violation};
pub use generators::{criss_cross, mixed_strip, quad_grid, reference_rectangle, reference_triangle};
pub use io::{load_mesh, parse_mesh, MeshFile};
pub use refine::refine_uniform;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("cannot read mesh file: {0}")]
    Io(String),
    #[error("mesh parse error: {0}")]
    Parse(String),
    #[error("element {element} is inverted or degenerate")]
    InvertedElement { element: usize },
    #[error("vertices {a} and {b} coincide")]
    DuplicateVertex { a: usize, b: usize },
    #[error("element {element} references unknown vertex {vertex}")]
    UnknownVertex { element: usize, vertex: usize },
    #[error("element {element} has {found} vertices, expected {expected}")]
    BadVertexCount { element: usize, expected: usize, found: usize },
    #[error("element {element} has degree 0")]
    BadDegree { element: usize },
    #[error("unknown {kind} {id}")]
    UnknownEntity { kind: &'static str, id: usize },
    #[error("singular Gramian in element {element}")]
    SingularGramian { element: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum ElementKind {
    #[serde(rename = "tri")]
    Tri,
    #[serde(rename = "quad")]
    Quad,
}

impl ElementKind {
    pub fn num_vertices(self) -> usize {
        match self {
            ElementKind::Tri => 3,
            ElementKind::Quad => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub id: usize,
    pub kind: ElementKind,
    pub verts: Vec<usize>,
    pub degree: u32,
}

/// Reference coordinates of local vertex `i`.
///
/// Triangle local vertices 0, 1, 2 sit at v̂₁, v̂₃, v̂₂ so that the
/// counterclockwise physical order matches a counterclockwise reference order.
pub fn ref_vertex(kind: ElementKind, i: usize) -> [f64; 2] {
    match kind {
        ElementKind::Tri => [TRI_VERTS[0], TRI_VERTS[2], TRI_VERTS[1]][i],
        ElementKind::Quad => RECT_CORNERS[i],
    }
}

/// Map from the reference element onto a physical element.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementMap {
    pub kind: ElementKind,
    pub corners: Vec<[f64; 2]>,
}

impl ElementMap {
    pub fn new(kind: ElementKind, corners: Vec<[f64; 2]>) -> Self {
        Self { kind, corners }
    }

    fn tri_jacobian(&self) -> [[f64; 2]; 2] {
        let (r0, r1, r2) = (ref_vertex(ElementKind::Tri, 0), ref_vertex(ElementKind::Tri, 1), ref_vertex(ElementKind::Tri, 2));
        let a = [[r1[0] - r0[0], r2[0] - r0[0]], [r1[1] - r0[1], r2[1] - r0[1]]];
        let p = &self.corners;
        let b = [[p[1][0] - p[0][0], p[2][0] - p[0][0]], [p[1][1] - p[0][1], p[2][1] - p[0][1]]];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let ainv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
        let mut j = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                j[r][c] = b[r][0] * ainv[0][c] + b[r][1] * ainv[1][c];
            }
        }
        j
    }

    fn unit(r: [f64; 2]) -> (f64, f64) {
        ((r[0] + 1.0) / 2.0, (r[1] - RECT_CORNERS[0][1]) / SQRT3)
    }

    pub fn apply(&self, r: [f64; 2]) -> [f64; 2] {
        match self.kind {
            ElementKind::Tri => {
                let j = self.tri_jacobian();
                let r0 = ref_vertex(ElementKind::Tri, 0);
                let d = [r[0] - r0[0], r[1] - r0[1]];
                [
                    self.corners[0][0] + j[0][0] * d[0] + j[0][1] * d[1],
                    self.corners[0][1] + j[1][0] * d[0] + j[1][1] * d[1],
                ]
            }
            ElementKind::Quad => {
                let (s, t) = Self::unit(r);
                let w = [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t];
                let mut x = [0.0; 2];
                for (k, p) in self.corners.iter().enumerate() {
                    x[0] += w[k] * p[0];
                    x[1] += w[k] * p[1];
                }
                x
            }
        }
    }

    /// `∂x_i/∂r_j`.
    pub fn jacobian(&self, r: [f64; 2]) -> [[f64; 2]; 2] {
        match self.kind {
            ElementKind::Tri => self.tri_jacobian(),
            ElementKind::Quad => {
                let (s, t) = Self::unit(r);
                let ds = [-(1.0 - t), 1.0 - t, t, -t];
                let dt = [-(1.0 - s), -s, s, 1.0 - s];
                let mut j = [[0.0; 2]; 2];
                for (k, p) in self.corners.iter().enumerate() {
                    for i in 0..2 {
                        j[i][0] += ds[k] * p[i] * 0.5;
                        j[i][1] += dt[k] * p[i] / SQRT3;
                    }
                }
                j
            }
        }
    }

    pub fn det(&self, r: [f64; 2]) -> f64 {
        let j = self.jacobian(r);
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }

    /// True for triangles and parallelograms.
    pub fn is_affine(&self) -> bool {
        match self.kind {
            ElementKind::Tri => true,
            ElementKind::Quad => {
                let c = &self.corners;
                let tw = [c[0][0] - c[1][0] + c[2][0] - c[3][0], c[0][1] - c[1][1] + c[2][1] - c[3][1]];
                let scale = self.diameter().max(1e-300);
                tw[0].abs() <= 1e-13 * scale && tw[1].abs() <= 1e-13 * scale
            }
        }
    }

    /// The map as an [`AffineMap`] when it is affine.
    pub fn affine(&self) -> Option<AffineMap> {
        if !self.is_affine() {
            return None;
        }
        let r0 = [0.0, 0.0];
        let j = self.jacobian(r0);
        let x0 = self.apply(r0);
        Some(AffineMap::new(2, 2, vec![j[0][0], j[0][1], j[1][0], j[1][1]], x0.to_vec()).expect("2x2"))
    }

    /// Inverse map; Newton iteration for bilinear quads.
    pub fn inverse(&self, x: [f64; 2]) -> [f64; 2] {
        let mut r = match self.kind {
            ElementKind::Tri => ref_vertex(ElementKind::Tri, 0),
            ElementKind::Quad => [0.0, 0.5 / SQRT3],
        };
        for _ in 0..50 {
            let f = self.apply(r);
            let j = self.jacobian(r);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let e = [x[0] - f[0], x[1] - f[1]];
            let d = [(j[1][1] * e[0] - j[0][1] * e[1]) / det, (-j[1][0] * e[0] + j[0][0] * e[1]) / det];
            r = [r[0] + d[0], r[1] + d[1]];
            if d[0].abs() + d[1].abs() < 1e-15 {
                break;
            }
        }
        r
    }

    pub fn diameter(&self) -> f64 {
        let mut h: f64 = 0.0;
        for a in &self.corners {
            for b in &self.corners {
                h = h.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        h
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.corners.len() as f64;
        let s = self.corners.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
        [s[0] / n, s[1] / n]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Endpoint vertex ids in ascending order.
    pub verts: [usize; 2],
    /// `(element, local edge index)` pairs.
    pub elements: Vec<(usize, usize)>,
    pub boundary: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatchKind {
    Vertex,
    Edge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub kind: PatchKind,
    pub center: usize,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub elements: Vec<Element>,
    pub maps: Vec<ElementMap>,
    pub edges: Vec<Edge>,
    /// Global edge id of each local edge (edge `i` joins local vertices `i` and `i+1`).
    pub elem_edges: Vec<Vec<usize>>,
    /// Euclidean diameters.
    pub h: Vec<f64>,
    pub declared_boundary: Vec<[usize; 2]>,
}

impl Mesh {
    /// Validates raw data and builds maps, edges and diameters.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        cells: Vec<(ElementKind, Vec<usize>, u32)>,
        declared_boundary: Vec<[usize; 2]>,
    ) -> Result<Self, MeshError> {
        let mut seen: BTreeMap<(u64, u64), usize> = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            let key = ((v[0] + 0.0).to_bits(), (v[1] + 0.0).to_bits());
            if let Some(&j) = seen.get(&key) {
                return Err(MeshError::DuplicateVertex { a: j, b: i });
            }
            seen.insert(key, i);
        }
        let mut elements = Vec::with_capacity(cells.len());
        let mut maps = Vec::with_capacity(cells.len());
        for (id, (kind, verts, degree)) in cells.into_iter().enumerate() {
            if verts.len() != kind.num_vertices() {
                return Err(MeshError::BadVertexCount { element: id, expected: kind.num_vertices(), found: verts.len() });
            }
            if let Some(&v) = verts.iter().find(|&&v| v >= vertices.len()) {
                return Err(MeshError::UnknownVertex { element: id, vertex: v });
            }
            if degree == 0 {
                return Err(MeshError::BadDegree { element: id });
            }
            let map = ElementMap::new(kind, verts.iter().map(|&v| vertices[v]).collect());
            let scale = map.diameter().powi(2);
            for i in 0..kind.num_vertices() {
                if map.det(ref_vertex(kind, i)) <= 1e-14 * scale {
                    return Err(MeshError::InvertedElement { element: id });
                }
            }
            elements.push(Element { id, kind, verts, degree });
            maps.push(map);
        }
        let mut edge_index: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut elem_edges = Vec::with_capacity(elements.len());
        // first pass fixes edge ids in sorted vertex order for determinism
        for el in &elements {
            let n = el.verts.len();
            for i in 0..n {
                let (a, b) = (el.verts[i], el.verts[(i + 1) % n]);
                edge_index.entry([a.min(b), a.max(b)]).or_insert(0);
            }
        }
        for (k, (verts, id)) in edge_index.iter_mut().enumerate() {
            *id = k;
            edges.push(Edge { verts: *verts, elements: Vec::new(), boundary: false });
        }
        for el in &elements {
            let n = el.verts.len();
            let mut ids = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (el.verts[i], el.verts[(i + 1) % n]);
                let id = edge_index[&[a.min(b), a.max(b)]];
                edges[id].elements.push((el.id, i));
                ids.push(id);
            }
            elem_edges.push(ids);
        }
        for e in &mut edges {
            e.boundary = e.elements.len() == 1;
        }
        let h = maps.iter().map(ElementMap::diameter).collect();
        Ok(Self { vertices, elements, maps, edges, elem_edges, h, declared_boundary })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn h_max(&self) -> f64 {
        self.h.iter().cloned().fold(0.0, f64::max)
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        let key = [a.min(b), a.max(b)];
        self.edges.binary_search_by(|e| e.verts.cmp(&key)).ok()
    }

    /// Whether local edge `i` of `element` runs against the global (ascending) orientation.
    pub fn edge_reversed(&self, element: usize, local_edge: usize) -> bool {
        let v = &self.elements[element].verts;
        v[local_edge] > v[(local_edge + 1) % v.len()]
    }

    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut b = vec![false; self.vertices.len()];
        for e in self.edges.iter().filter(|e| e.boundary) {
            b[e.verts[0]] = true;
            b[e.verts[1]] = true;
        }
        b
    }

    /// Element area by Jacobian quadrature.
    pub fn element_area(&self, element: usize) -> f64 {
        use crate::polyalg::{make_quadrature, RefDomain};
        let map = &self.maps[element];
        let dom = match map.kind {
            ElementKind::Tri => RefDomain::Triangle,
            ElementKind::Quad => RefDomain::Rectangle,
        };
        make_quadrature(dom, 4).integrate(|r| map.det([r[0], r[1]]))
    }

    pub fn area(&self) -> f64 {
        (0..self.num_elements()).map(|k| self.element_area(k)).sum()
    }

    /// Elements whose closure contains the vertex or edge.
    pub fn build_patch(&self, kind: PatchKind, id: usize) -> Result<Patch, MeshError> {
        let members: Vec<usize> = match kind {
            PatchKind::Vertex => {
                if id >= self.vertices.len() {
                    return Err(MeshError::UnknownEntity { kind: "vertex", id });
                }
                self.elements.iter().filter(|e| e.verts.contains(&id)).map(|e| e.id).collect()
            }
            PatchKind::Edge => {
                let e = self.edges.get(id).ok_or(MeshError::UnknownEntity { kind: "edge", id })?;
                let mut m: Vec<usize> = e.elements.iter().map(|&(k, _)| k).collect();
                m.sort_unstable();
                m
            }
        };
        Ok(Patch { kind, center: id, members })
    }

    /// Same mesh with all element degrees replaced.
    pub fn with_uniform_degree(&self, p: u32) -> Self {
        let mut m = self.clone();
        for e in &mut m.elements {
            e.degree = p;
        }
        m
    }

    /// Same mesh with element degrees mapped by `f`.
    pub fn with_degrees(&self, f: impl Fn(&Element) -> u32) -> Self {
        let mut m = self.clone();
        for e in &mut m.elements {
            e.degree = f(e).max(1);
        }
        m
    }

    /// Same mesh with every vertex scaled by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        self.transformed(|v| [s * v[0], s * v[1]])
    }

    /// Same connectivity with vertices moved by `f` (must preserve orientation).
    pub fn transformed(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let verts = self.vertices.iter().map(|&v| f(v)).collect();
        let cells = self.elements.iter().map(|e| (e.kind, e.verts.clone(), e.degree)).collect();
        Mesh::new(verts, cells, self.declared_boundary.clone()).expect("orientation-preserving transform")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> Mesh {
        Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![(ElementKind::Tri, vec![0, 1, 2], 1), (ElementKind::Tri, vec![0, 2, 3], 1)],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn edge_table_counts() {
        let m = two_triangles();
        assert_eq!(m.edges.len(), 5);
        assert_eq!(m.edges.iter().filter(|e| !e.boundary).count(), 1);
        assert_eq!(m.edges.iter().filter(|e| e.boundary).count(), 4);
    }

    #[test]
    fn reference_triangle_map_is_identity() {
        let m = reference_triangle(1);
        for r in [[0.1, 0.2], [-0.3, -0.1]] {
            let x = m.maps[0].apply(r);
            assert!((x[0] - r[0]).abs() < 1e-15 && (x[1] - r[1]).abs() < 1e-15);
        }
        assert_eq!(m.edges.iter().filter(|e| e.boundary).count(), 3);
    }

    #[test]
    fn reference_rectangle_diameter() {
        let m = reference_rectangle(1);
        assert_eq!(m.num_elements(), 1);
        assert!((m.h[0] - 7.0f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn inverted_element_rejected() {
        let r = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![(ElementKind::Tri, vec![0, 2, 1], 1)], vec![]);
        assert!(matches!(r, Err(MeshError::InvertedElement { .. })));
    }

    #[test]
    fn duplicate_vertex_rejected() {
        let r = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]], vec![], vec![]);
        assert!(matches!(r, Err(MeshError::DuplicateVertex { .. })));
    }

    #[test]
    fn bilinear_inverse_roundtrip() {
        let map = ElementMap::new(ElementKind::Quad, vec![[0.0, 0.0], [2.0, 0.1], [2.3, 1.5], [-0.2, 1.0]]);
        assert!(!map.is_affine());
        let r = [0.3, 0.2];
        let back = map.inverse(map.apply(r));
        assert!((back[0] - r[0]).abs() < 1e-13 && (back[1] - r[1]).abs() < 1e-13);
    }

    #[test]
    fn patches_on_grid() {
        let m = quad_grid(2, 1, [0.0, 0.0, 1.0, 1.0]);
        let center = m.vertices.iter().position(|v| (v[0] - 0.5).abs() < 1e-12 && (v[1] - 0.5).abs() < 1e-12).unwrap();
        assert_eq!(m.build_patch(PatchKind::Vertex, center).unwrap().members.len(), 4);
        let corner = m.vertices.iter().position(|v| v[0] == 0.0 && v[1] == 0.0).unwrap();
        assert!(m.build_patch(PatchKind::Vertex, corner).unwrap().members.len() <= 2);
        let interior = m.edges.iter().position(|e| !e.boundary).unwrap();
        assert_eq!(m.build_patch(PatchKind::Edge, interior).unwrap().members.len(), 2);
        assert!(m.build_patch(PatchKind::Edge, 999).is_err());
    }

    #[test]
    fn area_sums_to_domain() {
        let m = mixed_strip(2, 2, 2);
        assert!((m.area() - 4.0).abs() < 1e-12 * 4.0);
    }
}
