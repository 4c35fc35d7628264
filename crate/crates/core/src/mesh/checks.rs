use std::collections::{BTreeMap, BTreeSet};

use super::{ref_vertex, ElementKind, Mesh, MeshError};
use crate::polyalg::refgeom::{dist_to_segment, RECT_Y_HI, RECT_Y_LO};
use crate::polyalg::{gauss_legendre, gauss_legendre_on};

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// An edge shared by more than two elements.
    NonManifoldEdge { edge: [usize; 2], count: usize },
    /// A vertex lying in the relative interior of an element edge.
    HangingNode { vertex: usize, edge: [usize; 2] },
    /// Two elements sharing more than an edge or sharing two vertices without the edge.
    BadIntersection { elements: [usize; 2] },
    /// Declared boundary tag disagrees with the topological boundary.
    BoundaryMismatch { edge: [usize; 2], declared: bool },
    /// Declared boundary edge that is not an edge of the mesh.
    UnknownBoundaryEdge { edge: [usize; 2] },
    /// The two element maps parametrize a shared edge differently.
    EdgeParametrization { edge: [usize; 2], mismatch: f64 },
    /// Jacobian determinant not positive at some sample point.
    NonPositiveJacobian { element: usize },
}

fn edge_point(mesh: &Mesh, element: usize, local: usize, s: f64) -> [f64; 2] {
    let kind = mesh.elements[element].kind;
    let n = kind.num_vertices();
    let a = ref_vertex(kind, local);
    let b = ref_vertex(kind, (local + 1) % n);
    mesh.maps[element].apply([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
}

/// Lists every violation of the conformity, boundary and bijectivity requirements.
pub fn check_admissibility(mesh: &Mesh) -> Vec<Violation> {
    let mut out = Vec::new();
    for e in &mesh.edges {
        if e.elements.len() > 2 {
            out.push(Violation::NonManifoldEdge { edge: e.verts, count: e.elements.len() });
        }
    }
    // hanging nodes: vertices strictly inside some edge segment
    for e in &mesh.edges {
        let (a, b) = (mesh.vertices[e.verts[0]], mesh.vertices[e.verts[1]]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let (lo, hi) = ([a[0].min(b[0]), a[1].min(b[1])], [a[0].max(b[0]), a[1].max(b[1])]);
        for (v, x) in mesh.vertices.iter().enumerate() {
            if v == e.verts[0] || v == e.verts[1] {
                continue;
            }
            let tol = 1e-10 * len;
            if x[0] < lo[0] - tol || x[0] > hi[0] + tol || x[1] < lo[1] - tol || x[1] > hi[1] + tol {
                continue;
            }
            if dist_to_segment(*x, a, b) <= tol {
                out.push(Violation::HangingNode { vertex: v, edge: e.verts });
            }
        }
    }
    // element pairs sharing vertices must share exactly one vertex or one edge
    let mut by_vertex: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_vertices()];
    for el in &mesh.elements {
        for &v in &el.verts {
            by_vertex[v].push(el.id);
        }
    }
    let mut shared: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for list in &by_vertex {
        for (i, &a) in list.iter().enumerate() {
            for &b in &list[i + 1..] {
                *shared.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
    }
    for (&(a, b), &count) in &shared {
        let ok = match count {
            1 => true,
            2 => {
                let ea: BTreeSet<usize> = mesh.elem_edges[a].iter().copied().collect();
                mesh.elem_edges[b].iter().any(|e| ea.contains(e))
            }
            _ => false,
        };
        if !ok {
            out.push(Violation::BadIntersection { elements: [a, b] });
        }
    }
    if !mesh.declared_boundary.is_empty() {
        let declared: BTreeSet<[usize; 2]> =
            mesh.declared_boundary.iter().map(|&[a, b]| [a.min(b), a.max(b)]).collect();
        for d in &declared {
            if mesh.edge_id(d[0], d[1]).is_none() {
                out.push(Violation::UnknownBoundaryEdge { edge: *d });
            }
        }
        for e in &mesh.edges {
            let tagged = declared.contains(&e.verts);
            if tagged != e.boundary {
                out.push(Violation::BoundaryMismatch { edge: e.verts, declared: tagged });
            }
        }
    }
    for e in mesh.edges.iter().filter(|e| e.elements.len() == 2) {
        let (k1, l1) = e.elements[0];
        let (k2, l2) = e.elements[1];
        let scale = mesh.h[k1].max(mesh.h[k2]);
        let mut worst: f64 = 0.0;
        for s in [0.0, 0.5, 1.0] {
            let p = edge_point(mesh, k1, l1, s);
            // neighbours traverse a shared edge in opposite directions
            let q = edge_point(mesh, k2, l2, 1.0 - s);
            worst = worst.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
        }
        if worst > 1e-12 * scale {
            out.push(Violation::EdgeParametrization { edge: e.verts, mismatch: worst });
        }
    }
    for (k, map) in mesh.maps.iter().enumerate() {
        if sample_points(map.kind).iter().any(|&r| map.det(r) <= 0.0) {
            out.push(Violation::NonPositiveJacobian { element: k });
        }
    }
    out
}

/// Fixed order-5 tensor Gauss grid on the reference element.
fn sample_points(kind: ElementKind) -> Vec<[f64; 2]> {
    let (x, _) = gauss_legendre(5);
    let (y, _) = gauss_legendre_on(5, RECT_Y_LO, RECT_Y_HI);
    let mut pts = Vec::with_capacity(25);
    for &a in &x {
        for &b in &y {
            pts.push(match kind {
                ElementKind::Quad => [a, b],
                ElementKind::Tri => crate::polyalg::refgeom::duffy([a, b]),
            });
        }
    }
    pts
}

/// Shape-regularity measure γ_K per element.
pub fn shape_regularity(mesh: &Mesh) -> Result<Vec<f64>, MeshError> {
    let mut out = Vec::with_capacity(mesh.num_elements());
    for (k, map) in mesh.maps.iter().enumerate() {
        let h2 = mesh.h[k] * mesh.h[k];
        let mut gamma: f64 = 0.0;
        for r in sample_points(map.kind) {
            let j = map.jacobian(r);
            // Gramian JᵀJ
            let g00 = j[0][0] * j[0][0] + j[1][0] * j[1][0];
            let g11 = j[0][1] * j[0][1] + j[1][1] * j[1][1];
            let g01 = j[0][0] * j[0][1] + j[1][0] * j[1][1];
            let mean = 0.5 * (g00 + g11);
            let rad = (0.25 * (g00 - g11).powi(2) + g01 * g01).sqrt();
            let (l1, l2) = (mean - rad, mean + rad);
            if l1 <= 1e-14 * l2.max(f64::MIN_POSITIVE) {
                return Err(MeshError::SingularGramian { element: k });
            }
            for l in [l1, l2] {
                gamma = gamma.max(h2 / l).max(l / h2);
            }
        }
        out.push(gamma);
    }
    Ok(out)
}

/// Interior triangle/quad edges whose degrees violate `p_T ≤ p_S or 2 p_S ≤ p_T`.
pub fn degree_conflicts(mesh: &Mesh) -> Vec<usize> {
    let mut out = Vec::new();
    for (id, e) in mesh.edges.iter().enumerate() {
        if e.elements.len() != 2 {
            continue;
        }
        let (a, b) = (&mesh.elements[e.elements[0].0], &mesh.elements[e.elements[1].0]);
        let (tri, quad) = match (a.kind, b.kind) {
            (ElementKind::Tri, ElementKind::Quad) => (a, b),
            (ElementKind::Quad, ElementKind::Tri) => (b, a),
            _ => continue,
        };
        if !(tri.degree <= quad.degree || 2 * quad.degree <= tri.degree) {
            out.push(id);
        }
    }
    out
}

pub fn check_degree_compat(mesh: &Mesh) -> bool {
    degree_conflicts(mesh).is_empty()
}
