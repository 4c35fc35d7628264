use super::{ElementKind, Mesh};
use crate::polyalg::refgeom::{RECT_Y_HI, RECT_Y_LO};

/// Red refinement: every element into four children through edge midpoints
/// (and the reference centroid for quads), pushed through the parent map.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let mut vertices = mesh.vertices.clone();
    let mut mid = vec![usize::MAX; mesh.edges.len()];
    for (k, el) in mesh.elements.iter().enumerate() {
        let n = el.verts.len();
        for i in 0..n {
            let e = mesh.elem_edges[k][i];
            if mid[e] == usize::MAX {
                let a = super::ref_vertex(el.kind, i);
                let b = super::ref_vertex(el.kind, (i + 1) % n);
                vertices.push(mesh.maps[k].apply([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]));
                mid[e] = vertices.len() - 1;
            }
        }
    }
    let mut cells = Vec::with_capacity(4 * mesh.num_elements());
    for (k, el) in mesh.elements.iter().enumerate() {
        let v = &el.verts;
        let m: Vec<usize> = mesh.elem_edges[k].iter().map(|&e| mid[e]).collect();
        let p = el.degree;
        match el.kind {
            ElementKind::Tri => {
                cells.push((ElementKind::Tri, vec![v[0], m[0], m[2]], p));
                cells.push((ElementKind::Tri, vec![m[0], v[1], m[1]], p));
                cells.push((ElementKind::Tri, vec![m[2], m[1], v[2]], p));
                cells.push((ElementKind::Tri, vec![m[0], m[1], m[2]], p));
            }
            ElementKind::Quad => {
                vertices.push(mesh.maps[k].apply([0.0, (RECT_Y_LO + RECT_Y_HI) / 2.0]));
                let c = vertices.len() - 1;
                cells.push((ElementKind::Quad, vec![v[0], m[0], c, m[3]], p));
                cells.push((ElementKind::Quad, vec![m[0], v[1], m[1], c], p));
                cells.push((ElementKind::Quad, vec![c, m[1], v[2], m[2]], p));
                cells.push((ElementKind::Quad, vec![m[3], c, m[2], v[3]], p));
            }
        }
    }
    let mut boundary = Vec::new();
    for &[a, b] in &mesh.declared_boundary {
        match mesh.edge_id(a, b) {
            Some(e) => {
                boundary.push([a, mid[e]]);
                boundary.push([mid[e], b]);
            }
            None => boundary.push([a, b]),
        }
    }
    Mesh::new(vertices, cells, boundary).expect("children of a valid mesh are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{criss_cross, reference_rectangle, reference_triangle};

    #[test]
    fn child_counts() {
        let t = refine_uniform(&reference_triangle(2));
        assert_eq!((t.num_elements(), t.num_vertices()), (4, 6));
        let t2 = refine_uniform(&t);
        assert_eq!(t2.num_elements(), 16);
        let q = refine_uniform(&reference_rectangle(2));
        assert_eq!((q.num_elements(), q.num_vertices()), (4, 9));
        assert!(q.elements.iter().all(|e| e.degree == 2));
    }

    #[test]
    fn h_halves_on_affine_meshes() {
        let m = criss_cross(2, 1);
        let r = refine_uniform(&m);
        assert!((r.h_max() - m.h_max() / 2.0).abs() < 1e-14);
        assert!((r.area() - m.area()).abs() < 1e-12);
    }
}
