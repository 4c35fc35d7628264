use super::{ElementKind, Mesh};
use crate::polyalg::refgeom::{RECT_CORNERS, TRI_VERTS};

/// The reference triangle as a one-element mesh.
pub fn reference_triangle(p: u32) -> Mesh {
    let [v1, v2, v3] = TRI_VERTS;
    Mesh::new(vec![v1, v3, v2], vec![(ElementKind::Tri, vec![0, 1, 2], p)], vec![]).expect("reference triangle")
}

/// The reference rectangle as a one-element mesh.
pub fn reference_rectangle(p: u32) -> Mesh {
    Mesh::new(RECT_CORNERS.to_vec(), vec![(ElementKind::Quad, vec![0, 1, 2, 3], p)], vec![]).expect("reference rectangle")
}

/// `n × n` grid of axis-aligned quads over `[x0, x1] × [y0, y1]`.
pub fn quad_grid(n: usize, p: u32, bbox: [f64; 4]) -> Mesh {
    let [x0, y0, x1, y1] = bbox;
    let mut verts = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            verts.push([x0 + (x1 - x0) * i as f64 / n as f64, y0 + (y1 - y0) * j as f64 / n as f64]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push((ElementKind::Quad, vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)], p));
        }
    }
    Mesh::new(verts, cells, vec![]).expect("grid")
}

/// Unit square split into `n × n` cells, each cut into four triangles by both diagonals.
pub fn criss_cross(n: usize, p: u32) -> Mesh {
    let h = 1.0 / n as f64;
    let mut verts = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            verts.push([i as f64 * h, j as f64 * h]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(4 * n * n);
    for j in 0..n {
        for i in 0..n {
            verts.push([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
            let c = verts.len() - 1;
            let (a, b, cc, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            cells.push((ElementKind::Tri, vec![a, b, c], p));
            cells.push((ElementKind::Tri, vec![b, cc, c], p));
            cells.push((ElementKind::Tri, vec![cc, d, c], p));
            cells.push((ElementKind::Tri, vec![d, a, c], p));
        }
    }
    Mesh::new(verts, cells, vec![]).expect("criss-cross")
}

/// Strip `[0, 2n] × [0, 1]` of unit squares alternating between a quad
/// (degree `p_quad`) and a pair of triangles (degree `p_tri`).
pub fn mixed_strip(n: usize, p_quad: u32, p_tri: u32) -> Mesh {
    let cols = 2 * n;
    let mut verts = Vec::new();
    for i in 0..=cols {
        verts.push([i as f64, 0.0]);
        verts.push([i as f64, 1.0]);
    }
    let lo = |i: usize| 2 * i;
    let hi = |i: usize| 2 * i + 1;
    let mut cells = Vec::new();
    for i in 0..cols {
        if i % 2 == 0 {
            cells.push((ElementKind::Quad, vec![lo(i), lo(i + 1), hi(i + 1), hi(i)], p_quad));
        } else {
            cells.push((ElementKind::Tri, vec![lo(i), lo(i + 1), hi(i + 1)], p_tri));
            cells.push((ElementKind::Tri, vec![lo(i), hi(i + 1), hi(i)], p_tri));
        }
    }
    Mesh::new(verts, cells, vec![]).expect("strip")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_sizes() {
        let g = quad_grid(3, 2, [0.0, 0.0, 1.0, 1.0]);
        assert_eq!((g.num_elements(), g.num_vertices()), (9, 16));
        let c = criss_cross(2, 1);
        assert_eq!((c.num_elements(), c.num_vertices()), (16, 13));
        let s = mixed_strip(2, 2, 4);
        assert_eq!(s.num_elements(), 6);
        assert!(crate::mesh::check_degree_compat(&s));
        assert!(!crate::mesh::check_degree_compat(&mixed_strip(1, 2, 3)));
    }
}
