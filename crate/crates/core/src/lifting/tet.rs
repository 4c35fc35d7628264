use crate::polyalg::refgeom::{apex_height, TRI_VERTS};
use crate::polyalg::{AffineMap, LinearForm};

pub type P3 = [f64; 3];

pub(crate) fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: P3, b: P3) -> P3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: P3) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(a: P3, s: f64, d: P3) -> P3 {
    [a[0] + s * d[0], a[1] + s * d[1], a[2] + s * d[2]]
}

/// Right-angled reference tetrahedron over the reference triangle.
///
/// Indices are zero-based: vertex 3 is the apex, lateral edge `j` joins
/// vertex `j` to the apex, face `j` is opposite vertex `j`, and base edge
/// `j` is the edge face `j` shares with the base.
#[derive(Clone, Debug, PartialEq)]
pub struct RefTet {
    pub vertices: [P3; 4],
}

impl Default for RefTet {
    fn default() -> Self {
        Self::new()
    }
}

impl RefTet {
    pub fn new() -> Self {
        let v = |i: usize| [TRI_VERTS[i][0], TRI_VERTS[i][1], 0.0];
        Self { vertices: [v(0), v(1), v(2), [0.0, 0.0, apex_height()]] }
    }

    pub fn height(&self) -> f64 {
        self.vertices[3][2]
    }

    pub fn apex(&self) -> P3 {
        self.vertices[3]
    }

    /// Vertex pairs for the six edges: lateral edges 0..3, then base edges.
    pub fn edges(&self) -> [(usize, usize); 6] {
        [(0, 3), (1, 3), (2, 3), (1, 2), (2, 0), (0, 1)]
    }

    /// Vertex triples of the lateral faces.
    pub fn faces(&self) -> [[usize; 3]; 3] {
        [[1, 2, 3], [2, 0, 3], [0, 1, 3]]
    }

    /// Endpoints of base edge `k`.
    pub fn base_edge(&self, k: usize) -> (P3, P3) {
        (self.vertices[(k + 1) % 3], self.vertices[(k + 2) % 3])
    }

    /// Direction of lateral edge `j`, from the base vertex to the apex.
    pub fn lateral_dir(&self, j: usize) -> P3 {
        sub(self.apex(), self.vertices[j])
    }

    /// Lateral edge shared by faces `j ≠ k`.
    pub fn shared_edge(j: usize, k: usize) -> usize {
        3 - j - k
    }

    /// Orthogonal projection onto the line through lateral edge `j`.
    pub fn edge_projection(&self, j: usize) -> AffineMap {
        line_projection(self.vertices[j], self.lateral_dir(j))
    }

    /// Orthogonal projection onto the plane of face `k`.
    pub fn face_projection(&self, k: usize) -> AffineMap {
        let n = self.lateral_dir(k);
        let nn = dot(n, n);
        let a = self.apex();
        let mut m = vec![0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                m[3 * r + c] = f64::from(u8::from(r == c)) - n[r] * n[c] / nn;
            }
        }
        let shift = (0..3).map(|r| a[r] - (0..3).map(|c| m[3 * r + c] * a[c]).sum::<f64>()).collect();
        AffineMap::new(3, 3, m, shift).expect("3x3")
    }

    /// `(s, t) ↦ A + s(B − A) + t(apex − A)` with `AB` the base edge of face `k`.
    pub fn face_param(&self, k: usize) -> AffineMap {
        let (a, b) = self.base_edge(k);
        let c = self.apex();
        let e1 = sub(b, a);
        let e2 = sub(c, a);
        AffineMap::new(3, 2, vec![e1[0], e2[0], e1[1], e2[1], e1[2], e2[2]], a.to_vec()).expect("3x2")
    }

    /// Hyperplane orthogonal to lateral edge `j` through its base vertex,
    /// positive on the tetrahedron.
    pub fn edge_plane(&self, j: usize) -> LinearForm {
        let d = self.lateral_dir(j);
        let n = norm(d);
        LinearForm::through(&self.vertices[j], &[d[0] / n, d[1] / n, d[2] / n]).expect("nonzero normal")
    }

    /// Plane through base edge `k` orthogonal to face `k`, scaled to equal
    /// `z` on that face.
    pub fn face_divisor(&self, k: usize) -> LinearForm {
        let (a, b) = self.base_edge(k);
        let m = cross(self.lateral_dir(k), sub(b, a));
        let raw = LinearForm::through(&a, &m).expect("nonzero normal");
        let s = self.height() / raw.eval(&self.apex());
        raw.scaled(s)
    }

    pub fn contains(&self, x: P3) -> bool {
        let tol = 1e-12;
        (0..3).all(|k| {
            let face = self.faces()[k];
            let n = cross(sub(self.vertices[face[1]], self.vertices[face[0]]), sub(self.vertices[face[2]], self.vertices[face[0]]));
            let s = dot(n, sub(self.vertices[k], self.vertices[face[0]])).signum();
            s * dot(n, sub(x, self.vertices[face[0]])) >= -tol
        }) && x[2] >= -tol
    }
}

pub(crate) fn line_projection(a: P3, d: P3) -> AffineMap {
    let dd = dot(d, d);
    let mut m = vec![0.0; 9];
    for r in 0..3 {
        for c in 0..3 {
            m[3 * r + c] = d[r] * d[c] / dd;
        }
    }
    let shift = (0..3).map(|r| a[r] - (0..3).map(|c| m[3 * r + c] * a[c]).sum::<f64>()).collect();
    AffineMap::new(3, 3, m, shift).expect("3x3")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: P3) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn lateral_edges_are_orthogonal() {
        let t = RefTet::new();
        for j in 0..3 {
            for k in j + 1..3 {
                assert!(dot(t.lateral_dir(j), t.lateral_dir(k)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn edge_projection_collapses_opposite_face() {
        let t = RefTet::new();
        for j in 0..3 {
            let pi = t.edge_projection(j);
            for &v in &t.faces()[j] {
                assert!(close(&pi.apply(&t.vertices[v]), t.apex()));
            }
            assert!(close(&pi.apply(&t.vertices[j]), t.vertices[j]));
        }
    }

    #[test]
    fn face_projection_on_other_face_is_edge_projection() {
        let t = RefTet::new();
        for j in 0..3 {
            for k in 0..3 {
                if j == k {
                    continue;
                }
                let l = RefTet::shared_edge(j, k);
                let (pf, pe) = (t.face_projection(k), t.edge_projection(l));
                for w in [[0.2, 0.3], [0.6, 0.1], [0.05, 0.9]] {
                    let x = t.face_param(j).apply(&w);
                    let (a, b) = (pf.apply(&x), pe.apply(&x));
                    assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12));
                }
            }
        }
    }

    #[test]
    fn face_divisor_equals_height_on_face_and_is_positive() {
        let t = RefTet::new();
        for k in 0..3 {
            let q = t.face_divisor(k);
            for w in [[0.2, 0.3], [0.6, 0.1], [0.0, 1.0]] {
                let x = t.face_param(k).apply(&w);
                assert!((q.eval(&x) - x[2]).abs() < 1e-12);
            }
            assert!((q.eval(&t.vertices[k]) - t.height()).abs() < 1e-12);
        }
    }
}
