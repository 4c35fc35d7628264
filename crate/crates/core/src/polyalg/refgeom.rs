//! Reference geometry: the equilateral triangle, the rectangle, the
//! Duffy collapse between them and the right-angled tetrahedron above
//! the triangle.

use super::linear::LinearForm;

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Lower and upper `y` bounds of the reference rectangle.
pub const RECT_Y_LO: f64 = -1.0 / SQRT3;
pub const RECT_Y_HI: f64 = 2.0 / SQRT3;

/// Vertices v̂₁, v̂₂, v̂₃ of the reference triangle (clockwise as listed).
pub const TRI_VERTS: [[f64; 2]; 3] = [[0.0, 2.0 / SQRT3], [1.0, -1.0 / SQRT3], [-1.0, -1.0 / SQRT3]];

/// Corners of the reference rectangle, counterclockwise from lower left.
pub const RECT_CORNERS: [[f64; 2]; 4] = [[-1.0, RECT_Y_LO], [1.0, RECT_Y_LO], [1.0, RECT_Y_HI], [-1.0, RECT_Y_HI]];

/// Apex height that makes the three lateral edges mutually orthogonal.
pub fn apex_height() -> f64 {
    (2.0f64 / 3.0).sqrt()
}

/// Reference domains with closed-form integration and quadrature rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum RefDomain {
    Triangle,
    Rectangle,
    Tetrahedron,
    Prism,
}

impl RefDomain {
    pub fn dim(self) -> usize {
        match self {
            RefDomain::Triangle | RefDomain::Rectangle => 2,
            RefDomain::Tetrahedron | RefDomain::Prism => 3,
        }
    }

    pub fn measure(self) -> f64 {
        match self {
            RefDomain::Triangle => SQRT3,
            RefDomain::Rectangle => 2.0 * SQRT3,
            RefDomain::Tetrahedron => SQRT3 * apex_height() / 3.0,
            RefDomain::Prism => SQRT3,
        }
    }
}

/// Duffy map from the rectangle onto the triangle; the upper edge collapses to v̂₁.
pub fn duffy(p: [f64; 2]) -> [f64; 2] {
    let [xi, eta] = p;
    [((2.0 / SQRT3 - eta) / SQRT3) * xi, eta]
}

/// Jacobian determinant of [`duffy`].
pub fn duffy_jacobian(eta: f64) -> f64 {
    (2.0 / SQRT3 - eta) / SQRT3
}

/// Inverse of [`duffy`] away from the collapsed vertex.
pub fn duffy_inverse(p: [f64; 2]) -> [f64; 2] {
    let s = duffy_jacobian(p[1]);
    [if s > 0.0 { p[0] / s } else { 0.0 }, p[1]]
}

/// Affine forms `b_i` with `b_i(v_j) = δ_ij` for a triangle with the given vertices.
pub fn barycentric_forms(v: &[[f64; 2]; 3]) -> [LinearForm; 3] {
    let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    let form = |i: usize| {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        // b_i(x) = cross(v_j - x, v_k - x) / det, which is affine in x
        let a0 = (v[j][1] - v[k][1]) / det;
        let a1 = (v[k][0] - v[j][0]) / det;
        let d = (v[j][0] * v[k][1] - v[k][0] * v[j][1]) / det;
        LinearForm { a: vec![a0, a1], d }
    };
    [form(0), form(1), form(2)]
}

/// Barycentric forms of the reference triangle.
pub fn ref_barycentric() -> [LinearForm; 3] {
    barycentric_forms(&TRI_VERTS)
}

/// Euclidean distance from `x` to the segment `[a, b]`.
pub fn dist_to_segment(x: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    let q = [a[0] + t * d[0] - x[0], a[1] + t * d[1] - x[1]];
    (q[0] * q[0] + q[1] * q[1]).sqrt()
}
