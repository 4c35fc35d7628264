use super::NormError;
use crate::polyalg::refgeom::{dist_to_segment, TRI_VERTS};
use crate::polyalg::{gauss_jacobi_unit, gauss_legendre_on, MultiPoly};

/// Entities of the reference triangle: edge `j` is the one opposite vertex `j`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DistanceSet {
    pub edges: Vec<usize>,
    pub vertices: Vec<usize>,
}

impl DistanceSet {
    pub fn edges(edges: &[usize]) -> Self {
        Self { edges: edges.to_vec(), vertices: vec![] }
    }

    fn edge_ends(j: usize) -> ([f64; 2], [f64; 2]) {
        (TRI_VERTS[(j + 1) % 3], TRI_VERTS[(j + 2) % 3])
    }

    pub fn distance(&self, x: [f64; 2]) -> f64 {
        let e = self.edges.iter().map(|&j| {
            let (a, b) = Self::edge_ends(j);
            dist_to_segment(x, a, b)
        });
        let v = self.vertices.iter().map(|&i| {
            let d = [x[0] - TRI_VERTS[i][0], x[1] - TRI_VERTS[i][1]];
            (d[0] * d[0] + d[1] * d[1]).sqrt()
        });
        e.chain(v).fold(f64::INFINITY, f64::min)
    }

    /// Whether vertex `i` lies in the closure of the set.
    fn touches(&self, i: usize) -> bool {
        self.vertices.contains(&i) || self.edges.iter().any(|&j| j != i)
    }
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
}

/// `∫_{XYZ} f d^{−2θ}` with the distance vanishing like `|x − X|` at `X` only.
fn vertex_graded(f: &dyn Fn([f64; 2]) -> f64, set: &DistanceSet, tri: [[f64; 2]; 3], theta: f64, n: usize) -> f64 {
    let [x, y, z] = tri;
    let (rs, wr) = gauss_jacobi_unit(n, 0.0, 1.0 - 2.0 * theta);
    let (ss, ws) = gauss_legendre_on(n, 0.0, 1.0);
    let a2 = 2.0 * area(x, y, z);
    let mut sum = 0.0;
    for (r, a) in rs.iter().zip(&wr) {
        for (s, b) in ss.iter().zip(&ws) {
            let p = lerp(x, lerp(y, z, *s), *r);
            let d = set.distance(p) / r;
            sum += a * b * a2 * f(p) * d.powf(-2.0 * theta);
        }
    }
    sum
}

/// Collapsed Gauss rule for a smooth integrand.
fn regular(g: &dyn Fn([f64; 2]) -> f64, tri: [[f64; 2]; 3], n: usize) -> f64 {
    let [x, y, z] = tri;
    let (rs, wr) = gauss_jacobi_unit(n, 0.0, 1.0);
    let (ss, ws) = gauss_legendre_on(n, 0.0, 1.0);
    let a2 = 2.0 * area(x, y, z);
    let mut sum = 0.0;
    for (r, a) in rs.iter().zip(&wr) {
        for (s, b) in ss.iter().zip(&ws) {
            sum += a * b * a2 * g(lerp(x, lerp(y, z, *s), *r));
        }
    }
    sum
}

/// `∫ f d^{−2θ}` over the sub-triangle `(c, A, B)` whose side `AB` is an edge
/// of the set; `vanishes` if `f` has a double zero on that edge.
fn edge_graded(f: &dyn Fn([f64; 2]) -> f64, set: &DistanceSet, tri: [[f64; 2]; 3], theta: f64, n: usize, vanishes: bool) -> f64 {
    let [c, a, b] = tri;
    let alpha = if vanishes { 2.0 - 2.0 * theta } else { -2.0 * theta };
    let (ws_, ww) = gauss_jacobi_unit(n, alpha, 1.0);
    let (ss, wsw) = gauss_legendre_on(n, 0.0, 1.0);
    let a2 = 2.0 * area(c, a, b);
    let dc = dist_to_segment(c, a, b);
    let mut sum = 0.0;
    for (w, p) in ws_.iter().zip(&ww) {
        let one_minus = 1.0 - w;
        for (s, q) in ss.iter().zip(&wsw) {
            let x = lerp(c, lerp(a, b, *s), *w);
            let rel = set.distance(x) / (one_minus * dc);
            let mut v = f(x) * (dc * rel).powf(-2.0 * theta);
            if vanishes {
                v /= one_minus * one_minus;
            }
            sum += p * q * a2 * v;
        }
    }
    sum
}

fn level(u: &MultiPoly, set: &DistanceSet, theta: f64, n: usize) -> Result<f64, NormError> {
    let f = |x: [f64; 2]| u.eval(&x).powi(2);
    let c = [0.0, 0.0];
    let scale = (0..=16)
        .flat_map(|i| (0..=16 - i).map(move |j| (i, j)))
        .map(|(i, j)| {
            let (l1, l2) = (i as f64 / 16.0, j as f64 / 16.0);
            let p = [
                l1 * TRI_VERTS[0][0] + l2 * TRI_VERTS[1][0] + (1.0 - l1 - l2) * TRI_VERTS[2][0],
                l1 * TRI_VERTS[0][1] + l2 * TRI_VERTS[1][1] + (1.0 - l1 - l2) * TRI_VERTS[2][1],
            ];
            u.eval(&p).abs()
        })
        .fold(0.0, f64::max);
    let mut total = 0.0;
    for i in 0..3 {
        let (a, b) = DistanceSet::edge_ends(i);
        if set.edges.contains(&i) {
            let vanishes = (0..=20).all(|k| u.eval(&lerp(a, b, k as f64 / 20.0)).abs() <= 1e-10 * scale.max(1e-300));
            if !vanishes && 2.0 * theta >= 1.0 {
                return Err(NormError::InvalidParameter("weight not integrable against a function nonzero on the edge"));
            }
            total += edge_graded(&f, set, [c, a, b], theta, n, vanishes);
            continue;
        }
        let (sa, sb) = (set.touches((i + 1) % 3), set.touches((i + 2) % 3));
        let m = lerp(a, b, 0.5);
        total += match (sa, sb) {
            (false, false) => regular(&|x| f(x) * set.distance(x).powf(-2.0 * theta), [c, a, b], n),
            (true, false) => vertex_graded(&f, set, [a, b, c], theta, n),
            (false, true) => vertex_graded(&f, set, [b, a, c], theta, n),
            (true, true) => vertex_graded(&f, set, [a, m, c], theta, n) + vertex_graded(&f, set, [b, m, c], theta, n),
        };
    }
    Ok(total)
}

/// `‖d_Ê^{−θ} u‖_{L²(T̂)}` for a polynomial `u` on the reference triangle,
/// with quadrature graded toward `Ê`; two levels must agree to 1%.
pub fn weighted_distance_norm(u: &MultiPoly, set: &DistanceSet, theta: f64, order: usize) -> Result<f64, NormError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(NormError::ThetaOutOfRange(theta));
    }
    if set.edges.is_empty() && set.vertices.is_empty() {
        return Err(NormError::InvalidParameter("empty entity set"));
    }
    if set.edges.iter().chain(&set.vertices).any(|&i| i > 2) {
        return Err(NormError::InvalidParameter("entity index out of range"));
    }
    let n = order.max(4);
    let coarse = level(u, set, theta, n)?;
    let fine = level(u, set, theta, 2 * n)?;
    let rel = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if fine > 0.0 && rel > 1e-2 {
        return Err(NormError::NotConverged { relative: rel });
    }
    Ok(fine.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::refgeom::ref_barycentric;

    #[test]
    fn zero_function() {
        let u = MultiPoly::zero(2);
        assert_eq!(weighted_distance_norm(&u, &DistanceSet::edges(&[0]), 0.4, 8).unwrap(), 0.0);
    }

    #[test]
    fn constant_against_one_edge_matches_closed_form() {
        // bottom edge, height H = √3, width 2(1 − s/H) at height s
        let theta = 0.3;
        let v = weighted_distance_norm(&MultiPoly::one(2), &DistanceSet::edges(&[0]), theta, 10).unwrap();
        let hgt = 3f64.sqrt();
        let exact = 2.0 * hgt.powf(1.0 - 2.0 * theta) / ((1.0 - 2.0 * theta) * (2.0 - 2.0 * theta));
        assert!((v * v - exact).abs() < 1e-8 * exact, "{} {}", v * v, exact);
    }

    #[test]
    fn monotone_in_theta_and_bubble_finite() {
        let u = MultiPoly::one(2);
        let set = DistanceSet::edges(&[1]);
        let a = weighted_distance_norm(&u, &set, 0.2, 8).unwrap();
        let b = weighted_distance_norm(&u, &set, 0.4, 8).unwrap();
        assert!(b > a);
        let l = ref_barycentric();
        let bubble = &(&l[0].to_poly() * &l[1].to_poly()) * &l[2].to_poly();
        let all = DistanceSet::edges(&[0, 1, 2]);
        let v = weighted_distance_norm(&bubble, &all, 0.75, 8).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }
}
