use super::poly::MultiPoly;
use super::quad::gauss_legendre_on;
use super::refgeom::{apex_height, RefDomain, RECT_Y_HI, RECT_Y_LO, SQRT3};
use super::PolyError;

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * f64::from(k))
}

/// `∫_T̂ x^a y^b`. The triangle is symmetric in `x` with half-width
/// `w(y) = (2/√3 − y)/√3`; the remaining `y` integral is done by a Gauss
/// rule of sufficient exactness.
pub fn triangle_moment(a: u32, b: u32) -> f64 {
    if a % 2 == 1 {
        return 0.0;
    }
    let n = ((a + b + 1) / 2 + 1) as usize;
    let (ys, ws) = gauss_legendre_on(n, RECT_Y_LO, RECT_Y_HI);
    ys.iter()
        .zip(&ws)
        .map(|(&y, &w)| {
            let half = (2.0 / SQRT3 - y) / SQRT3;
            w * y.powi(b as i32) * 2.0 * half.powi(a as i32 + 1) / f64::from(a + 1)
        })
        .sum()
}

/// `∫ x^a y^b z^c` over the tetrahedron; horizontal slices are copies of
/// T̂ shrunk by `1 − z/h` towards the axis.
pub fn tetrahedron_moment(a: u32, b: u32, c: u32) -> f64 {
    let h = apex_height();
    let m = a + b + 2;
    triangle_moment(a, b) * h.powi(c as i32 + 1) * factorial(c) * factorial(m) / factorial(c + m + 1)
}

fn power_integral(k: u32, a: f64, b: f64) -> f64 {
    let k1 = k as i32 + 1;
    (b.powi(k1) - a.powi(k1)) / f64::from(k1)
}

/// Exact integral of `p` over a reference domain via monomial moments.
pub fn integrate_ref(p: &MultiPoly, domain: RefDomain) -> Result<f64, PolyError> {
    if p.nvars() != domain.dim() {
        return Err(PolyError::DimensionMismatch { expected: domain.dim(), found: p.nvars() });
    }
    let e = |k: u16| u32::from(k);
    Ok(match domain {
        RefDomain::Triangle => p.terms().map(|(x, c)| c * triangle_moment(e(x[0]), e(x[1]))).sum(),
        RefDomain::Tetrahedron => p.terms().map(|(x, c)| c * tetrahedron_moment(e(x[0]), e(x[1]), e(x[2]))).sum(),
        RefDomain::Rectangle => p
            .terms()
            .map(|(x, c)| c * power_integral(e(x[0]), -1.0, 1.0) * power_integral(e(x[1]), RECT_Y_LO, RECT_Y_HI))
            .sum(),
        RefDomain::Prism => p.terms().map(|(x, c)| c * triangle_moment(e(x[0]), e(x[1])) / (f64::from(x[2]) + 1.0)).sum(),
    })
}
