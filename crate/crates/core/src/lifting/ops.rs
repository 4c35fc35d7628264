use super::tet::{sub, RefTet};
use super::{EdgeSet, LiftError, LiftResult};
use crate::polyalg::refgeom::apex_height;
use crate::polyalg::{compose_affine, divide_by_linear, AffineMap, LinearForm, MomentTable, MultiPoly};

const VANISH_TOL: f64 = 1e-10;
const DIVISION_TOL: f64 = 1e-10;

fn binomial(n: u16, k: u16) -> f64 {
    (0..k).fold(1.0, |r, i| r * f64::from(n - i) / f64::from(i + 1))
}

fn check_planar(u: &MultiPoly) -> Result<(), LiftError> {
    if u.nvars() != 2 {
        return Err(LiftError::NotPlanar(u.nvars()));
    }
    Ok(())
}

/// `(𝒜u)(x, z) = ∫ ρ(ξ) u(x + (z/2)ξ) dξ`, expanded exactly through the
/// moments of `ρ`.
pub fn lift_a(u: &MultiPoly, moments: &MomentTable) -> Result<LiftResult, LiftError> {
    check_planar(u)?;
    let mut out = MultiPoly::zero(3);
    for (e, &c) in u.terms() {
        let (m, n) = (e[0], e[1]);
        for a in 0..=m {
            for b in 0..=n {
                let mu = moments.get(u32::from(a), u32::from(b))?;
                if mu == 0.0 {
                    continue;
                }
                let w = c * binomial(m, a) * binomial(n, b) * 0.5f64.powi(i32::from(a + b)) * mu;
                out.add_term([m - a, n - b, a + b], w);
            }
        }
    }
    Ok(LiftResult { poly: out, degree: u.degree(), edges: EdgeSet::empty(), max_division_residual: 0.0 })
}

/// Largest coefficient of `u` restricted to base edge `k`, relative to `u`.
pub fn edge_trace_residual(u: &MultiPoly, k: usize) -> f64 {
    let t = RefTet::new();
    let (a, b) = t.base_edge(k);
    let d = sub(b, a);
    let coeffs = u.along_ray(&a[..2], &d[..2]);
    let scale = u.max_coeff();
    if scale == 0.0 {
        return 0.0;
    }
    coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())) / scale
}

/// Quotient of an exact division; the remainder is measured against `scale`,
/// the size of the polynomial before projection, since the traced operand
/// may itself vanish up to rounding.
fn exact_quotient(p: &MultiPoly, l: &LinearForm, scale: f64, worst: &mut f64) -> Result<MultiPoly, LiftError> {
    let div = divide_by_linear(p, l)?;
    let rel = if scale > 0.0 { div.remainder.max_coeff() / scale } else { 0.0 };
    *worst = worst.max(rel);
    if rel > DIVISION_TOL {
        return Err(LiftError::DivisionResidual(rel));
    }
    Ok(div.quotient)
}

/// Lifting that vanishes on the lateral faces above the edges in `edges`,
/// for `u` vanishing on those edges.
pub fn lift_a_bc(u: &MultiPoly, edges: &EdgeSet, moments: &MomentTable) -> Result<LiftResult, LiftError> {
    check_planar(u)?;
    let base = lift_a(u, moments)?;
    if edges.is_empty() {
        return Ok(base);
    }
    let p = u.degree();
    if (p as usize) < edges.len() && !u.is_zero() {
        return Err(LiftError::DegreeTooLow { degree: p, required: edges.len() });
    }
    for k in edges.iter() {
        let r = edge_trace_residual(u, k);
        if r > VANISH_TOL {
            return Err(LiftError::NotVanishing { edge: k, residual: r });
        }
    }
    let tet = RefTet::new();
    let z = MultiPoly::var(3, 2);
    let mut worst = 0.0f64;

    let top = base.poly.eval(&tet.apex());
    let u1 = &base.poly - &z.scale(top / tet.height());

    // lateral edges of the selected faces
    let lateral: Vec<usize> = (0..3).filter(|&j| edges.iter().any(|k| k != j)).collect();
    let mut u2 = u1.clone();
    for &j in &lateral {
        let pj = tet.edge_plane(j);
        let cj = pj.eval(&tet.apex()) / tet.height();
        let traced = compose_affine(&u1, &tet.edge_projection(j))?;
        let q = exact_quotient(&traced, &pj, u1.max_coeff(), &mut worst)?;
        u2 = &u2 - &(&z * &q).scale(cj);
    }

    let mut out = u2.clone();
    for k in edges.iter() {
        let traced = compose_affine(&u2, &tet.face_projection(k))?;
        let q = exact_quotient(&traced, &tet.face_divisor(k), u2.max_coeff(), &mut worst)?;
        out = &out - &(&z * &q);
    }
    Ok(LiftResult { poly: out, degree: p, edges: edges.clone(), max_division_residual: worst })
}

/// Prism lifting `(1 − z)·(𝒜_Ê u)(x(1 − z), y(1 − z), h z)` on `T̂ × (0, 1)`.
pub fn lift_prism(u: &MultiPoly, edges: &EdgeSet, moments: &MomentTable) -> Result<LiftResult, LiftError> {
    let inner = lift_a_bc(u, edges, moments)?;
    let (x, y, z) = (MultiPoly::var(3, 0), MultiPoly::var(3, 1), MultiPoly::var(3, 2));
    let shrink = &MultiPoly::one(3) - &z;
    let subs = [&x * &shrink, &y * &shrink, z.scale(apex_height())];
    let poly = &shrink * &inner.poly.substitute(&subs)?;
    Ok(LiftResult { poly, ..inner })
}

/// Restriction of a tetrahedron polynomial to face `k` in face coordinates.
pub fn restrict_to_face(p: &MultiPoly, k: usize) -> Result<MultiPoly, LiftError> {
    Ok(compose_affine(p, &RefTet::new().face_param(k))?)
}

/// Restriction to the base `z = 0` as a polynomial in `(x, y)`.
pub fn restrict_to_base(p: &MultiPoly) -> Result<MultiPoly, LiftError> {
    let m = AffineMap::new(3, 2, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0], vec![0.0; 3])?;
    Ok(compose_affine(p, &m)?)
}

/// Restriction of a prism polynomial to the lateral face over base edge `k`,
/// in coordinates `(s, z)`.
pub fn restrict_to_prism_side(p: &MultiPoly, k: usize) -> Result<MultiPoly, LiftError> {
    let (a, b) = RefTet::new().base_edge(k);
    let d = sub(b, a);
    let m = AffineMap::new(3, 2, vec![d[0], 0.0, d[1], 0.0, 0.0, 1.0], vec![a[0], a[1], 0.0])?;
    Ok(compose_affine(p, &m)?)
}

/// Restriction of a prism polynomial to `z = 1`.
pub fn restrict_to_prism_top(p: &MultiPoly) -> Result<MultiPoly, LiftError> {
    let m = AffineMap::new(3, 2, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0])?;
    Ok(compose_affine(p, &m)?)
}

/// Largest total degree in `(x, y)` over all terms.
pub fn planar_degree(p: &MultiPoly) -> u32 {
    p.terms().filter(|(_, c)| **c != 0.0).map(|(e, _)| u32::from(e[0] + e[1])).max().unwrap_or(0)
}
