use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::ops::{lift_a, lift_a_bc, lift_prism, restrict_to_base};
use super::tet::{axpy, cross, dot, norm, sub, RefTet, P3};
use super::{EdgeSet, LiftError};
use crate::fracnorm::{slobodeckij_poly, weighted_distance_norm, SlobodeckijOptions};
use crate::mesh::{ref_vertex, ElementKind, ElementMap};
use crate::polyalg::refgeom::{ref_barycentric, TRI_VERTS};
use crate::polyalg::{
    gauss_jacobi_unit, gauss_legendre_on, integrate_ref, make_quadrature, mollifier_moments, MomentTable, MultiPoly,
    PolyEval, RefDomain,
};

/// Property whose constant is measured over random inputs.
#[derive(Clone, Debug, PartialEq)]
pub enum Property {
    /// `‖trace − u‖ / ‖u‖` at the coefficient level for `𝒜`.
    Trace,
    /// `‖z^γ 𝒜u‖_{L²(tet)} / ‖u‖_{L²(T̂)}`.
    LiftL2 { gamma: f64 },
    /// `‖z^γ 𝒜_Ê u‖_{L²(tet)} / ‖u‖_{L²(T̂)}`.
    BcL2 { gamma: f64, edges: EdgeSet },
    /// `‖z^{1/2−s} ∇𝒜_Ê u‖_{L²(tet)} / (|u|_{H^s} + ‖d_Ê^{−s} u‖)`.
    BcGradient { s: f64, edges: EdgeSet },
    /// `‖z^{1/2−θ} ∇𝒜^P u‖_{L²(prism)} / (|u|_{H^θ} + ‖d_Ê^{−θ} u‖)`.
    PrismGradient { theta: f64, edges: EdgeSet },
    /// Sampled `sup_{z > ε} |𝒜u| / ‖u‖_{L²}`.
    InteriorSup { eps: f64 },
    /// Sampled `sup |𝒜_Ê u(·, z)|` over the shrunk vertex neighbourhoods of
    /// radius `eps`, against `‖u‖_{L²} + sup_{T̂_δ} |u|`.
    VertexSup { eps: f64, delta: f64, edges: EdgeSet },
}

impl Property {
    pub fn name(&self) -> String {
        match self {
            Property::Trace => "trace".into(),
            Property::LiftL2 { gamma } => format!("lift_l2(gamma={gamma})"),
            Property::BcL2 { gamma, edges } => format!("bc_l2(gamma={gamma},E={})", edges.label()),
            Property::BcGradient { s, edges } => format!("bc_gradient(s={s},E={})", edges.label()),
            Property::PrismGradient { theta, edges } => format!("prism_gradient(theta={theta},E={})", edges.label()),
            Property::InteriorSup { eps } => format!("interior_sup(eps={eps})"),
            Property::VertexSup { eps, delta, edges } => format!("vertex_sup(eps={eps},delta={delta},E={})", edges.label()),
        }
    }

    fn edges(&self) -> EdgeSet {
        match self {
            Property::BcL2 { edges, .. }
            | Property::BcGradient { edges, .. }
            | Property::PrismGradient { edges, .. }
            | Property::VertexSup { edges, .. } => edges.clone(),
            _ => EdgeSet::empty(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSpec {
    pub degrees: Vec<u32>,
    pub samples: usize,
    pub seed: u64,
    /// Exponent of the bubble-power mollifier.
    pub mollifier: u32,
    /// Sample count for sampled suprema.
    pub sup_points: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self { degrees: (1..=6).collect(), samples: 4, seed: 1, mollifier: 2, sup_points: 2000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub degree: u32,
    pub samples: usize,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub property: String,
    pub rows: Vec<RatioRow>,
    /// Least-squares slope of `log max` against `log p`.
    pub slope: f64,
}

impl RatioReport {
    pub fn max(&self) -> f64 {
        self.rows.iter().map(|r| r.max).fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.rows.iter().map(|r| r.min).fold(f64::INFINITY, f64::min)
    }
}

/// `Π_{k∈Ê} λ_k · q` with `q` of degree `p − #Ê` and uniform coefficients in `[−1, 1]`.
pub fn random_admissible(rng: &mut impl Rng, p: u32, edges: &EdgeSet) -> MultiPoly {
    let b = ref_barycentric();
    let mut u = MultiPoly::one(2);
    for k in edges.iter() {
        u = &u * &b[k].to_poly();
    }
    let q_deg = p.saturating_sub(edges.len() as u32) as u16;
    let mut q = MultiPoly::zero(2);
    for a in 0..=q_deg {
        for c in 0..=q_deg - a {
            q.add_term([a, c, 0], rng.gen_range(-1.0..1.0));
        }
    }
    &u * &q
}

fn identity_map() -> ElementMap {
    ElementMap::new(ElementKind::Tri, (0..3).map(|i| ref_vertex(ElementKind::Tri, i)).collect())
}

fn l2_tri(u: &MultiPoly) -> f64 {
    integrate_ref(&(u * u), RefDomain::Triangle).expect("planar").max(0.0).sqrt()
}

/// `∫_tet z^w f` for `f` polynomial of degree `deg`.
fn tet_integral(f: impl Fn(&[f64; 3]) -> f64, w: f64, deg: u32) -> f64 {
    let h = RefTet::new().height();
    let tri = make_quadrature(RefDomain::Triangle, deg + 2);
    let (ss, ws) = gauss_jacobi_unit(deg as usize / 2 + 3, 2.0, w);
    let mut sum = 0.0;
    for (s, a) in ss.iter().zip(&ws) {
        let shrink = 1.0 - s;
        let z = h * s;
        sum += a * h * h.powf(w) * tri.integrate(|p| f(&[shrink * p[0], shrink * p[1], z]));
    }
    sum
}

/// `∫_{T̂×(0,1)} z^w f`.
fn prism_integral(f: impl Fn(&[f64; 3]) -> f64, w: f64, deg: u32) -> f64 {
    let tri = make_quadrature(RefDomain::Triangle, deg + 2);
    let (ss, ws) = gauss_jacobi_unit(deg as usize / 2 + 3, 0.0, w);
    ss.iter().zip(&ws).map(|(s, a)| a * tri.integrate(|p| f(&[p[0], p[1], *s]))).sum()
}

fn grad_sq(p: &MultiPoly) -> impl Fn(&[f64; 3]) -> f64 {
    let g: Vec<PolyEval> = p.gradient().iter().map(PolyEval::new).collect();
    move |x| g.iter().map(|d| d.eval(x).powi(2)).sum()
}

fn fractional_rhs(u: &MultiPoly, theta: f64, edges: &EdgeSet) -> Result<f64, LiftError> {
    let semi = slobodeckij_poly(u, &identity_map(), theta, SlobodeckijOptions::default())?.value;
    let dist = if edges.is_empty() {
        0.0
    } else {
        weighted_distance_norm(u, &edges.to_distance_set(), theta, u.degree() as usize + 6)?
    };
    Ok(semi + dist)
}

fn tet_samples(n: usize, seed: u64, min_z: f64) -> Vec<P3> {
    let tet = RefTet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = [rng.gen_range(-1.0..1.0), rng.gen_range(TRI_VERTS[1][1]..TRI_VERTS[0][1]), rng.gen_range(min_z..tet.height())];
        if tet.contains(x) {
            out.push(x);
        }
    }
    out
}

/// Points of `T̂` within `r` of v̂₁.
fn vertex_neighbourhood(n: usize, r: f64, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let v = TRI_VERTS[0];
    let inside = |p: [f64; 2]| ref_barycentric().iter().all(|l| l.eval(&p) >= 0.0);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = [v[0] + rng.gen_range(-r..r), v[1] + rng.gen_range(-r..r)];
        if (p[0] - v[0]).hypot(p[1] - v[1]) < r && inside(p) {
            out.push(p);
        }
    }
    out
}

fn sampled_sup(p: &MultiPoly, pts: &[P3]) -> f64 {
    let e = PolyEval::new(p);
    pts.iter().map(|x| e.eval(x).abs()).fold(0.0, f64::max)
}

fn one_ratio(prop: &Property, u: &MultiPoly, m: &MomentTable, spec: &SampleSpec) -> Result<f64, LiftError> {
    let p = u.degree();
    let two = 2 * p + 2;
    Ok(match prop {
        Property::Trace => {
            let a = lift_a(u, m)?.poly;
            restrict_to_base(&a)?.distance(u) / u.max_coeff()
        }
        Property::LiftL2 { gamma } => {
            let a = PolyEval::new(&lift_a(u, m)?.poly);
            tet_integral(|x| a.eval(x).powi(2), 2.0 * gamma, two).sqrt() / l2_tri(u)
        }
        Property::BcL2 { gamma, edges } => {
            let a = PolyEval::new(&lift_a_bc(u, edges, m)?.poly);
            tet_integral(|x| a.eval(x).powi(2), 2.0 * gamma, two).sqrt() / l2_tri(u)
        }
        Property::BcGradient { s, edges } => {
            let a = lift_a_bc(u, edges, m)?.poly;
            tet_integral(grad_sq(&a), 1.0 - 2.0 * s, two).sqrt() / fractional_rhs(u, *s, edges)?
        }
        Property::PrismGradient { theta, edges } => {
            let a = lift_prism(u, edges, m)?.poly;
            prism_integral(grad_sq(&a), 1.0 - 2.0 * theta, 2 * p + 4).sqrt() / fractional_rhs(u, *theta, edges)?
        }
        Property::InteriorSup { eps } => {
            let a = lift_a(u, m)?.poly;
            sampled_sup(&a, &tet_samples(spec.sup_points, spec.seed ^ 0x5eed, *eps)) / l2_tri(u)
        }
        Property::VertexSup { eps, delta, edges } => {
            let a = lift_a_bc(u, edges, m)?.poly;
            let h = RefTet::new().height();
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0xd317a);
            let base = vertex_neighbourhood(spec.sup_points, *eps, &mut rng);
            let pts: Vec<P3> = base
                .iter()
                .map(|q| {
                    let z = rng.gen_range(0.0..h);
                    let s = 1.0 - z / h;
                    [s * q[0], s * q[1], z]
                })
                .collect();
            let near = vertex_neighbourhood(spec.sup_points, *delta, &mut rng);
            let usup = near.iter().map(|q| u.eval(q).abs()).fold(0.0, f64::max);
            sampled_sup(&a, &pts) / (l2_tri(u) + usup)
        }
    })
}

fn fit_slope(rows: &[RatioRow]) -> f64 {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.max > 0.0 && r.degree > 0).map(|r| (f64::from(r.degree).ln(), r.max.ln())).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Measures the ratio of a property over random admissible inputs, one row
/// per degree; degrees below the number of constrained edges are skipped.
pub fn verify_weighted_bounds(prop: &Property, spec: &SampleSpec) -> Result<RatioReport, LiftError> {
    match prop {
        Property::BcGradient { s: t, .. } | Property::PrismGradient { theta: t, .. } if !(*t > 0.0 && *t < 1.0) => {
            return Err(LiftError::InvalidParameter("fractional index must lie in (0, 1)"));
        }
        Property::LiftL2 { gamma } | Property::BcL2 { gamma, .. } if *gamma <= -0.5 => {
            return Err(LiftError::InvalidParameter("weight exponent must exceed -1/2"));
        }
        _ => {}
    }
    let edges = prop.edges();
    let pmax = spec.degrees.iter().copied().max().unwrap_or(1);
    let m = mollifier_moments(spec.mollifier, pmax)?;
    let degrees: Vec<u32> = spec.degrees.iter().copied().filter(|&p| p as usize >= edges.len().max(1)).collect();
    let rows: Result<Vec<RatioRow>, LiftError> = degrees
        .par_iter()
        .map(|&p| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_mul(1_000_003).wrapping_add(u64::from(p)));
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for _ in 0..spec.samples {
                let u = random_admissible(&mut rng, p, &edges);
                let r = one_ratio(prop, &u, &m, spec)?;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            Ok(RatioRow { degree: p, samples: spec.samples, min: lo, max: hi })
        })
        .collect();
    let rows = rows?;
    let slope = fit_slope(&rows);
    Ok(RatioReport { property: prop.name(), rows, slope })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrtRow {
    pub identity: &'static str,
    pub function: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrtReport {
    pub alpha: f64,
    pub beta: f64,
    pub rows: Vec<OrtRow>,
    /// Every edge and face ratio lies in `[1/20, 20]`.
    pub band_ok: bool,
    /// Largest relative gap between the two quadrature levels of the
    /// constant-ratio identity.
    pub level_gap: f64,
    /// Relative error of the rotated-frame scalar identity.
    pub rotated_residual: f64,
}

struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

fn gj(n: usize, a: f64, b: f64) -> Rule {
    let (x, w) = gauss_jacobi_unit(n, a, b);
    Rule { x, w }
}

fn gl(n: usize) -> Rule {
    let (x, w) = gauss_legendre_on(n, 0.0, 1.0);
    Rule { x, w }
}

fn dist_to_line(x: P3, a: P3, d: P3) -> f64 {
    norm(cross(sub(x, a), d)) / norm(d)
}

fn eval_univariate(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * s + k)
}

/// Edge-trace equivalence along lateral edge `j`, face `k`.
fn edge_identity(v: &[f64], alpha: f64, beta: f64, n: usize) -> (f64, f64) {
    let t = RefTet::new();
    let (j, k) = (0usize, 1usize);
    let vj = t.vertices[j];
    let apex = t.apex();
    let e = t.lateral_dir(j);
    let len2 = dot(e, e);
    let f = |x: P3| eval_univariate(v, dot(sub(x, vj), e) / len2).powi(2);

    // tetrahedron, rays from v_j to the opposite face
    let (k1, l1) = ((j + 1) % 3, (j + 2) % 3);
    let (e1, e2) = (sub(t.vertices[l1], t.vertices[k1]), sub(apex, t.vertices[k1]));
    let det = dot(sub(t.vertices[k1], vj), cross(e1, e2)).abs();
    let (rr, rb, rt) = (gj(n, 0.0, 2.0 * alpha + 2.0 * beta + 2.0), gj(n, 1.0, 2.0 * beta), gl(n));
    let h = t.height();
    let mut tet = 0.0;
    for (r, wr) in rr.x.iter().zip(&rr.w) {
        for (b, wb) in rb.x.iter().zip(&rb.w) {
            for (tau, wt) in rt.x.iter().zip(&rt.w) {
                let w = axpy(axpy(t.vertices[k1], (1.0 - b) * tau, e1), *b, e2);
                let x = axpy(vj, *r, sub(w, vj));
                tet += wr * wb * wt * det * norm(sub(w, vj)).powf(2.0 * alpha) * (h).powf(2.0 * beta) * f(x);
            }
        }
    }

    // face k contains v_j; the third vertex is the other base vertex
    let l = 3 - j - k;
    let c = norm(cross(sub(t.vertices[l], vj), sub(apex, t.vertices[l])));
    let (fr, fb) = (gj(n, 0.0, 2.0 * alpha + 2.0 * beta + 2.0), gj(n, 0.0, 1.0 + 2.0 * beta));
    let mut face = 0.0;
    for (r, wr) in fr.x.iter().zip(&fr.w) {
        for (b, wb) in fb.x.iter().zip(&fb.w) {
            let w = axpy(t.vertices[l], *b, sub(apex, t.vertices[l]));
            let x = axpy(vj, *r, sub(w, vj));
            face += wr * wb * c * norm(sub(w, vj)).powf(2.0 * alpha) * h.powf(1.0 + 2.0 * beta) * f(x);
        }
    }

    let len = len2.sqrt();
    let re = gj(n, 0.0, 2.0 + 2.0 * alpha + 2.0 * beta);
    let edge: f64 = re.x.iter().zip(&re.w).map(|(s, w)| w * len.powf(3.0 + 2.0 * alpha + 2.0 * beta) * eval_univariate(v, *s).powi(2)).sum();
    (tet.sqrt() + face.sqrt(), edge.sqrt())
}

/// Face-trace equivalence for face `k` against the base edge it contains.
fn face_identity(v: &MultiPoly, alpha: f64, beta: f64, n: usize) -> (f64, f64) {
    let t = RefTet::new();
    let k = 1usize;
    let (a0, b0) = t.base_edge(k);
    let apex = t.apex();
    let h = t.height();
    let e1 = sub(b0, a0);
    let e2 = sub(apex, t.vertices[k]);
    let proj = t.face_projection(k);
    let f = |x: P3| v.eval(&proj.apply(&x)).powi(2);

    let det = dot(e1, cross(e2, sub(t.vertices[k], a0))).abs();
    let (rr, rb, ra) = (gj(n, 1.0, 2.0 * alpha + 2.0 * beta + 1.0), gj(n, 0.0, 2.0 * beta), gl(n));
    let mut tet = 0.0;
    for (r, wr) in rr.x.iter().zip(&rr.w) {
        for (b, wb) in rb.x.iter().zip(&rb.w) {
            let q = axpy(t.vertices[k], *b, e2);
            let dq = dist_to_line(q, a0, e1);
            for (a, wa) in ra.x.iter().zip(&ra.w) {
                let p = axpy(a0, *a, e1);
                let x = axpy(p, *r, sub(q, p));
                tet += wr * wb * wa * det * dq.powf(2.0 * alpha) * h.powf(2.0 * beta) * f(x);
            }
        }
    }

    let c = norm(cross(e1, sub(apex, a0)));
    let da = dist_to_line(apex, a0, e1);
    let (fr, fa) = (gj(n, 1.0, 1.0 + 2.0 * alpha + 2.0 * beta), gl(n));
    let mut face = 0.0;
    for (r, wr) in fr.x.iter().zip(&fr.w) {
        for (a, wa) in fa.x.iter().zip(&fa.w) {
            let x = axpy(axpy(a0, *a, e1), *r, sub(apex, axpy(a0, *a, e1)));
            face += wr * wa * c * da.powf(1.0 + 2.0 * alpha + 2.0 * beta) * v.eval(&x).powi(2);
        }
    }
    (tet.sqrt(), face.sqrt())
}

/// `‖z^β v∘Π_{ê_k}‖_{L²(f̂_k)}` with `v` given along lateral edge `k`.
fn apex_identity(v: &[f64], beta: f64, n: usize) -> f64 {
    let t = RefTet::new();
    let k = 1usize;
    let (a0, b0) = t.base_edge(k);
    let apex = t.apex();
    let e1 = sub(b0, a0);
    let e = t.lateral_dir(k);
    let vk = t.vertices[k];
    let c = norm(cross(e1, sub(apex, a0)));
    let (fr, fa) = (gj(n, 1.0, 2.0 * beta), gl(n));
    let mut s = 0.0;
    for (r, wr) in fr.x.iter().zip(&fr.w) {
        for (a, wa) in fa.x.iter().zip(&fa.w) {
            let p = axpy(a0, *a, e1);
            let x = axpy(p, *r, sub(apex, p));
            let sv = dot(sub(x, vk), e) / dot(e, e);
            s += wr * wa * c * t.height().powf(2.0 * beta) * eval_univariate(v, sv).powi(2);
        }
    }
    s.sqrt()
}

/// Both sides of the scalar identity in the Cartesian frame: the triple
/// integral over the unit simplex and the closed-form factor times a 1D integral.
fn rotated_identity(v: &[f64], alpha: f64, beta: f64, n: usize) -> (f64, f64) {
    let (rx, rs, rt) = (gj(n, 2.0 * alpha + 2.0 * beta + 2.0, 0.0), gj(n, 2.0 * beta + 1.0, 0.0), gj(n, 2.0 * beta, 0.0));
    // the inner weight integrates to the closed-form factor; no abscissae needed
    let inner = rs.w.iter().sum::<f64>() * rt.w.iter().sum::<f64>();
    let triple: f64 = rx.x.iter().zip(&rx.w).map(|(x, w)| w * eval_univariate(v, *x).powi(2) * inner).sum();
    let r1 = gj(n, 2.0 * alpha + 2.0 * beta + 2.0, 0.0);
    let one: f64 = r1.x.iter().zip(&r1.w).map(|(x, w)| w * eval_univariate(v, *x).powi(2)).sum();
    (triple, one / ((2.0 * beta + 1.0) * (2.0 * beta + 2.0)))
}

fn monomial_label(m: usize) -> String {
    match m {
        0 => "1".into(),
        1 => "t".into(),
        _ => format!("t^{m}"),
    }
}

/// Evaluates the projection norm equivalences for edge monomials `t^m`,
/// `m ∈ monomials`, at two quadrature levels.
pub fn verify_ort_identities(alpha: f64, beta: f64, monomials: &[usize]) -> Result<OrtReport, LiftError> {
    if beta <= -0.5 {
        return Err(LiftError::InvalidParameter("beta must exceed -1/2"));
    }
    if 2.0 * alpha + 2.0 * beta + 1.0 <= -1.0 {
        return Err(LiftError::InvalidParameter("edge weight not integrable"));
    }
    let n = 24;
    let mut rows = Vec::new();
    let mono = |m: usize| {
        let mut c = vec![0.0; m + 1];
        c[m] = 1.0;
        c
    };
    for &m in monomials {
        let v = mono(m);
        let (lhs, rhs) = edge_identity(&v, alpha, beta, n);
        rows.push(OrtRow { identity: "edge", function: monomial_label(m), lhs, rhs, ratio: lhs / rhs });
    }
    let face_fns = [
        ("1", MultiPoly::one(3)),
        ("x", MultiPoly::var(3, 0)),
        ("z", MultiPoly::var(3, 2)),
        ("x*z", MultiPoly::monomial(3, [1, 0, 1], 1.0)),
        ("y^2", MultiPoly::monomial(3, [0, 2, 0], 1.0)),
    ];
    for (name, v) in &face_fns {
        let (lhs, rhs) = face_identity(v, alpha, beta, n);
        rows.push(OrtRow { identity: "face", function: (*name).into(), lhs, rhs, ratio: lhs / rhs });
    }
    let band_ok = rows.iter().all(|r| r.ratio.is_finite() && (0.05..=20.0).contains(&r.ratio));

    let mut level_gap = 0.0f64;
    for &m in monomials {
        let v = mono(m);
        let rhs = eval_univariate(&v, 1.0).abs();
        let (c1, c2) = (apex_identity(&v, beta, n), apex_identity(&v, beta, 2 * n));
        level_gap = level_gap.max((c1 - c2).abs() / c2);
        rows.push(OrtRow { identity: "apex", function: monomial_label(m), lhs: c2, rhs, ratio: c2 / rhs });
    }

    let mut rotated_residual = 0.0f64;
    for &m in monomials {
        let (a, b) = rotated_identity(&mono(m), alpha, beta, n);
        rotated_residual = rotated_residual.max((a - b).abs() / b.abs());
        rows.push(OrtRow { identity: "rotated", function: monomial_label(m), lhs: a, rhs: b, ratio: a / b });
    }
    Ok(OrtReport { alpha, beta, rows, band_ok, level_gap, rotated_residual })
}
