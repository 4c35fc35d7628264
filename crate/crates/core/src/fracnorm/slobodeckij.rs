use super::kmethod::{NormMethod, NormReport};
use super::NormError;
use crate::hpspace::HpSpace;
use crate::mesh::{ElementKind, ElementMap};
use crate::polyalg::refgeom::{duffy, duffy_jacobian, RECT_Y_HI, RECT_Y_LO};
use crate::polyalg::{compose_affine, gauss_legendre, make_quadrature, AffineMap, MultiPoly, RefDomain};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlobodeckijOptions {
    /// Gauss order of the coarsest level; each level adds `base_order` points per direction.
    pub base_order: usize,
    /// Number of quadrature levels; only the last two are evaluated and compared.
    pub levels: usize,
    /// Accepted relative change between the last two levels.
    pub tolerance: f64,
    /// Add `‖u‖²_{L²}`.
    pub full: bool,
}

impl Default for SlobodeckijOptions {
    fn default() -> Self {
        Self { base_order: 12, levels: 3, tolerance: 1e-3, full: false }
    }
}

/// Dense bivariate polynomial, coefficient of `x^a y^b` at `idx(a, b)`.
#[derive(Clone, Debug)]
struct Biv {
    deg: usize,
    c: Vec<f64>,
}

fn idx(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |r, i| r * (n - i) as f64 / (i + 1) as f64)
}

impl Biv {
    fn from_poly(p: &MultiPoly) -> Self {
        let deg = p.degree() as usize;
        let mut c = vec![0.0; idx(0, deg + 1)];
        for (e, v) in p.terms() {
            c[idx(e[0] as usize, e[1] as usize)] += v;
        }
        Self { deg, c }
    }

    fn eval(&self, x: [f64; 2]) -> f64 {
        let mut s = 0.0;
        for d in 0..=self.deg {
            for b in 0..=d {
                s += self.c[idx(d - b, b)] * x[0].powi((d - b) as i32) * x[1].powi(b as i32);
            }
        }
        s
    }

    /// Coefficients of `ξ ↦ p(x₀ + ξ)`.
    fn shifted(&self, x0: [f64; 2]) -> Self {
        let n = self.deg;
        let mut px = vec![1.0; n + 1];
        let mut py = vec![1.0; n + 1];
        for i in 1..=n {
            px[i] = px[i - 1] * x0[0];
            py[i] = py[i - 1] * x0[1];
        }
        let mut c = vec![0.0; self.c.len()];
        for d in 0..=n {
            for j in 0..=d {
                let i = d - j;
                let v = self.c[idx(i, j)];
                if v == 0.0 {
                    continue;
                }
                for a in 0..=i {
                    let fa = v * binom(i, a) * px[i - a];
                    for b in 0..=j {
                        c[idx(a, b)] += fa * binom(j, b) * py[j - b];
                    }
                }
            }
        }
        Self { deg: n, c }
    }

    /// Coefficients in `r` of `p(rω)` for a shifted polynomial.
    fn along(&self, w: [f64; 2], out: &mut Vec<f64>) {
        let n = self.deg;
        let mut px = [1.0; 32];
        let mut py = [1.0; 32];
        for i in 1..=n {
            px[i] = px[i - 1] * w[0];
            py[i] = py[i - 1] * w[1];
        }
        out.clear();
        for d in 0..=n {
            out.push((0..=d).map(|b| self.c[idx(d - b, b)] * px[d - b] * py[b]).sum());
        }
    }
}

/// One affine element with its restriction in physical coordinates.
struct Piece {
    corners: Vec<[f64; 2]>,
    poly: Biv,
    center: [f64; 2],
    h: f64,
}

fn sigmoid(t: f64) -> (f64, f64) {
    let (a, b) = (t * t * t, (1.0 - t).powi(3));
    let s = a + b;
    (a / s, 3.0 * t * t * (1.0 - t) * (1.0 - t) / (s * s))
}

/// Outer points and weights on an element, graded toward all edges.
fn outer_rule(map: &ElementMap, n: usize) -> Vec<([f64; 2], f64)> {
    let (g, w) = gauss_legendre(n);
    let t: Vec<(f64, f64)> = g.iter().zip(&w).map(|(x, w)| {
        let (s, ds) = sigmoid(0.5 * (x + 1.0));
        (s, 0.5 * w * ds)
    }).collect();
    let det = map.det([0.0, 0.0]).abs();
    let hy = RECT_Y_HI - RECT_Y_LO;
    let mut out = Vec::with_capacity(n * n);
    for &(sx, wx) in &t {
        for &(sy, wy) in &t {
            let r = [2.0 * sx - 1.0, RECT_Y_LO + hy * sy];
            let wr = wx * wy * 2.0 * hy;
            let (q, jw) = match map.kind {
                ElementKind::Quad => (r, 1.0),
                ElementKind::Tri => (duffy(r), duffy_jacobian(r[1])),
            };
            out.push((map.apply(q), wr * jw * det));
        }
    }
    out
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Parameter interval of the ray `x₀ + rω` inside a convex CCW polygon, and the entry edge.
fn clip(x0: [f64; 2], w: [f64; 2], poly: &[[f64; 2]]) -> Option<(f64, f64, Option<usize>)> {
    let (mut lo, mut hi, mut entry) = (0.0f64, f64::INFINITY, None);
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let e = sub(b, a);
        // inside: cross(e, x − a) ≥ 0
        let num = cross(e, sub(x0, a));
        let den = cross(e, w);
        if den.abs() < 1e-300 {
            if num < 0.0 {
                return None;
            }
            continue;
        }
        let r = -num / den;
        if den > 0.0 {
            if r > lo {
                lo = r;
                entry = Some(i);
            }
        } else if r < hi {
            hi = r;
        }
    }
    (hi > lo).then_some((lo, hi, entry))
}

fn radial(b: &[f64], r0: f64, r1: f64, theta: f64) -> f64 {
    let mut s = 0.0;
    for (k, &bk) in b.iter().enumerate() {
        if bk == 0.0 {
            continue;
        }
        let e = k as f64 - 2.0 * theta;
        s += bk
            * if e.abs() < 1e-12 {
                (r1 / r0).ln()
            } else if r0 == 0.0 {
                r1.powf(e) / e
            } else {
                (r1.powf(e) - r0.powf(e)) / e
            };
    }
    s
}

struct Inner<'a> {
    x0: [f64; 2],
    shifted: Biv,
    u0: f64,
    same: bool,
    piece: &'a Piece,
    theta: f64,
    gl: &'a (Vec<f64>, Vec<f64>),
}

impl Inner<'_> {
    fn ray(&self, w: [f64; 2], a: &mut Vec<f64>, b: &mut Vec<f64>) -> f64 {
        let Some((r0, r1, _)) = clip(self.x0, w, &self.piece.corners) else { return 0.0 };
        let r0 = if self.same { 0.0 } else { r0 };
        self.shifted.along(w, a);
        a[0] = if self.same { 0.0 } else { a[0] - self.u0 };
        b.clear();
        b.resize(2 * a.len() - 1, 0.0);
        for (i, ai) in a.iter().enumerate() {
            if *ai == 0.0 {
                continue;
            }
            for (j, aj) in a.iter().enumerate() {
                b[i + j] += ai * aj;
            }
        }
        if self.same {
            b[1] = 0.0;
        }
        radial(b, r0, r1, self.theta)
    }

    /// Angular integral between directions toward `pa` and `pb` on the line
    /// through `ea`, `eb`, graded toward the foot of the perpendicular.
    fn sector(&self, ea: [f64; 2], eb: [f64; 2], wa: [f64; 2], wb: [f64; 2]) -> f64 {
        let tau = {
            let d = sub(eb, ea);
            let l = dot(d, d).sqrt();
            [d[0] / l, d[1] / l]
        };
        let mut nrm = [tau[1], -tau[0]];
        if dot(sub(ea, self.x0), nrm) < 0.0 {
            nrm = [-nrm[0], -nrm[1]];
        }
        // hit points on the line, in units of the distance from the foot
        let graded = |w: [f64; 2]| (dot(w, tau) / dot(w, nrm)).asinh().clamp(-60.0, 60.0);
        let (ua, ub) = (graded(wa), graded(wb));
        let (lo, hi) = if ua < ub { (ua, ub) } else { (ub, ua) };
        let mut cuts = vec![lo];
        if lo < 0.0 && hi > 0.0 {
            cuts.push(0.0);
        }
        cuts.push(hi);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        let mut total = 0.0;
        for c in cuts.windows(2) {
            let len = c[1] - c[0];
            let pieces = (len / 1.5).ceil().max(1.0) as usize;
            let step = len / pieces as f64;
            for m in 0..pieces {
                let s0 = c[0] + m as f64 * step;
                for (x, wq) in self.gl.0.iter().zip(&self.gl.1) {
                    let u = s0 + 0.5 * step * (x + 1.0);
                    let ang = u.sinh().atan();
                    let w = [nrm[0] * ang.cos() + tau[0] * ang.sin(), nrm[1] * ang.cos() + tau[1] * ang.sin()];
                    total += 0.5 * step * wq / u.cosh() * self.ray(w, &mut a, &mut b);
                }
            }
        }
        total
    }

    fn integrate(&self) -> f64 {
        let c = &self.piece.corners;
        let n = c.len();
        if self.same {
            return (0..n).map(|i| {
                let (a, b) = (c[i], c[(i + 1) % n]);
                self.sector(a, b, unit(sub(a, self.x0)), unit(sub(b, self.x0)))
            }).sum();
        }
        // directions to the corners, ordered around the direction to the centre
        let axis = unit(sub(self.piece.center, self.x0));
        let mut angs: Vec<(f64, [f64; 2])> = c
            .iter()
            .map(|&v| {
                let d = unit(sub(v, self.x0));
                (cross(axis, d).atan2(dot(axis, d)), d)
            })
            .collect();
        angs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut total = 0.0;
        for w in angs.windows(2) {
            let mid = unit([w[0].1[0] + w[1].1[0], w[0].1[1] + w[1].1[1]]);
            let Some((_, _, Some(e))) = clip(self.x0, mid, c) else { continue };
            total += self.sector(c[e], c[(e + 1) % n], w[0].1, w[1].1);
        }
        total
    }
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let l = dot(v, v).sqrt();
    [v[0] / l, v[1] / l]
}

struct Level<'a> {
    pieces: &'a [Piece],
    maps: &'a [ElementMap],
    theta: f64,
    n: usize,
    gl: (Vec<f64>, Vec<f64>),
    far_rules: Vec<Vec<([f64; 2], f64)>>,
    hmax: f64,
}

impl<'a> Level<'a> {
    fn new(pieces: &'a [Piece], maps: &'a [ElementMap], theta: f64, n: usize) -> Self {
        let far_rules = maps
            .iter()
            .map(|m| {
                let dom = if m.kind == ElementKind::Tri { RefDomain::Triangle } else { RefDomain::Rectangle };
                let r = make_quadrature(dom, 2 * n as u32 - 1);
                let det = m.det([0.0, 0.0]).abs();
                r.points.iter().zip(&r.weights).map(|(p, w)| (m.apply([p[0], p[1]]), w * det)).collect()
            })
            .collect();
        let hmax = pieces.iter().map(|p| p.h).fold(0.0, f64::max);
        Self { pieces, maps, theta, n, gl: gauss_legendre(n), far_rules, hmax }
    }

    /// `∫_{K₁} ∫_{K₂} |u₁(x) − u₂(y)|² / |x − y|^{2+2θ} dy dx`.
    fn pair(&self, k1: usize, k2: usize) -> f64 {
        let (p1, p2) = (&self.pieces[k1], &self.pieces[k2]);
        let far = dot(sub(p2.center, p1.center), sub(p2.center, p1.center)).sqrt() > 2.0 * self.hmax;
        let outer = outer_rule(&self.maps[k1], self.n);
        let mut acc = 0.0;
        for (x0, wx) in &outer {
            let u0 = p1.poly.eval(*x0);
            let g = if far {
                self.far_rules[k2]
                    .iter()
                    .map(|(y, wy)| {
                        let d = sub(*y, *x0);
                        let diff = u0 - p2.poly.eval(*y);
                        wy * diff * diff / dot(d, d).powf(1.0 + self.theta)
                    })
                    .sum()
            } else {
                Inner { x0: *x0, shifted: p2.poly.shifted(*x0), u0, same: k1 == k2, piece: p2, theta: self.theta, gl: &self.gl }
                    .integrate()
            };
            acc += wx * g;
        }
        acc
    }

    fn total(&self) -> f64 {
        use rayon::prelude::*;
        let n = self.pieces.len();
        let per: Vec<f64> = (0..n).into_par_iter().map(|k1| (0..n).map(|k2| self.pair(k1, k2)).sum()).collect();
        per.iter().sum()
    }
}

fn inverse_affine(map: &ElementMap) -> Result<AffineMap, NormError> {
    let a = map.affine().ok_or(NormError::Unsupported("non-affine element"))?;
    let j = [[a.entry(0, 0), a.entry(0, 1)], [a.entry(1, 0), a.entry(1, 1)]];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let inv = [j[1][1] / det, -j[0][1] / det, -j[1][0] / det, j[0][0] / det];
    let b = a.apply(&[0.0, 0.0]);
    let shift = vec![-(inv[0] * b[0] + inv[1] * b[1]), -(inv[2] * b[0] + inv[3] * b[1])];
    AffineMap::new(2, 2, inv.to_vec(), shift).map_err(|_| NormError::Unsupported("degenerate element"))
}

fn norm_from_pieces(
    polys: Vec<MultiPoly>,
    maps: Vec<ElementMap>,
    theta: f64,
    opts: SlobodeckijOptions,
) -> Result<NormReport, NormError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(NormError::ThetaOutOfRange(theta));
    }
    if opts.levels == 0 || opts.base_order == 0 {
        return Err(NormError::InvalidParameter("at least one quadrature level"));
    }
    let mut pieces = Vec::with_capacity(polys.len());
    let mut l2 = 0.0;
    for (p, m) in polys.iter().zip(&maps) {
        let inv = inverse_affine(m)?;
        let phys = compose_affine(p, &inv).map_err(|_| NormError::Unsupported("polynomial composition"))?;
        if phys.degree() > 31 {
            return Err(NormError::Unsupported("polynomial degree above 31"));
        }
        pieces.push(Piece { corners: m.corners.clone(), poly: Biv::from_poly(&phys), center: m.centroid(), h: m.diameter() });
        let dom = if m.kind == ElementKind::Tri { RefDomain::Triangle } else { RefDomain::Rectangle };
        let rule = make_quadrature(dom, 2 * p.degree() + 2);
        l2 += m.det([0.0, 0.0]).abs() * rule.integrate(|q| p.eval(&[q[0], q[1]]).powi(2));
    }
    let mut values = Vec::new();
    let mut diagnostics = Vec::new();
    for level in opts.levels.saturating_sub(2)..opts.levels {
        let n = opts.base_order * (level + 1);
        let v = Level::new(&pieces, &maps, theta, n).total();
        diagnostics.push((format!("seminorm_sq_{level}"), v));
        diagnostics.push((format!("order_{level}"), n as f64));
        values.push(v);
    }
    let last = *values.last().expect("one level");
    if values.len() >= 2 {
        let prev = values[values.len() - 2];
        let rel = (last - prev).abs() / last.abs().max(f64::MIN_POSITIVE);
        diagnostics.push(("level_change".into(), rel));
        if last.abs() > 1e-14 * l2.max(1e-300) && rel > opts.tolerance {
            return Err(NormError::NotConverged { relative: rel });
        }
    }
    diagnostics.push(("l2_sq".into(), l2));
    let sq = last.max(0.0) + if opts.full { l2 } else { 0.0 };
    Ok(NormReport { value: sq.sqrt(), method: NormMethod::DoubleIntegral, diagnostics })
}

/// `|u|_{H^θ}` (or the full norm) of a finite element function by element-pair
/// decomposition; affine elements only.
pub fn slobodeckij_norm(u: &[f64], space: &HpSpace, theta: f64, opts: SlobodeckijOptions) -> Result<NormReport, NormError> {
    let polys = (0..space.mesh.num_elements()).map(|k| space.element_poly(u, k)).collect();
    norm_from_pieces(polys, space.mesh.maps.clone(), theta, opts)
}

/// Same as [`slobodeckij_norm`] for one polynomial on an element given by its map.
pub fn slobodeckij_poly(p: &MultiPoly, map: &ElementMap, theta: f64, opts: SlobodeckijOptions) -> Result<NormReport, NormError> {
    norm_from_pieces(vec![p.clone()], vec![map.clone()], theta, opts)
}
