//! Hierarchical reference shape functions.
//!
//! Quads use tensor products of `(1∓t)/2` and integrated Legendre
//! polynomials `φ_k`. Triangle edge functions are `λ_aλ_b ψ_k(λ_b−λ_a)`
//! with `ψ_k = φ_k / ((1−s²)/4)`, so their edge traces coincide with the
//! quad traces `φ_k(s)`. Triangle bubbles are orthonormalized in `L²(T̂)`.

use nalgebra::DMatrix;

use crate::mesh::{ref_vertex, ElementKind};
use crate::polyalg::refgeom::{barycentric_forms, SQRT3};
use crate::polyalg::{integrate_ref, MultiPoly, PolyEval, QuadRule, RefDomain};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeTag {
    Vertex(usize),
    /// Mode `k ≥ 2` on local edge `edge`, oriented from local vertex `edge` to `edge+1`.
    Edge { edge: usize, mode: u32 },
    Interior(usize),
}

#[derive(Clone, Debug)]
pub struct ShapeFn {
    pub tag: ShapeTag,
    pub poly: MultiPoly,
    pub grad: [MultiPoly; 2],
}

#[derive(Clone, Debug)]
pub struct ShapeSet {
    pub kind: ElementKind,
    pub degree: u32,
    pub funcs: Vec<ShapeFn>,
}

/// Values and reference gradients of a shape set at the nodes of a rule.
#[derive(Clone, Debug)]
pub struct Tabulation {
    /// `values[q][i]`
    pub values: Vec<Vec<f64>>,
    /// `grads[q][i]`
    pub grads: Vec<Vec<[f64; 2]>>,
}

/// Monomial coefficients of the Legendre polynomial `L_k`.
pub fn legendre_coeffs(k: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for n in 1..k {
        let nf = n as f64;
        let mut next = vec![0.0; n + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += (2.0 * nf + 1.0) / (nf + 1.0) * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= nf / (nf + 1.0) * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Integrated Legendre polynomial `φ_k = (L_k − L_{k−2}) / √(2(2k−1))`, `k ≥ 2`.
pub fn integrated_legendre_coeffs(k: usize) -> Vec<f64> {
    assert!(k >= 2);
    let a = legendre_coeffs(k);
    let b = legendre_coeffs(k - 2);
    let s = (2.0 * (2.0 * k as f64 - 1.0)).sqrt();
    a.iter().enumerate().map(|(i, c)| (c - b.get(i).copied().unwrap_or(0.0)) / s).collect()
}

/// `ψ_k = φ_k / ((1−s²)/4)`.
pub fn edge_kernel_coeffs(k: usize) -> Vec<f64> {
    // φ = (1 − s²)·g: peel coefficients from the top, g_{i-2} = −φ_i + g_i
    let phi = integrated_legendre_coeffs(k);
    let n = phi.len() - 1;
    let mut g = vec![0.0; n - 1];
    for i in (2..=n).rev() {
        let above = if i < n - 1 { g[i] } else { 0.0 };
        g[i - 2] = -phi[i] + above;
    }
    g.iter().map(|c| 4.0 * c).collect()
}

fn univariate(c: &[f64], arg: &MultiPoly) -> MultiPoly {
    let mut out = MultiPoly::zero(arg.nvars());
    for &ci in c.iter().rev() {
        out = &(&out * arg) + &MultiPoly::constant(arg.nvars(), ci);
    }
    out
}

/// Affine coordinate on the rectangle mapping `[y_lo, y_hi]` onto `[−1, 1]`.
pub fn rect_t() -> MultiPoly {
    MultiPoly::from_terms(2, [([0, 1, 0], 2.0 / SQRT3), ([0, 0, 0], -1.0 / 3.0)])
}

fn rect_axis(axis: usize) -> MultiPoly {
    if axis == 0 {
        MultiPoly::var(2, 0)
    } else {
        rect_t()
    }
}

impl ShapeSet {
    pub fn new(kind: ElementKind, degree: u32) -> Self {
        let mut funcs: Vec<(ShapeTag, MultiPoly)> = Vec::new();
        let p = degree as usize;
        match kind {
            ElementKind::Quad => {
                let s = rect_axis(0);
                let t = rect_axis(1);
                let one = MultiPoly::one(2);
                let lo = |x: &MultiPoly| (&one - x).scale(0.5);
                let hi = |x: &MultiPoly| (&one + x).scale(0.5);
                let verts = [(lo(&s), lo(&t)), (hi(&s), lo(&t)), (hi(&s), hi(&t)), (lo(&s), hi(&t))];
                for (i, (a, b)) in verts.iter().enumerate() {
                    funcs.push((ShapeTag::Vertex(i), a * b));
                }
                let neg = |x: &MultiPoly| x.scale(-1.0);
                // (edge parameter, transverse factor) per local edge
                let edges = [(s.clone(), lo(&t)), (t.clone(), hi(&s)), (neg(&s), hi(&t)), (neg(&t), lo(&s))];
                for (e, (param, trans)) in edges.iter().enumerate() {
                    for k in 2..=p {
                        funcs.push((ShapeTag::Edge { edge: e, mode: k as u32 }, &univariate(&integrated_legendre_coeffs(k), param) * trans));
                    }
                }
                let mut idx = 0;
                for i in 2..=p {
                    for j in 2..=p {
                        let f = &univariate(&integrated_legendre_coeffs(i), &s) * &univariate(&integrated_legendre_coeffs(j), &t);
                        funcs.push((ShapeTag::Interior(idx), f));
                        idx += 1;
                    }
                }
            }
            ElementKind::Tri => {
                let v = [ref_vertex(kind, 0), ref_vertex(kind, 1), ref_vertex(kind, 2)];
                let lam: Vec<MultiPoly> = barycentric_forms(&v).iter().map(|f| f.to_poly()).collect();
                for (i, l) in lam.iter().enumerate() {
                    funcs.push((ShapeTag::Vertex(i), l.clone()));
                }
                for e in 0..3 {
                    let (a, b) = (&lam[e], &lam[(e + 1) % 3]);
                    let arg = b - a;
                    for k in 2..=p {
                        let f = &(a * b) * &univariate(&edge_kernel_coeffs(k), &arg);
                        funcs.push((ShapeTag::Edge { edge: e, mode: k as u32 }, f));
                    }
                }
                if p >= 3 {
                    let bubble = &(&lam[0] * &lam[1]) * &lam[2];
                    let mut raw = Vec::new();
                    for n in 0..=p - 3 {
                        for j in 0..=n {
                            raw.push(&(&bubble * &lam[0].pow((n - j) as u32)) * &lam[1].pow(j as u32));
                        }
                    }
                    for (idx, f) in gram_schmidt(raw).into_iter().enumerate() {
                        funcs.push((ShapeTag::Interior(idx), f));
                    }
                }
            }
        }
        let funcs = funcs
            .into_iter()
            .map(|(tag, poly)| {
                let grad = [poly.derivative(0), poly.derivative(1)];
                ShapeFn { tag, poly, grad }
            })
            .collect();
        Self { kind, degree, funcs }
    }

    pub fn len(&self) -> usize {
        self.funcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.funcs.is_empty()
    }

    pub fn domain(&self) -> RefDomain {
        match self.kind {
            ElementKind::Tri => RefDomain::Triangle,
            ElementKind::Quad => RefDomain::Rectangle,
        }
    }

    pub fn index_of(&self, tag: ShapeTag) -> Option<usize> {
        self.funcs.iter().position(|f| f.tag == tag)
    }

    pub fn tabulate(&self, rule: &QuadRule) -> Tabulation {
        let ev: Vec<(PolyEval, PolyEval, PolyEval)> = self
            .funcs
            .iter()
            .map(|f| (PolyEval::new(&f.poly), PolyEval::new(&f.grad[0]), PolyEval::new(&f.grad[1])))
            .collect();
        let mut values = Vec::with_capacity(rule.len());
        let mut grads = Vec::with_capacity(rule.len());
        for p in &rule.points {
            let x = &p[..2];
            values.push(ev.iter().map(|e| e.0.eval(x)).collect());
            grads.push(ev.iter().map(|e| [e.1.eval(x), e.2.eval(x)]).collect());
        }
        Tabulation { values, grads }
    }

    /// Reference `L²` Gram matrix, exact.
    pub fn reference_mass(&self) -> DMatrix<f64> {
        let n = self.len();
        let dom = self.domain();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = integrate_ref(&(&self.funcs[i].poly * &self.funcs[j].poly), dom).expect("2D");
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }
}

fn gram_schmidt(raw: Vec<MultiPoly>) -> Vec<MultiPoly> {
    let ip = |a: &MultiPoly, b: &MultiPoly| integrate_ref(&(a * b), RefDomain::Triangle).expect("2D");
    let mut out: Vec<MultiPoly> = Vec::with_capacity(raw.len());
    for f in raw {
        let mut g = f;
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for q in &out {
                let c = ip(&g, q);
                g = &g - &q.scale(c);
            }
        }
        let n = ip(&g, &g).sqrt();
        out.push(g.scale(1.0 / n));
    }
    out
}
