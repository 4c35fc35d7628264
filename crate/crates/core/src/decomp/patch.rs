use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::DecompError;
use crate::hpspace::{gl_interpolate, DofEntity, HpSpace};
use crate::mesh::{ref_vertex, ElementKind, Mesh, PatchKind};
use crate::polyalg::refgeom::{RECT_CORNERS, SQRT3, TRI_VERTS};
use crate::polyalg::{compose_affine, make_quadrature, AffineMap, MultiPoly, RefDomain};

/// Relative size below which pushed-forward coefficients count as zero.
pub const CONFORMITY_TOL: f64 = 1e-10;

/// One element of a patch together with the affine map from its reference
/// element onto the patch reference element (`T̂` or `Ŝ`).
#[derive(Clone, Debug)]
pub struct Member {
    pub element: usize,
    pub kind: ElementKind,
    pub to_ref: AffineMap,
}

/// Reference identification of a vertex or edge patch.
///
/// The patch vertex sits at `v̂₃` and a patch edge on the base edge
/// `v̂₃v̂₂`, oriented along the global edge. Quad members meet `T̂` through
/// the Duffy map, whose collapsed side lands on `v̂₁`.
#[derive(Clone, Debug)]
pub struct PatchRef {
    pub kind: PatchKind,
    pub center: usize,
    pub members: Vec<Member>,
    /// Largest member degree.
    pub degree: u32,
    /// Gauss–Lobatto degree on quad members of edge patches.
    pub quad_interp: Option<usize>,
    /// Largest member diameter.
    pub h: f64,
}

fn affine_from_points(src: [[f64; 2]; 3], dst: [[f64; 2]; 3]) -> AffineMap {
    let (a, b, c) = (src[0], src[1], src[2]);
    let s = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let inv = [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]];
    let d = [[dst[1][0] - dst[0][0], dst[2][0] - dst[0][0]], [dst[1][1] - dst[0][1], dst[2][1] - dst[0][1]]];
    let mut m = [[0.0; 2]; 2];
    for r in 0..2 {
        for col in 0..2 {
            m[r][col] = d[r][0] * inv[0][col] + d[r][1] * inv[1][col];
        }
    }
    let shift = [dst[0][0] - m[0][0] * a[0] - m[0][1] * a[1], dst[0][1] - m[1][0] * a[0] - m[1][1] * a[1]];
    AffineMap::new(2, 2, vec![m[0][0], m[0][1], m[1][0], m[1][1]], shift.to_vec()).expect("2x2")
}

/// Local vertex `i` goes to the first target, then counterclockwise.
fn member_map(kind: ElementKind, i: usize, reflect: bool) -> AffineMap {
    let [v1, v2, v3] = TRI_VERTS;
    let [ll, lr, ur, ul] = RECT_CORNERS;
    let n = kind.num_vertices();
    let targets: Vec<[f64; 2]> = match (kind, reflect) {
        (ElementKind::Tri, false) => vec![v3, v2, v1],
        (ElementKind::Tri, true) => vec![v2, v3, v1],
        (ElementKind::Quad, false) => vec![ll, lr, ur, ul],
        (ElementKind::Quad, true) => vec![lr, ll, ul, ur],
    };
    let src = [ref_vertex(kind, i % n), ref_vertex(kind, (i + 1) % n), ref_vertex(kind, (i + 2) % n)];
    affine_from_points(src, [targets[0], targets[1], targets[2]])
}

/// Builds the reference identification of the patch around a vertex or edge.
pub fn patch_ref(mesh: &Mesh, kind: PatchKind, id: usize) -> Result<PatchRef, DecompError> {
    let patch = mesh.build_patch(kind, id)?;
    let members = patch
        .members
        .iter()
        .map(|&k| {
            let el = &mesh.elements[k];
            let (i, reflect) = match kind {
                PatchKind::Vertex => (el.verts.iter().position(|&v| v == id).expect("member touches vertex"), false),
                PatchKind::Edge => {
                    let l = mesh.elem_edges[k].iter().position(|&e| e == id).expect("member owns edge");
                    (l, mesh.edge_reversed(k, l))
                }
            };
            Member { element: k, kind: el.kind, to_ref: member_map(el.kind, i, reflect) }
        })
        .collect::<Vec<_>>();
    let degree = patch.members.iter().map(|&k| mesh.elements[k].degree).max().unwrap_or(1);
    let quad_interp = match kind {
        PatchKind::Edge => {
            let trace = patch.members.iter().map(|&k| mesh.elements[k].degree).min().unwrap_or(1);
            Some((degree / 2).max(trace) as usize)
        }
        PatchKind::Vertex => None,
    };
    let h = patch.members.iter().map(|&k| mesh.h[k]).fold(0.0, f64::max);
    Ok(PatchRef { kind, center: id, members, degree, quad_interp, h })
}

/// `ũ ∘ T_D` with the Duffy map written as a polynomial substitution.
pub fn duffy_pullback(u: &MultiPoly) -> Result<MultiPoly, DecompError> {
    let (xi, eta) = (MultiPoly::var(2, 0), MultiPoly::var(2, 1));
    let factor = (&MultiPoly::constant(2, 2.0 / SQRT3) - &eta).scale(1.0 / SQRT3);
    Ok(u.substitute(&[&factor * &xi, eta])?)
}

impl PatchRef {
    /// The reference function carried to `member`, in that element's reference coordinates.
    pub fn local_function(&self, u: &MultiPoly, member: &Member) -> Result<MultiPoly, DecompError> {
        let on_ref = match member.kind {
            ElementKind::Tri => u.clone(),
            ElementKind::Quad => {
                let d = duffy_pullback(u)?;
                match self.quad_interp {
                    Some(q) => gl_interpolate(|s| d.eval(&s), q),
                    None => d,
                }
            }
        };
        Ok(compose_affine(&on_ref, &member.to_ref)?)
    }

    pub fn contains(&self, element: usize) -> bool {
        self.members.iter().any(|m| m.element == element)
    }

    /// Entity filter for dofs the patch may carry: interior of the patch
    /// closure minus its boundary.
    pub fn owns(&self, mesh: &Mesh, ent: &DofEntity) -> bool {
        match *ent {
            DofEntity::Interior { element, .. } => self.contains(element),
            DofEntity::Edge { edge, .. } => {
                let e = &mesh.edges[edge];
                match self.kind {
                    PatchKind::Edge => edge == self.center,
                    PatchKind::Vertex => e.verts.contains(&self.center) && e.elements.iter().all(|&(k, _)| self.contains(k)),
                }
            }
            DofEntity::Vertex(v) => self.kind == PatchKind::Vertex && v == self.center,
        }
    }
}

/// Coefficients of `poly` in the full local shape set of `element`, by
/// reference `L²` projection.
pub fn fit_local(space: &HpSpace, element: usize, poly: &MultiPoly) -> Vec<f64> {
    let set = space.shape_set(element);
    let dom = match set.kind {
        ElementKind::Tri => RefDomain::Triangle,
        ElementKind::Quad => RefDomain::Rectangle,
    };
    let rule = make_quadrature(dom, 2 * set.degree.max(poly.degree()) + 2);
    let tab = set.tabulate(&rule);
    let n = set.len();
    let mut gram = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for (q, (pt, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let v = &tab.values[q];
        let f = poly.eval(&pt[..2]);
        for a in 0..n {
            rhs[a] += w * f * v[a];
            for b in 0..=a {
                gram[(a, b)] += w * v[a] * v[b];
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            gram[(b, a)] = gram[(a, b)];
        }
    }
    let c = gram.cholesky().expect("reference Gram is SPD").solve(&rhs);
    c.iter().copied().collect()
}

/// `T_ω ũ` as global coefficients, supported on the dofs the patch owns.
///
/// Fails when members disagree on a shared dof, when a constrained mode
/// comes out nonzero, or when the result does not vanish on the patch boundary.
pub fn pushforward(u: &MultiPoly, patch: &PatchRef, space: &HpSpace) -> Result<Vec<f64>, DecompError> {
    let mut out = vec![0.0; space.dim()];
    if u.is_zero() {
        return Ok(out);
    }
    let mut fits = Vec::with_capacity(patch.members.len());
    for m in &patch.members {
        let local = patch.local_function(u, m)?;
        fits.push((m.element, fit_local(space, m.element, &local)));
    }
    let scale = fits.iter().flat_map(|(_, c)| c.iter()).fold(0.0f64, |a, b| a.max(b.abs())).max(1e-300);
    let tol = CONFORMITY_TOL * scale;
    let mut worst = 0.0f64;
    let mut seen: BTreeMap<usize, f64> = BTreeMap::new();
    for (k, c) in &fits {
        for (d, &v) in space.dofs.local_to_global[*k].iter().zip(c) {
            match d {
                None => worst = worst.max(v.abs()),
                Some(d) => {
                    let g = d.sign * v;
                    let owned = patch.owns(&space.mesh, &space.dofs.entities[d.global]);
                    if !owned {
                        worst = worst.max(g.abs());
                    } else if let Some(prev) = seen.insert(d.global, g) {
                        worst = worst.max((prev - g).abs());
                    }
                }
            }
        }
    }
    if worst > tol {
        return Err(DecompError::TraceMismatch { center: patch.center, relative: worst / scale });
    }
    for (g, v) in seen {
        out[g] = v;
    }
    Ok(out)
}

/// Pull a global function back to the patch reference triangle through a triangle member.
pub fn pullback(space: &HpSpace, u: &[f64], member: &Member) -> Result<MultiPoly, DecompError> {
    if member.kind != ElementKind::Tri {
        return Err(DecompError::Unsupported("pullback through a quad member"));
    }
    let m = &member.to_ref;
    let (a, b, c, d) = (m.entry(0, 0), m.entry(0, 1), m.entry(1, 0), m.entry(1, 1));
    let det = a * d - b * c;
    let inv = [d / det, -b / det, -c / det, a / det];
    let shift = [-(inv[0] * m.shift[0] + inv[1] * m.shift[1]), -(inv[2] * m.shift[0] + inv[3] * m.shift[1])];
    let back = AffineMap::new(2, 2, inv.to_vec(), shift.to_vec())?;
    Ok(compose_affine(&space.element_poly(u, member.element), &back)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{criss_cross, mixed_strip, Mesh};
    use crate::polyalg::refgeom::ref_barycentric;

    fn b(i: usize) -> MultiPoly {
        ref_barycentric()[i].to_poly()
    }

    #[test]
    fn member_maps_send_patch_vertex_to_v3() {
        let mesh = mixed_strip(1, 2, 4);
        for v in 0..mesh.num_vertices() {
            let pr = patch_ref(&mesh, PatchKind::Vertex, v).unwrap();
            for m in &pr.members {
                let i = mesh.elements[m.element].verts.iter().position(|&w| w == v).unwrap();
                let img = m.to_ref.apply(&ref_vertex(m.kind, i));
                let want = if m.kind == ElementKind::Tri { TRI_VERTS[2] } else { RECT_CORNERS[0] };
                assert!((img[0] - want[0]).abs() < 1e-14 && (img[1] - want[1]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_pushes_forward_to_zero() {
        let mesh = criss_cross(1, 3);
        let space = HpSpace::new(&mesh, false).unwrap();
        let pr = patch_ref(&mesh, PatchKind::Edge, 0).unwrap();
        assert!(pushforward(&MultiPoly::zero(2), &pr, &space).unwrap().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn triangle_patch_pullback_recovers_input() {
        let mesh = criss_cross(1, 4);
        let space = HpSpace::new(&mesh, false).unwrap();
        let centre = 4;
        let pr = patch_ref(&mesh, PatchKind::Vertex, centre).unwrap();
        // symmetric about the median through v̂₃ and zero on the opposite edge
        let u = &b(2) * &(&(&b(2) * &b(2)) + &(&b(0) * &b(1)));
        let c = pushforward(&u, &pr, &space).unwrap();
        assert!(space.max_edge_jump(&c, 20) < 1e-10);
        for m in &pr.members {
            assert!(pullback(&space, &c, m).unwrap().distance(&u) < 1e-10);
        }
    }

    #[test]
    fn asymmetric_vertex_function_is_rejected() {
        let mesh = criss_cross(1, 3);
        let space = HpSpace::new(&mesh, false).unwrap();
        let pr = patch_ref(&mesh, PatchKind::Vertex, 4).unwrap();
        let u = &(&b(2) * &b(2)) * &b(1);
        assert!(matches!(pushforward(&u, &pr, &space), Err(DecompError::TraceMismatch { .. })));
    }

    #[test]
    fn mixed_vertex_patch_is_continuous() {
        // one quad and one triangle sharing the edge through vertex 1
        let mesh = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [2.0, 0.0]],
            vec![(ElementKind::Quad, vec![0, 1, 2, 3], 3), (ElementKind::Tri, vec![1, 4, 2], 3)],
            vec![],
        )
        .unwrap();
        let space = HpSpace::new(&mesh, false).unwrap();
        let pr = patch_ref(&mesh, PatchKind::Vertex, 1).unwrap();
        let u = &b(2) * &(&(&b(2) * &b(2)) + &(&b(0) * &b(1)));
        let c = pushforward(&u, &pr, &space).unwrap();
        let scale = c.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(scale > 1e-3);
        assert!(space.max_edge_jump(&c, 20) <= 1e-10 * scale);
        // value at the patch vertex is ũ(v̂₃)
        let at_v = space.eval_physical(&c, 1, [1.0, 0.0]);
        assert!((at_v - u.eval(&TRI_VERTS[2])).abs() < 1e-10);
    }

    #[test]
    fn edge_patch_quad_member_gets_duffy_image() {
        let mesh = mixed_strip(1, 2, 4);
        let space = HpSpace::new(&mesh, false).unwrap();
        let shared = mesh.edge_id(2, 3).unwrap();
        let pr = patch_ref(&mesh, PatchKind::Edge, shared).unwrap();
        assert_eq!(pr.quad_interp, Some(2));
        let u = (&b(1) * &b(2)).scale(3.0);
        let c = pushforward(&u, &pr, &space).unwrap();
        assert!(space.max_edge_jump(&c, 20) < 1e-10);
        assert!(c.iter().any(|v| v.abs() > 0.1));
    }
}
