use super::space::{DofEntity, HpSpace};
use crate::polyalg::refgeom::{RECT_Y_HI, RECT_Y_LO};
use crate::polyalg::{gauss_lobatto_nodes, MultiPoly};

fn lagrange_basis(nodes: &[f64], var: usize) -> Vec<MultiPoly> {
    let x = MultiPoly::var(2, var);
    (0..nodes.len())
        .map(|i| {
            let mut l = MultiPoly::one(2);
            for (j, &xj) in nodes.iter().enumerate() {
                if j != i {
                    let lin = &x - &MultiPoly::constant(2, xj);
                    l = (&l * &lin).scale(1.0 / (nodes[i] - xj));
                }
            }
            l
        })
        .collect()
}

/// Gauss–Lobatto nodes of degree `p` on both axes of the reference rectangle.
pub fn gl_nodes_rect(p: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, _) = gauss_lobatto_nodes(p);
    let half = 0.5 * (RECT_Y_HI - RECT_Y_LO);
    let y = x.iter().map(|t| RECT_Y_LO + half * (t + 1.0)).collect();
    (x, y)
}

/// Tensor Gauss–Lobatto interpolant in `Q^p` of a function on the reference rectangle.
pub fn gl_interpolate(f: impl Fn([f64; 2]) -> f64, p: usize) -> MultiPoly {
    let (xs, ys) = gl_nodes_rect(p);
    let lx = lagrange_basis(&xs, 0);
    let ly = lagrange_basis(&ys, 1);
    let mut out = MultiPoly::zero(2);
    for (i, &x) in xs.iter().enumerate() {
        let mut col = MultiPoly::zero(2);
        for (j, &y) in ys.iter().enumerate() {
            let v = f([x, y]);
            if v != 0.0 {
                col = &col + &ly[j].scale(v);
            }
        }
        out = &out + &(&lx[i] * &col);
    }
    out
}

impl HpSpace {
    /// Piecewise (bi)linear part: keeps the vertex values and drops all
    /// higher modes. Vertex dofs of the hierarchical basis are nodal values.
    pub fn nodal_lowest_order(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.dofs.entities)
            .map(|(&c, e)| if matches!(e, DofEntity::Vertex(_)) { c } else { 0.0 })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{quad_grid, ElementKind};
    use crate::polyalg::{integrate_ref, RefDomain};
    use rand::{Rng, SeedableRng};

    fn random_q(q: u16, rng: &mut impl Rng) -> MultiPoly {
        let mut terms = Vec::new();
        for a in 0..=q {
            for b in 0..=q {
                terms.push(([a, b, 0], rng.gen_range(-1.0..1.0)));
            }
        }
        MultiPoly::from_terms(2, terms)
    }

    #[test]
    fn reproduces_tensor_polynomials() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for p in 1..=6u16 {
            let f = random_q(p, &mut rng);
            let g = gl_interpolate(|x| f.eval(&x), p as usize);
            assert!(f.distance(&g) < 1e-11 * f.max_coeff().max(1.0), "p={p}");
        }
    }

    #[test]
    fn matches_at_nodes() {
        let p = 4;
        let f = |x: [f64; 2]| x[0].powi(p as i32 + 1);
        let g = gl_interpolate(f, p);
        let (xs, ys) = gl_nodes_rect(p);
        for &x in &xs {
            for &y in &ys {
                assert!((g.eval(&[x, y]) - f([x, y])).abs() < 1e-12);
            }
        }
        assert!((g.eval(&[0.3, 0.0]) - f([0.3, 0.0])).abs() > 1e-6);
    }

    #[test]
    fn l2_stability_spot_check() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let norm = |f: &MultiPoly| integrate_ref(&(f * f), RefDomain::Rectangle).unwrap().sqrt();
        for p in 1..=6usize {
            let f = random_q(2 * p as u16, &mut rng);
            let g = gl_interpolate(|x| f.eval(&x), p);
            assert!(norm(&g) / norm(&f) <= 10.0, "p={p}");
        }
    }

    #[test]
    fn nodal_part() {
        let s1 = HpSpace::new(&quad_grid(2, 1, [0.0, 0.0, 1.0, 1.0]), false).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let u: Vec<f64> = (0..s1.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert_eq!(s1.nodal_lowest_order(&u), u);

        let s2 = HpSpace::new(&quad_grid(2, 2, [0.0, 0.0, 1.0, 1.0]), false).unwrap();
        let bubble = s2.dofs_where(|e| matches!(e, DofEntity::Edge { .. }))[0];
        assert!(s2.nodal_lowest_order(&s2.basis_vector(bubble)).iter().all(|&c| c == 0.0));

        let u: Vec<f64> = (0..s2.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u1 = s2.nodal_lowest_order(&u);
        for (k, el) in s2.mesh.elements.iter().enumerate() {
            assert_eq!(el.kind, ElementKind::Quad);
            for (i, &v) in el.verts.iter().enumerate() {
                let r = crate::mesh::ref_vertex(el.kind, i);
                let x = s2.mesh.vertices[v];
                let a = s2.eval_ref(&u1, k, r);
                let b = s2.eval_physical(&u, k, x);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
