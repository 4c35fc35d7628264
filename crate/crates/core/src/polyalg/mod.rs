//! Exact polynomial arithmetic, affine composition, division by linear
//! forms, reference-domain integration and quadrature.

pub mod integrate;
pub mod linear;
pub mod moments;
pub mod poly;
pub mod quad;
pub mod refgeom;

pub use integrate::integrate_ref;
pub use linear::{compose_affine, divide_by_linear, AffineMap, Division, LinearForm};
pub use moments::{mollifier_density, mollifier_moments, MomentTable};
pub use poly::{Exps, MultiPoly, PolyEval};
pub use quad::{gauss_jacobi, gauss_jacobi_unit, gauss_legendre, gauss_legendre_on, gauss_lobatto_nodes, make_quadrature, QuadRule};
pub use refgeom::RefDomain;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("linear form has a zero gradient")]
    DegenerateForm,
    #[error("moment ({a},{b}) not tabulated (max degree {max_degree})")]
    MissingMoment { a: u32, b: u32, max_degree: u32 },
    #[error("mollifier exponent must be at least 1")]
    InvalidMollifier,
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn poly2(max_deg: u16) -> impl Strategy<Value = MultiPoly> {
        prop::collection::vec((0..=max_deg, 0..=max_deg, -2.0f64..2.0), 1..8).prop_map(move |ts| {
            MultiPoly::from_terms(2, ts.into_iter().filter(|(a, b, _)| a + b <= max_deg).map(|(a, b, c)| ([a, b, 0], c)))
        })
    }

    fn affine2() -> impl Strategy<Value = AffineMap> {
        prop::collection::vec(-2.0f64..2.0, 6).prop_map(|v| AffineMap::new(2, 2, v[..4].to_vec(), v[4..].to_vec()).unwrap())
    }

    proptest! {
        #[test]
        fn composition_is_ring_homomorphism(p in poly2(4), q in poly2(4), m in affine2()) {
            let lhs = compose_affine(&(&p * &q), &m).unwrap();
            let rhs = &compose_affine(&p, &m).unwrap() * &compose_affine(&q, &m).unwrap();
            let scale = lhs.max_coeff().max(rhs.max_coeff()).max(1.0);
            prop_assert!(lhs.distance(&rhs) <= 1e-11 * scale);
        }

        #[test]
        fn division_reconstructs(p in poly2(5), a in -2.0f64..2.0, b in 0.2f64..2.0, d in -1.0f64..1.0) {
            let l = LinearForm::new(vec![a, b], d).unwrap();
            let div = divide_by_linear(&p, &l).unwrap();
            let back = &(&l.to_poly() * &div.quotient) + &div.remainder;
            prop_assert!(back.distance(&p) <= 1e-12 * p.max_coeff().max(1.0) * 10.0);
        }

        #[test]
        fn exact_multiple_divides_cleanly(q in poly2(4), a in 0.3f64..2.0, b in -2.0f64..2.0, d in -1.0f64..1.0) {
            let l = LinearForm::new(vec![a, b], d).unwrap();
            let p = &l.to_poly() * &q;
            let div = divide_by_linear(&p, &l).unwrap();
            prop_assert!(div.residual <= 1e-10);
        }

        #[test]
        fn triangle_integral_equals_duffy_pullback(p in poly2(6)) {
            let exact = integrate_ref(&p, RefDomain::Triangle).unwrap();
            let rule = make_quadrature(RefDomain::Rectangle, 16);
            let pulled = rule.integrate(|x| {
                let y = refgeom::duffy([x[0], x[1]]);
                p.eval(&y) * refgeom::duffy_jacobian(x[1])
            });
            prop_assert!((exact - pulled).abs() <= 1e-12 * p.max_coeff().max(1.0) * 10.0);
        }
    }

    #[test]
    fn composition_matches_pointwise_evaluation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let p = MultiPoly::monomial(2, [1, 1, 0], 1.0);
        // (x, z) ↦ (x + 0.15 z, z)
        let m = AffineMap::new(2, 2, vec![1.0, 0.15, 0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let q = compose_affine(&p, &m).unwrap();
        for _ in 0..50 {
            let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let y = m.apply(&x);
            assert!((q.eval(&x) - p.eval(&y)).abs() < 1e-12);
        }
    }
}
