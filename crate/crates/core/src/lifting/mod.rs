//! Polynomial liftings from the reference triangle into the right-angled
//! tetrahedron and the prism, with checks of their trace, vanishing and
//! weighted-norm properties.

mod ops;
mod tet;
mod verify;

pub use ops::{
    edge_trace_residual, lift_a, lift_a_bc, lift_prism, planar_degree, restrict_to_base, restrict_to_face,
    restrict_to_prism_side, restrict_to_prism_top,
};
pub use tet::RefTet;
pub use verify::{
    random_admissible, verify_ort_identities, verify_weighted_bounds, OrtReport, OrtRow, Property, RatioReport, RatioRow,
    SampleSpec,
};

use crate::fracnorm::{DistanceSet, NormError};
use crate::polyalg::{MultiPoly, PolyError};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LiftError {
    #[error("expected a polynomial in two variables, found {0}")]
    NotPlanar(usize),
    #[error("input does not vanish on base edge {edge} (relative trace {residual:e})")]
    NotVanishing { edge: usize, residual: f64 },
    #[error("degree {degree} below the number of constrained edges {required}")]
    DegreeTooLow { degree: u32, required: usize },
    #[error("inexact division: relative remainder {0:e}")]
    DivisionResidual(f64),
    #[error("base edge index {0} out of range")]
    BadEdge(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// Subset of the three base edges carrying homogeneous conditions; edge `k`
/// is opposite vertex `k`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    mask: [bool; 3],
}

impl EdgeSet {
    pub fn new(edges: &[usize]) -> Result<Self, LiftError> {
        let mut mask = [false; 3];
        for &k in edges {
            *mask.get_mut(k).ok_or(LiftError::BadEdge(k))? = true;
        }
        Ok(Self { mask })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn all() -> Self {
        Self { mask: [true; 3] }
    }

    pub fn from_mask(mask: [bool; 3]) -> Self {
        Self { mask }
    }

    pub fn contains(&self, k: usize) -> bool {
        self.mask.get(k).copied().unwrap_or(false)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(|&k| self.mask[k])
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_distance_set(&self) -> DistanceSet {
        DistanceSet::edges(&self.iter().collect::<Vec<_>>())
    }

    /// Compact label such as `{0,2}`.
    pub fn label(&self) -> String {
        let v: Vec<String> = self.iter().map(|k| k.to_string()).collect();
        format!("{{{}}}", v.join(","))
    }
}

/// A lifted polynomial in `(x, y, z)` together with its source data.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftResult {
    pub poly: MultiPoly,
    pub degree: u32,
    pub edges: EdgeSet,
    /// Largest relative remainder over the internal divisions.
    pub max_division_residual: f64,
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::polyalg::{mollifier_moments, MomentTable};
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn admissible() -> impl Strategy<Value = (MultiPoly, MultiPoly, EdgeSet)> {
        (1u32..=10, any::<u64>(), prop::array::uniform3(any::<bool>())).prop_map(|(p, seed, mask)| {
            let edges = EdgeSet::from_mask(mask);
            let p = p.max(edges.len() as u32);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (random_admissible(&mut rng, p, &edges), random_admissible(&mut rng, p, &edges), edges)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn operators_are_linear((u, v, e) in admissible(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let m = mollifier_moments(2, 10).unwrap();
            let w = &u.scale(a) + &v.scale(b);
            let ops: [fn(&MultiPoly, &EdgeSet, &MomentTable) -> Result<LiftResult, LiftError>; 3] =
                [|u, _, m| lift_a(u, m), lift_a_bc, lift_prism];
            for op in ops {
                let lhs = op(&w, &e, &m).unwrap().poly;
                let rhs = &op(&u, &e, &m).unwrap().poly.scale(a) + &op(&v, &e, &m).unwrap().poly.scale(b);
                let scale = lhs.max_coeff().max(rhs.max_coeff()).max(1.0);
                prop_assert!(lhs.distance(&rhs) <= 1e-11 * scale);
            }
        }

        #[test]
        fn degree_trace_and_vanishing((u, _v, e) in admissible()) {
            let m = mollifier_moments(2, 10).unwrap();
            let p = u.degree();
            let scale = u.max_coeff();
            let a = lift_a(&u, &m).unwrap();
            prop_assert!(a.poly.degree() <= p);
            prop_assert!(restrict_to_base(&a.poly).unwrap().distance(&u) <= 1e-12 * scale);
            let bc = lift_a_bc(&u, &e, &m).unwrap();
            prop_assert!(bc.poly.degree() <= p);
            prop_assert!(restrict_to_base(&bc.poly).unwrap().distance(&u) <= 1e-10 * scale);
            prop_assert!(bc.max_division_residual <= 1e-10);
            for k in e.iter() {
                prop_assert!(restrict_to_face(&bc.poly, k).unwrap().max_coeff() <= 1e-10 * scale);
            }
            let pr = lift_prism(&u, &e, &m).unwrap();
            prop_assert!(planar_degree(&pr.poly) <= p);
            prop_assert!(restrict_to_prism_top(&pr.poly).unwrap().max_coeff() <= 1e-10 * scale);
            prop_assert!(restrict_to_base(&pr.poly).unwrap().distance(&u) <= 1e-10 * scale);
            for k in e.iter() {
                // the Duffy substitution inflates monomial coefficients; measure against them
                let side = restrict_to_prism_side(&pr.poly, k).unwrap().max_coeff();
                prop_assert!(side <= 1e-10 * scale.max(pr.poly.max_coeff()));
            }
        }
    }
}
