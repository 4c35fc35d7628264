use std::collections::BTreeMap;

use super::integrate::integrate_ref;
use super::poly::MultiPoly;
use super::refgeom::{ref_barycentric, RefDomain};
use super::PolyError;

/// Moments `μ_ab = ∫ ρ ξ₁^a ξ₂^b` of the bubble-power mollifier `ρ = c·(b₁b₂b₃)^k`.
#[derive(Clone, Debug)]
pub struct MomentTable {
    pub k: u32,
    pub max_degree: u32,
    values: BTreeMap<(u32, u32), f64>,
}

impl MomentTable {
    pub fn get(&self, a: u32, b: u32) -> Result<f64, PolyError> {
        self.values
            .get(&(a, b))
            .copied()
            .ok_or(PolyError::MissingMoment { a, b, max_degree: self.max_degree })
    }

    /// The normalized mollifier density as a polynomial.
    pub fn density(&self) -> MultiPoly {
        mollifier_density(self.k)
    }
}

fn bubble_power(k: u32) -> MultiPoly {
    let b = ref_barycentric();
    let bubble = &(&b[0].to_poly() * &b[1].to_poly()) * &b[2].to_poly();
    bubble.pow(k)
}

/// `c·(b₁b₂b₃)^k` normalized to unit mass on the reference triangle.
pub fn mollifier_density(k: u32) -> MultiPoly {
    let rho = bubble_power(k);
    let mass = integrate_ref(&rho, RefDomain::Triangle).expect("2D polynomial");
    rho.scale(1.0 / mass)
}

/// Exact moment table up to total degree `max_degree`.
pub fn mollifier_moments(k: u32, max_degree: u32) -> Result<MomentTable, PolyError> {
    if k == 0 {
        return Err(PolyError::InvalidMollifier);
    }
    let rho = mollifier_density(k);
    let mut values = BTreeMap::new();
    for a in 0..=max_degree {
        for b in 0..=max_degree - a {
            let m = MultiPoly::monomial(2, [a as u16, b as u16, 0], 1.0);
            values.insert((a, b), integrate_ref(&(&rho * &m), RefDomain::Triangle)?);
        }
    }
    Ok(MomentTable { k, max_degree, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::quad::make_quadrature;

    #[test]
    fn normalization_and_symmetry() {
        let t = mollifier_moments(2, 4).unwrap();
        assert!((t.get(0, 0).unwrap() - 1.0).abs() < 1e-13);
        assert!(t.get(1, 0).unwrap().abs() < 1e-14);
        assert!(t.get(0, 1).unwrap().abs() < 1e-14);
        // rotational symmetry forces μ20 = μ02
        assert!((t.get(2, 0).unwrap() - t.get(0, 2).unwrap()).abs() < 1e-14);
        assert!(t.get(5, 0).is_err());
    }

    #[test]
    fn second_moment_matches_quadrature() {
        let t = mollifier_moments(2, 2).unwrap();
        let rho = mollifier_density(2);
        let q = make_quadrature(RefDomain::Triangle, 14).integrate(|p| rho.eval(&p[..2]) * p[0] * p[0]);
        let exact = t.get(2, 0).unwrap();
        assert!((q - exact).abs() < 1e-12 * exact);
    }
}
