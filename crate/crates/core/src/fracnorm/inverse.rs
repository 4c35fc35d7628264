use nalgebra::DMatrix;

use super::eig::gen_eigenvalues;
use super::kmethod::Variant;
use super::oracle::discrete_gram;
use super::NormError;
use crate::hpspace::HpSpace;

/// Gram matrix of the discrete `[L², H¹]_θ` norm, with the endpoint forms
/// `M` at `θ = 0` and `M + S` at `θ = 1`.
pub fn theta_form(space: &HpSpace, theta: f64) -> Result<DMatrix<f64>, NormError> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(NormError::ThetaOutOfRange(theta));
    }
    if theta == 0.0 || theta == 1.0 {
        let (m, s) = space.assemble_forms();
        return Ok(if theta == 0.0 { m.matrix } else { m.matrix + s.matrix });
    }
    discrete_gram(space, theta, Variant::H1)
}

fn max_ratio(num: &DMatrix<f64>, den: &DMatrix<f64>) -> Result<f64, NormError> {
    let ev = gen_eigenvalues(den, num)?;
    Ok(ev.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// `sup ‖h^{1−θ} p^{−2(1−θ)} ∇u‖ / ‖u‖_θ` over the space.
pub fn inverse_constant(space: &HpSpace, theta: f64) -> Result<f64, NormError> {
    let w = space.assemble_weighted_stiffness(theta).matrix;
    max_ratio(&w, &theta_form(space, theta)?)
}

/// `sup h^{μ−θ} p^{−2(μ−θ)} ‖u‖_μ / ‖u‖_θ` for `μ > θ`, with the largest
/// element diameter and degree.
pub fn two_index_constant(space: &HpSpace, theta: f64, mu: f64) -> Result<f64, NormError> {
    if mu <= theta {
        return Err(NormError::InvalidParameter("mu must exceed theta"));
    }
    let h = space.mesh.h_max();
    let p = space.mesh.elements.iter().map(|e| e.degree).max().unwrap_or(1) as f64;
    let f = h.powf(2.0 * (mu - theta)) * p.powf(-4.0 * (mu - theta));
    max_ratio(&(theta_form(space, mu)? * f), &theta_form(space, theta)?)
}
