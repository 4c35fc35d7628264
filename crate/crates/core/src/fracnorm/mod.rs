//! K-functionals and exact discrete interpolation norms, Slobodeckij and
//! weighted-distance norms, the continuous-norm oracle and the constants
//! measured against it.

mod distance;
mod eig;
mod inverse;
mod kmethod;
mod line;
mod oracle;
mod slobodeckij;

pub use distance::{weighted_distance_norm, DistanceSet};
pub use eig::{gen_eig, gen_eigenvalues, GenEigBasis};
pub use inverse::{inverse_constant, theta_form, two_index_constant};
pub use kmethod::{
    c_theta, interp_norm_discrete, interp_norm_tquad, k_functional, k_functional_direct, kvk_norm_compare, NormMethod,
    NormReport, TGrid, ThetaParams, Variant,
};
pub use oracle::{
    band_against, continuous_norm_oracle, discrete_gram, enrich, equivalence_band, oracle_spectrum, Band, OracleSpec,
    OracleSpectrum,
};
pub use slobodeckij::{slobodeckij_norm, slobodeckij_poly, SlobodeckijOptions};

use crate::hpspace::HpError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum NormError {
    #[error("theta = {0} outside the admissible range")]
    ThetaOutOfRange(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("mass form is not positive definite")]
    NotPositiveDefinite,
    #[error("symmetric eigensolver failed")]
    EigenFailure,
    #[error("t-grid too coarse: refinement disagreement {disagreement:e}")]
    GridTooCoarse { disagreement: f64 },
    #[error("oracle value increased by {increase:e} at level {level}")]
    NonMonotone { level: usize, increase: f64 },
    #[error("quadrature not converged: levels differ by {relative:e}")]
    NotConverged { relative: f64 },
    #[error("unsupported element geometry: {0}")]
    Unsupported(&'static str),
    #[error(transparent)]
    Space(#[from] HpError),
}
