use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::eig::GenEigBasis;
use super::NormError;

/// Which stronger norm enters the K-functional.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Variant {
    /// `‖v‖₁² = H⁻²‖v‖₀² + |v|₁²`; `scale = 1` is the plain `H¹` norm.
    Full { scale: f64 },
    /// `|v|₁` only.
    Seminorm,
}

impl Variant {
    pub const H1: Variant = Variant::Full { scale: 1.0 };

    /// Stronger form assembled from mass and stiffness.
    pub fn form(self, m: &DMatrix<f64>, s: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Variant::Full { scale } => m / (scale * scale) + s,
            Variant::Seminorm => s.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaParams {
    pub theta: f64,
    pub variant: Variant,
}

impl ThetaParams {
    pub fn new(theta: f64, variant: Variant) -> Result<Self, NormError> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(NormError::ThetaOutOfRange(theta));
        }
        Ok(Self { theta, variant })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum NormMethod {
    EigenExact,
    TQuadrature,
    DoubleIntegral,
    Oracle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    /// The norm itself (not squared).
    pub value: f64,
    pub method: NormMethod,
    pub diagnostics: Vec<(String, f64)>,
}

impl NormReport {
    pub fn squared(&self) -> f64 {
        self.value * self.value
    }

    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// `∫₀^∞ t^{−2θ} · t²/(1+t²) dt/t = π / (2 sin πθ)`.
pub fn c_theta(theta: f64) -> Result<f64, NormError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(NormError::ThetaOutOfRange(theta));
    }
    Ok(PI / (2.0 * (PI * theta).sin()))
}

/// `K(t, u)` from the modal expansion `K² = Σ c_i² λ_i t² / (1 + λ_i t²)`.
pub fn k_functional(u: &[f64], t: f64, basis: &GenEigBasis) -> f64 {
    let c = basis.coeffs(u);
    let t2 = t * t;
    c.iter().zip(&basis.eigenvalues).map(|(c, &l)| c * c * l.max(0.0) * t2 / (1.0 + l.max(0.0) * t2)).sum::<f64>().sqrt()
}

/// `K(t, u)` and its minimizer from `(M + t²A) v = M u`.
pub fn k_functional_direct(u: &[f64], t: f64, m: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<(f64, Vec<f64>), NormError> {
    if t <= 0.0 {
        return Err(NormError::InvalidParameter("t must be positive"));
    }
    let uv = DVector::from_column_slice(u);
    let sys = m + a * (t * t);
    let chol = sys.cholesky().ok_or(NormError::NotPositiveDefinite)?;
    let v = chol.solve(&(m * &uv));
    // (u − v) = t²(M + t²A)⁻¹Au, so K² = t² (Mu)ᵀ (M + t²A)⁻¹ A u without cancellation
    let w = chol.solve(&(a * &uv));
    let k2 = t * t * (m * &uv).dot(&w);
    Ok((k2.max(0.0).sqrt(), v.iter().copied().collect()))
}

/// Exact discrete interpolation norm `(C_θ Σ c_i² λ_i^θ)^{1/2}`.
pub fn interp_norm_discrete(u: &[f64], params: ThetaParams, basis: &GenEigBasis) -> NormReport {
    let ct = c_theta(params.theta).expect("validated theta");
    let c = basis.coeffs(u);
    let s: f64 = c.iter().zip(&basis.eigenvalues).map(|(c, &l)| c * c * l.max(0.0).powf(params.theta)).sum();
    NormReport {
        value: (ct * s).sqrt(),
        method: NormMethod::EigenExact,
        diagnostics: vec![("modes".into(), basis.dim() as f64)],
    }
}

/// Geometric grid for the `t` integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    /// Accepted relative disagreement between the grid and its every-other-point subgrid.
    pub tolerance: f64,
}

impl Default for TGrid {
    fn default() -> Self {
        Self { t_min: 1e-6, t_max: 1e6, points: 200, tolerance: 1e-7 }
    }
}

/// Trapezoid sum in `s = ln t` over the whole line: grid values plus the
/// geometric continuation of the endpoint asymptotics `K² ~ t²‖u‖_A²`
/// (left) and `K² → ‖u‖_M²` (right).
fn log_trapezoid(f: &[f64], h: f64, left_rate: f64, right_rate: f64) -> (f64, f64, f64) {
    let body: f64 = f.iter().sum::<f64>() * h;
    let rl = (-left_rate * h).exp();
    let rr = (-right_rate * h).exp();
    let left = h * f[0] * rl / (1.0 - rl);
    let right = h * f[f.len() - 1] * rr / (1.0 - rr);
    (body + left + right, left, right)
}

/// Direct numerical evaluation of `∫₀^∞ t^{−2θ} K²(t,u) dt/t`.
pub fn interp_norm_tquad(
    u: &[f64],
    params: ThetaParams,
    m: &DMatrix<f64>,
    a: &DMatrix<f64>,
    grid: TGrid,
) -> Result<NormReport, NormError> {
    let n = grid.points.max(3);
    let (s0, s1) = (grid.t_min.ln(), grid.t_max.ln());
    let h = (s1 - s0) / (n - 1) as f64;
    let theta = params.theta;
    let mut f = Vec::with_capacity(n);
    for k in 0..n {
        let s = s0 + k as f64 * h;
        let (kv, _) = k_functional_direct(u, s.exp(), m, a)?;
        f.push((-2.0 * theta * s).exp() * kv * kv);
    }
    let (full, left, right) = log_trapezoid(&f, h, 2.0 - 2.0 * theta, 2.0 * theta);
    let coarse: Vec<f64> = f.iter().step_by(2).copied().collect();
    // the subgrid may stop one step short of t_max; its continuation covers the rest
    let half = log_trapezoid(&coarse, 2.0 * h, 2.0 - 2.0 * theta, 2.0 * theta).0;
    let scale = full.abs().max(f64::MIN_POSITIVE);
    let gap = (full - half).abs() / scale;
    if full > 0.0 && gap > grid.tolerance {
        return Err(NormError::GridTooCoarse { disagreement: gap });
    }
    Ok(NormReport {
        value: full.max(0.0).sqrt(),
        method: NormMethod::TQuadrature,
        diagnostics: vec![
            ("points".into(), n as f64),
            ("tail_low".into(), left),
            ("tail_high".into(), right),
            ("refinement_gap".into(), gap),
        ],
    })
}

/// `(‖u‖_θ, ‖u‖_θ̃, ratio)` where `‖·‖_θ` interpolates with `H⁻²‖·‖₀² + |·|₁²`
/// and `‖u‖²_θ̃ = H^{−2θ}‖u‖₀² + |u|²_θ`. The ratio is `None` for `u = 0`.
pub fn kvk_norm_compare(
    u: &[f64],
    theta: f64,
    scale: f64,
    m: &DMatrix<f64>,
    s: &DMatrix<f64>,
) -> Result<(f64, f64, Option<f64>), NormError> {
    let full = super::gen_eig(m, &Variant::Full { scale }.form(m, s))?;
    let semi = super::gen_eig(m, s)?;
    let a = interp_norm_discrete(u, ThetaParams::new(theta, Variant::Full { scale })?, &full).value;
    let b2 = scale.powf(-2.0 * theta) * DVector::from_column_slice(u).dot(&(m * DVector::from_column_slice(u)))
        + interp_norm_discrete(u, ThetaParams::new(theta, Variant::Seminorm)?, &semi).squared();
    let b = b2.max(0.0).sqrt();
    Ok((a, b, if a > 0.0 { Some(b / a) } else { None }))
}

#[cfg(test)]
mod tests {
    use super::super::gen_eig;
    use super::*;
    use rand::{Rng, SeedableRng};

    fn one(x: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, x)
    }

    #[test]
    fn one_dimensional_k_functional() {
        let b = gen_eig(&one(1.0), &one(2.0)).unwrap();
        assert!((k_functional(&[1.0], 1.0, &b).powi(2) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(k_functional(&[1.0], 0.0, &b), 0.0);
        let (k, v) = k_functional_direct(&[1.0], 1.0, &one(1.0), &one(2.0)).unwrap();
        assert!((k * k - 2.0 / 3.0).abs() < 1e-15 && (v[0] - 1.0 / 3.0).abs() < 1e-15);
        // monotone approach to ‖u‖_M
        let mut prev = 0.0;
        for t in [1.0, 10.0, 100.0, 1e4] {
            let k = k_functional(&[1.0], t, &b);
            assert!(k > prev && k < 1.0);
            prev = k;
        }
        assert!(1.0 - prev < 1e-8);
    }

    #[test]
    fn kernel_of_a_gives_zero_seminorm_functional() {
        let m = DMatrix::identity(2, 2);
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 3.0]));
        let (k, v) = k_functional_direct(&[1.0, 0.0], 2.0, &m, &a).unwrap();
        assert!(k < 1e-15 && (v[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn c_theta_values() {
        assert!((c_theta(0.5).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((c_theta(0.25).unwrap() - c_theta(0.75).unwrap()).abs() < 1e-14);
        assert!(c_theta(0.0).is_err() && c_theta(1.0).is_err());
    }

    #[test]
    fn single_mode_norms() {
        let p = ThetaParams::new(0.5, Variant::H1).unwrap();
        let b = gen_eig(&one(1.0), &one(1.0)).unwrap();
        assert!((interp_norm_discrete(&[1.0], p, &b).squared() - PI / 2.0).abs() < 1e-14);
        let b4 = gen_eig(&one(1.0), &one(4.0)).unwrap();
        assert!((interp_norm_discrete(&[1.0], p, &b4).squared() - PI).abs() < 1e-14);
        let q = interp_norm_tquad(&[1.0], p, &one(1.0), &one(4.0), TGrid::default()).unwrap();
        assert!((q.squared() - PI).abs() < 1e-8 * PI);
        let q1 = interp_norm_tquad(&[1.0], p, &one(1.0), &one(1.0), TGrid::default()).unwrap();
        assert!((q1.squared() - PI / 2.0).abs() < 1e-8);
        assert_eq!(interp_norm_tquad(&[0.0], p, &one(1.0), &one(1.0), TGrid::default()).unwrap().value, 0.0);
    }

    #[test]
    fn homogeneity_and_dual_paths() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = 8;
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let m = &b * b.transpose() + DMatrix::identity(n, n);
        let c = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = &c * c.transpose();
        let basis = gen_eig(&m, &a).unwrap();
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for t in [0.1, 1.0, 7.0] {
            let (k, _) = k_functional_direct(&u, t, &m, &a).unwrap();
            assert!((k - k_functional(&u, t, &basis)).abs() <= 1e-10 * k);
        }
        let p = ThetaParams::new(0.3, Variant::H1).unwrap();
        let x = interp_norm_discrete(&u, p, &basis).value;
        let u3: Vec<f64> = u.iter().map(|v| -3.0 * v).collect();
        assert!((interp_norm_discrete(&u3, p, &basis).value - 3.0 * x).abs() < 1e-12 * x);
    }

    #[test]
    fn kvk_zero_and_unit_scale() {
        let m = DMatrix::identity(1, 1);
        let s = one(2.0);
        let (a, b, r) = kvk_norm_compare(&[0.0], 0.5, 1.0, &m, &s).unwrap();
        assert_eq!((a, b, r), (0.0, 0.0, None));
        let (_, _, r) = kvk_norm_compare(&[1.0], 0.5, 1.0, &m, &s).unwrap();
        let r = r.unwrap();
        assert!((0.1..=10.0).contains(&r));
    }
}
