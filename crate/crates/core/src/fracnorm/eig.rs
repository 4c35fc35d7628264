use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};

use super::NormError;

/// `M`-orthonormal eigenpairs of the pencil `(A, M)`.
#[derive(Clone, Debug)]
pub struct GenEigBasis {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors: `ΦᵀMΦ = I`, `ΦᵀAΦ = diag(λ)`.
    pub vectors: DMatrix<f64>,
    pub mass: DMatrix<f64>,
}

fn from_faer(a: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn symmetrize(a: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

/// Cholesky reduction `C = L⁻¹ A L⁻ᵀ` of the pencil; returns `(L, C)`.
fn reduce(m: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<(Mat<f64>, Mat<f64>), NormError> {
    let n = m.nrows();
    let llt = symmetrize(m).llt(Side::Lower).map_err(|_| NormError::NotPositiveDefinite)?;
    let l = llt.L().to_owned();
    let mut c = symmetrize(a);
    l.solve_lower_triangular_in_place(c.as_mut());
    let mut ct = c.transpose().to_owned();
    l.solve_lower_triangular_in_place(ct.as_mut());
    let c = Mat::from_fn(n, n, |i, j| 0.5 * (ct[(i, j)] + ct[(j, i)]));
    Ok((l, c))
}

/// Solves `AΦ = MΦΛ` by Cholesky reduction to a standard symmetric problem.
pub fn gen_eig(m: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<GenEigBasis, NormError> {
    let n = m.nrows();
    if n == 0 {
        return Ok(GenEigBasis { eigenvalues: vec![], vectors: DMatrix::zeros(0, 0), mass: m.clone() });
    }
    let (l, c) = reduce(m, a)?;
    let evd = c.self_adjoint_eigen(Side::Lower).map_err(|_| NormError::EigenFailure)?;
    let s = evd.S();
    let eigenvalues: Vec<f64> = (0..n).map(|i| s[i]).collect();
    let mut q = evd.U().to_owned();
    // Φ = L⁻ᵀ Q
    l.transpose().solve_upper_triangular_in_place(q.as_mut());
    Ok(GenEigBasis { eigenvalues, vectors: from_faer(q.as_ref()), mass: m.clone() })
}

/// Eigenvalues only of the pencil `(A, M)`, ascending.
pub fn gen_eigenvalues(m: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<Vec<f64>, NormError> {
    if m.nrows() == 0 {
        return Ok(vec![]);
    }
    let (_, c) = reduce(m, a)?;
    let mut v = c.self_adjoint_eigenvalues(Side::Lower).map_err(|_| NormError::EigenFailure)?;
    v.sort_by(f64::total_cmp);
    Ok(v)
}

impl GenEigBasis {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Modal coefficients `c = ΦᵀMu`.
    pub fn coeffs(&self, u: &[f64]) -> Vec<f64> {
        let mu = &self.mass * DVector::from_column_slice(u);
        (self.vectors.transpose() * mu).iter().copied().collect()
    }

    /// `MΦ diag(w(λ)) ΦᵀM`, the Gram matrix of `u ↦ Σ w(λ_i) c_i²`.
    pub fn gram(&self, w: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let g = &self.mass * &self.vectors;
        let mut scaled = g.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(w(l));
        }
        let out = scaled * g.transpose();
        (&out + out.transpose()) * 0.5
    }

    /// Largest residual `‖AΦ − MΦΛ‖_max` relative to `‖A‖_max`.
    pub fn residual(&self, a: &DMatrix<f64>) -> f64 {
        let mut r = a * &self.vectors;
        let mphi = &self.mass * &self.vectors;
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let col = mphi.column(j) * l;
            let mut rc = r.column_mut(j);
            rc -= col;
        }
        r.amax() / a.amax().max(f64::MIN_POSITIVE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    pub(crate) fn random_spd(n: usize, rng: &mut impl Rng, shift: f64) -> DMatrix<f64> {
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        &b * b.transpose() + DMatrix::identity(n, n) * shift
    }

    #[test]
    fn diagonal_pencil() {
        let m = DMatrix::identity(2, 2);
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]));
        let b = gen_eig(&m, &a).unwrap();
        assert!((b.eigenvalues[0] - 1.0).abs() < 1e-14 && (b.eigenvalues[1] - 4.0).abs() < 1e-14);
        assert!((b.vectors[(0, 0)].abs() - 1.0).abs() < 1e-14 && b.vectors[(1, 0)].abs() < 1e-14);
    }

    #[test]
    fn equal_forms_give_unit_spectrum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let m = random_spd(5, &mut rng, 0.5);
        let b = gen_eig(&m, &m).unwrap();
        assert!(b.eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-12));
    }

    #[test]
    fn random_pencil_orthogonality_and_residual() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let m = random_spd(6, &mut rng, 0.3);
        let a = random_spd(6, &mut rng, 0.0);
        let b = gen_eig(&m, &a).unwrap();
        assert!(b.residual(&a) <= 1e-9);
        let i = b.vectors.transpose() * &m * &b.vectors;
        assert!((i - DMatrix::identity(6, 6)).amax() < 1e-9);
        let d = b.vectors.transpose() * &a * &b.vectors;
        for r in 0..6 {
            for c in 0..6 {
                let e = if r == c { b.eigenvalues[r] } else { 0.0 };
                assert!((d[(r, c)] - e).abs() < 1e-9 * a.amax());
            }
        }
        assert!(b.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let only = gen_eigenvalues(&m, &a).unwrap();
        for (x, y) in only.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-10 * y.abs().max(1.0));
        }
    }

    #[test]
    fn indefinite_mass_rejected() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert!(matches!(gen_eig(&m, &m), Err(NormError::NotPositiveDefinite)));
    }
}
