use super::poly::{Exps, MultiPoly};
use super::PolyError;

/// Affine form `ℓ(x) = a·x + d`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearForm {
    pub a: Vec<f64>,
    pub d: f64,
}

impl LinearForm {
    pub fn new(a: Vec<f64>, d: f64) -> Result<Self, PolyError> {
        if a.iter().all(|&c| c == 0.0) {
            return Err(PolyError::DegenerateForm);
        }
        Ok(Self { a, d })
    }

    /// Form vanishing on the hyperplane through `point` with normal `normal`.
    pub fn through(point: &[f64], normal: &[f64]) -> Result<Self, PolyError> {
        let d = -point.iter().zip(normal).map(|(p, n)| p * n).sum::<f64>();
        Self::new(normal.to_vec(), d)
    }

    pub fn nvars(&self) -> usize {
        self.a.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() + self.d
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { a: self.a.iter().map(|c| c * s).collect(), d: self.d * s }
    }

    pub fn to_poly(&self) -> MultiPoly {
        let n = self.nvars();
        let mut p = MultiPoly::constant(n, self.d);
        for (k, &c) in self.a.iter().enumerate() {
            let mut e = [0; 3];
            e[k] = 1;
            p.add_term(e, c);
        }
        p
    }
}

/// `x ↦ Bx + b` with `B` stored row-major as `n_out × n_in`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub n_in: usize,
    pub n_out: usize,
    pub matrix: Vec<f64>,
    pub shift: Vec<f64>,
}

impl AffineMap {
    pub fn new(n_out: usize, n_in: usize, matrix: Vec<f64>, shift: Vec<f64>) -> Result<Self, PolyError> {
        if matrix.len() != n_out * n_in || shift.len() != n_out {
            return Err(PolyError::DimensionMismatch { expected: n_out * n_in, found: matrix.len() });
        }
        Ok(Self { n_in, n_out, matrix, shift })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
        }
        Self { n_in: n, n_out: n, matrix: m, shift: vec![0.0; n] }
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.n_in + col]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_out)
            .map(|r| self.shift[r] + (0..self.n_in).map(|c| self.entry(r, c) * x[c]).sum::<f64>())
            .collect()
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &AffineMap) -> Result<AffineMap, PolyError> {
        if inner.n_out != self.n_in {
            return Err(PolyError::DimensionMismatch { expected: self.n_in, found: inner.n_out });
        }
        let mut m = vec![0.0; self.n_out * inner.n_in];
        for r in 0..self.n_out {
            for c in 0..inner.n_in {
                m[r * inner.n_in + c] = (0..self.n_in).map(|k| self.entry(r, k) * inner.entry(k, c)).sum();
            }
        }
        let shift = self.apply(&inner.shift);
        AffineMap::new(self.n_out, inner.n_in, m, shift)
    }

    /// Output components as affine polynomials in the input variables.
    pub fn component_polys(&self) -> Vec<MultiPoly> {
        (0..self.n_out)
            .map(|r| {
                let mut p = MultiPoly::constant(self.n_in, self.shift[r]);
                for c in 0..self.n_in {
                    let mut e = [0; 3];
                    e[c] = 1;
                    p.add_term(e, self.entry(r, c));
                }
                p
            })
            .collect()
    }
}

/// `p ∘ m`: a polynomial in `m.n_in` variables.
pub fn compose_affine(p: &MultiPoly, m: &AffineMap) -> Result<MultiPoly, PolyError> {
    if p.nvars() != m.n_out {
        return Err(PolyError::DimensionMismatch { expected: m.n_out, found: p.nvars() });
    }
    p.substitute(&m.component_polys())
}

/// Quotient, remainder and relative residual of a division by a linear form.
#[derive(Clone, Debug)]
pub struct Division {
    pub quotient: MultiPoly,
    pub remainder: MultiPoly,
    /// `max |r_coeff| / max |p_coeff|` (0 for `p = 0`).
    pub residual: f64,
}

/// Divides `p` by `ℓ`, eliminating the variable with the largest `|a_i|`.
///
/// The remainder is free of that variable; it vanishes exactly when `p`
/// vanishes on `{ℓ = 0}`.
pub fn divide_by_linear(p: &MultiPoly, l: &LinearForm) -> Result<Division, PolyError> {
    let n = p.nvars();
    if l.nvars() != n {
        return Err(PolyError::DimensionMismatch { expected: n, found: l.nvars() });
    }
    let k = (0..n)
        .max_by(|&i, &j| l.a[i].abs().partial_cmp(&l.a[j].abs()).unwrap())
        .unwrap();
    let ak = l.a[k];
    if ak == 0.0 {
        return Err(PolyError::DegenerateForm);
    }
    let lp = l.to_poly();
    let mut rem = p.clone();
    let mut quot = MultiPoly::zero(n);
    loop {
        let m = rem.degree_in(k);
        if m == 0 {
            break;
        }
        let mut lead = MultiPoly::zero(n);
        for (e, c) in rem.terms() {
            if e[k] == m as u16 {
                let mut e2: Exps = *e;
                e2[k] -= 1;
                lead.add_term(e2, c / ak);
            }
        }
        quot = &quot + &lead;
        let sub = &lead * &lp;
        rem = &rem - &sub;
        // the leading x_k^m terms cancel analytically; drop rounding leftovers
        let stale: Vec<Exps> = rem.terms().filter(|(e, _)| e[k] == m as u16).map(|(e, _)| *e).collect();
        for e in stale {
            let c = rem.coeff(e);
            rem.add_term(e, -c);
        }
    }
    let scale = p.max_coeff();
    let residual = if scale > 0.0 { rem.max_coeff() / scale } else { 0.0 };
    Ok(Division { quotient: quot, remainder: rem, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_composition_expands_binomially() {
        let p = MultiPoly::monomial(1, [2, 0, 0], 1.0);
        let m = AffineMap::new(1, 1, vec![1.0], vec![1.0]).unwrap();
        let q = compose_affine(&p, &m).unwrap();
        assert_eq!(q, MultiPoly::from_univariate(1, 0, &[1.0, 2.0, 1.0]));
    }

    #[test]
    fn identity_composition_is_noop() {
        let p = MultiPoly::from_terms(2, [([3, 1, 0], 2.0), ([0, 2, 0], -1.0), ([0, 0, 0], 0.5)]);
        let q = compose_affine(&p, &AffineMap::identity(2)).unwrap();
        assert!(q.distance(&p) < 1e-15);
    }

    #[test]
    fn composition_dimension_mismatch_is_error() {
        let p = MultiPoly::var(2, 0);
        assert!(compose_affine(&p, &AffineMap::identity(3)).is_err());
    }

    #[test]
    fn textbook_division() {
        let x = MultiPoly::var(1, 0);
        let p = &(&x * &x) - &MultiPoly::one(1);
        let l = LinearForm::new(vec![1.0], -1.0).unwrap();
        let d = divide_by_linear(&p, &l).unwrap();
        assert_eq!(d.quotient, MultiPoly::from_univariate(1, 0, &[1.0, 1.0]));
        assert_eq!(d.residual, 0.0);
    }

    #[test]
    fn division_by_coordinate() {
        let z = MultiPoly::var(3, 2);
        let s = &MultiPoly::var(3, 0) + &MultiPoly::var(3, 1);
        let p = &z * &s;
        let l = LinearForm::new(vec![0.0, 0.0, 1.0], 0.0).unwrap();
        let d = divide_by_linear(&p, &l).unwrap();
        assert!(d.quotient.distance(&s) < 1e-15);
        assert_eq!(d.residual, 0.0);
    }

    #[test]
    fn nonvanishing_dividend_leaves_remainder() {
        let p = MultiPoly::from_terms(2, [([2, 0, 0], 1.0), ([0, 0, 0], 1.0)]);
        let l = LinearForm::new(vec![1.0, 0.0], 0.0).unwrap();
        let d = divide_by_linear(&p, &l).unwrap();
        assert!((d.residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_form_rejected() {
        assert!(LinearForm::new(vec![0.0, 0.0], 1.0).is_err());
    }
}
