use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::PolyError;

/// Exponent tuple; unused slots stay zero.
pub type Exps = [u16; 3];

/// Sparse polynomial in 2 or 3 variables with real coefficients.
///
/// Terms are kept in a `BTreeMap` so iteration order, and therefore every
/// floating-point reduction over terms, is deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Exps, f64>,
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * f64::from(n - i) / f64::from(i + 1);
    }
    r
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        assert!((1..=3).contains(&nvars), "nvars must be 1, 2 or 3");
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::monomial(nvars, [0; 3], c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, 1.0)
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut e = [0; 3];
        e[i] = 1;
        Self::monomial(nvars, e, 1.0)
    }

    pub fn monomial(nvars: usize, exps: Exps, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        for (k, &e) in exps.iter().enumerate().skip(nvars) {
            assert!(e == 0, "exponent set on unused variable {k}");
        }
        if c != 0.0 {
            p.terms.insert(exps, c);
        }
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing duplicates.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exps, f64)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Univariate polynomial `Σ c_k t^k` placed in variable slot `var`.
    pub fn from_univariate(nvars: usize, var: usize, coeffs: &[f64]) -> Self {
        let mut p = Self::zero(nvars);
        for (k, &c) in coeffs.iter().enumerate() {
            let mut e = [0; 3];
            e[var] = k as u16;
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &f64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: Exps) -> f64 {
        self.terms.get(&exps).copied().unwrap_or(0.0)
    }

    pub fn add_term(&mut self, exps: Exps, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(exps).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&exps);
        }
    }

    /// Total degree; `0` for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| u32::from(x)).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| u32::from(e[var])).max().unwrap_or(0)
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Drops terms with `|c| <= tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        self.terms.retain(|_, c| c.abs() > tol);
        self
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect() }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert!(x.len() >= self.nvars);
        let deg = self.terms.keys().fold([0u16; 3], |mut m, e| {
            for k in 0..3 {
                m[k] = m[k].max(e[k]);
            }
            m
        });
        let mut pows: [Vec<f64>; 3] = Default::default();
        for k in 0..self.nvars {
            let mut v = Vec::with_capacity(deg[k] as usize + 1);
            let mut acc = 1.0;
            for _ in 0..=deg[k] {
                v.push(acc);
                acc *= x[k];
            }
            pows[k] = v;
        }
        let mut sum = 0.0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for k in 0..self.nvars {
                t *= pows[k][e[k] as usize];
            }
            sum += t;
        }
        sum
    }

    pub fn derivative(&self, var: usize) -> Self {
        assert!(var < self.nvars);
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut d = *e;
                d[var] -= 1;
                out.add_term(d, c * f64::from(e[var]));
            }
        }
        out
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.nvars).map(|k| self.derivative(k)).collect()
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Re-embeds the polynomial in `nvars` variables (extra slots unused).
    pub fn with_nvars(&self, nvars: usize) -> Result<Self, PolyError> {
        if nvars < self.nvars {
            for e in self.terms.keys() {
                if e[nvars..].iter().any(|&x| x > 0) {
                    return Err(PolyError::DimensionMismatch { expected: nvars, found: self.nvars });
                }
            }
        }
        Ok(Self { nvars, terms: self.terms.clone() })
    }

    /// Substitutes polynomial `subs[k]` for variable `k`. All substitutes
    /// must share one variable count, which becomes the result's.
    pub fn substitute(&self, subs: &[MultiPoly]) -> Result<Self, PolyError> {
        if subs.len() != self.nvars {
            return Err(PolyError::DimensionMismatch { expected: self.nvars, found: subs.len() });
        }
        let out_vars = subs[0].nvars;
        if subs.iter().any(|s| s.nvars != out_vars) {
            return Err(PolyError::DimensionMismatch { expected: out_vars, found: subs.iter().map(|s| s.nvars).max().unwrap_or(0) });
        }
        let mut powers: Vec<Vec<MultiPoly>> = Vec::with_capacity(self.nvars);
        for k in 0..self.nvars {
            let d = self.degree_in(k) as usize;
            let mut v = vec![MultiPoly::one(out_vars)];
            for i in 1..=d {
                let next = &v[i - 1] * &subs[k];
                v.push(next);
            }
            powers.push(v);
        }
        let mut out = MultiPoly::zero(out_vars);
        for (e, c) in &self.terms {
            let mut t = MultiPoly::constant(out_vars, *c);
            for k in 0..self.nvars {
                if e[k] > 0 {
                    t = &t * &powers[k][e[k] as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Restriction to a line `x = origin + r·dir`, as univariate coefficients in `r`.
    pub fn along_ray(&self, origin: &[f64], dir: &[f64]) -> Vec<f64> {
        let n = self.degree() as usize;
        let mut out = vec![0.0; n + 1];
        for (e, c) in &self.terms {
            // product over variables of (o_k + r d_k)^{e_k}
            let mut acc = vec![*c];
            for k in 0..self.nvars {
                let m = e[k] as u32;
                if m == 0 {
                    continue;
                }
                let mut fac = Vec::with_capacity(m as usize + 1);
                for j in 0..=m {
                    fac.push(binomial(m, j) * origin[k].powi((m - j) as i32) * dir[k].powi(j as i32));
                }
                let mut next = vec![0.0; acc.len() + fac.len() - 1];
                for (i, a) in acc.iter().enumerate() {
                    for (j, f) in fac.iter().enumerate() {
                        next[i + j] += a * f;
                    }
                }
                acc = next;
            }
            for (i, a) in acc.iter().enumerate() {
                out[i] += a;
            }
        }
        out
    }

    /// Largest coefficient of `self - other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).max_coeff()
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = ["x", "y", "z"];
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for k in 0..self.nvars {
                match e[k] {
                    0 => {}
                    1 => write!(f, "·{}", names[k])?,
                    m => write!(f, "·{}^{}", names[k], m)?,
                }
            }
        }
        Ok(())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, *c);
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut acc: BTreeMap<Exps, f64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                *acc.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        acc.retain(|_, c| *c != 0.0);
        MultiPoly { nvars: self.nvars, terms: acc }
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for MultiPoly {
            type Output = MultiPoly;
            fn $m(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $m(self, rhs: &MultiPoly) -> MultiPoly {
                (&self).$m(rhs)
            }
        }
        impl $tr<MultiPoly> for &MultiPoly {
            type Output = MultiPoly;
            fn $m(self, rhs: MultiPoly) -> MultiPoly {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Compact evaluator: coefficients flattened for repeated evaluation.
#[derive(Clone, Debug)]
pub struct PolyEval {
    nvars: usize,
    exps: Vec<Exps>,
    coeffs: Vec<f64>,
    max_deg: [usize; 3],
}

impl PolyEval {
    pub fn new(p: &MultiPoly) -> Self {
        let mut max_deg = [0usize; 3];
        let mut exps = Vec::with_capacity(p.terms.len());
        let mut coeffs = Vec::with_capacity(p.terms.len());
        for (e, c) in &p.terms {
            for k in 0..3 {
                max_deg[k] = max_deg[k].max(e[k] as usize);
            }
            exps.push(*e);
            coeffs.push(*c);
        }
        Self { nvars: p.nvars, exps, coeffs, max_deg }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut pows = [[0.0f64; 24]; 3];
        for k in 0..self.nvars {
            let mut acc = 1.0;
            for j in 0..=self.max_deg[k].min(23) {
                pows[k][j] = acc;
                acc *= x[k];
            }
        }
        let mut s = 0.0;
        for (e, c) in self.exps.iter().zip(&self.coeffs) {
            let mut t = *c;
            for k in 0..self.nvars {
                let d = e[k] as usize;
                t *= if d < 24 { pows[k][d] } else { x[k].powi(d as i32) };
            }
            s += t;
        }
        s
    }
}
