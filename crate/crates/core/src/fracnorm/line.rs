//! One-dimensional hierarchical hp spaces on uniform interval partitions.

use nalgebra::DMatrix;

use crate::polyalg::gauss_legendre;

/// `L_0..=L_n` at `x`.
fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![1.0; n + 1];
    if n >= 1 {
        out[1] = x;
    }
    for k in 2..=n {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
    out
}

/// Values and `ξ`-derivatives of the local basis `(1−ξ)/2, (1+ξ)/2, φ_2..φ_q`.
pub(crate) fn local_basis(q: usize, xi: f64) -> (Vec<f64>, Vec<f64>) {
    let l = legendre_all(q, xi);
    let mut v = vec![(1.0 - xi) / 2.0, (1.0 + xi) / 2.0];
    let mut d = vec![-0.5, 0.5];
    for k in 2..=q {
        let kf = k as f64;
        v.push((l[k] - l[k - 2]) / (2.0 * (2.0 * kf - 1.0)).sqrt());
        d.push(l[k - 1] * ((2.0 * kf - 1.0) / 2.0).sqrt());
    }
    (v, d)
}

#[derive(Clone, Debug)]
pub(crate) struct Line {
    pub nodes: Vec<f64>,
    pub degree: usize,
    pub dirichlet: bool,
}

impl Line {
    pub fn uniform(a: f64, b: f64, cells: usize, degree: usize, dirichlet: bool) -> Self {
        let nodes = (0..=cells).map(|i| a + (b - a) * i as f64 / cells as f64).collect();
        Self { nodes, degree, dirichlet }
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    fn free_vertices(&self) -> usize {
        if self.dirichlet {
            self.nodes.len() - 2
        } else {
            self.nodes.len()
        }
    }

    pub fn dim(&self) -> usize {
        self.free_vertices() + self.cells() * (self.degree - 1)
    }

    fn vertex_dof(&self, v: usize) -> Option<usize> {
        if self.dirichlet {
            (v >= 1 && v + 1 < self.nodes.len()).then(|| v - 1)
        } else {
            Some(v)
        }
    }

    /// Global index of every local function on `cell` (`None` if removed).
    pub fn local_dofs(&self, cell: usize) -> Vec<Option<usize>> {
        let base = self.free_vertices() + cell * (self.degree - 1);
        let mut out = vec![self.vertex_dof(cell), self.vertex_dof(cell + 1)];
        out.extend((0..self.degree - 1).map(|k| Some(base + k)));
        out
    }

    pub fn locate(&self, x: f64) -> usize {
        let n = self.cells();
        let (a, b) = (self.nodes[0], self.nodes[n]);
        (((x - a) / (b - a) * n as f64).floor().max(0.0) as usize).min(n - 1)
    }

    fn width(&self, cell: usize) -> f64 {
        self.nodes[cell + 1] - self.nodes[cell]
    }

    pub fn to_ref(&self, cell: usize, x: f64) -> f64 {
        2.0 * (x - self.nodes[cell]) / self.width(cell) - 1.0
    }

    /// `(value, d/dx)` of all global functions supported on the cell containing `x`.
    pub fn eval(&self, x: f64) -> Vec<(usize, f64, f64)> {
        let c = self.locate(x);
        let (v, d) = local_basis(self.degree, self.to_ref(c, x));
        let s = 2.0 / self.width(c);
        self.local_dofs(c).iter().enumerate().filter_map(|(i, g)| g.map(|g| (g, v[i], d[i] * s))).collect()
    }

    pub fn forms(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.dim();
        let (xs, ws) = gauss_legendre(self.degree + 1);
        let mut m = DMatrix::zeros(n, n);
        let mut s = DMatrix::zeros(n, n);
        for c in 0..self.cells() {
            let h = self.width(c);
            let dofs = self.local_dofs(c);
            for (xi, w) in xs.iter().zip(&ws) {
                let (v, d) = local_basis(self.degree, *xi);
                for (a, ga) in dofs.iter().enumerate() {
                    let Some(ga) = ga else { continue };
                    for (b, gb) in dofs.iter().enumerate() {
                        let Some(gb) = gb else { continue };
                        m[(*ga, *gb)] += w * v[a] * v[b] * h / 2.0;
                        s[(*ga, *gb)] += w * d[a] * d[b] * 2.0 / h;
                    }
                }
            }
        }
        (m, s)
    }

    /// Coefficients in `self` of every basis function of the nested coarser `coarse`.
    pub fn prolongation_from(&self, coarse: &Line) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.dim(), coarse.dim());
        for (v, &x) in self.nodes.iter().enumerate() {
            let Some(row) = self.vertex_dof(v) else { continue };
            for (g, val, _) in coarse.eval(x) {
                p[(row, g)] = val;
            }
        }
        let (xs, ws) = gauss_legendre(self.degree + coarse.degree);
        for c in 0..self.cells() {
            let h = self.width(c);
            let dofs = self.local_dofs(c);
            for (xi, w) in xs.iter().zip(&ws) {
                let x = self.nodes[c] + (xi + 1.0) * h / 2.0;
                let (_, d) = local_basis(self.degree, *xi);
                for (g, _, dx) in coarse.eval(x) {
                    // φ_k' are orthonormal in the reference variable
                    let dxi = dx * h / 2.0;
                    for k in 2..=self.degree {
                        p[(dofs[k].expect("bubbles are free"), g)] += w * dxi * d[k];
                    }
                }
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bubble_stiffness_is_identity() {
        let l = Line::uniform(-1.0, 1.0, 1, 5, true);
        let (_, s) = l.forms();
        assert!((s - DMatrix::identity(4, 4)).amax() < 1e-13);
    }

    #[test]
    fn prolongation_preserves_functions() {
        let c = Line::uniform(0.0, 2.0, 2, 3, false);
        let f = Line::uniform(0.0, 2.0, 8, 4, false);
        let p = f.prolongation_from(&c);
        let u: Vec<f64> = (0..c.dim()).map(|i| (i as f64 * 0.7).sin()).collect();
        let uf = &p * nalgebra::DVector::from_vec(u.clone());
        for k in 0..=40 {
            let x = 2.0 * k as f64 / 40.0;
            let a: f64 = c.eval(x).iter().map(|(g, v, _)| u[*g] * v).sum();
            let b: f64 = f.eval(x).iter().map(|(g, v, _)| uf[*g] * v).sum();
            assert!((a - b).abs() < 1e-12);
        }
    }
}
