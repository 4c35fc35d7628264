use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::shapes::Tabulation;
use super::space::HpSpace;
use super::HpError;
use crate::mesh::{ref_vertex, ElementKind};
use crate::polyalg::{make_quadrature, QuadRule, RefDomain};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum FormRole {
    Mass,
    Stiffness,
    WeightedStiffness,
    Custom,
}

/// Symmetric bilinear form on a finite element space.
#[derive(Clone, Debug)]
pub struct SymForm {
    pub role: FormRole,
    pub matrix: DMatrix<f64>,
}

impl SymForm {
    pub fn new(role: FormRole, matrix: DMatrix<f64>) -> Self {
        Self { role, matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `uᵀAu`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let n = u.len();
        let mut s = 0.0;
        for j in 0..n {
            if u[j] == 0.0 {
                continue;
            }
            let mut col = 0.0;
            for i in 0..n {
                col += self.matrix[(i, j)] * u[i];
            }
            s += col * u[j];
        }
        s
    }

    pub fn asymmetry(&self) -> f64 {
        let a = &self.matrix;
        let scale = a.amax().max(f64::MIN_POSITIVE);
        (a - a.transpose()).amax() / scale
    }

    /// Coordinate-list text: `row col value` per nonzero, 17 significant digits.
    pub fn to_coo(&self) -> String {
        let mut s = String::new();
        let a = &self.matrix;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let v = a[(i, j)];
                if v != 0.0 {
                    let _ = writeln!(s, "{i} {j} {v:.16e}");
                }
            }
        }
        s
    }
}

pub(crate) fn rule_for(kind: ElementKind, p: u32) -> QuadRule {
    match kind {
        ElementKind::Tri => make_quadrature(RefDomain::Triangle, 2 * p + 2),
        ElementKind::Quad => make_quadrature(RefDomain::Rectangle, 2 * p + 4),
    }
}

/// Columns of a local block: global column index and sampled values `npts × cols`.
pub struct LocalBlock {
    pub cols: Vec<usize>,
    pub values: DMatrix<f64>,
}

struct Local {
    mass: DMatrix<f64>,
    stiff: DMatrix<f64>,
}

impl HpSpace {
    fn tabulations(&self) -> BTreeMap<(ElementKind, u32), (QuadRule, Tabulation)> {
        let mut out = BTreeMap::new();
        for (k, el) in self.mesh.elements.iter().enumerate() {
            out.entry((el.kind, el.degree)).or_insert_with(|| {
                let rule = rule_for(el.kind, el.degree);
                let tab = self.shape_set(k).tabulate(&rule);
                (rule, tab)
            });
        }
        out
    }

    fn local_forms(&self) -> Vec<Local> {
        let tabs = self.tabulations();
        (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|k| {
                let el = &self.mesh.elements[k];
                let (rule, tab) = &tabs[&(el.kind, el.degree)];
                let map = &self.mesh.maps[k];
                let n = tab.values[0].len();
                let mut mass = DMatrix::zeros(n, n);
                let mut stiff = DMatrix::zeros(n, n);
                for (q, (pt, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                    let j = map.jacobian([pt[0], pt[1]]);
                    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                    let wd = w * det;
                    // J^{-T}
                    let it = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
                    let g: Vec<[f64; 2]> = tab.grads[q]
                        .iter()
                        .map(|r| [it[0][0] * r[0] + it[0][1] * r[1], it[1][0] * r[0] + it[1][1] * r[1]])
                        .collect();
                    let v = &tab.values[q];
                    for a in 0..n {
                        for b in 0..=a {
                            mass[(a, b)] += wd * v[a] * v[b];
                            stiff[(a, b)] += wd * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                        }
                    }
                }
                for a in 0..n {
                    for b in 0..a {
                        mass[(b, a)] = mass[(a, b)];
                        stiff[(b, a)] = stiff[(a, b)];
                    }
                }
                Local { mass, stiff }
            })
            .collect()
    }

    fn scatter(&self, locals: impl Iterator<Item = (usize, DMatrix<f64>)>) -> DMatrix<f64> {
        let n = self.dim();
        let mut a = DMatrix::zeros(n, n);
        for (k, loc) in locals {
            let l2g = &self.dofs.local_to_global[k];
            for (i, di) in l2g.iter().enumerate() {
                let Some(di) = di else { continue };
                for (j, dj) in l2g.iter().enumerate() {
                    let Some(dj) = dj else { continue };
                    a[(di.global, dj.global)] += di.sign * dj.sign * loc[(i, j)];
                }
            }
        }
        a
    }

    /// Mass and stiffness forms in one pass.
    pub fn assemble_forms(&self) -> (SymForm, SymForm) {
        let locals = self.local_forms();
        let m = self.scatter(locals.iter().enumerate().map(|(k, l)| (k, l.mass.clone())));
        let s = self.scatter(locals.into_iter().enumerate().map(|(k, l)| (k, l.stiff)));
        (SymForm::new(FormRole::Mass, m), SymForm::new(FormRole::Stiffness, s))
    }

    pub fn assemble_mass(&self) -> SymForm {
        self.assemble_forms().0
    }

    pub fn assemble_stiffness(&self) -> SymForm {
        self.assemble_forms().1
    }

    /// `∫ h^{2(1−θ)} p^{−4(1−θ)} ∇φ_i·∇φ_j` with elementwise constant `h`, `p`.
    pub fn assemble_weighted_stiffness(&self, theta: f64) -> SymForm {
        let locals = self.local_forms();
        let e = 1.0 - theta;
        let m = self.scatter(locals.into_iter().enumerate().map(|(k, l)| {
            let w = self.mesh.h[k].powf(2.0 * e) * f64::from(self.mesh.elements[k].degree).powf(-4.0 * e);
            (k, l.stiff * w)
        }));
        SymForm::new(FormRole::WeightedStiffness, m)
    }

    /// Elementwise `L²(K̂)` projection of sampled functions onto the full
    /// local shape sets, merged into global coefficients.
    ///
    /// Every global dof must receive the same value from all elements that
    /// share it, and modes absent from the space must come out zero.
    pub fn project_blocks<F>(&self, ncols: usize, f: F) -> Result<DMatrix<f64>, HpError>
    where
        F: Fn(usize, &[[f64; 2]]) -> LocalBlock + Sync,
    {
        let tabs = self.tabulations();
        let locals: Vec<(Vec<usize>, DMatrix<f64>)> = (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|k| {
                let el = &self.mesh.elements[k];
                let (rule, tab) = &tabs[&(el.kind, el.degree)];
                let pts: Vec<[f64; 2]> = rule.points.iter().map(|p| [p[0], p[1]]).collect();
                let block = f(k, &pts);
                let nq = pts.len();
                let n = tab.values[0].len();
                let mut phi = DMatrix::zeros(nq, n);
                for q in 0..nq {
                    for i in 0..n {
                        phi[(q, i)] = tab.values[q][i];
                    }
                }
                let mut wphi = phi.clone();
                for q in 0..nq {
                    wphi.row_mut(q).scale_mut(rule.weights[q]);
                }
                let gram = phi.transpose() * &wphi;
                let rhs = wphi.transpose() * &block.values;
                let coeffs = gram.cholesky().expect("reference Gram is SPD").solve(&rhs);
                (block.cols, coeffs)
            })
            .collect();
        let n = self.dim();
        let mut out: DMatrix<f64> = DMatrix::zeros(n, ncols);
        let mut set = vec![false; n];
        let mut scale = vec![0.0f64; ncols];
        for (cols, c) in &locals {
            for (jj, &col) in cols.iter().enumerate() {
                scale[col] = scale[col].max(c.column(jj).amax());
            }
        }
        let mut worst = (0.0f64, 0usize);
        for (k, (cols, c)) in locals.iter().enumerate() {
            let mut touched = vec![false; n];
            for (i, d) in self.dofs.local_to_global[k].iter().enumerate() {
                for (jj, &col) in cols.iter().enumerate() {
                    let v = c[(i, jj)];
                    let tol = 1e-8 * scale[col].max(1e-300);
                    match d {
                        None => {
                            if v.abs() > tol {
                                if v.abs() / scale[col] > worst.0 {
                                    worst = (v.abs() / scale[col], k);
                                }
                            }
                        }
                        Some(d) => {
                            let v = d.sign * v;
                            let slot: &mut f64 = &mut out[(d.global, col)];
                            if set[d.global] && !touched[d.global] {
                                if (*slot - v).abs() > tol {
                                    if (*slot - v).abs() / scale[col] > worst.0 {
                                        worst = ((*slot - v).abs() / scale[col], k);
                                    }
                                }
                            } else {
                                *slot = v;
                            }
                        }
                    }
                }
                if let Some(d) = d {
                    touched[d.global] = true;
                }
            }
            for (g, t) in touched.iter().enumerate() {
                if *t {
                    set[g] = true;
                }
            }
        }
        if worst.0 > 0.0 {
            return Err(HpError::TraceMismatch { element: worst.1, relative: worst.0 });
        }
        Ok(out)
    }

    /// Coefficients of the interpolant of a function given in physical coordinates,
    /// exact when the function lies in the space.
    pub fn project_function(&self, f: impl Fn([f64; 2]) -> f64 + Sync) -> Result<Vec<f64>, HpError> {
        let m = self.project_blocks(1, |k, pts| {
            let map = &self.mesh.maps[k];
            LocalBlock { cols: vec![0], values: DMatrix::from_iterator(pts.len(), 1, pts.iter().map(|&r| f(map.apply(r)))) }
        })?;
        Ok(m.column(0).iter().copied().collect())
    }

    /// Matrix expressing every basis function of `coarse` in this (finer) space.
    /// `parent[k]` is the coarse element containing fine element `k`.
    pub fn prolongation_from(&self, coarse: &HpSpace, parent: &[usize]) -> Result<DMatrix<f64>, HpError> {
        self.project_blocks(coarse.dim(), |k, pts| {
            let pk = parent[k];
            let set = coarse.shape_set(pk);
            let l2g = &coarse.dofs.local_to_global[pk];
            let active: Vec<(usize, usize, f64)> =
                l2g.iter().enumerate().filter_map(|(i, d)| d.map(|d| (i, d.global, d.sign))).collect();
            let fmap = &self.mesh.maps[k];
            let cmap = &coarse.mesh.maps[pk];
            let mut values = DMatrix::zeros(pts.len(), active.len());
            for (q, &r) in pts.iter().enumerate() {
                let rp = cmap.inverse(fmap.apply(r));
                for (jj, &(i, _, s)) in active.iter().enumerate() {
                    values[(q, jj)] = s * set.funcs[i].poly.eval(&rp);
                }
            }
            LocalBlock { cols: active.iter().map(|a| a.1).collect(), values }
        })
    }

    /// Largest jump of `u` across interior edges, sampled at `samples` points per edge.
    pub fn max_edge_jump(&self, u: &[f64], samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for e in self.mesh.edges.iter().filter(|e| e.elements.len() == 2) {
            let (k1, l1) = e.elements[0];
            let (k2, l2) = e.elements[1];
            for s in 0..samples {
                let t = (s as f64 + 0.5) / samples as f64;
                let a = self.eval_ref(u, k1, edge_ref_point(self.mesh.elements[k1].kind, l1, t));
                let b = self.eval_ref(u, k2, edge_ref_point(self.mesh.elements[k2].kind, l2, 1.0 - t));
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }
}

/// Point at fraction `t` along local edge `local` of the reference element.
pub fn edge_ref_point(kind: ElementKind, local: usize, t: f64) -> [f64; 2] {
    let n = kind.num_vertices();
    let a = ref_vertex(kind, local);
    let b = ref_vertex(kind, (local + 1) % n);
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{mixed_strip, quad_grid, reference_rectangle, refine_uniform, Mesh};
    use rand::{Rng, SeedableRng};

    #[test]
    fn reference_quad_mass_sums_to_area() {
        let s = HpSpace::new(&reference_rectangle(1), false).unwrap();
        let m = s.assemble_mass();
        let total: f64 = m.matrix.iter().sum();
        assert!((total - 2.0 * 3f64.sqrt()).abs() < 1e-13);
        let e = m.matrix.clone().symmetric_eigen();
        assert!(e.eigenvalues.min() > 0.0);
    }

    #[test]
    fn constants_in_stiffness_kernel() {
        let s = HpSpace::new(&mixed_strip(2, 3, 3), false).unwrap();
        let (m, k) = s.assemble_forms();
        assert!(m.asymmetry() < 1e-12 && k.asymmetry() < 1e-12);
        let one = s.project_function(|_| 1.0).unwrap();
        let r = &k.matrix * nalgebra::DVector::from_vec(one);
        assert!(r.amax() < 1e-11);
        let ev = k.matrix.clone().symmetric_eigen().eigenvalues;
        let scale = ev.amax();
        assert_eq!(ev.iter().filter(|&&l| l.abs() < 1e-10 * scale).count(), 1);
    }

    #[test]
    fn weighted_stiffness_limits() {
        let s = HpSpace::new(&quad_grid(2, 3, [0.0, 0.0, 1.0, 1.0]), false).unwrap();
        let k = s.assemble_stiffness();
        let w1 = s.assemble_weighted_stiffness(1.0);
        assert!((&w1.matrix - &k.matrix).amax() < 1e-14);
        let w0 = s.assemble_weighted_stiffness(0.0);
        let h = s.mesh.h[0];
        let f = h * h / 81.0;
        assert!((&w0.matrix - &k.matrix * f).amax() < 1e-13 * k.matrix.amax());
    }

    #[test]
    fn weighted_stiffness_on_mixed_degrees_matches_elementwise_sum() {
        let mesh = mixed_strip(1, 4, 2);
        let s = HpSpace::new(&mesh, false).unwrap();
        let theta = 0.3;
        let w = s.assemble_weighted_stiffness(theta);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let u: Vec<f64> = (0..s.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // independent per-element gradient quadrature on the physical element
        let mut expect = 0.0;
        for k in 0..mesh.num_elements() {
            let el = &mesh.elements[k];
            let poly = s.element_poly(&u, k);
            let (gx, gy) = (poly.derivative(0), poly.derivative(1));
            let rule = rule_for(el.kind, el.degree + 2);
            let map = &mesh.maps[k];
            let weight = mesh.h[k].powf(2.0 * (1.0 - theta)) * f64::from(el.degree).powf(-4.0 * (1.0 - theta));
            expect += weight
                * rule.integrate(|p| {
                    let r = [p[0], p[1]];
                    let j = map.jacobian(r);
                    let det = map.det(r);
                    let (a, b) = (gx.eval(&r), gy.eval(&r));
                    let g = [(j[1][1] * a - j[1][0] * b) / det, (-j[0][1] * a + j[0][0] * b) / det];
                    (g[0] * g[0] + g[1] * g[1]) * det
                });
        }
        assert!((w.energy(&u) - expect).abs() < 1e-11 * expect);
    }

    #[test]
    fn random_functions_are_continuous() {
        let mesh = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.2, 1.1], [0.0, 1.0], [2.0, 0.5], [1.5, -0.8]],
            vec![
                (ElementKind::Quad, vec![0, 1, 2, 3], 3),
                (ElementKind::Tri, vec![1, 4, 2], 6),
                (ElementKind::Tri, vec![1, 5, 4], 5),
            ],
            vec![],
        )
        .unwrap();
        let s = HpSpace::new(&mesh, false).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let u: Vec<f64> = (0..s.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(s.max_edge_jump(&u, 20) < 1e-10);
        }
    }

    #[test]
    fn prolongation_reproduces_coarse_functions() {
        let coarse_mesh = mixed_strip(1, 2, 2);
        let coarse = HpSpace::new(&coarse_mesh, true).unwrap();
        let fine_mesh = refine_uniform(&coarse_mesh);
        let fine = HpSpace::new(&fine_mesh, true).unwrap();
        let parent: Vec<usize> = (0..fine_mesh.num_elements()).map(|k| k / 4).collect();
        let p = fine.prolongation_from(&coarse, &parent).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let u: Vec<f64> = (0..coarse.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let uf = &p * nalgebra::DVector::from_vec(u.clone());
        for k in 0..fine_mesh.num_elements() {
            let x = fine_mesh.maps[k].apply([0.05, 0.1]);
            let a = fine.eval_physical(uf.as_slice(), k, x);
            let b = coarse.eval_physical(&u, parent[k], x);
            assert!((a - b).abs() < 1e-11);
        }
        // energies agree
        let (mc, _) = coarse.assemble_forms();
        let (mf, _) = fine.assemble_forms();
        let ec = mc.energy(&u);
        let ef = mf.energy(uf.as_slice());
        assert!((ec - ef).abs() < 1e-12 * ec);
    }

    #[test]
    fn coo_export_lists_nonzeros() {
        let s = HpSpace::new(&reference_rectangle(1), false).unwrap();
        let text = s.assemble_mass().to_coo();
        assert_eq!(text.lines().count(), 16);
    }
}
