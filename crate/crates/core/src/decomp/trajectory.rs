use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::patch::{fit_local, patch_ref, pushforward, PatchRef};
use super::{DecompError, Decomposition};
use crate::hpspace::{HpSpace, ShapeTag};
use crate::lifting::{lift_prism, EdgeSet};
use crate::mesh::{ElementKind, PatchKind};
use crate::polyalg::{gauss_jacobi_unit, gauss_legendre_on, make_quadrature, MomentTable, MultiPoly, RefDomain};

/// Number of log-spaced knots in quad-element trajectories.
pub const KNOTS: usize = 40;
const KNOT_RANGE: (f64, f64) = (1e-4, 1e2);
const POINTS_PER_SEGMENT: usize = 24;

/// Time dependence of one part, acting on a fixed set of global dofs.
#[derive(Clone, Debug, PartialEq)]
pub enum PartPath {
    /// `Σ_j (t/scale)^j c_j` on `[0, scale)`, zero afterwards.
    Polynomial { dofs: Vec<usize>, coeffs: Vec<Vec<f64>>, scale: f64 },
    /// Linear between knots (the first at `t = 0`), zero after the last.
    PiecewiseLinear { dofs: Vec<usize>, knots: Vec<f64>, values: Vec<Vec<f64>> },
}

impl PartPath {
    fn dofs(&self) -> &[usize] {
        match self {
            PartPath::Polynomial { dofs, .. } | PartPath::PiecewiseLinear { dofs, .. } => dofs,
        }
    }

    pub fn end(&self) -> f64 {
        match self {
            PartPath::Polynomial { scale, .. } => *scale,
            PartPath::PiecewiseLinear { knots, .. } => *knots.last().unwrap_or(&0.0),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            PartPath::Polynomial { scale, .. } => vec![0.0, *scale],
            PartPath::PiecewiseLinear { knots, .. } => knots.clone(),
        }
    }

    /// Value (`deriv = false`) or right derivative at `t`, on the part's dofs.
    fn local(&self, t: f64, deriv: bool) -> Option<Vec<f64>> {
        match self {
            PartPath::Polynomial { coeffs, scale, .. } => {
                if t >= *scale || coeffs.is_empty() {
                    return None;
                }
                let s = t / scale;
                let n = coeffs[0].len();
                let mut out = vec![0.0; n];
                for (j, c) in coeffs.iter().enumerate() {
                    let w = if deriv {
                        if j == 0 {
                            continue;
                        }
                        j as f64 * s.powi(j as i32 - 1) / scale
                    } else {
                        s.powi(j as i32)
                    };
                    for (o, v) in out.iter_mut().zip(c) {
                        *o += w * v;
                    }
                }
                Some(out)
            }
            PartPath::PiecewiseLinear { knots, values, .. } => {
                if knots.len() < 2 || t >= *knots.last().unwrap() {
                    return None;
                }
                let i = knots.partition_point(|&k| k <= t).saturating_sub(1).min(knots.len() - 2);
                let (a, b) = (knots[i], knots[i + 1]);
                let r = (t - a) / (b - a);
                Some(
                    values[i]
                        .iter()
                        .zip(&values[i + 1])
                        .map(|(x, y)| if deriv { (y - x) / (b - a) } else { x + r * (y - x) })
                        .collect(),
                )
            }
        }
    }

    fn rescaled(&self, h: f64) -> Self {
        match self {
            PartPath::Polynomial { dofs, coeffs, scale } => {
                PartPath::Polynomial { dofs: dofs.clone(), coeffs: coeffs.clone(), scale: scale * h }
            }
            PartPath::PiecewiseLinear { dofs, knots, values } => PartPath::PiecewiseLinear {
                dofs: dofs.clone(),
                knots: knots.iter().map(|k| k * h).collect(),
                values: values.clone(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPart {
    /// `"edge 3"`, `"element 0"`, ...
    pub label: String,
    pub path: PartPath,
}

/// `t ↦ v(t)` in global coefficients as a sum of independent parts.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftTrajectory {
    pub dim: usize,
    pub parts: Vec<TrajectoryPart>,
}

impl LiftTrajectory {
    pub fn new(dim: usize, parts: Vec<TrajectoryPart>) -> Self {
        Self { dim, parts }
    }

    fn gather(&self, t: f64, deriv: bool) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for p in &self.parts {
            if let Some(v) = p.path.local(t, deriv) {
                for (&g, x) in p.path.dofs().iter().zip(v) {
                    out[g] += x;
                }
            }
        }
        out
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.gather(t, false)
    }

    /// Right derivative in `t`.
    pub fn derivative(&self, t: f64) -> Vec<f64> {
        self.gather(t, true)
    }

    /// Smallest time after which every part vanishes.
    pub fn support_end(&self) -> f64 {
        self.parts.iter().map(|p| p.path.end()).fold(0.0, f64::max)
    }

    /// Sorted distinct times where some part changes its formula.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.parts.iter().flat_map(|p| p.path.breakpoints()).collect();
        b.push(0.0);
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
        b
    }

    /// `t ↦ v(t/h)`.
    pub fn rescaled(&self, h: f64) -> Self {
        let parts =
            self.parts.iter().map(|p| TrajectoryPart { label: p.label.clone(), path: p.path.rescaled(h) }).collect();
        Self { dim: self.dim, parts }
    }
}

/// Log-uniform knots on `[1e-4, 1e2]`.
pub fn knot_grid() -> Vec<f64> {
    let (lo, hi) = (KNOT_RANGE.0.ln(), KNOT_RANGE.1.ln());
    (0..KNOTS).map(|i| (lo + (hi - lo) * i as f64 / (KNOTS - 1) as f64).exp()).collect()
}

/// Piecewise linear path through the K-functional minimizers
/// `(M + τ²S)⁻¹ M u₀` at `τ = t/h` on the knot grid, starting from `u₀` at
/// `t = 0` and dropping to zero one knot step after the last.
pub fn eigen_knot_path(m: &DMatrix<f64>, s: &DMatrix<f64>, u0: &[f64], h: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let grid = knot_grid();
    let u = DVector::from_column_slice(u0);
    let mu = m * &u;
    let mut knots = vec![0.0];
    let mut values = vec![u0.to_vec()];
    for &tau in &grid {
        let sys = m + s * (tau * tau);
        let v = sys.cholesky().expect("mass plus stiffness is SPD").solve(&mu);
        knots.push(tau * h);
        values.push(v.iter().copied().collect());
    }
    let step = grid[1] / grid[0];
    knots.push(grid[KNOTS - 1] * step * h);
    values.push(vec![0.0; u0.len()]);
    (knots, values)
}

/// Coefficients of `z^j` in a polynomial in `(x, y, z)`, as polynomials in `(x, y)`.
fn z_slices(p: &MultiPoly) -> Vec<MultiPoly> {
    let deg = p.degree_in(2) as usize;
    let mut out = vec![MultiPoly::zero(2); deg + 1];
    for (e, &c) in p.terms() {
        out[e[2] as usize].add_term([e[0], e[1], 0], c);
    }
    out
}

fn sparse(dense: &[Vec<f64>]) -> (Vec<usize>, Vec<Vec<f64>>) {
    let n = dense.first().map_or(0, Vec::len);
    let dofs: Vec<usize> = (0..n).filter(|&g| dense.iter().any(|c| c[g] != 0.0)).collect();
    let coeffs = dense.iter().map(|c| dofs.iter().map(|&g| c[g]).collect()).collect();
    (dofs, coeffs)
}

fn patch_path(
    reference: &MultiPoly,
    pr: &PatchRef,
    edges: &EdgeSet,
    space: &HpSpace,
    moments: &MomentTable,
) -> Result<PartPath, DecompError> {
    let lifted = lift_prism(reference, edges, moments)?;
    let dense =
        z_slices(&lifted.poly).iter().map(|s| pushforward(s, pr, space)).collect::<Result<Vec<_>, DecompError>>()?;
    let (dofs, coeffs) = sparse(&dense);
    Ok(PartPath::Polynomial { dofs, coeffs, scale: pr.h })
}

/// Global interior dofs of `element` with their local indices.
fn interior_dofs(space: &HpSpace, element: usize) -> Vec<(usize, usize)> {
    let set = space.shape_set(element);
    space.dofs.local_to_global[element]
        .iter()
        .enumerate()
        .filter_map(|(i, d)| match (set.funcs[i].tag, d) {
            (ShapeTag::Interior(_), Some(d)) => Some((i, d.global)),
            _ => None,
        })
        .collect()
}

fn bubble_forms(space: &HpSpace, element: usize, local: &[usize]) -> (DMatrix<f64>, DMatrix<f64>) {
    let set = space.shape_set(element);
    let rule = make_quadrature(RefDomain::Rectangle, 2 * set.degree + 2);
    let tab = set.tabulate(&rule);
    let n = local.len();
    let (mut m, mut s) = (DMatrix::zeros(n, n), DMatrix::zeros(n, n));
    for (q, w) in rule.weights.iter().enumerate() {
        for (a, &i) in local.iter().enumerate() {
            for (b, &j) in local.iter().enumerate() {
                m[(a, b)] += w * tab.values[q][i] * tab.values[q][j];
                let (gi, gj) = (tab.grads[q][i], tab.grads[q][j]);
                s[(a, b)] += w * (gi[0] * gj[0] + gi[1] * gj[1]);
            }
        }
    }
    (m, s)
}

fn element_path(space: &HpSpace, element: usize, coeffs: &[f64], moments: &MomentTable) -> Result<PartPath, DecompError> {
    let h = space.mesh.h[element];
    let ints = interior_dofs(space, element);
    let dofs: Vec<usize> = ints.iter().map(|&(_, g)| g).collect();
    match space.mesh.elements[element].kind {
        ElementKind::Tri => {
            let u = space.element_poly(coeffs, element);
            let lifted = lift_prism(&u, &EdgeSet::all(), moments)?;
            let mut out = Vec::new();
            for slice in z_slices(&lifted.poly) {
                let local = fit_local(space, element, &slice);
                let scale = local.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(u.max_coeff()).max(1e-300);
                let stray = (0..local.len())
                    .filter(|i| !ints.iter().any(|&(j, _)| j == *i))
                    .fold(0.0f64, |a, i| a.max(local[i].abs()));
                if stray > 1e-9 * scale {
                    return Err(DecompError::TraceMismatch { center: element, relative: stray / scale });
                }
                out.push(ints.iter().map(|&(i, _)| local[i]).collect());
            }
            Ok(PartPath::Polynomial { dofs, coeffs: out, scale: h })
        }
        ElementKind::Quad => {
            let local: Vec<usize> = ints.iter().map(|&(i, _)| i).collect();
            let (m, s) = bubble_forms(space, element, &local);
            let u0: Vec<f64> = dofs.iter().map(|&g| coeffs[g]).collect();
            let (knots, values) = eigen_knot_path(&m, &s, &u0, h);
            Ok(PartPath::PiecewiseLinear { dofs, knots, values })
        }
    }
}

/// Lifting trajectory of a decomposition: every patch part is lifted to
/// the prism with the prism height playing `t/h_ω` and pushed forward
/// slice by slice; triangle bubbles are lifted the same way; quad bubbles
/// follow the piecewise linear K-minimizer path.
pub fn build_lift_trajectory(d: &Decomposition, space: &HpSpace, moments: &MomentTable) -> Result<LiftTrajectory, DecompError> {
    let mesh = &space.mesh;
    let mut jobs: Vec<(String, Box<dyn Fn() -> Result<PartPath, DecompError> + Send + Sync + '_>)> = Vec::new();
    for p in d.vertex_parts.iter().filter(|p| !p.reference.is_zero()) {
        jobs.push((
            format!("vertex {}", p.vertex),
            Box::new(move || {
                let pr = patch_ref(mesh, PatchKind::Vertex, p.vertex)?;
                patch_path(&p.reference, &pr, &EdgeSet::new(&[2])?, space, moments)
            }),
        ));
    }
    for p in d.edge_parts.iter().filter(|p| !p.reference.is_zero()) {
        jobs.push((
            format!("edge {}", p.edge),
            Box::new(move || {
                let pr = patch_ref(mesh, PatchKind::Edge, p.edge)?;
                patch_path(&p.reference, &pr, &EdgeSet::new(&[1, 2])?, space, moments)
            }),
        ));
    }
    for p in d.interior_parts.iter().filter(|p| p.coeffs.iter().any(|&c| c != 0.0)) {
        jobs.push((format!("element {}", p.element), Box::new(move || element_path(space, p.element, &p.coeffs, moments))));
    }
    let parts = jobs
        .par_iter()
        .map(|(label, job)| Ok(TrajectoryPart { label: label.clone(), path: job()? }))
        .collect::<Result<Vec<_>, DecompError>>()?;
    Ok(LiftTrajectory::new(space.dim(), parts))
}

/// The two halves of the trace integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceIntegral {
    /// `∫ t^{2(1−θ)} |v(t)|₁² dt/t`.
    pub gradient: f64,
    /// `∫ t^{2(1−θ)} ‖v′(t)‖₀² dt/t`.
    pub rate: f64,
}

impl TraceIntegral {
    pub fn total(&self) -> f64 {
        self.gradient + self.rate
    }
}

fn quad_form(a: &DMatrix<f64>, v: &[f64]) -> f64 {
    let x = DVector::from_column_slice(v);
    x.dot(&(a * &x))
}

/// Segment-wise Gauss quadrature of the trace integral; the first segment
/// uses Gauss–Jacobi for the `t^{1−2θ}` weight.
pub fn trace_integral(
    traj: &LiftTrajectory,
    theta: f64,
    mass: &DMatrix<f64>,
    stiffness: &DMatrix<f64>,
) -> Result<TraceIntegral, DecompError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(DecompError::InvalidParameter("theta must lie in (0, 1)"));
    }
    let beta = 1.0 - 2.0 * theta;
    let bps = traj.breakpoints();
    let (gj_x, gj_w) = gauss_jacobi_unit(POINTS_PER_SEGMENT, 0.0, beta);
    let segments: Vec<(f64, f64)> = bps.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect();
    let sums: Vec<(f64, f64)> = segments
        .par_iter()
        .map(|&(a, b)| {
            let nodes: Vec<(f64, f64)> = if a == 0.0 {
                let s = b.powf(beta + 1.0);
                gj_x.iter().zip(&gj_w).map(|(x, w)| (b * x, w * s)).collect()
            } else {
                let (x, w) = gauss_legendre_on(POINTS_PER_SEGMENT, a, b);
                x.into_iter().zip(w).map(|(t, w)| (t, w * t.powf(beta))).collect()
            };
            nodes.iter().fold((0.0, 0.0), |(g, r), &(t, w)| {
                (g + w * quad_form(stiffness, &traj.eval(t)), r + w * quad_form(mass, &traj.derivative(t)))
            })
        })
        .collect();
    let (gradient, rate) = sums.iter().fold((0.0, 0.0), |(g, r), (a, b)| (g + a, r + b));
    Ok(TraceIntegral { gradient, rate })
}

#[cfg(test)]
mod tests {
    use super::super::decompose;
    use super::*;
    use crate::hpspace::DofEntity;
    use crate::mesh::{criss_cross, mixed_strip, quad_grid};
    use crate::polyalg::mollifier_moments;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn random(space: &HpSpace, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..space.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn moments() -> MomentTable {
        mollifier_moments(2, 12).unwrap()
    }

    fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
        let s = b.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / s
    }

    #[test]
    fn initial_value_is_the_high_order_part() {
        for mesh in [mixed_strip(1, 2, 4), criss_cross(1, 3), quad_grid(2, 3, [0.0, 0.0, 1.0, 1.0])] {
            for dirichlet in [false, true] {
                let space = HpSpace::new(&mesh, dirichlet).unwrap();
                let u = random(&space, 4);
                let d = decompose(&u, &space).unwrap();
                let traj = build_lift_trajectory(&d, &space, &moments()).unwrap();
                let want: Vec<f64> = u.iter().zip(&d.lowest).map(|(a, b)| a - b).collect();
                assert!(rel_diff(&traj.eval(0.0), &want) <= 1e-10);
                let end = traj.support_end();
                assert!(traj.eval(end).iter().all(|&c| c == 0.0));
                assert!(traj.eval(2.0 * end).iter().all(|&c| c == 0.0));
            }
        }
    }

    #[test]
    fn triangle_bubble_stops_at_its_diameter() {
        let space = HpSpace::new(&criss_cross(1, 4), true).unwrap();
        let g = space.dofs_where(|e| matches!(e, DofEntity::Interior { element: 1, .. }))[0];
        let u = space.basis_vector(g);
        let traj = build_lift_trajectory(&decompose(&u, &space).unwrap(), &space, &moments()).unwrap();
        let h = space.mesh.h[1];
        assert_eq!(traj.parts.len(), 1);
        assert!((traj.support_end() - h).abs() < 1e-15);
        // the prism lift vanishes on its top face, so the path is continuous at h
        let near = traj.eval(h * (1.0 - 1e-9));
        assert!(near.iter().all(|c| c.abs() < 1e-7));
    }

    #[test]
    fn trajectory_is_continuous_at_breakpoints() {
        let space = HpSpace::new(&mixed_strip(1, 3, 6), false).unwrap();
        let u = random(&space, 2);
        let traj = build_lift_trajectory(&decompose(&u, &space).unwrap(), &space, &moments()).unwrap();
        let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for &t in traj.breakpoints().iter().skip(1) {
            let (l, r) = (traj.eval(t * (1.0 - 1e-13)), traj.eval(t));
            assert!(rel_diff(&l, &r) * r.iter().fold(1e-300f64, |m, x| m.max(x.abs())) <= 1e-10 * scale, "t = {t}");
        }
    }

    #[test]
    fn zero_trajectory_integrates_to_zero() {
        let traj = LiftTrajectory::new(3, vec![]);
        let m = DMatrix::identity(3, 3);
        assert_eq!(trace_integral(&traj, 0.5, &m, &m).unwrap().total(), 0.0);
    }

    fn single_mode(h: f64) -> LiftTrajectory {
        let one = DMatrix::from_element(1, 1, 1.0);
        let (knots, values) = eigen_knot_path(&one, &one, &[1.0], h);
        LiftTrajectory::new(1, vec![TrajectoryPart { label: "mode".into(), path: PartPath::PiecewiseLinear { dofs: vec![0], knots, values } }])
    }

    #[test]
    fn single_mode_matches_closed_form() {
        // v(t) = φ/(1+t²): ∫ t^{1−2θ}/(1+t²)² = πθ/(2 sin πθ),
        // ∫ 4t^{3−2θ}/(1+t²)⁴ = (1−θ²)πθ/(3 sin πθ)
        let one = DMatrix::from_element(1, 1, 1.0);
        for theta in [0.3, 0.5, 0.7] {
            let s = (PI * theta).sin();
            let exact = PI * theta / (2.0 * s) + (1.0 - theta * theta) * PI * theta / (3.0 * s);
            let got = trace_integral(&single_mode(1.0), theta, &one, &one).unwrap().total();
            assert!((got / exact - 1.0).abs() < 0.1, "θ={theta}: {got} vs {exact}");
        }
    }

    #[test]
    fn time_rescaling_law() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let theta = 0.4;
        let base = trace_integral(&single_mode(1.0), theta, &one, &one).unwrap();
        let h = 0.5;
        let half = trace_integral(&single_mode(1.0).rescaled(h), theta, &one, &one).unwrap();
        assert!((half.gradient / (h.powf(2.0 - 2.0 * theta) * base.gradient) - 1.0).abs() < 1e-8);
        assert!((half.rate / (h.powf(-2.0 * theta) * base.rate) - 1.0).abs() < 1e-8);
    }
}
