use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::trajectory::{build_lift_trajectory, trace_integral, TraceIntegral};
use super::{decompose, DecompError, Decomposition};
use crate::fracnorm::{
    discrete_gram, oracle_spectrum, slobodeckij_poly, weighted_distance_norm, DistanceSet, NormError, OracleSpec,
    SlobodeckijOptions, Variant,
};
use crate::hpspace::HpSpace;
use crate::mesh::{ref_vertex, ElementKind, ElementMap};
use crate::polyalg::refgeom::{RECT_Y_HI, RECT_Y_LO, TRI_VERTS};
use crate::polyalg::{gauss_jacobi_unit, mollifier_moments, MomentTable, MultiPoly};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilitySpec {
    pub samples: usize,
    pub seed: u64,
    pub oracle: OracleSpec,
    pub slobodeckij: SlobodeckijOptions,
    /// Distance from the constrained edges beyond which sup-norms are sampled.
    pub delta: f64,
    /// Evaluate the per-part norms (the slow double integrals).
    pub part_norms: bool,
    pub mollifier: u32,
}

impl Default for StabilitySpec {
    fn default() -> Self {
        Self {
            samples: 4,
            seed: 1,
            oracle: OracleSpec::default(),
            slobodeckij: SlobodeckijOptions::default(),
            delta: 0.2,
            part_norms: true,
            mollifier: 2,
        }
    }
}

/// Interpolation seminorm of `v(0)` against the trace integral of its lifting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceChain {
    pub seminorm_sq: f64,
    pub trace: TraceIntegral,
}

impl TraceChain {
    /// `|v(0)|²_θ / ∫(…)`; zero when both vanish.
    pub fn ratio(&self) -> f64 {
        let t = self.trace.total();
        if t == 0.0 {
            0.0
        } else {
            self.seminorm_sq / t
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityRow {
    pub sample: usize,
    pub oracle_sq: f64,
    /// Weighted sum of squared part norms, if evaluated.
    pub parts_sq: Option<f64>,
    pub chain: TraceChain,
}

impl StabilityRow {
    pub fn parts_ratio(&self) -> Option<f64> {
        self.parts_sq.map(|p| p / self.oracle_sq)
    }

    pub fn trace_ratio(&self) -> f64 {
        self.chain.trace.total() / self.oracle_sq
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityTable {
    pub theta: f64,
    pub h_max: f64,
    pub max_degree: u32,
    pub dim: usize,
    pub rows: Vec<StabilityRow>,
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > 0.0 && lo.is_finite() {
        hi / lo
    } else {
        f64::INFINITY
    }
}

impl StabilityTable {
    /// `max/min` of the part-norm ratios.
    pub fn parts_spread(&self) -> f64 {
        spread(self.rows.iter().filter_map(StabilityRow::parts_ratio))
    }

    pub fn trace_spread(&self) -> f64 {
        spread(self.rows.iter().map(StabilityRow::trace_ratio))
    }

    pub fn chain_spread(&self) -> f64 {
        spread(self.rows.iter().map(|r| r.chain.ratio()))
    }
}

fn quad_form(a: &DMatrix<f64>, v: &[f64]) -> f64 {
    let x = DVector::from_column_slice(v);
    x.dot(&(a * &x))
}

/// Trace chains for several functions on one space; the discrete seminorm
/// Gram matrix and the forms are built once.
pub fn trace_chain(
    us: &[Vec<f64>],
    space: &HpSpace,
    theta: f64,
    moments: &MomentTable,
) -> Result<Vec<(Decomposition, TraceChain)>, DecompError> {
    let (m, s) = space.assemble_forms();
    let semi = discrete_gram(space, theta, Variant::Seminorm)?;
    us.iter()
        .map(|u| {
            let d = decompose(u, space)?;
            let traj = build_lift_trajectory(&d, space, moments)?;
            let v0 = traj.eval(0.0);
            let trace = trace_integral(&traj, theta, &m.matrix, &s.matrix)?;
            Ok((d, TraceChain { seminorm_sq: quad_form(&semi, &v0), trace }))
        })
        .collect()
}

/// `‖d^{−θ} u‖_{L²(Ŝ)}` with `d` the distance to the rectangle boundary.
///
/// The rectangle is cut into four triangles joining each side to the centre;
/// Gauss–Jacobi in the direction normal to the side absorbs the singularity
/// for `θ < 1/2`. Larger `θ` is finite only for functions vanishing on the
/// boundary, whose square cancels the weight, so plain Gauss–Legendre is used.
pub fn quad_distance_norm(u: &MultiPoly, theta: f64, order: usize) -> Result<f64, NormError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(NormError::ThetaOutOfRange(theta));
    }
    let (lo, hi) = (RECT_Y_LO, RECT_Y_HI);
    let c = [0.0, 0.5 * (lo + hi)];
    let corners = [[-1.0, lo], [1.0, lo], [1.0, hi], [-1.0, hi]];
    let beta = if theta < 0.5 { -2.0 * theta } else { 0.0 };
    let (rs, rw) = gauss_jacobi_unit(order, 1.0, beta);
    let (ss, sw) = gauss_jacobi_unit(order, 0.0, 0.0);
    let dist = |x: [f64; 2]| (x[0] + 1.0).min(1.0 - x[0]).min(x[1] - lo).min(hi - x[1]);
    let mut total = 0.0;
    for i in 0..4 {
        let (a, b) = (corners[i], corners[(i + 1) % 4]);
        let e = [b[0] - a[0], b[1] - a[1]];
        let det = (e[0] * (c[1] - a[1]) - e[1] * (c[0] - a[0])).abs();
        let height = det / (e[0] * e[0] + e[1] * e[1]).sqrt();
        for (r, wr) in rs.iter().zip(&rw) {
            for (s, ws) in ss.iter().zip(&sw) {
                let base = [a[0] + s * e[0], a[1] + s * e[1]];
                let x = [(1.0 - r) * base[0] + r * c[0], (1.0 - r) * base[1] + r * c[1]];
                let d_side = r * height;
                let d = dist(x);
                // d^{−2θ} = (rH)^{−2θ} (d_side/d)^{2θ}; (1−r) and r^β sit in the weight
                let f = u.eval(&x).powi(2)
                    * height.powf(-2.0 * theta)
                    * r.powf(-2.0 * theta - beta)
                    * (d_side / d).powf(2.0 * theta);
                total += wr * ws * det * f;
            }
        }
    }
    Ok(total.sqrt())
}

fn identity_map(kind: ElementKind) -> ElementMap {
    ElementMap::new(kind, (0..kind.num_vertices()).map(|i| ref_vertex(kind, i)).collect())
}

/// `max(sup |u|, sup |∇u|)` over lattice points of `T̂` at distance at least
/// `delta` from the edge set.
fn sampled_w1inf(u: &MultiPoly, set: &DistanceSet, delta: f64) -> f64 {
    let (gx, gy) = (u.derivative(0), u.derivative(1));
    let n = 24;
    let mut best = 0.0f64;
    for i in 0..=n {
        for j in 0..=n - i {
            let (l1, l2) = (i as f64 / n as f64, j as f64 / n as f64);
            let l3 = 1.0 - l1 - l2;
            let x = [
                l1 * TRI_VERTS[0][0] + l2 * TRI_VERTS[1][0] + l3 * TRI_VERTS[2][0],
                l1 * TRI_VERTS[0][1] + l2 * TRI_VERTS[1][1] + l3 * TRI_VERTS[2][1],
            ];
            if set.distance(x) < delta {
                continue;
            }
            let g = gx.eval(&x).hypot(gy.eval(&x));
            best = best.max(u.eval(&x).abs()).max(g);
        }
    }
    best
}

/// Coefficient vectors with entries uniform in `[−1, 1)`.
pub fn random_functions(dim: usize, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

/// Weighted sum of squared vertex, edge and interior part norms.
pub fn parts_norm_sq(d: &Decomposition, space: &HpSpace, theta: f64, spec: &StabilitySpec) -> Result<f64, DecompError> {
    let scale = |h: f64| h.powf(2.0 - 2.0 * theta);
    let order = |p: &MultiPoly| p.degree() as usize + 6;
    let tri = identity_map(ElementKind::Tri);
    let rect = identity_map(ElementKind::Quad);
    let mut total = 0.0;
    let edges_12 = DistanceSet::edges(&[1, 2]);
    for p in d.edge_parts.iter().filter(|p| !p.reference.is_zero()) {
        let pr = super::patch_ref(&space.mesh, crate::mesh::PatchKind::Edge, p.edge)?;
        let u = &p.reference;
        let semi = slobodeckij_poly(u, &tri, theta, spec.slobodeckij)?.squared();
        let wd = weighted_distance_norm(u, &edges_12, theta, order(u))?.powi(2);
        let sup = sampled_w1inf(u, &edges_12, spec.delta).powi(2);
        total += scale(pr.h) * (semi + wd + sup);
    }
    let all = DistanceSet::edges(&[0, 1, 2]);
    for p in d.interior_parts.iter().filter(|p| p.coeffs.iter().any(|&c| c != 0.0)) {
        let k = p.element;
        let u = space.element_poly(&p.coeffs, k);
        let local = match space.mesh.elements[k].kind {
            ElementKind::Tri => {
                slobodeckij_poly(&u, &tri, theta, spec.slobodeckij)?.squared()
                    + weighted_distance_norm(&u, &all, theta, order(&u))?.powi(2)
            }
            ElementKind::Quad => {
                slobodeckij_poly(&u, &rect, theta, spec.slobodeckij)?.squared()
                    + quad_distance_norm(&u, theta, order(&u) + 6)?.powi(2)
            }
        };
        total += scale(space.mesh.h[k]) * local;
    }
    Ok(total)
}

/// Random functions on `space`: squared part norms, trace integral and
/// seminorm chain, each against the oracle norm.
pub fn measure_decomp_stability(space: &HpSpace, theta: f64, spec: &StabilitySpec) -> Result<StabilityTable, DecompError> {
    if spec.samples == 0 {
        return Err(DecompError::InvalidParameter("at least one sample"));
    }
    let max_degree = space.mesh.elements.iter().map(|e| e.degree).max().unwrap_or(1);
    let moments = mollifier_moments(spec.mollifier, max_degree + 2)?;
    let oracle = oracle_spectrum(space, spec.oracle)?.theta_gram(theta)?;
    let us = random_functions(space.dim(), spec.samples, spec.seed);
    let chains = trace_chain(&us, space, theta, &moments)?;
    let mut rows = Vec::with_capacity(us.len());
    for (i, (u, (d, chain))) in us.iter().zip(chains).enumerate() {
        let parts_sq = if spec.part_norms { Some(parts_norm_sq(&d, space, theta, spec)?) } else { None };
        rows.push(StabilityRow { sample: i, oracle_sq: quad_form(&oracle, u), parts_sq, chain });
    }
    Ok(StabilityTable { theta, h_max: space.mesh.h_max(), max_degree, dim: space.dim(), rows })
}
