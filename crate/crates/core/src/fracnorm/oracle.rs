use nalgebra::{DMatrix, DVector};

use super::eig::{gen_eig, gen_eigenvalues};
use super::kmethod::{c_theta, NormMethod, NormReport, Variant};
use super::line::Line;
use super::NormError;
use crate::hpspace::{HpSpace, LocalBlock};
use crate::mesh::{refine_uniform, ElementKind, Mesh};

/// How the continuous norm is approximated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleSpec {
    /// Each level refines once and raises the degree by two.
    pub levels: usize,
    pub variant: Variant,
    /// Use the separable solver on axis-aligned uniform quad grids.
    pub allow_tensor: bool,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self { levels: 2, variant: Variant::H1, allow_tensor: true }
    }
}

/// Uniform refinement `levels` times with degree `+2` per level, and the
/// original ancestor of every fine element.
pub fn enrich(mesh: &Mesh, levels: usize) -> (Mesh, Vec<usize>) {
    let mut m = mesh.clone();
    let mut parent: Vec<usize> = (0..m.num_elements()).collect();
    for _ in 0..levels {
        m = refine_uniform(&m);
        parent = (0..m.num_elements()).map(|k| parent[k / 4]).collect();
    }
    let bump = 2 * levels as u32;
    (m.with_degrees(|e| e.degree + bump), parent)
}

/// Pencil `(A, M)` on a superspace, seen through a coarse space: `coupling`
/// holds the modal coefficients `φ_iᵀ M P` of every coarse basis function.
#[derive(Clone, Debug)]
struct Restricted {
    eigenvalues: Vec<f64>,
    coupling: DMatrix<f64>,
}

impl Restricted {
    fn gram(&self, w: &dyn Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.coupling.clone();
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            scaled.row_mut(i).scale_mut(w(l));
        }
        let g = self.coupling.transpose() * scaled;
        (&g + g.transpose()) * 0.5
    }
}

#[derive(Clone, Debug)]
struct Tensor {
    x: Restricted,
    y: Restricted,
    shift: f64,
    /// Maps space coefficients to tensor coefficients.
    to_tensor: DMatrix<f64>,
}

impl Tensor {
    fn gram(&self, w: &dyn Fn(f64) -> f64) -> DMatrix<f64> {
        let (nx, ny) = (self.x.coupling.ncols(), self.y.coupling.ncols());
        let n = nx * ny;
        let mut g = DMatrix::zeros(n, n);
        for (i, &mx) in self.x.eigenvalues.iter().enumerate() {
            let a = self.x.coupling.row(i);
            let h = self.y.gram(&|my| w(mx + my + self.shift));
            for al in 0..nx {
                for ga in 0..nx {
                    let c = a[al] * a[ga];
                    if c == 0.0 {
                        continue;
                    }
                    let mut blk = g.view_mut((al * ny, ga * ny), (ny, ny));
                    blk += &h * c;
                }
            }
        }
        let out = self.to_tensor.transpose() * g * &self.to_tensor;
        (&out + out.transpose()) * 0.5
    }
}

/// Spectral data of the enriched pencil restricted to a fixed coarse space;
/// build once, then evaluate Gram matrices for any weight.
#[derive(Clone, Debug)]
pub struct OracleSpectrum {
    inner: Inner,
    pub levels: usize,
    pub fine_dim: usize,
}

#[derive(Clone, Debug)]
enum Inner {
    Dense(Restricted),
    Tensor(Tensor),
}

impl OracleSpectrum {
    /// `Σ w(λ_i) (φ_iᵀMu)²` as a Gram matrix on the coarse space.
    pub fn gram(&self, w: impl Fn(f64) -> f64) -> DMatrix<f64> {
        match &self.inner {
            Inner::Dense(r) => r.gram(&w),
            Inner::Tensor(t) => t.gram(&w),
        }
    }

    /// `C_θ Σ λ_i^θ (φ_iᵀMu)²`.
    pub fn theta_gram(&self, theta: f64) -> Result<DMatrix<f64>, NormError> {
        let ct = c_theta(theta)?;
        Ok(self.gram(|l| ct * l.max(0.0).powf(theta)))
    }

    pub fn is_tensor(&self) -> bool {
        matches!(self.inner, Inner::Tensor(_))
    }
}

fn dense_spectrum(space: &HpSpace, variant: Variant, levels: usize) -> Result<OracleSpectrum, NormError> {
    if levels == 0 {
        let (m, s) = space.assemble_forms();
        let basis = gen_eig(&m.matrix, &variant.form(&m.matrix, &s.matrix))?;
        let coupling = basis.vectors.transpose() * &m.matrix;
        return Ok(OracleSpectrum {
            inner: Inner::Dense(Restricted { eigenvalues: basis.eigenvalues, coupling }),
            levels,
            fine_dim: space.dim(),
        });
    }
    let (fine_mesh, parent) = enrich(&space.mesh, levels);
    let fine = HpSpace::new_unchecked(&fine_mesh, space.dirichlet);
    let p = fine.prolongation_from(space, &parent)?;
    let (m, s) = fine.assemble_forms();
    let basis = gen_eig(&m.matrix, &variant.form(&m.matrix, &s.matrix))?;
    let coupling = basis.vectors.transpose() * (&m.matrix * p);
    Ok(OracleSpectrum {
        inner: Inner::Dense(Restricted { eigenvalues: basis.eigenvalues, coupling }),
        levels,
        fine_dim: fine.dim(),
    })
}

/// Grid lines `(xs, ys)` if the mesh is a uniform axis-aligned grid of quads
/// of one degree.
fn tensor_grid(mesh: &Mesh) -> Option<(Vec<f64>, Vec<f64>, u32)> {
    let p = mesh.elements.first()?.degree;
    if mesh.elements.iter().any(|e| e.kind != ElementKind::Quad || e.degree != p) {
        return None;
    }
    let lines = |c: usize| -> Option<Vec<f64>> {
        let mut v: Vec<f64> = mesh.vertices.iter().map(|x| x[c]).collect();
        v.sort_by(f64::total_cmp);
        let tol = 1e-12 * (v[v.len() - 1] - v[0]).abs().max(1.0);
        v.dedup_by(|a, b| (*a - *b).abs() <= tol);
        let n = v.len() - 1;
        if n == 0 {
            return None;
        }
        let step = (v[n] - v[0]) / n as f64;
        v.iter().enumerate().all(|(i, x)| (x - (v[0] + step * i as f64)).abs() <= 1e-10 * step).then_some(v)
    };
    let (xs, ys) = (lines(0)?, lines(1)?);
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    if mesh.num_elements() != nx * ny || mesh.num_vertices() != (nx + 1) * (ny + 1) {
        return None;
    }
    let mut seen = vec![false; nx * ny];
    for el in &mesh.elements {
        let c: Vec<[f64; 2]> = el.verts.iter().map(|&v| mesh.vertices[v]).collect();
        let lo = [c.iter().map(|p| p[0]).fold(f64::MAX, f64::min), c.iter().map(|p| p[1]).fold(f64::MAX, f64::min)];
        let hx = (xs[nx] - xs[0]) / nx as f64;
        let hy = (ys[ny] - ys[0]) / ny as f64;
        let ix = ((lo[0] - xs[0]) / hx).round() as usize;
        let iy = ((lo[1] - ys[0]) / hy).round() as usize;
        if ix >= nx || iy >= ny || seen[iy * nx + ix] {
            return None;
        }
        seen[iy * nx + ix] = true;
        for p in &c {
            let on_x = (p[0] - xs[ix]).abs() < 1e-10 * hx || (p[0] - xs[ix + 1]).abs() < 1e-10 * hx;
            let on_y = (p[1] - ys[iy]).abs() < 1e-10 * hy || (p[1] - ys[iy + 1]).abs() < 1e-10 * hy;
            if !(on_x && on_y) {
                return None;
            }
        }
    }
    Some((xs, ys, p))
}

fn line_spectrum(coarse: &Line, levels: usize) -> Result<(Restricted, DMatrix<f64>, DMatrix<f64>), NormError> {
    let (a, b) = (coarse.nodes[0], coarse.nodes[coarse.cells()]);
    let fine = Line::uniform(a, b, coarse.cells() << levels, coarse.degree + 2 * levels, coarse.dirichlet);
    let p = fine.prolongation_from(coarse);
    let (m, s) = fine.forms();
    let basis = gen_eig(&m, &s)?;
    let coupling = basis.vectors.transpose() * (&m * p);
    Ok((Restricted { eigenvalues: basis.eigenvalues, coupling }, m, s))
}

fn tensor_spectrum(space: &HpSpace, variant: Variant, levels: usize) -> Result<Option<OracleSpectrum>, NormError> {
    let Some((xs, ys, p)) = tensor_grid(&space.mesh) else { return Ok(None) };
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    let lx = Line::uniform(xs[0], xs[nx], nx, p as usize, space.dirichlet);
    let ly = Line::uniform(ys[0], ys[ny], ny, p as usize, space.dirichlet);
    let (cx, cy) = (lx.dim(), ly.dim());
    if cx * cy != space.dim() {
        return Ok(None);
    }
    let x = space.project_blocks(cx * cy, |k, pts| {
        let map = &space.mesh.maps[k];
        let c = map.centroid();
        let dx = lx.local_dofs(lx.locate(c[0]));
        let dy = ly.local_dofs(ly.locate(c[1]));
        let mut cols = Vec::new();
        for gx in dx.iter().flatten() {
            for gy in dy.iter().flatten() {
                cols.push((*gx, *gy));
            }
        }
        let mut values = DMatrix::zeros(pts.len(), cols.len());
        for (q, &r) in pts.iter().enumerate() {
            let z = map.apply(r);
            let ex = lx.eval(z[0]);
            let ey = ly.eval(z[1]);
            for (j, &(gx, gy)) in cols.iter().enumerate() {
                let vx = ex.iter().find(|e| e.0 == gx).map_or(0.0, |e| e.1);
                let vy = ey.iter().find(|e| e.0 == gy).map_or(0.0, |e| e.1);
                values[(q, j)] = vx * vy;
            }
        }
        LocalBlock { cols: cols.iter().map(|&(gx, gy)| gx * cy + gy).collect(), values }
    })?;
    let to_tensor = x.lu().try_inverse().ok_or(NormError::EigenFailure)?;
    let (rx, mx, _) = line_spectrum(&lx, levels)?;
    let (ry, my, _) = line_spectrum(&ly, levels)?;
    let shift = match variant {
        Variant::Full { scale } => 1.0 / (scale * scale),
        Variant::Seminorm => 0.0,
    };
    Ok(Some(OracleSpectrum {
        inner: Inner::Tensor(Tensor { x: rx, y: ry, shift, to_tensor }),
        levels,
        fine_dim: mx.nrows() * my.nrows(),
    }))
}

/// Spectral data of the `levels`-fold enriched pencil, restricted to `space`.
pub fn oracle_spectrum(space: &HpSpace, spec: OracleSpec) -> Result<OracleSpectrum, NormError> {
    if spec.allow_tensor && spec.levels > 0 {
        if let Some(t) = tensor_spectrum(space, spec.variant, spec.levels)? {
            return Ok(t);
        }
    }
    dense_spectrum(space, spec.variant, spec.levels)
}

/// Gram matrix of the exact discrete interpolation norm on `space`.
pub fn discrete_gram(space: &HpSpace, theta: f64, variant: Variant) -> Result<DMatrix<f64>, NormError> {
    dense_spectrum(space, variant, 0)?.theta_gram(theta)
}

/// Interpolation norm of `u` over successively enriched superspaces.
///
/// The diagnostics hold the value at every level; the reported value is the last.
pub fn continuous_norm_oracle(u: &[f64], space: &HpSpace, theta: f64, spec: OracleSpec) -> Result<NormReport, NormError> {
    let uv = DVector::from_column_slice(u);
    let mut diagnostics = Vec::new();
    let mut prev: Option<f64> = None;
    let mut value = 0.0;
    for level in 0..=spec.levels {
        let g = oracle_spectrum(space, OracleSpec { levels: level, ..spec })?.theta_gram(theta)?;
        value = uv.dot(&(&g * &uv)).max(0.0).sqrt();
        if let Some(p) = prev {
            if value > p * (1.0 + 1e-9) + 1e-300 {
                return Err(NormError::NonMonotone { level, increase: value - p });
            }
            diagnostics.push((format!("decrement_{level}"), p - value));
        }
        diagnostics.push((format!("level_{level}"), value));
        prev = Some(value);
    }
    Ok(NormReport { value, method: NormMethod::Oracle, diagnostics })
}

/// Extreme generalized eigenvalues of `(B_disc, B_oracle)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    pub low: f64,
    pub high: f64,
}

fn domain_diameter(mesh: &Mesh) -> f64 {
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for v in &mesh.vertices {
        for c in 0..2 {
            lo[c] = lo[c].min(v[c]);
            hi[c] = hi[c].max(v[c]);
        }
    }
    ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt()
}

/// Band of the discrete norm against the oracle norm. For the seminorm
/// variant both sides carry `H^{−2θ}‖u‖₀²` with `H` the domain diameter.
pub fn equivalence_band(space: &HpSpace, theta: f64, spec: OracleSpec) -> Result<Band, NormError> {
    let oracle = oracle_spectrum(space, spec)?;
    band_against(space, theta, spec.variant, &oracle)
}

/// Same as [`equivalence_band`] with a precomputed oracle spectrum.
pub fn band_against(space: &HpSpace, theta: f64, variant: Variant, oracle: &OracleSpectrum) -> Result<Band, NormError> {
    let mut disc = discrete_gram(space, theta, variant)?;
    let mut orac = oracle.theta_gram(theta)?;
    if variant == Variant::Seminorm {
        let m = space.assemble_mass().matrix * domain_diameter(&space.mesh).powf(-2.0 * theta);
        disc += &m;
        orac += &m;
    }
    let ev = gen_eigenvalues(&orac, &disc)?;
    match (ev.first(), ev.last()) {
        (Some(&low), Some(&high)) => Ok(Band { low, high }),
        _ => Err(NormError::InvalidParameter("empty space")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{quad_grid, reference_rectangle, reference_triangle};

    #[test]
    fn level_zero_band_is_unit() {
        let s = HpSpace::new(&reference_triangle(3), false).unwrap();
        let b = equivalence_band(&s, 0.5, OracleSpec { levels: 0, ..Default::default() }).unwrap();
        assert!((b.low - 1.0).abs() < 1e-9 && (b.high - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tensor_path_matches_dense_path() {
        for (mesh, dirichlet) in [(reference_rectangle(2), false), (quad_grid(2, 2, [0.0, 0.0, 1.0, 2.0]), true)] {
            let s = HpSpace::new(&mesh, dirichlet).unwrap();
            for variant in [Variant::H1, Variant::Seminorm] {
                if variant == Variant::Seminorm && !dirichlet {
                    continue;
                }
                let t = oracle_spectrum(&s, OracleSpec { levels: 1, variant, allow_tensor: true }).unwrap();
                let d = oracle_spectrum(&s, OracleSpec { levels: 1, variant, allow_tensor: false }).unwrap();
                assert!(t.is_tensor() && !d.is_tensor());
                let (gt, gd) = (t.theta_gram(0.4).unwrap(), d.theta_gram(0.4).unwrap());
                assert!((&gt - &gd).amax() <= 1e-8 * gd.amax(), "{}", (&gt - &gd).amax());
            }
        }
    }

    #[test]
    fn oracle_decreases_and_band_is_above_one() {
        let s = HpSpace::new(&reference_triangle(2), false).unwrap();
        let u: Vec<f64> = (0..s.dim()).map(|i| 1.0 + (i as f64).cos()).collect();
        let r = continuous_norm_oracle(&u, &s, 0.5, OracleSpec { levels: 1, ..Default::default() }).unwrap();
        assert!(r.diagnostic("level_1").unwrap() <= r.diagnostic("level_0").unwrap() * (1.0 + 1e-9));
        let b = equivalence_band(&s, 0.5, OracleSpec { levels: 1, ..Default::default() }).unwrap();
        assert!(b.low >= 1.0 - 1e-9 && b.high < 3.0);
    }

    #[test]
    fn seminorm_band_is_scale_invariant() {
        let m = quad_grid(2, 2, [0.0, 0.0, 1.0, 1.0]);
        let spec = OracleSpec { levels: 1, variant: Variant::Seminorm, allow_tensor: true };
        let a = equivalence_band(&HpSpace::new(&m, false).unwrap(), 0.5, spec).unwrap();
        let b = equivalence_band(&HpSpace::new(&m.scaled(0.25), false).unwrap(), 0.5, spec).unwrap();
        assert!((a.low - b.low).abs() < 1e-6 && (a.high - b.high).abs() < 1e-6);
    }
}
