use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{MeshSource, PropertyConfig, SweepConfig};
use super::{Cell, Check, CliError, Outcome, Table};
use crate::decomp::{parts_norm_sq, random_functions, trace_chain, StabilitySpec};
use crate::fracnorm::{
    band_against, continuous_norm_oracle, gen_eig, interp_norm_discrete, interp_norm_tquad, inverse_constant,
    oracle_spectrum, slobodeckij_norm, two_index_constant, OracleSpec, SlobodeckijOptions, TGrid, ThetaParams,
};
use crate::hpspace::{build_space, HpSpace};
use crate::lifting::{verify_weighted_bounds, EdgeSet, Property, SampleSpec};
use crate::mesh::{check_admissibility, check_degree_compat, shape_regularity, Mesh};
use crate::polyalg::mollifier_moments;

/// One mesh of the sweep grid.
struct Point {
    label: String,
    level: usize,
    p: Option<u32>,
    mesh: Mesh,
}

impl Point {
    fn degree(&self) -> u32 {
        self.p.unwrap_or_else(|| self.mesh.elements.iter().map(|e| e.degree).max().unwrap_or(1))
    }

    fn space(&self, dirichlet: bool) -> Result<HpSpace, CliError> {
        if let Some(v) = check_admissibility(&self.mesh).first() {
            return Err(CliError::Invalid(format!("{} level {}: {v:?}", self.label, self.level)));
        }
        Ok(build_space(&self.mesh, dirichlet)?)
    }
}

/// Grid order: mesh source, then degree, then refinement level. File meshes
/// keep their own degrees when `keep_file_degrees` is set.
fn grid(cfg: &SweepConfig, root: &Path, keep_file_degrees: bool) -> Result<Vec<Point>, CliError> {
    let mut out = Vec::new();
    for src in &cfg.meshes {
        let degrees: Vec<Option<u32>> = match src {
            MeshSource::File { .. } if keep_file_degrees => vec![None],
            _ => cfg.degrees.iter().map(|&p| Some(p)).collect(),
        };
        for p in degrees {
            for (level, mesh) in src.levels(p, root)?.into_iter().enumerate() {
                out.push(Point { label: src.label(), level, p, mesh });
            }
        }
    }
    Ok(out)
}

fn runtime(cfg: &SweepConfig, start: Instant) -> Cell {
    if cfg.record_runtime {
        Cell::Float(start.elapsed().as_secs_f64() * 1e3)
    } else {
        Cell::Empty
    }
}

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0, f64::max);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

struct BandRow {
    label: String,
    level: usize,
    theta: f64,
    h_max: f64,
    p: u32,
    dim: usize,
    low: f64,
    high: f64,
    runtime: Cell,
}

/// Norm-equivalence constants of the discrete interpolation norm against the
/// enriched-space oracle, `C_low² ‖u‖²_oracle ≤ ‖u‖²_discrete ≤ C_high² ‖u‖²_oracle`.
pub fn run_equivalence_sweep(cfg: &SweepConfig, root: &Path) -> Result<Outcome, CliError> {
    cfg.validate()?;
    cfg.validate_thetas()?;
    let points = grid(cfg, root, false)?;
    let spec = OracleSpec { levels: cfg.oracle_levels, variant: cfg.variant.variant(), allow_tensor: true };
    let blocks: Vec<Vec<BandRow>> = points
        .par_iter()
        .map(|pt| {
            let start = Instant::now();
            let space = pt.space(cfg.dirichlet)?;
            let oracle = oracle_spectrum(&space, spec)?;
            cfg.thetas
                .iter()
                .map(|&theta| {
                    let band = band_against(&space, theta, spec.variant, &oracle)?;
                    Ok(BandRow {
                        label: pt.label.clone(),
                        level: pt.level,
                        theta,
                        h_max: pt.mesh.h_max(),
                        p: pt.degree(),
                        dim: space.dim(),
                        low: band.low.max(0.0).sqrt(),
                        high: band.high.max(0.0).sqrt(),
                        runtime: runtime(cfg, start),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<BandRow> = blocks.into_iter().flatten().collect();

    let mut table = Table::new(vec![
        "mesh", "level", "theta", "h_max", "p", "N", "C_low", "C_high", "oracle_levels", "runtime_ms",
    ]);
    for r in &rows {
        table.rows.push(vec![
            r.label.clone().into(),
            r.level.into(),
            r.theta.into(),
            r.h_max.into(),
            r.p.into(),
            r.dim.into(),
            r.low.into(),
            r.high.into(),
            cfg.oracle_levels.into(),
            r.runtime.clone(),
        ]);
    }

    let mut checks = Vec::new();
    let c = &cfg.checks;
    if let Some(limit) = c.c_low_min {
        let v = rows.iter().map(|r| r.low).fold(f64::INFINITY, f64::min);
        checks.push(Check::at_least("min C_low", v, limit));
    }
    if let Some(limit) = c.c_high_spread {
        let highs: Vec<f64> = rows.iter().map(|r| r.high).collect();
        checks.push(Check::at_most("C_high max/min", spread(&highs), limit));
    }
    if let Some(limit) = c.max_slope {
        let mut groups: BTreeMap<(String, usize, u64), Vec<(f64, f64)>> = BTreeMap::new();
        for r in &rows {
            groups.entry((r.label.clone(), r.level, r.theta.to_bits())).or_default().push((r.p as f64, r.high));
        }
        let v = groups.values().filter(|g| g.len() > 1).map(|g| log_slope(g)).fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::at_most("C_high log-log slope in p", v, limit));
    }
    if let Some(limit) = c.level_ratio {
        let mut groups: BTreeMap<(String, u32, u64), Vec<(usize, f64)>> = BTreeMap::new();
        for r in &rows {
            groups.entry((r.label.clone(), r.p, r.theta.to_bits())).or_default().push((r.level, r.high));
        }
        let mut worst: f64 = 1.0;
        for g in groups.values_mut() {
            g.sort_by_key(|e| e.0);
            for w in g.windows(2) {
                let q = w[1].1 / w[0].1;
                worst = worst.max(q).max(1.0 / q);
            }
        }
        checks.push(Check::at_most("C_high level ratio", worst, limit));
    }
    Ok(Outcome { table, checks })
}

struct InverseRow {
    kind: &'static str,
    label: String,
    level: usize,
    h_max: f64,
    p: u32,
    dim: usize,
    theta: f64,
    mu: Option<f64>,
    constant: f64,
    runtime: Cell,
}

/// Inverse-estimate constants `C_inv(θ)` and, for each configured `(θ, μ)`
/// pair, the two-index constant.
pub fn run_inverse_sweep(cfg: &SweepConfig, root: &Path) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let inv = &cfg.inverse;
    if let Some(t) = inv.thetas.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(CliError::Invalid(format!("inverse theta {t} outside [0, 1]")));
    }
    if let Some([t, m]) = inv.mu_pairs.iter().find(|[t, m]| !(*t > 0.0 && t < m && *m <= 1.0)) {
        return Err(CliError::Invalid(format!("pair (theta {t}, mu {m}) needs 0 < theta < mu <= 1")));
    }
    let points = grid(cfg, root, false)?;
    let blocks: Vec<Vec<InverseRow>> = points
        .par_iter()
        .map(|pt| {
            let space = pt.space(cfg.dirichlet)?;
            let row = |kind, theta, mu, constant, start| InverseRow {
                kind,
                label: pt.label.clone(),
                level: pt.level,
                h_max: pt.mesh.h_max(),
                p: pt.degree(),
                dim: space.dim(),
                theta,
                mu,
                constant,
                runtime: runtime(cfg, start),
            };
            let mut out = Vec::new();
            for &theta in &inv.thetas {
                let start = Instant::now();
                out.push(row("inverse", theta, None, inverse_constant(&space, theta)?, start));
            }
            for &[theta, mu] in &inv.mu_pairs {
                let start = Instant::now();
                out.push(row("two_index", theta, Some(mu), two_index_constant(&space, theta, mu)?, start));
            }
            Ok(out)
        })
        .collect::<Result<_, CliError>>()?;
    let rows: Vec<InverseRow> = blocks.into_iter().flatten().collect();

    let mut table =
        Table::new(vec!["kind", "mesh", "level", "h_max", "p", "N", "theta", "mu", "constant", "runtime_ms"]);
    for r in &rows {
        table.rows.push(vec![
            r.kind.into(),
            r.label.clone().into(),
            r.level.into(),
            r.h_max.into(),
            r.p.into(),
            r.dim.into(),
            r.theta.into(),
            r.mu.map_or(Cell::Empty, Cell::Float),
            r.constant.into(),
            r.runtime.clone(),
        ]);
    }

    let nonfinite = rows.iter().filter(|r| !r.constant.is_finite()).count();
    let mut checks = vec![Check::at_most("non-finite constants", nonfinite as f64, 0.0)];
    if let Some(limit) = cfg.checks.inverse_spread {
        let mut groups: BTreeMap<(&str, String, usize, u64, u64), Vec<f64>> = BTreeMap::new();
        for r in &rows {
            let key = (r.kind, r.label.clone(), r.level, r.theta.to_bits(), r.mu.unwrap_or(-1.0).to_bits());
            groups.entry(key).or_default().push(r.constant);
        }
        for ((kind, label, level, t, m), g) in &groups {
            let mu = f64::from_bits(*m);
            let name = if *kind == "inverse" {
                format!("{label} level {level} C_inv(theta={}) max/min", f64::from_bits(*t))
            } else {
                format!("{label} level {level} C(theta={},mu={mu}) max/min", f64::from_bits(*t))
            };
            checks.push(Check::at_most(name, spread(g), limit));
        }
    }
    if let Some(limit) = cfg.checks.inverse_theta1_max {
        let v = rows.iter().filter(|r| r.kind == "inverse" && r.theta == 1.0).map(|r| r.constant).fold(0.0, f64::max);
        checks.push(Check::at_most("C_inv(theta=1)", v, limit));
    }
    Ok(Outcome { table, checks })
}

/// Interpolation norms of fixed or random functions: exact eigen formula,
/// t-quadrature, enriched oracle and optionally the Slobodeckij norm.
pub fn run_norm(cfg: &SweepConfig, root: &Path) -> Result<Outcome, CliError> {
    cfg.validate()?;
    cfg.validate_thetas()?;
    let points = grid(cfg, root, true)?;
    let variant = cfg.variant.variant();
    let spec = OracleSpec { levels: cfg.oracle_levels, variant, allow_tensor: true };
    let blocks: Vec<Vec<Vec<Cell>>> = points
        .par_iter()
        .map(|pt| {
            let space = pt.space(cfg.dirichlet)?;
            let us = match &cfg.norm.coefficients {
                Some(c) if c.len() != space.dim() => {
                    return Err(CliError::Invalid(format!("{} coefficients for a space of dimension {}", c.len(), space.dim())))
                }
                Some(c) => vec![c.clone()],
                None => random_functions(space.dim(), cfg.norm.samples, cfg.seed),
            };
            let (m, s) = space.assemble_forms();
            let a = variant.form(&m.matrix, &s.matrix);
            let basis = gen_eig(&m.matrix, &a)?;
            let mut out = Vec::new();
            for (k, u) in us.iter().enumerate() {
                for &theta in &cfg.thetas {
                    let start = Instant::now();
                    let params = ThetaParams::new(theta, variant)?;
                    let disc = interp_norm_discrete(u, params, &basis).value;
                    let tq = interp_norm_tquad(u, params, &m.matrix, &a, TGrid::default())?.value;
                    let orac = continuous_norm_oracle(u, &space, theta, spec)?.value;
                    let slob = if cfg.norm.slobodeckij {
                        Cell::Float(slobodeckij_norm(u, &space, theta, SlobodeckijOptions::default())?.value)
                    } else {
                        Cell::Empty
                    };
                    out.push(vec![
                        pt.label.clone().into(),
                        pt.level.into(),
                        pt.degree().into(),
                        space.dim().into(),
                        k.into(),
                        theta.into(),
                        disc.into(),
                        tq.into(),
                        orac.into(),
                        slob,
                        runtime(cfg, start),
                    ]);
                }
            }
            Ok(out)
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new(vec![
        "mesh", "level", "p", "N", "sample", "theta", "discrete", "tquad", "oracle", "slobodeckij", "runtime_ms",
    ]);
    table.rows = blocks.into_iter().flatten().collect();
    Ok(Outcome { table, checks: Vec::new() })
}

fn property(p: &PropertyConfig) -> Result<Property, CliError> {
    let set = |e: &[usize]| EdgeSet::new(e).map_err(CliError::from);
    Ok(match p {
        PropertyConfig::Trace => Property::Trace,
        PropertyConfig::LiftL2 { gamma } => Property::LiftL2 { gamma: *gamma },
        PropertyConfig::BcL2 { gamma, edges } => Property::BcL2 { gamma: *gamma, edges: set(edges)? },
        PropertyConfig::BcGradient { s, edges } => Property::BcGradient { s: *s, edges: set(edges)? },
        PropertyConfig::PrismGradient { theta, edges } => Property::PrismGradient { theta: *theta, edges: set(edges)? },
        PropertyConfig::InteriorSup { eps } => Property::InteriorSup { eps: *eps },
        PropertyConfig::VertexSup { eps, delta, edges } => {
            Property::VertexSup { eps: *eps, delta: *delta, edges: set(edges)? }
        }
    })
}

fn default_properties() -> Vec<PropertyConfig> {
    vec![
        PropertyConfig::Trace,
        PropertyConfig::LiftL2 { gamma: 0.0 },
        PropertyConfig::BcL2 { gamma: 0.0, edges: vec![0] },
        PropertyConfig::BcGradient { s: 0.5, edges: vec![0] },
        PropertyConfig::PrismGradient { theta: 0.5, edges: vec![0] },
        PropertyConfig::InteriorSup { eps: 0.1 },
    ]
}

/// Sampled ratios of the lifting bounds over the configured degrees.
pub fn run_lift_verify(cfg: &SweepConfig) -> Result<Outcome, CliError> {
    let lc = &cfg.lift;
    if lc.degrees.is_empty() || lc.degrees.iter().any(|&p| p < 1) {
        return Err(CliError::Invalid("lift degrees must be a non-empty list of integers >= 1".into()));
    }
    let props = if lc.properties.is_empty() { default_properties() } else { lc.properties.clone() };
    let props: Vec<Property> = props.iter().map(property).collect::<Result<_, _>>()?;
    let spec = SampleSpec {
        degrees: lc.degrees.clone(),
        samples: lc.samples,
        seed: cfg.seed,
        mollifier: lc.mollifier,
        sup_points: lc.sup_points,
    };
    let reports = props
        .par_iter()
        .map(|p| verify_weighted_bounds(p, &spec).map(|r| (matches!(p, Property::Trace), r)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(vec!["property", "p", "samples", "min", "max", "slope"]);
    let mut checks = Vec::new();
    for (is_trace, r) in &reports {
        for row in &r.rows {
            table.rows.push(vec![
                r.property.clone().into(),
                row.degree.into(),
                row.samples.into(),
                row.min.into(),
                row.max.into(),
                r.slope.into(),
            ]);
        }
        if let Some(limit) = lc.max_ratio {
            checks.push(Check::at_most(format!("{} max", r.property), r.max(), limit));
        }
        if let (Some(limit), false) = (lc.max_slope, is_trace) {
            checks.push(Check::at_most(format!("{} slope", r.property), r.slope, limit));
        }
    }
    Ok(Outcome { table, checks })
}

/// Decomposes random functions, checks reconstruction and part supports, and
/// reports the trace-chain ratio.
pub fn run_decomp_verify(cfg: &SweepConfig, root: &Path) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let dc = &cfg.decomp;
    if !(dc.theta > 0.0 && dc.theta < 1.0) {
        return Err(CliError::Invalid(format!("decomp theta {} outside (0, 1)", dc.theta)));
    }
    if dc.samples == 0 {
        return Err(CliError::Invalid("decomp samples must be positive".into()));
    }
    let points = grid(cfg, root, true)?;
    let stab = StabilitySpec {
        samples: dc.samples,
        seed: cfg.seed,
        oracle: OracleSpec { levels: cfg.oracle_levels, ..OracleSpec::default() },
        mollifier: dc.mollifier,
        ..StabilitySpec::default()
    };
    struct Sample {
        residual: f64,
        violations: usize,
        ratio: f64,
        cells: Vec<Cell>,
    }
    let blocks: Vec<Vec<Sample>> = points
        .par_iter()
        .map(|pt| {
            let start = Instant::now();
            let space = pt.space(cfg.dirichlet)?;
            let max_degree = space.mesh.elements.iter().map(|e| e.degree).max().unwrap_or(1);
            let moments = mollifier_moments(dc.mollifier, max_degree + 2)?;
            let us = random_functions(space.dim(), dc.samples, cfg.seed);
            let chains = trace_chain(&us, &space, dc.theta, &moments)?;
            let oracle = if dc.part_norms { Some(oracle_spectrum(&space, stab.oracle)?.theta_gram(dc.theta)?) } else { None };
            let mut out = Vec::with_capacity(us.len());
            for (k, (u, (d, chain))) in us.iter().zip(chains).enumerate() {
                let residual = d.reconstruction_residual(u);
                let violations = d.support_violations(&space);
                let parts = match &oracle {
                    Some(g) => {
                        let x = nalgebra::DVector::from_column_slice(u);
                        let oracle_sq = x.dot(&(g * &x));
                        Cell::Float(parts_norm_sq(&d, &space, dc.theta, &stab)? / oracle_sq)
                    }
                    None => Cell::Empty,
                };
                let ratio = chain.ratio();
                out.push(Sample {
                    residual,
                    violations,
                    ratio,
                    cells: vec![
                        pt.label.clone().into(),
                        pt.level.into(),
                        pt.degree().into(),
                        space.dim().into(),
                        k.into(),
                        residual.into(),
                        violations.into(),
                        chain.seminorm_sq.into(),
                        chain.trace.total().into(),
                        ratio.into(),
                        parts,
                        runtime(cfg, start),
                    ],
                });
            }
            Ok(out)
        })
        .collect::<Result<_, CliError>>()?;

    let mut table = Table::new(vec![
        "mesh", "level", "p", "N", "sample", "residual", "support_violations", "seminorm_sq", "trace_integral",
        "chain_ratio", "parts_ratio", "runtime_ms",
    ]);
    let residual = blocks.iter().flatten().map(|s| s.residual).fold(0.0, f64::max);
    let violations: usize = blocks.iter().flatten().map(|s| s.violations).sum();
    let mut checks = vec![
        Check::at_most("reconstruction residual", residual, dc.residual_tol),
        Check::at_most("support violations", violations as f64, 0.0),
    ];
    if let Some(limit) = dc.chain_spread {
        let worst = blocks
            .iter()
            .map(|b| spread(&b.iter().map(|s| s.ratio).filter(|r| *r > 0.0).collect::<Vec<_>>()))
            .filter(|s| s.is_finite())
            .fold(1.0, f64::max);
        checks.push(Check::at_most("chain ratio max/min", worst, limit));
    }
    table.rows = blocks.into_iter().flatten().map(|s| s.cells).collect();
    Ok(Outcome { table, checks })
}

/// Admissibility, shape regularity and degree compatibility of every mesh.
pub fn check_mesh(cfg: &SweepConfig, root: &Path) -> Result<Outcome, CliError> {
    if cfg.meshes.is_empty() {
        return Err(CliError::Invalid("no [[mesh]] entry".into()));
    }
    let points = grid(cfg, root, true)?;
    let mut table = Table::new(vec![
        "mesh", "level", "p", "elements", "vertices", "edges", "h_max", "shape_regularity", "degree_compatible",
        "violations",
    ]);
    let mut checks = Vec::new();
    for pt in &points {
        let m = &pt.mesh;
        let violations = check_admissibility(m);
        let gamma = shape_regularity(m)?.into_iter().fold(0.0, f64::max);
        let compat = check_degree_compat(m);
        for v in &violations {
            eprintln!("{} level {}: {v:?}", pt.label, pt.level);
        }
        table.rows.push(vec![
            pt.label.clone().into(),
            pt.level.into(),
            pt.degree().into(),
            m.num_elements().into(),
            m.num_vertices().into(),
            m.edges.len().into(),
            m.h_max().into(),
            gamma.into(),
            (compat as usize).into(),
            violations.len().into(),
        ]);
        let tag = format!("{} level {}", pt.label, pt.level);
        checks.push(Check::at_most(format!("{tag} violations"), violations.len() as f64, 0.0));
        checks.push(Check::at_least(format!("{tag} degree compatible"), compat as usize as f64, 1.0));
    }
    Ok(Outcome { table, checks })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FormKind {
    Mass,
    Stiffness,
    /// `h^{2(1−θ)} p^{−4(1−θ)}`-weighted stiffness.
    Weighted(f64),
}

/// Coordinate-list export of one form on the first configured mesh and degree.
pub fn export_form(cfg: &SweepConfig, root: &Path, kind: FormKind) -> Result<String, CliError> {
    let src = cfg.meshes.first().ok_or_else(|| CliError::Invalid("no [[mesh]] entry".into()))?;
    let p = match src {
        MeshSource::File { .. } => None,
        _ => Some(*cfg.degrees.first().ok_or_else(|| CliError::Invalid("empty degree list".into()))?),
    };
    let mesh = src.levels(p, root)?.pop().expect("non-empty");
    let pt = Point { label: src.label(), level: src.refinements(), p, mesh };
    let space = pt.space(cfg.dirichlet)?;
    let form = match kind {
        FormKind::Mass => space.assemble_mass(),
        FormKind::Stiffness => space.assemble_stiffness(),
        FormKind::Weighted(theta) if (0.0..=1.0).contains(&theta) => space.assemble_weighted_stiffness(theta),
        FormKind::Weighted(theta) => return Err(CliError::Invalid(format!("theta {theta} outside [0, 1]"))),
    };
    Ok(form.to_coo())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> SweepConfig {
        SweepConfig::parse(text).unwrap()
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..6).map(|p| (p as f64, 3.0 * (p as f64).powf(0.7))).collect();
        assert!((log_slope(&pts) - 0.7).abs() < 1e-12);
        assert_eq!(spread(&[2.0, 4.0]), 2.0);
    }

    #[test]
    fn one_quad_degree_sweep() {
        let c = cfg("degrees = [1, 2, 3]\nthetas = [0.5]\noracle_levels = 1\n[checks]\nc_low_min = 0.999999\n[[mesh]]\ngenerator = \"reference_rectangle\"\n");
        let o = run_equivalence_sweep(&c, Path::new(".")).unwrap();
        assert_eq!(o.table.rows.len(), 3);
        assert!(o.passed(), "{:?}", o.checks);
        assert!(o.table.floats("C_high").iter().all(|&h| h >= 1.0 - 1e-6));
    }

    #[test]
    fn inverse_endpoint_dominated() {
        let c = cfg("degrees = [1, 2]\n[inverse]\nthetas = [1.0]\nmu_pairs = [[0.5, 1.0]]\n[checks]\ninverse_theta1_max = 1.000000001\n[[mesh]]\ngenerator = \"quad_grid\"\nn = 2\n");
        let o = run_inverse_sweep(&c, Path::new(".")).unwrap();
        assert_eq!(o.table.rows.len(), 4);
        assert!(o.passed(), "{:?}", o.checks);
    }

    #[test]
    fn norm_methods_agree() {
        let c = cfg("degrees = [2]\nthetas = [0.3, 0.7]\nseed = 3\n[norm]\nsamples = 2\n[[mesh]]\ngenerator = \"criss_cross\"\nn = 1\n");
        let o = run_norm(&c, Path::new(".")).unwrap();
        assert_eq!(o.table.rows.len(), 4);
        for (d, t) in o.table.floats("discrete").iter().zip(o.table.floats("tquad")) {
            assert!((d - t).abs() <= 1e-6 * d, "{d} {t}");
        }
        for (d, q) in o.table.floats("discrete").iter().zip(o.table.floats("oracle")) {
            assert!(*d >= q * (1.0 - 1e-9));
        }
    }

    #[test]
    fn decomp_on_mixed_strip() {
        let c = cfg("degrees = [1]\nseed = 5\n[decomp]\nsamples = 3\nchain_spread = 1e6\n[[mesh]]\ngenerator = \"mixed_strip\"\nn = 1\n");
        let o = run_decomp_verify(&c, Path::new(".")).unwrap();
        assert_eq!(o.table.rows.len(), 3);
        assert!(o.passed(), "{:?}", o.checks);
    }

    #[test]
    fn mesh_checks_flag_degree_conflicts() {
        let ok = check_mesh(&cfg("degrees = [2]\n[[mesh]]\ngenerator = \"mixed_strip\"\nn = 1\n"), Path::new(".")).unwrap();
        assert!(ok.passed());
        let dir = std::env::temp_dir().join(format!("hpinterp-check-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("strip.json"), crate::mesh::mixed_strip(1, 2, 3).to_json()).unwrap();
        let bad = check_mesh(&cfg("[[mesh]]\ngenerator = \"file\"\npath = \"strip.json\"\n"), &dir).unwrap();
        std::fs::remove_dir_all(&dir).ok();
        assert_eq!(bad.table.floats("p"), vec![3.0]);
        assert!(!bad.passed());
    }

    #[test]
    fn export_is_coordinate_list() {
        let c = cfg("degrees = [1]\n[[mesh]]\ngenerator = \"reference_rectangle\"\n");
        let s = export_form(&c, Path::new("."), FormKind::Mass).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 16);
        assert_eq!(lines[0].split_whitespace().count(), 3);
        assert!(export_form(&c, Path::new("."), FormKind::Weighted(2.0)).is_err());
    }

    #[test]
    fn invalid_sweeps_fail() {
        let c = cfg("thetas = [0.95]\n[[mesh]]\ngenerator = \"reference_rectangle\"\n");
        assert!(matches!(run_equivalence_sweep(&c, Path::new(".")), Err(CliError::Invalid(_))));
        let c = cfg("[inverse]\nmu_pairs = [[0.5, 0.4]]\n[[mesh]]\ngenerator = \"reference_rectangle\"\n");
        assert!(run_inverse_sweep(&c, Path::new(".")).is_err());
        let c = cfg("[[mesh]]\ngenerator = \"file\"\npath = \"does/not/exist.json\"\n");
        assert!(run_equivalence_sweep(&c, Path::new(".")).is_err());
    }
}
