use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::CliError;
use crate::fracnorm::Variant;
use crate::mesh::{criss_cross, load_mesh, mixed_strip, quad_grid, reference_rectangle, reference_triangle, refine_uniform, Mesh};

/// Experiment configuration, read from TOML.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, rename = "mesh")]
    pub meshes: Vec<MeshSource>,
    #[serde(default = "default_degrees")]
    pub degrees: Vec<u32>,
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    #[serde(default = "default_levels")]
    pub oracle_levels: usize,
    #[serde(default)]
    pub variant: VariantName,
    #[serde(default)]
    pub dirichlet: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Fill the `runtime_ms` column; off by default so reruns stay byte-identical.
    #[serde(default)]
    pub record_runtime: bool,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default)]
    pub inverse: InverseConfig,
    #[serde(default)]
    pub norm: NormConfig,
    #[serde(default)]
    pub lift: LiftConfig,
    #[serde(default)]
    pub decomp: DecompConfig,
}

fn default_degrees() -> Vec<u32> {
    vec![1, 2, 3]
}

fn default_thetas() -> Vec<f64> {
    vec![0.5]
}

fn default_levels() -> usize {
    2
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    #[default]
    H1,
    Seminorm,
}

impl VariantName {
    pub fn variant(self) -> Variant {
        match self {
            VariantName::H1 => Variant::H1,
            VariantName::Seminorm => Variant::Seminorm,
        }
    }
}

/// A family of meshes: a base mesh and `refinements` uniform refinements of it.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSource {
    QuadGrid {
        n: usize,
        #[serde(default)]
        refinements: usize,
        #[serde(default = "unit_box")]
        bbox: [f64; 4],
    },
    CrissCross {
        n: usize,
        #[serde(default)]
        refinements: usize,
    },
    /// Quads carry the sweep degree `p`, triangles `tri_factor · p`.
    MixedStrip {
        n: usize,
        #[serde(default)]
        refinements: usize,
        #[serde(default = "two")]
        tri_factor: u32,
    },
    ReferenceRectangle {
        #[serde(default)]
        refinements: usize,
    },
    ReferenceTriangle {
        #[serde(default)]
        refinements: usize,
    },
    File {
        path: PathBuf,
        #[serde(default)]
        refinements: usize,
    },
}

fn unit_box() -> [f64; 4] {
    [0.0, 0.0, 1.0, 1.0]
}

fn two() -> u32 {
    2
}

impl MeshSource {
    pub fn refinements(&self) -> usize {
        match self {
            MeshSource::QuadGrid { refinements, .. }
            | MeshSource::CrissCross { refinements, .. }
            | MeshSource::MixedStrip { refinements, .. }
            | MeshSource::ReferenceRectangle { refinements }
            | MeshSource::ReferenceTriangle { refinements }
            | MeshSource::File { refinements, .. } => *refinements,
        }
    }

    pub fn label(&self) -> String {
        match self {
            MeshSource::QuadGrid { n, .. } => format!("quad_grid_{n}"),
            MeshSource::CrissCross { n, .. } => format!("criss_cross_{n}"),
            MeshSource::MixedStrip { n, .. } => format!("mixed_strip_{n}"),
            MeshSource::ReferenceRectangle { .. } => "reference_rectangle".into(),
            MeshSource::ReferenceTriangle { .. } => "reference_triangle".into(),
            MeshSource::File { path, .. } => {
                path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "file".into())
            }
        }
    }

    /// Base mesh with degree `p`; file meshes keep their own degrees when `p` is `None`.
    pub fn base(&self, p: Option<u32>, root: &Path) -> Result<Mesh, CliError> {
        let q = p.unwrap_or(1);
        Ok(match self {
            MeshSource::QuadGrid { n, bbox, .. } => quad_grid(*n, q, *bbox),
            MeshSource::CrissCross { n, .. } => criss_cross(*n, q),
            MeshSource::MixedStrip { n, tri_factor, .. } => mixed_strip(*n, q, tri_factor * q),
            MeshSource::ReferenceRectangle { .. } => reference_rectangle(q),
            MeshSource::ReferenceTriangle { .. } => reference_triangle(q),
            MeshSource::File { path, .. } => {
                let m = load_mesh(root.join(path))?;
                match p {
                    Some(p) => m.with_uniform_degree(p),
                    None => m,
                }
            }
        })
    }

    /// Meshes at refinement levels `0..=refinements`.
    pub fn levels(&self, p: Option<u32>, root: &Path) -> Result<Vec<Mesh>, CliError> {
        let mut out = vec![self.base(p, root)?];
        for _ in 0..self.refinements() {
            let next = refine_uniform(out.last().expect("non-empty"));
            out.push(next);
        }
        Ok(out)
    }
}

/// Pass/fail thresholds; each check runs only when its limit is set.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Checks {
    /// Smallest admissible `C_low`.
    pub c_low_min: Option<f64>,
    /// Largest admissible `max C_high / min C_high` over the whole sweep.
    pub c_high_spread: Option<f64>,
    /// Largest admissible log-log slope of `C_high` in `p`.
    pub max_slope: Option<f64>,
    /// Largest ratio between consecutive refinement levels, either direction.
    pub level_ratio: Option<f64>,
    /// Largest admissible `max/min` of an inverse constant across degrees.
    pub inverse_spread: Option<f64>,
    /// Largest admissible inverse constant at `θ = 1`.
    pub inverse_theta1_max: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InverseConfig {
    #[serde(default = "default_inverse_thetas")]
    pub thetas: Vec<f64>,
    /// `(θ, μ)` pairs for the two-index constant.
    #[serde(default)]
    pub mu_pairs: Vec<[f64; 2]>,
}

fn default_inverse_thetas() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}

impl Default for InverseConfig {
    fn default() -> Self {
        Self { thetas: default_inverse_thetas(), mu_pairs: Vec::new() }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    /// Random functions per space, ignored when `coefficients` is set.
    #[serde(default = "one")]
    pub samples: usize,
    #[serde(default)]
    pub coefficients: Option<Vec<f64>>,
    #[serde(default)]
    pub slobodeckij: bool,
}

fn one() -> usize {
    1
}

impl Default for NormConfig {
    fn default() -> Self {
        Self { samples: 1, coefficients: None, slobodeckij: false }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LiftConfig {
    #[serde(default = "default_lift_degrees")]
    pub degrees: Vec<u32>,
    #[serde(default = "four")]
    pub samples: usize,
    #[serde(default = "two")]
    pub mollifier: u32,
    #[serde(default = "default_sup_points")]
    pub sup_points: usize,
    #[serde(default)]
    pub properties: Vec<PropertyConfig>,
    /// Largest admissible log-log slope of the maximal ratio in `p`.
    #[serde(default)]
    pub max_slope: Option<f64>,
    /// Largest admissible ratio value.
    #[serde(default)]
    pub max_ratio: Option<f64>,
}

fn default_lift_degrees() -> Vec<u32> {
    (1..=6).collect()
}

fn four() -> usize {
    4
}

fn default_sup_points() -> usize {
    2000
}

impl Default for LiftConfig {
    fn default() -> Self {
        Self {
            degrees: default_lift_degrees(),
            samples: 4,
            mollifier: 2,
            sup_points: default_sup_points(),
            properties: Vec::new(),
            max_slope: None,
            max_ratio: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PropertyConfig {
    Trace,
    LiftL2 {
        gamma: f64,
    },
    BcL2 {
        gamma: f64,
        edges: Vec<usize>,
    },
    BcGradient {
        s: f64,
        edges: Vec<usize>,
    },
    PrismGradient {
        theta: f64,
        edges: Vec<usize>,
    },
    InteriorSup {
        eps: f64,
    },
    VertexSup {
        eps: f64,
        delta: f64,
        edges: Vec<usize>,
    },
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DecompConfig {
    #[serde(default = "default_decomp_samples")]
    pub samples: usize,
    #[serde(default = "half")]
    pub theta: f64,
    #[serde(default = "two")]
    pub mollifier: u32,
    /// Also evaluate the per-part norms against the oracle norm.
    #[serde(default)]
    pub part_norms: bool,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    /// Largest admissible `max/min` of the chain ratio per space.
    #[serde(default)]
    pub chain_spread: Option<f64>,
}

fn default_decomp_samples() -> usize {
    8
}

fn half() -> f64 {
    0.5
}

fn default_residual_tol() -> f64 {
    1e-10
}

impl Default for DecompConfig {
    fn default() -> Self {
        Self {
            samples: default_decomp_samples(),
            theta: 0.5,
            mollifier: 2,
            part_norms: false,
            residual_tol: default_residual_tol(),
            chain_spread: None,
        }
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    /// Common invariants: degrees at least one, at least one mesh.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.meshes.is_empty() {
            return Err(CliError::Invalid("no [[mesh]] entry".into()));
        }
        if self.degrees.is_empty() || self.degrees.iter().any(|&p| p < 1) {
            return Err(CliError::Invalid("degrees must be a non-empty list of integers >= 1".into()));
        }
        Ok(())
    }

    /// Sweep `θ` values must lie in `[0.1, 0.9]`.
    pub fn validate_thetas(&self) -> Result<(), CliError> {
        if self.thetas.is_empty() {
            return Err(CliError::Invalid("thetas must be non-empty".into()));
        }
        if let Some(t) = self.thetas.iter().find(|t| !(0.1..=0.9).contains(*t)) {
            return Err(CliError::Invalid(format!("theta {t} outside [0.1, 0.9]")));
        }
        Ok(())
    }
}
