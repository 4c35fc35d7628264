//! Splitting discrete functions into lowest-order, vertex, edge and
//! interior parts, the patch push-forward, the lifting trajectory built from
//! the parts, and measured stability constants.

mod patch;
mod stability;
mod trajectory;

pub use patch::{duffy_pullback, fit_local, patch_ref, pullback, pushforward, Member, PatchRef, CONFORMITY_TOL};
pub use stability::{
    measure_decomp_stability, parts_norm_sq, quad_distance_norm, random_functions, trace_chain, StabilityRow, StabilitySpec, StabilityTable, TraceChain,
};
pub use trajectory::{
    build_lift_trajectory, eigen_knot_path, knot_grid, trace_integral, LiftTrajectory, PartPath, TraceIntegral,
    TrajectoryPart,
};

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::fracnorm::NormError;
use crate::hpspace::{DofEntity, HpSpace, ShapeSet, ShapeTag};
use crate::lifting::LiftError;
use crate::mesh::{ElementKind, MeshError, PatchKind};
use crate::polyalg::{MultiPoly, PolyError};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DecompError {
    #[error("push-forward around entity {center} is not conforming (relative {relative:e})")]
    TraceMismatch { center: usize, relative: f64 },
    #[error("coefficient vector has length {found}, space dimension is {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// Reference function of a vertex patch and its global image.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexPart {
    pub vertex: usize,
    pub reference: MultiPoly,
    pub coeffs: Vec<f64>,
}

/// Reference function of an edge patch (zero on the two edges through `v̂₁`)
/// and its global image.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgePart {
    pub edge: usize,
    pub reference: MultiPoly,
    pub coeffs: Vec<f64>,
}

/// Bubble left on one element.
#[derive(Clone, Debug, PartialEq)]
pub struct InteriorPart {
    pub element: usize,
    pub coeffs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    /// Piecewise (bi)linear part.
    pub lowest: Vec<f64>,
    pub vertex_parts: Vec<VertexPart>,
    pub edge_parts: Vec<EdgePart>,
    pub interior_parts: Vec<InteriorPart>,
}

fn add_into(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

fn amax(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

impl Decomposition {
    /// Sum of all parts.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.lowest.clone();
        for p in &self.vertex_parts {
            add_into(&mut out, &p.coeffs);
        }
        for p in &self.edge_parts {
            add_into(&mut out, &p.coeffs);
        }
        for p in &self.interior_parts {
            add_into(&mut out, &p.coeffs);
        }
        out
    }

    /// `max |Σ parts − u| / max |u|`.
    pub fn reconstruction_residual(&self, u: &[f64]) -> f64 {
        let r = self.reconstruct();
        let diff = r.iter().zip(u).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        diff / amax(u).max(1e-300)
    }

    /// Number of nonzero coefficients outside each part's patch.
    pub fn support_violations(&self, space: &HpSpace) -> usize {
        let mesh = &space.mesh;
        let ents = &space.dofs.entities;
        let mut bad = self.lowest.iter().zip(ents).filter(|(c, e)| **c != 0.0 && !matches!(e, DofEntity::Vertex(_))).count();
        for p in &self.vertex_parts {
            let pr = patch_ref(mesh, PatchKind::Vertex, p.vertex).expect("vertex exists");
            bad += p.coeffs.iter().zip(ents).filter(|(c, e)| **c != 0.0 && !pr.owns(mesh, e)).count();
        }
        for p in &self.edge_parts {
            let pr = patch_ref(mesh, PatchKind::Edge, p.edge).expect("edge exists");
            bad += p.coeffs.iter().zip(ents).filter(|(c, e)| **c != 0.0 && !pr.owns(mesh, e)).count();
        }
        for p in &self.interior_parts {
            bad += p
                .coeffs
                .iter()
                .zip(ents)
                .filter(|(c, e)| **c != 0.0 && !matches!(e, DofEntity::Interior { element, .. } if *element == p.element))
                .count();
        }
        bad
    }

    pub fn is_lowest_order(&self) -> bool {
        let zero = |v: &[f64]| v.iter().all(|&c| c == 0.0);
        self.vertex_parts.iter().all(|p| zero(&p.coeffs))
            && self.edge_parts.iter().all(|p| zero(&p.coeffs))
            && self.interior_parts.iter().all(|p| zero(&p.coeffs))
    }
}

/// Reference edge function on `T̂` with the given mode coefficients on the
/// base edge `v̂₃ → v̂₂`.
fn reference_edge_function(set: &ShapeSet, modes: &[(u32, f64)]) -> MultiPoly {
    let mut out = MultiPoly::zero(2);
    for &(mode, c) in modes {
        if c == 0.0 {
            continue;
        }
        // local edge 1 of the reference triangle runs from v̂₃ to v̂₂
        let i = set.index_of(ShapeTag::Edge { edge: 1, mode }).expect("mode within degree");
        out = &out + &set.funcs[i].poly.scale(c);
    }
    out
}

/// Splits `u` by successively removing vertex values and edge traces.
///
/// Vertex dofs of the hierarchical basis are nodal values, so the
/// vertex-associated remainder beyond the lowest-order part is zero.
pub fn decompose(u: &[f64], space: &HpSpace) -> Result<Decomposition, DecompError> {
    if u.len() != space.dim() {
        return Err(DecompError::LengthMismatch { expected: space.dim(), found: u.len() });
    }
    let mesh = &space.mesh;
    let n = space.dim();
    let lowest = space.nodal_lowest_order(u);
    let vertex_parts = space
        .dofs
        .entities
        .iter()
        .filter_map(|e| match e {
            DofEntity::Vertex(v) => Some(VertexPart { vertex: *v, reference: MultiPoly::zero(2), coeffs: vec![0.0; n] }),
            _ => None,
        })
        .collect();

    let mut modes: BTreeMap<usize, Vec<(u32, f64)>> = BTreeMap::new();
    for (g, e) in space.dofs.entities.iter().enumerate() {
        if let DofEntity::Edge { edge, mode } = *e {
            modes.entry(edge).or_default().push((mode, u[g]));
        }
    }
    let mut sets: BTreeMap<u32, ShapeSet> = BTreeMap::new();
    for &e in modes.keys() {
        let q = space.dofs.edge_degree[e];
        sets.entry(q).or_insert_with(|| ShapeSet::new(ElementKind::Tri, q));
    }
    let edge_parts = modes
        .into_par_iter()
        .map(|(edge, m)| {
            let reference = reference_edge_function(&sets[&space.dofs.edge_degree[edge]], &m);
            let pr = patch_ref(mesh, PatchKind::Edge, edge)?;
            let coeffs = pushforward(&reference, &pr, space)?;
            Ok(EdgePart { edge, reference, coeffs })
        })
        .collect::<Result<Vec<_>, DecompError>>()?;

    let mut rest: Vec<f64> = u.iter().zip(&lowest).map(|(a, b)| a - b).collect();
    for p in &edge_parts {
        for (r, c) in rest.iter_mut().zip(&p.coeffs) {
            *r -= c;
        }
    }
    let mut interior: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (g, e) in space.dofs.entities.iter().enumerate() {
        if let DofEntity::Interior { element, .. } = *e {
            interior.entry(element).or_insert_with(|| vec![0.0; n])[g] = rest[g];
        }
    }
    let interior_parts = interior.into_iter().map(|(element, coeffs)| InteriorPart { element, coeffs }).collect();
    Ok(Decomposition { lowest, vertex_parts, edge_parts, interior_parts })
}
