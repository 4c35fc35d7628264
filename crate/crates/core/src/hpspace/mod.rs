//! Continuous hp finite element spaces with variable degree, hierarchical
//! bases under the minimum rule, and assembled bilinear forms.

mod assemble;
mod interp;
pub mod shapes;
mod space;

pub use assemble::{edge_ref_point, FormRole, LocalBlock, SymForm};
pub use interp::{gl_interpolate, gl_nodes_rect};
pub use shapes::{ShapeSet, ShapeTag};
pub use space::{DofEntity, DofTable, HpSpace, LocalDof};

use crate::mesh::Mesh;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum HpError {
    #[error("degree compatibility violated on edges {edges:?}")]
    DegreeCompatibility { edges: Vec<usize> },
    #[error("local coefficients disagree across element {element} (relative {relative:e})")]
    TraceMismatch { element: usize, relative: f64 },
}

/// Builds the space on `mesh`; `dirichlet` removes all boundary dofs.
pub fn build_space(mesh: &Mesh, dirichlet: bool) -> Result<HpSpace, HpError> {
    HpSpace::new(mesh, dirichlet)
}
