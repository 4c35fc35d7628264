use std::collections::BTreeMap;
use std::sync::Arc;

use super::shapes::{ShapeSet, ShapeTag};
use super::HpError;
use crate::mesh::{degree_conflicts, ElementKind, Mesh};

/// Mesh entity owning a global degree of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DofEntity {
    Vertex(usize),
    Edge { edge: usize, mode: u32 },
    Interior { element: usize, index: usize },
}

/// Global index and sign of one local shape function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalDof {
    pub global: usize,
    pub sign: f64,
}

#[derive(Clone, Debug)]
pub struct DofTable {
    pub entities: Vec<DofEntity>,
    /// Per element and local shape index; `None` for constrained or Dirichlet modes.
    pub local_to_global: Vec<Vec<Option<LocalDof>>>,
    /// Min-rule trace degree per edge.
    pub edge_degree: Vec<u32>,
    /// Entities removed by homogeneous boundary conditions.
    pub dirichlet: Vec<DofEntity>,
}

/// Continuous piecewise polynomial space on a mesh.
#[derive(Clone, Debug)]
pub struct HpSpace {
    pub mesh: Mesh,
    pub dirichlet: bool,
    pub dofs: DofTable,
    shapes: BTreeMap<(ElementKind, u32), Arc<ShapeSet>>,
}

impl HpSpace {
    pub fn new(mesh: &Mesh, dirichlet: bool) -> Result<Self, HpError> {
        let conflicts = degree_conflicts(mesh);
        if !conflicts.is_empty() {
            return Err(HpError::DegreeCompatibility { edges: conflicts });
        }
        Ok(Self::new_unchecked(mesh, dirichlet))
    }

    /// Builds the space without the triangle/quad degree rule; the minimum
    /// rule alone still yields a conforming space.
    pub fn new_unchecked(mesh: &Mesh, dirichlet: bool) -> Self {
        let mut shapes = BTreeMap::new();
        for el in &mesh.elements {
            shapes.entry((el.kind, el.degree)).or_insert_with(|| Arc::new(ShapeSet::new(el.kind, el.degree)));
        }
        let edge_degree: Vec<u32> = mesh
            .edges
            .iter()
            .map(|e| e.elements.iter().map(|&(k, _)| mesh.elements[k].degree).min().unwrap_or(1))
            .collect();
        let bverts = mesh.boundary_vertices();
        let mut index: BTreeMap<DofEntity, usize> = BTreeMap::new();
        let mut entities = Vec::new();
        let mut removed = Vec::new();
        let mut add = |ent: DofEntity, on_boundary: bool| {
            if dirichlet && on_boundary {
                removed.push(ent);
            } else {
                index.insert(ent, entities.len());
                entities.push(ent);
            }
        };
        let mut used = vec![false; mesh.num_vertices()];
        for el in &mesh.elements {
            for &v in &el.verts {
                used[v] = true;
            }
        }
        for v in 0..mesh.num_vertices() {
            if used[v] {
                add(DofEntity::Vertex(v), bverts[v]);
            }
        }
        for (id, e) in mesh.edges.iter().enumerate() {
            for mode in 2..=edge_degree[id] {
                add(DofEntity::Edge { edge: id, mode }, e.boundary);
            }
        }
        for (k, el) in mesh.elements.iter().enumerate() {
            let set = &shapes[&(el.kind, el.degree)];
            let nint = set.funcs.iter().filter(|f| matches!(f.tag, ShapeTag::Interior(_))).count();
            for i in 0..nint {
                add(DofEntity::Interior { element: k, index: i }, false);
            }
        }
        let mut local_to_global = Vec::with_capacity(mesh.num_elements());
        for (k, el) in mesh.elements.iter().enumerate() {
            let set = &shapes[&(el.kind, el.degree)];
            let row = set
                .funcs
                .iter()
                .map(|f| {
                    let (ent, sign) = match f.tag {
                        ShapeTag::Vertex(i) => (DofEntity::Vertex(el.verts[i]), 1.0),
                        ShapeTag::Edge { edge, mode } => {
                            let g = mesh.elem_edges[k][edge];
                            if mode > edge_degree[g] {
                                return None;
                            }
                            let flip = mesh.edge_reversed(k, edge) && mode % 2 == 1;
                            (DofEntity::Edge { edge: g, mode }, if flip { -1.0 } else { 1.0 })
                        }
                        ShapeTag::Interior(i) => (DofEntity::Interior { element: k, index: i }, 1.0),
                    };
                    index.get(&ent).map(|&global| LocalDof { global, sign })
                })
                .collect();
            local_to_global.push(row);
        }
        Self {
            mesh: mesh.clone(),
            dirichlet,
            dofs: DofTable { entities, local_to_global, edge_degree, dirichlet: removed },
            shapes,
        }
    }

    pub fn dim(&self) -> usize {
        self.dofs.entities.len()
    }

    pub fn shape_set(&self, element: usize) -> &ShapeSet {
        let el = &self.mesh.elements[element];
        &self.shapes[&(el.kind, el.degree)]
    }

    /// Local coefficients (in the element's full shape set) of a global vector.
    pub fn local_coeffs(&self, u: &[f64], element: usize) -> Vec<f64> {
        self.dofs.local_to_global[element]
            .iter()
            .map(|d| d.map_or(0.0, |d| d.sign * u[d.global]))
            .collect()
    }

    /// Value of `u` at reference point `r` of `element`.
    pub fn eval_ref(&self, u: &[f64], element: usize, r: [f64; 2]) -> f64 {
        let set = self.shape_set(element);
        self.local_coeffs(u, element).iter().zip(&set.funcs).map(|(c, f)| if *c == 0.0 { 0.0 } else { c * f.poly.eval(&r) }).sum()
    }

    /// Restriction of `u` to `element` as a polynomial in reference coordinates.
    pub fn element_poly(&self, u: &[f64], element: usize) -> crate::polyalg::MultiPoly {
        let set = self.shape_set(element);
        let mut out = crate::polyalg::MultiPoly::zero(2);
        for (c, f) in self.local_coeffs(u, element).iter().zip(&set.funcs) {
            if *c != 0.0 {
                out = &out + &f.poly.scale(*c);
            }
        }
        out
    }

    /// Value of `u` at a physical point inside `element`.
    pub fn eval_physical(&self, u: &[f64], element: usize, x: [f64; 2]) -> f64 {
        self.eval_ref(u, element, self.mesh.maps[element].inverse(x))
    }

    /// Global indices of all dofs associated with an entity filter.
    pub fn dofs_where(&self, pred: impl Fn(&DofEntity) -> bool) -> Vec<usize> {
        (0..self.dim()).filter(|&i| pred(&self.dofs.entities[i])).collect()
    }

    /// Unit coordinate vector of global dof `i`.
    pub fn basis_vector(&self, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        v[i] = 1.0;
        v
    }
}
