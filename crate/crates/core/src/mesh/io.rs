use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ElementKind, Mesh, MeshError};

/// On-disk mesh layout (JSON).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MeshFile {
    pub vertices: Vec<[f64; 2]>,
    pub elements: Vec<ElementSpec>,
    #[serde(default)]
    pub boundary_edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ElementSpec {
    pub kind: ElementKind,
    pub verts: Vec<usize>,
    pub degree: u32,
}

impl MeshFile {
    pub fn into_mesh(self) -> Result<Mesh, MeshError> {
        let cells = self.elements.into_iter().map(|e| (e.kind, e.verts, e.degree)).collect();
        Mesh::new(self.vertices, cells, self.boundary_edges)
    }
}

impl From<&Mesh> for MeshFile {
    fn from(m: &Mesh) -> Self {
        MeshFile {
            vertices: m.vertices.clone(),
            elements: m
                .elements
                .iter()
                .map(|e| ElementSpec { kind: e.kind, verts: e.verts.clone(), degree: e.degree })
                .collect(),
            boundary_edges: m.declared_boundary.clone(),
        }
    }
}

impl Mesh {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MeshFile::from(self)).expect("plain data")
    }
}

pub fn parse_mesh(text: &str) -> Result<Mesh, MeshError> {
    let file: MeshFile = serde_json::from_str(text).map_err(|e| MeshError::Parse(e.to_string()))?;
    file.into_mesh()
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| MeshError::Io(e.to_string()))?;
    parse_mesh(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_two_triangles() {
        let text = r#"{
            "vertices": [[0,0],[1,0],[1,1],[0,1]],
            "elements": [
                {"kind": "tri", "verts": [0,1,2], "degree": 2},
                {"kind": "tri", "verts": [0,2,3], "degree": 2}
            ],
            "boundary_edges": [[0,1],[1,2],[2,3],[3,0]]
        }"#;
        let m = parse_mesh(text).unwrap();
        assert_eq!(m.num_elements(), 2);
        assert_eq!(m.edges.iter().filter(|e| !e.boundary).count(), 1);
        let again = parse_mesh(&m.to_json()).unwrap();
        assert_eq!(again.vertices, m.vertices);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_mesh("{"), Err(MeshError::Parse(_))));
        let bad = r#"{"vertices": [[0,0],[1,0]], "elements": [{"kind":"tri","verts":[0,1,5],"degree":1}]}"#;
        assert!(matches!(parse_mesh(bad), Err(MeshError::UnknownVertex { .. })));
        let bad_kind = r#"{"vertices": [], "elements": [{"kind":"hex","verts":[],"degree":1}]}"#;
        assert!(matches!(parse_mesh(bad_kind), Err(MeshError::Parse(_))));
        assert!(matches!(load_mesh("/nonexistent/mesh.json"), Err(MeshError::Io(_))));
    }
}
