//! JSON mesh documents.

use super::{BoundaryTag, PolygonalMesh};
use crate::{Error, Point, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshBoundaryEntry {
    pub edge: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshDocument {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Vec<usize>>,
    #[serde(default)]
    pub boundary: Vec<MeshBoundaryEntry>,
}

impl MeshDocument {
    pub fn into_mesh(self) -> Result<PolygonalMesh> {
        let mut tags: HashMap<[usize; 2], BoundaryTag> = HashMap::new();
        for b in &self.boundary {
            let key = [b.edge[0].min(b.edge[1]), b.edge[0].max(b.edge[1])];
            tags.insert(key, b.tag);
        }
        let vertices: Vec<Point> = self
            .vertices
            .iter()
            .map(|p| Point::new(p[0], p[1]))
            .collect();
        let mesh = PolygonalMesh::build_from_arrays(vertices, self.cells, |_, key| {
            tags.get(&key).copied().unwrap_or(BoundaryTag::GammaD)
        })?;
        for key in tags.keys() {
            let listed = mesh.boundary_edges().any(|(_, e)| e.vertices == *key);
            if !listed {
                return Err(Error::UnknownBoundaryEdge(key[0], key[1]));
            }
        }
        Ok(mesh)
    }
}

impl PolygonalMesh {
    pub fn to_document(&self) -> MeshDocument {
        MeshDocument {
            vertices: self.vertices().iter().map(|p| [p.x, p.y]).collect(),
            cells: self.cells().to_vec(),
            boundary: self
                .boundary_edges()
                .map(|(_, e)| MeshBoundaryEntry {
                    edge: e.vertices,
                    tag: e.tag,
                })
                .collect(),
        }
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let doc: MeshDocument = serde_json::from_str(&text)?;
        doc.into_mesh()
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_document())?;
        std::fs::write(path, text)?;
        Ok(())
    }
}
