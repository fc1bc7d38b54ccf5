use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PolyMesh;
use crate::{Point, Result, VemError};

/// On-disk JSON layout. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_vertices: Option<Vec<usize>>,
}

impl From<&PolyMesh> for MeshFile {
    fn from(mesh: &PolyMesh) -> Self {
        MeshFile {
            vertices: mesh.vertices().iter().map(|p| [p.x, p.y]).collect(),
            cells: mesh.cells().to_vec(),
            boundary_vertices: Some(mesh.boundary_vertex_indices()),
        }
    }
}

impl TryFrom<MeshFile> for PolyMesh {
    type Error = VemError;

    fn try_from(file: MeshFile) -> Result<Self> {
        let vertices = file.vertices.iter().map(|&[x, y]| Point::new(x, y)).collect();
        match file.boundary_vertices {
            Some(b) => PolyMesh::with_boundary_vertices(vertices, file.cells, &b),
            None => PolyMesh::new(vertices, file.cells),
        }
    }
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<PolyMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| VemError::io(path, e))?;
    let file: MeshFile =
        serde_json::from_str(&text).map_err(|e| VemError::Parse(format!("{}: {e}", path.display())))?;
    PolyMesh::try_from(file)
}

pub fn save_mesh(mesh: &PolyMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(&MeshFile::from(mesh))
        .map_err(|e| VemError::Parse(e.to_string()))?;
    fs::write(path, text).map_err(|e| VemError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_single_square_without_boundary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sq.json");
        fs::write(&path, r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]], "cells": [[0,1,2,3]]}"#).unwrap();
        let m = load_mesh(&path).unwrap();
        assert_eq!(m.num_cells(), 1);
        assert_eq!(m.boundary_edges().len(), 4);
    }

    #[test]
    fn reversed_ring_names_cell() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rev.json");
        fs::write(&path, r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]], "cells": [[3,2,1,0]]}"#).unwrap();
        let err = load_mesh(&path).unwrap_err();
        assert!(matches!(err, VemError::Orientation { cell: 0, .. }));
        assert!(err.to_string().contains("cell 0"));
    }

    #[test]
    fn garbage_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, "{\"vertices\": 3").unwrap();
        assert!(matches!(load_mesh(&path), Err(VemError::Parse(_))));
        assert!(matches!(load_mesh(dir.path().join("missing.json")), Err(VemError::Io { .. })));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let m = PolyMesh::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let err = save_mesh(&m, "/nonexistent-dir/for/sure/mesh.json").unwrap_err();
        assert!(matches!(err, VemError::Io { .. }));
    }
}
