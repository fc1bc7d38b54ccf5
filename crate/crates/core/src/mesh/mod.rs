//! Polygonal meshes stored as counter-clockwise vertex rings.
//!
//! Edge adjacency is derived when a mesh is built: every directed edge `(a, b)` of a cell
//! ring must be unique, an interior edge appears once in each direction, and a boundary
//! edge appears exactly once.

mod geometry;
mod io;
mod regularity;

use std::collections::HashMap;

pub use geometry::{point_in_polygon, signed_area, Edge, ElementGeometry};
pub use io::{load_mesh, save_mesh, MeshFile};
pub use regularity::{element_regularity, regularity_report, ElementRegularity, RegularityReport};

use crate::{Point, Result, VemError};

/// A conforming polygonal mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    boundary_vertex_flags: Vec<bool>,
    /// `(cell, local edge)` pairs lying on the domain boundary.
    boundary_edges: Vec<(usize, usize)>,
}

impl PolyMesh {
    /// Validates the rings and derives the boundary from single-incidence edges.
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        Self::build(vertices, cells, None)
    }

    /// Like [`PolyMesh::new`] but with explicitly tagged boundary vertices.
    pub fn with_boundary_vertices(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        boundary_vertices: &[usize],
    ) -> Result<Self> {
        Self::build(vertices, cells, Some(boundary_vertices))
    }

    fn build(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        boundary_vertices: Option<&[usize]>,
    ) -> Result<Self> {
        let nv = vertices.len();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();

        for (c, ring) in cells.iter().enumerate() {
            if ring.len() < 3 {
                return Err(VemError::InvalidCell {
                    cell: c,
                    reason: format!("ring has {} vertices, need at least 3", ring.len()),
                });
            }
            for (i, &v) in ring.iter().enumerate() {
                if v >= nv {
                    return Err(VemError::InvalidCell {
                        cell: c,
                        reason: format!("vertex index {v} out of range ({nv} vertices)"),
                    });
                }
                if ring[..i].contains(&v) {
                    return Err(VemError::InvalidCell {
                        cell: c,
                        reason: format!("vertex {v} repeated in ring"),
                    });
                }
            }
            let pts: Vec<Point> = ring.iter().map(|&v| vertices[v]).collect();
            let area = signed_area(&pts);
            if area < 0.0 {
                return Err(VemError::Orientation {
                    cell: c,
                    signed_area: area,
                });
            }
            if area == 0.0 || !area.is_finite() {
                return Err(VemError::DegenerateCell { cell: c, area });
            }
            for i in 0..ring.len() {
                let a = ring[i];
                let b = ring[(i + 1) % ring.len()];
                if directed.insert((a, b), c).is_some() {
                    return Err(VemError::NonManifoldEdge {
                        cell: c,
                        a,
                        b,
                        reason: "directed edge used twice, neighbours share orientation",
                    });
                }
            }
        }

        let mut boundary_edges = Vec::new();
        let mut derived_flags = vec![false; nv];
        for (c, ring) in cells.iter().enumerate() {
            for i in 0..ring.len() {
                let a = ring[i];
                let b = ring[(i + 1) % ring.len()];
                if !directed.contains_key(&(b, a)) {
                    boundary_edges.push((c, i));
                    derived_flags[a] = true;
                    derived_flags[b] = true;
                }
            }
        }

        let boundary_vertex_flags = match boundary_vertices {
            None => derived_flags,
            Some(list) => {
                let mut flags = vec![false; nv];
                for &v in list {
                    if v >= nv {
                        return Err(VemError::Parse(format!(
                            "boundary vertex {v} out of range ({nv} vertices)"
                        )));
                    }
                    flags[v] = true;
                }
                flags
            }
        };

        Ok(PolyMesh {
            vertices,
            cells,
            boundary_vertex_flags,
            boundary_edges,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn boundary_vertex_flags(&self) -> &[bool] {
        &self.boundary_vertex_flags
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex_flags[v]
    }

    pub fn boundary_edges(&self) -> &[(usize, usize)] {
        &self.boundary_edges
    }

    pub fn boundary_vertex_indices(&self) -> Vec<usize> {
        (0..self.num_vertices())
            .filter(|&v| self.boundary_vertex_flags[v])
            .collect()
    }

    /// Vertex coordinates of a cell ring.
    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn element_geometry(&self, c: usize) -> Result<ElementGeometry> {
        ElementGeometry::new(&self.cell_points(c)).map_err(|e| match e {
            VemError::DegenerateCell { area, .. } => VemError::DegenerateCell { cell: c, area },
            other => other,
        })
    }

    /// Undirected edges `(lo, hi)` in first-appearance order (cells in order, ring order).
    pub fn unique_edges(&self) -> Vec<(usize, usize)> {
        let mut seen = HashMap::new();
        let mut edges = Vec::new();
        for ring in &self.cells {
            for i in 0..ring.len() {
                let a = ring[i];
                let b = ring[(i + 1) % ring.len()];
                let key = (a.min(b), a.max(b));
                if seen.insert(key, edges.len()).is_none() {
                    edges.push(key);
                }
            }
        }
        edges
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_cells())
            .map(|c| signed_area(&self.cell_points(c)))
            .sum()
    }

    /// Largest cell diameter.
    pub fn h_max(&self) -> f64 {
        (0..self.num_cells())
            .map(|c| geometry::diameter(&self.cell_points(c)))
            .fold(0.0, f64::max)
    }

    /// Index of a cell containing `x` (boundary points count as inside). When `x` lies on an
    /// interface the lowest-numbered incident cell is returned.
    pub fn locate(&self, x: Point) -> Option<usize> {
        (0..self.num_cells()).find(|&c| geometry::point_in_polygon(&self.cell_points(c), x))
    }
}
