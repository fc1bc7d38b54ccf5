use std::collections::HashMap;

use crate::mesh::PolyMesh;
use crate::poly::gauss_legendre;
use crate::vem::{interpolate_dofs, DofLayout};
use crate::{Point, Result};

/// Local-to-global DoF map.
///
/// Global numbering: vertex values first (mesh vertex order), then `k - 1` moments per edge
/// (edges in first-appearance order), then `k (k - 1) / 2` internal moments per cell. Edge
/// moments are taken along the canonical direction (lower vertex index first); a cell
/// traversing the edge the other way sees moment `j` multiplied by `(-1)^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub k: usize,
    pub n_vertices: usize,
    /// Canonical `(lo, hi)` vertex pairs.
    pub edges: Vec<(usize, usize)>,
    pub n_cells: usize,
    cell_dofs: Vec<Vec<usize>>,
    cell_signs: Vec<Vec<f64>>,
    boundary: Vec<bool>,
}

pub fn build_dofmap(mesh: &PolyMesh, k: usize) -> DofMap {
    assert!(k >= 1, "degree must be at least 1");
    let nv = mesh.num_vertices();
    let edges = mesh.unique_edges();
    let edge_id: HashMap<(usize, usize), usize> =
        edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let per_edge = k - 1;
    let per_cell = k * (k - 1) / 2;
    let edge_base = nv;
    let cell_base = nv + edges.len() * per_edge;
    let n_dofs = cell_base + mesh.num_cells() * per_cell;

    let mut cell_dofs = Vec::with_capacity(mesh.num_cells());
    let mut cell_signs = Vec::with_capacity(mesh.num_cells());
    for (c, ring) in mesh.cells().iter().enumerate() {
        let layout = DofLayout::new(ring.len(), k);
        let mut dofs = vec![0; layout.total()];
        let mut signs = vec![1.0; layout.total()];
        for (i, &v) in ring.iter().enumerate() {
            dofs[layout.vertex(i)] = v;
        }
        for i in 0..ring.len() {
            let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
            let e = edge_id[&(a.min(b), a.max(b))];
            let reversed = a > b;
            for j in 0..per_edge {
                dofs[layout.edge(i, j)] = edge_base + e * per_edge + j;
                if reversed && j % 2 == 1 {
                    signs[layout.edge(i, j)] = -1.0;
                }
            }
        }
        for m in 0..per_cell {
            dofs[layout.internal(m)] = cell_base + c * per_cell + m;
        }
        cell_dofs.push(dofs);
        cell_signs.push(signs);
    }

    let mut boundary = vec![false; n_dofs];
    for (v, &flag) in mesh.boundary_vertex_flags().iter().enumerate() {
        boundary[v] = flag;
    }
    for &(c, i) in mesh.boundary_edges() {
        let ring = mesh.cell(c);
        let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
        let e = edge_id[&(a.min(b), a.max(b))];
        for j in 0..per_edge {
            boundary[edge_base + e * per_edge + j] = true;
        }
    }

    DofMap {
        k,
        n_vertices: nv,
        edges,
        n_cells: mesh.num_cells(),
        cell_dofs,
        cell_signs,
        boundary,
    }
}

impl DofMap {
    pub fn n_dofs(&self) -> usize {
        self.boundary.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.cell_dofs[c]
    }

    pub fn cell_signs(&self, c: usize) -> &[f64] {
        &self.cell_signs[c]
    }

    pub fn is_boundary(&self, g: usize) -> bool {
        self.boundary[g]
    }

    pub fn boundary_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs()).filter(|&g| self.boundary[g]).collect()
    }

    pub fn interior_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs()).filter(|&g| !self.boundary[g]).collect()
    }

    pub fn edge_dof(&self, edge: usize, j: usize) -> usize {
        self.n_vertices + edge * (self.k - 1) + j
    }

    /// Local (cell-oriented) DoF values of cell `c` from a global vector.
    pub fn gather(&self, c: usize, global: &[f64]) -> Vec<f64> {
        self.cell_dofs[c]
            .iter()
            .zip(&self.cell_signs[c])
            .map(|(&g, &s)| s * global[g])
            .collect()
    }
}

/// Canonical edge moments `(1/|e|) int_e v t^j ds` with `t` running from `lo` to `hi`.
pub(crate) fn canonical_edge_moments(a: Point, b: Point, k: usize, v: &impl Fn(Point) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; k - 1];
    let mid = nalgebra::center(&a, &b);
    for &(t, w) in gauss_legendre((2 * k + 6) / 2 + 1) {
        let val = 0.5 * w * v(mid + (b - a) * (0.5 * t));
        let mut tj = 1.0;
        for o in out.iter_mut() {
            *o += val * tj;
            tj *= t;
        }
    }
    out
}

/// Global DoF vector of the interpolant of `v`.
pub fn interpolate_global(mesh: &PolyMesh, dofmap: &DofMap, v: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
    let k = dofmap.k;
    let mut out = vec![0.0; dofmap.n_dofs()];
    for (i, p) in mesh.vertices().iter().enumerate() {
        out[i] = v(*p);
    }
    for (e, &(lo, hi)) in dofmap.edges.iter().enumerate() {
        let m = canonical_edge_moments(mesh.vertices()[lo], mesh.vertices()[hi], k, &v);
        for (j, val) in m.into_iter().enumerate() {
            out[dofmap.edge_dof(e, j)] = val;
        }
    }
    if k >= 2 {
        for c in 0..mesh.num_cells() {
            let geom = mesh.element_geometry(c)?;
            let layout = DofLayout::for_element(&geom, k);
            let local = interpolate_dofs(&geom, k, &v)?;
            for m in 0..layout.n_internal() {
                out[dofmap.cell_dofs(c)[layout.internal(m)]] = local[layout.internal(m)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshgen::{lloyd_relax, random_seeds, square_mesh};

    #[test]
    fn grid_counts() {
        let m = square_mesh(5).unwrap();
        let d1 = build_dofmap(&m, 1);
        assert_eq!(d1.n_dofs(), 36);
        assert_eq!(d1.boundary_dofs().len(), 20);
        let d2 = build_dofmap(&m, 2);
        assert_eq!(d2.n_edges(), 60);
        assert_eq!(d2.n_dofs(), 121);
        assert_eq!(d2.boundary_dofs().len(), 40);
    }

    #[test]
    fn per_cell_interpolation_agrees_with_global() {
        let m = lloyd_relax(&random_seeds(40, 2), 0).unwrap();
        let v = |p: Point| (3.0 * p.x).sin() + p.y * p.y * p.x + 0.3 * p.y;
        for k in 1..=4 {
            let dm = build_dofmap(&m, k);
            let global = interpolate_global(&m, &dm, v).unwrap();
            for c in 0..m.num_cells() {
                let local = interpolate_dofs(&m.element_geometry(c).unwrap(), k, v).unwrap();
                let gathered = dm.gather(c, &global);
                for (a, b) in local.iter().zip(&gathered) {
                    assert!((a - b).abs() < 1e-13, "k={k} cell {c}: {a} vs {b}");
                }
            }
        }
    }
}
