//! Shape-regularity diagnostics.
//!
//! `rho` is the radius of the largest disk contained in the kernel of the cell (the set of
//! points from which the whole cell is visible) divided by the cell diameter. The kernel of
//! a simple polygon is the intersection of the inner half-planes of its edges, so the disk is
//! found by the Chebyshev-center linear program
//!
//! ```text
//! maximize r  subject to  n_e . x + r <= n_e . a_e  for every edge e
//! ```
//!
//! solved by enumerating the vertices of the feasible set (cells have few edges).

use nalgebra::{Matrix3, Vector3};

use super::{ElementGeometry, PolyMesh};
use crate::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct ElementRegularity {
    pub rho: f64,
    pub min_edge_ratio: f64,
    pub star_shaped: bool,
    pub convex: bool,
    /// Center of the largest kernel disk (meaningful only when star-shaped).
    pub kernel_center: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub elements: Vec<ElementRegularity>,
    pub min_rho: f64,
    pub min_edge_ratio: f64,
    /// Cells whose kernel has empty interior.
    pub not_star_shaped: Vec<usize>,
}

pub fn regularity_report(mesh: &PolyMesh) -> RegularityReport {
    let elements: Vec<ElementRegularity> = (0..mesh.num_cells())
        .map(|c| match mesh.element_geometry(c) {
            Ok(g) => element_regularity(&g),
            Err(_) => ElementRegularity {
                rho: 0.0,
                min_edge_ratio: 0.0,
                star_shaped: false,
                convex: false,
                kernel_center: mesh.cell_points(c)[0],
            },
        })
        .collect();
    let min_rho = elements.iter().map(|e| e.rho).fold(f64::INFINITY, f64::min);
    let min_edge_ratio = elements
        .iter()
        .map(|e| e.min_edge_ratio)
        .fold(f64::INFINITY, f64::min);
    let not_star_shaped = elements
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.star_shaped)
        .map(|(c, _)| c)
        .collect();
    RegularityReport {
        elements,
        min_rho,
        min_edge_ratio,
        not_star_shaped,
    }
}

pub fn element_regularity(geom: &ElementGeometry) -> ElementRegularity {
    let (center, radius) = kernel_chebyshev_center(geom);
    let h = geom.diameter;
    let star_shaped = radius > 1e-12 * h;
    let min_edge = geom.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min);
    ElementRegularity {
        rho: if star_shaped { radius / h } else { 0.0 },
        min_edge_ratio: min_edge / h,
        star_shaped,
        convex: geom.is_convex(),
        kernel_center: center,
    }
}

/// Chebyshev center and radius of the edge half-plane intersection. The radius is negative
/// when the intersection is empty.
pub fn kernel_chebyshev_center(geom: &ElementGeometry) -> (Point, f64) {
    let rows: Vec<(f64, f64, f64)> = geom
        .edges
        .iter()
        .map(|e| (e.normal.x, e.normal.y, e.normal.dot(&e.start.coords)))
        .collect();
    let tol = 1e-12 * geom.diameter;
    let m = rows.len();
    let mut best = (geom.centroid, f64::NEG_INFINITY);
    for i in 0..m {
        for j in i + 1..m {
            for l in j + 1..m {
                let a = Matrix3::new(
                    rows[i].0, rows[i].1, 1.0, //
                    rows[j].0, rows[j].1, 1.0, //
                    rows[l].0, rows[l].1, 1.0,
                );
                let rhs = Vector3::new(rows[i].2, rows[j].2, rows[l].2);
                let Some(sol) = a.lu().solve(&rhs) else {
                    continue;
                };
                if !sol.iter().all(|v| v.is_finite()) {
                    continue;
                }
                let feasible = rows
                    .iter()
                    .all(|&(nx, ny, c)| nx * sol[0] + ny * sol[1] + sol[2] <= c + tol);
                if feasible && sol[2] > best.1 {
                    best = (Point::new(sol[0], sol[1]), sol[2]);
                }
            }
        }
    }
    best
}
