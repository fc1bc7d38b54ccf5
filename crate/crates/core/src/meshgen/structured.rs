use crate::mesh::PolyMesh;
use crate::{Point, Result, VemError};

/// `n x n` congruent squares.
pub fn square_mesh(n: usize) -> Result<PolyMesh> {
    if n == 0 {
        return Err(VemError::InvalidArgument("n_per_side must be >= 1".into()));
    }
    let nf = n as f64;
    let vid = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point::new(i as f64 / nf, j as f64 / nf));
        }
    }
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
        }
    }
    PolyMesh::new(vertices, cells)
}

/// Every square `[0,a]^2` of an `n x n` grid split by the zigzag
/// `(0, a/2) -> (a/3, 3a/4) -> (2a/3, a/4) -> (a, a/2)` into two congruent non-convex
/// hexagons (one reflex vertex each). The split points on vertical grid lines are shared
/// with the neighbouring squares.
pub fn concave_mesh(n: usize) -> Result<PolyMesh> {
    if n == 0 {
        return Err(VemError::InvalidArgument("n_per_side must be >= 1".into()));
    }
    let nf = n as f64;
    let grid = |i: usize, j: usize| j * (n + 1) + i;
    let n_grid = (n + 1) * (n + 1);
    // midpoint of the vertical segment on line i between rows j and j+1
    let mid = |i: usize, j: usize| n_grid + j * (n + 1) + i;
    let n_mid = n * (n + 1);
    let inner = |i: usize, j: usize, which: usize| n_grid + n_mid + 2 * (j * n + i) + which;

    let mut vertices = Vec::with_capacity(n_grid + n_mid + 2 * n * n);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point::new(i as f64 / nf, j as f64 / nf));
        }
    }
    for j in 0..n {
        for i in 0..=n {
            vertices.push(Point::new(i as f64 / nf, (j as f64 + 0.5) / nf));
        }
    }
    for j in 0..n {
        for i in 0..n {
            vertices.push(Point::new(
                (i as f64 + 1.0 / 3.0) / nf,
                (j as f64 + 0.75) / nf,
            ));
            vertices.push(Point::new(
                (i as f64 + 2.0 / 3.0) / nf,
                (j as f64 + 0.25) / nf,
            ));
        }
    }

    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (p1, p2) = (inner(i, j, 0), inner(i, j, 1));
            cells.push(vec![grid(i, j), grid(i + 1, j), mid(i + 1, j), p2, p1, mid(i, j)]);
            cells.push(vec![mid(i, j), p1, p2, mid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1)]);
        }
    }
    PolyMesh::new(vertices, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{regularity_report, signed_area};

    #[test]
    fn square_counts() {
        let m = square_mesh(5).unwrap();
        assert_eq!(m.num_cells(), 25);
        assert_eq!(m.num_vertices(), 36);
        assert_eq!(m.boundary_edges().len(), 20);
        let one = square_mesh(1).unwrap();
        assert_eq!(one.num_cells(), 1);
        assert_eq!(one.cell_points(0)[2], Point::new(1.0, 1.0));
        assert!((square_mesh(20).unwrap().total_area() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn concave_cells_are_nonconvex_and_star_shaped() {
        let m = concave_mesh(5).unwrap();
        assert_eq!(m.num_cells(), 50);
        assert!((m.total_area() - 1.0).abs() < 1e-13);
        for c in 0..m.num_cells() {
            let g = m.element_geometry(c).unwrap();
            assert!(signed_area(&g.vertices) > 0.0);
            // independent convexity scan: at least one right turn along the CCW ring
            let n = g.vertices.len();
            let right_turns = (0..n)
                .filter(|&i| {
                    let (a, b, c) = (g.vertices[i], g.vertices[(i + 1) % n], g.vertices[(i + 2) % n]);
                    (b - a).perp(&(c - b)) < 0.0
                })
                .count();
            assert!(right_turns >= 1, "cell {c} is convex");
        }
        let report = regularity_report(&m);
        assert!(report.not_star_shaped.is_empty());
        assert!(report.min_rho > 0.0);
    }

    #[test]
    fn concave_halves_are_congruent() {
        let m = concave_mesh(1).unwrap();
        let lower = m.element_geometry(0).unwrap();
        let upper = m.element_geometry(1).unwrap();
        assert!((lower.area - 0.5).abs() < 1e-15 && (upper.area - 0.5).abs() < 1e-15);
        // rotation by pi about (1/2, 1/2) maps one ring onto the other
        for p in &lower.vertices {
            let q = crate::Point::new(1.0 - p.x, 1.0 - p.y);
            assert!(upper.vertices.iter().any(|u| (u - q).norm() < 1e-15));
        }
    }
}
