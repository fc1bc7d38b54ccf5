use crate::{Point, Result, VemError, Vector};

/// A straight edge of an element, traversed counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub start: Point,
    pub end: Point,
    pub length: f64,
    /// Outward unit normal.
    pub normal: Vector,
}

impl Edge {
    pub fn new(start: Point, end: Point) -> Self {
        let d = end - start;
        let length = d.norm();
        Edge {
            start,
            end,
            length,
            normal: Vector::new(d.y, -d.x) / length,
        }
    }

    pub fn midpoint(&self) -> Point {
        nalgebra::center(&self.start, &self.end)
    }

    /// Point at scaled arclength `t` in `[-1, 1]` (`-1` is `start`).
    pub fn point_at(&self, t: f64) -> Point {
        self.midpoint() + (self.end - self.start) * (0.5 * t)
    }
}

/// Per-element geometric data shared by all local computations.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub vertices: Vec<Point>,
    pub centroid: Point,
    pub area: f64,
    pub diameter: f64,
    pub edges: Vec<Edge>,
}

impl ElementGeometry {
    pub fn new(vertices: &[Point]) -> Result<Self> {
        let area = signed_area(vertices);
        if !(area > 0.0) {
            return Err(VemError::DegenerateCell { cell: 0, area });
        }
        let n = vertices.len();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let p = vertices[i];
            let q = vertices[(i + 1) % n];
            let cross = p.x * q.y - q.x * p.y;
            cx += (p.x + q.x) * cross;
            cy += (p.y + q.y) * cross;
        }
        let centroid = Point::new(cx / (6.0 * area), cy / (6.0 * area));
        let edges = (0..n)
            .map(|i| Edge::new(vertices[i], vertices[(i + 1) % n]))
            .collect();
        Ok(ElementGeometry {
            vertices: vertices.to_vec(),
            centroid,
            area,
            diameter: diameter(vertices),
            edges,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[(i + n - 1) % n];
            let b = self.vertices[i];
            let c = self.vertices[(i + 1) % n];
            cross(b - a, c - b) >= -1e-14 * self.diameter * self.diameter
        })
    }

    /// Indices of reflex (interior angle > pi) vertices.
    pub fn reflex_vertices(&self) -> Vec<usize> {
        let n = self.vertices.len();
        (0..n)
            .filter(|&i| {
                let a = self.vertices[(i + n - 1) % n];
                let b = self.vertices[i];
                let c = self.vertices[(i + 1) % n];
                cross(b - a, c - b) < -1e-14 * self.diameter * self.diameter
            })
            .collect()
    }
}

/// Shoelace signed area; positive for counter-clockwise rings.
pub fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    let mut twice = 0.0;
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        twice += p.x * q.y - q.x * p.y;
    }
    0.5 * twice
}

pub(crate) fn diameter(points: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            d = d.max((p - q).norm());
        }
    }
    d
}

pub(crate) fn cross(a: Vector, b: Vector) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Point-in-polygon with the boundary counted as inside.
pub fn point_in_polygon(ring: &[Point], x: Point) -> bool {
    let n = ring.len();
    let scale = diameter(ring).max(f64::MIN_POSITIVE);
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let ab = b - a;
        let ax = x - a;
        let t = ax.dot(&ab) / ab.norm_squared();
        if (0.0..=1.0).contains(&t) && cross(ab, ax).abs() <= 1e-12 * scale * ab.norm() {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (ring[i], ring[j]);
        if (pi.y > x.y) != (pj.y > x.y) {
            let xc = pj.x + (x.y - pj.y) * (pi.x - pj.x) / (pi.y - pj.y);
            if x.x < xc {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}
