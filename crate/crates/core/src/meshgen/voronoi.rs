//! Voronoi tessellations clipped to the unit square and Lloyd relaxation.
//!
//! Each cell is the unit square clipped by the bisector half-planes of nearby seeds. A
//! uniform bucket grid limits the candidates: once the searched rings of buckets cover a
//! disk of radius twice the current cell radius, no further seed can cut the cell.
//! Independently computed cells are then welded into a conforming mesh by merging vertices
//! closer than [`MERGE_TOL`].

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{signed_area, PolyMesh};
use crate::{Point, Result, VemError, Vector};

/// Vertices closer than this are merged.
pub const MERGE_TOL: f64 = 1e-10;
const MAX_RETRIES: usize = 10;

/// `count` uniform seeds in the open unit square.
pub fn random_seeds(count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut open01 = move || loop {
        let v: f64 = rng.random();
        if v > 0.0 {
            return v;
        }
    };
    (0..count).map(|_| Point::new(open01(), open01())).collect()
}

struct BucketGrid {
    n: usize,
    size: f64,
    buckets: Vec<Vec<usize>>,
}

impl BucketGrid {
    fn new(seeds: &[Point]) -> Self {
        let n = ((seeds.len() as f64).sqrt().floor() as usize).max(1);
        let size = 1.0 / n as f64;
        let mut buckets = vec![Vec::new(); n * n];
        for (i, s) in seeds.iter().enumerate() {
            let (bi, bj) = Self::coords(n, *s);
            buckets[bj * n + bi].push(i);
        }
        BucketGrid { n, size, buckets }
    }

    fn coords(n: usize, p: Point) -> (usize, usize) {
        let f = |v: f64| ((v * n as f64).floor().max(0.0) as usize).min(n - 1);
        (f(p.x), f(p.y))
    }

    /// Seeds in the buckets at Chebyshev distance exactly `r` from bucket `(bi, bj)`.
    fn ring(&self, bi: usize, bj: usize, r: usize, out: &mut Vec<usize>) {
        out.clear();
        let (bi, bj, r, n) = (bi as isize, bj as isize, r as isize, self.n as isize);
        for dj in -r..=r {
            for di in -r..=r {
                if di.abs().max(dj.abs()) != r {
                    continue;
                }
                let (i, j) = (bi + di, bj + dj);
                if i < 0 || j < 0 || i >= n || j >= n {
                    continue;
                }
                out.extend_from_slice(&self.buckets[(j * n + i) as usize]);
            }
        }
    }
}

/// Keeps the part of a convex polygon where `(x - m) . d <= 0`.
fn clip_half_plane(poly: &[Point], m: Point, d: Vector) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let sp = (p - m).dot(&d);
        let sq = (q - m).dot(&d);
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

fn dedup_ring(mut ring: Vec<Point>) -> Vec<Point> {
    ring.dedup_by(|a, b| (*a - *b).norm() < MERGE_TOL);
    while ring.len() > 1 && (ring[0] - ring[ring.len() - 1]).norm() < MERGE_TOL {
        ring.pop();
    }
    ring
}

/// Voronoi cells of `seeds` clipped to the unit square, each counter-clockwise.
pub fn voronoi_cells(seeds: &[Point]) -> Vec<Vec<Point>> {
    let grid = BucketGrid::new(seeds);
    let square = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ];
    let mut ring_seeds = Vec::new();
    seeds
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let (bi, bj) = BucketGrid::coords(grid.n, s);
            let mut cell = square.clone();
            for r in 0..=grid.n {
                grid.ring(bi, bj, r, &mut ring_seeds);
                for &j in &ring_seeds {
                    if j == i {
                        continue;
                    }
                    let q = seeds[j];
                    cell = clip_half_plane(&cell, nalgebra::center(&s, &q), q - s);
                }
                let radius = cell.iter().map(|p| (p - s).norm()).fold(0.0, f64::max);
                if r as f64 * grid.size >= 2.0 * radius {
                    break;
                }
            }
            dedup_ring(cell)
        })
        .collect()
}

fn polygon_centroid(ring: &[Point]) -> Point {
    let area = signed_area(ring);
    let n = ring.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = ring[i];
        let q = ring[(i + 1) % n];
        let cross = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    Point::new(cx / (6.0 * area), cy / (6.0 * area))
}

/// Seed positions and per-iteration diagnostics of a Lloyd run.
///
/// `movement[i]` is `max_j |s_j - c_j|` in step `i`; `energy[i]` is the quantization energy
/// `sum_j int_{V_j} |x - s_j|^2` of the seeds entering step `i`. Only the energy is guaranteed
/// to be non-increasing.
#[derive(Debug, Clone)]
pub struct LloydTrace {
    pub seeds: Vec<Point>,
    pub movement: Vec<f64>,
    pub energy: Vec<f64>,
}

/// `int_ring |x - s|^2 dx` by a triangle fan around `s`.
fn second_moment_about(ring: &[Point], s: Point) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| {
            let u = ring[i] - s;
            let v = ring[(i + 1) % n] - s;
            let area = 0.5 * (u.x * v.y - u.y * v.x);
            area / 6.0 * (u.norm_squared() + v.norm_squared() + u.dot(&v))
        })
        .sum()
}

/// Runs `iterations` Lloyd steps (seed <- centroid of its clipped Voronoi cell).
pub fn lloyd_iterate(seeds: &[Point], iterations: usize) -> LloydTrace {
    let mut seeds = seeds.to_vec();
    let mut movement = Vec::with_capacity(iterations);
    let mut energy = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let cells = voronoi_cells(&seeds);
        energy.push(seeds.iter().zip(&cells).map(|(s, c)| second_moment_about(c, *s)).sum());
        let mut max_move: f64 = 0.0;
        for (s, cell) in seeds.iter_mut().zip(&cells) {
            let c = polygon_centroid(cell);
            max_move = max_move.max((c - *s).norm());
            *s = c;
        }
        movement.push(max_move);
    }
    LloydTrace { seeds, movement, energy }
}

/// Lloyd-relaxed Voronoi mesh; `iterations = 0` gives the plain Voronoi mesh of `seeds`.
pub fn lloyd_relax(seeds: &[Point], iterations: usize) -> Result<PolyMesh> {
    if seeds.is_empty() {
        return Err(VemError::InvalidArgument("at least one seed is required".into()));
    }
    if let Some(p) = seeds
        .iter()
        .find(|p| !(p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0))
    {
        return Err(VemError::InvalidArgument(format!(
            "seed ({}, {}) is not in the open unit square",
            p.x, p.y
        )));
    }
    let trace = lloyd_iterate(seeds, iterations);
    voronoi_mesh_from_seeds(&trace.seeds)
}

/// Voronoi mesh of `seeds`. Near-coincident seeds and welding failures are handled by
/// deterministic perturbation, giving up after a fixed number of retries.
pub fn voronoi_mesh_from_seeds(seeds: &[Point]) -> Result<PolyMesh> {
    let mut seeds = seeds.to_vec();
    let mut last_err = String::new();
    for attempt in 0..=MAX_RETRIES {
        if attempt > 0 {
            perturb(&mut seeds, attempt as u64);
        }
        if let Some((a, b)) = near_duplicate(&seeds) {
            last_err = format!("seeds {a} and {b} coincide");
            continue;
        }
        match weld(&voronoi_cells(&seeds)) {
            Ok(mesh) => return Ok(mesh),
            Err(e) => last_err = e.to_string(),
        }
    }
    Err(VemError::Generation(format!(
        "voronoi construction failed after {MAX_RETRIES} retries: {last_err}"
    )))
}

fn perturb(seeds: &mut [Point], attempt: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9_7f4a_7c15 ^ attempt);
    for s in seeds.iter_mut() {
        let dx: f64 = rng.random_range(-1.0..1.0);
        let dy: f64 = rng.random_range(-1.0..1.0);
        s.x = (s.x + 1e-8 * dx).clamp(1e-12, 1.0 - 1e-12);
        s.y = (s.y + 1e-8 * dy).clamp(1e-12, 1.0 - 1e-12);
    }
}

fn near_duplicate(seeds: &[Point]) -> Option<(usize, usize)> {
    let grid = BucketGrid::new(seeds);
    let mut near = Vec::new();
    for (i, &s) in seeds.iter().enumerate() {
        let (bi, bj) = BucketGrid::coords(grid.n, s);
        for r in 0..=1 {
            grid.ring(bi, bj, r, &mut near);
            if let Some(&j) = near
                .iter()
                .find(|&&j| j != i && (seeds[j] - s).norm() < MERGE_TOL)
            {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

/// Merges cell vertices into a shared vertex list and validates the result.
fn weld(cells: &[Vec<Point>]) -> Result<PolyMesh> {
    let bucket = |v: f64| (v / (10.0 * MERGE_TOL)).floor() as i64;
    let mut lookup: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut rings = Vec::with_capacity(cells.len());

    for (c, cell) in cells.iter().enumerate() {
        let mut ring: Vec<usize> = Vec::with_capacity(cell.len());
        for p in cell {
            let p = snap_to_boundary(*p);
            let (bx, by) = (bucket(p.x), bucket(p.y));
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = lookup.get(&(bx + dx, by + dy)) {
                        if let Some(&v) = list.iter().find(|&&v| (vertices[v] - p).norm() < MERGE_TOL) {
                            found = Some(v);
                            break 'search;
                        }
                    }
                }
            }
            let v = found.unwrap_or_else(|| {
                vertices.push(p);
                lookup.entry((bx, by)).or_default().push(vertices.len() - 1);
                vertices.len() - 1
            });
            if ring.last() != Some(&v) {
                ring.push(v);
            }
        }
        while ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(VemError::InvalidCell {
                cell: c,
                reason: "voronoi cell collapsed".into(),
            });
        }
        rings.push(ring);
    }

    let mesh = PolyMesh::new(vertices, rings)?;
    let area = mesh.total_area();
    if (area - 1.0).abs() > 1e-10 {
        return Err(VemError::Generation(format!("cells cover area {area}, expected 1")));
    }
    Ok(mesh)
}

fn snap_to_boundary(mut p: Point) -> Point {
    for v in p.coords.iter_mut() {
        if v.abs() < MERGE_TOL {
            *v = 0.0;
        } else if (*v - 1.0).abs() < MERGE_TOL {
            *v = 1.0;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::regularity_report;

    #[test]
    fn single_seed_gives_unit_square() {
        let m = lloyd_relax(&[Point::new(0.3, 0.6)], 0).unwrap();
        assert_eq!(m.num_cells(), 1);
        assert_eq!(m.total_area(), 1.0);
        assert_eq!(m.num_vertices(), 4);
    }

    #[test]
    fn hundred_seeds_tile_the_square() {
        let seeds = random_seeds(100, 7);
        let m = lloyd_relax(&seeds, 0).unwrap();
        assert_eq!(m.num_cells(), 100);
        assert!((m.total_area() - 1.0).abs() < 1e-12);
        // each cell contains its own seed
        for (c, s) in seeds.iter().enumerate() {
            assert_eq!(m.locate(*s), Some(c));
        }
    }

    #[test]
    fn voronoi_cells_match_brute_force_nearest_seed() {
        let seeds = random_seeds(60, 3);
        let cells = voronoi_cells(&seeds);
        let probes = random_seeds(500, 99);
        for x in probes {
            let nearest = (0..seeds.len())
                .min_by(|&a, &b| (seeds[a] - x).norm().total_cmp(&(seeds[b] - x).norm()))
                .unwrap();
            assert!(crate::mesh::point_in_polygon(&cells[nearest], x));
        }
    }

    #[test]
    fn symmetric_seeds_are_a_fixed_point() {
        let seeds = [
            Point::new(0.25, 0.25),
            Point::new(0.75, 0.25),
            Point::new(0.25, 0.75),
            Point::new(0.75, 0.75),
        ];
        let trace = lloyd_iterate(&seeds, 1);
        assert_eq!(trace.movement, vec![0.0]);
        let m = lloyd_relax(&seeds, 1).unwrap();
        assert_eq!(m.num_cells(), 4);
        assert_eq!(m.num_vertices(), 9);
    }

    #[test]
    fn duplicate_seeds_are_perturbed() {
        let seeds = [Point::new(0.5, 0.5), Point::new(0.5, 0.5), Point::new(0.2, 0.7)];
        let m = voronoi_mesh_from_seeds(&seeds).unwrap();
        assert_eq!(m.num_cells(), 3);
    }

    #[test]
    fn lloyd_improves_edge_ratio() {
        let seeds = random_seeds(100, 11);
        let raw = regularity_report(&lloyd_relax(&seeds, 0).unwrap());
        let cvt = regularity_report(&lloyd_relax(&seeds, 100).unwrap());
        assert!(cvt.min_edge_ratio > raw.min_edge_ratio);
        assert!(cvt.min_rho > raw.min_rho);
    }
}
