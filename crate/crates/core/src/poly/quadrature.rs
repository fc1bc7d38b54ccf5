//! Quadrature on edges (Gauss-Legendre) and polygons (sub-triangulation + collapsed
//! Gauss-Legendre rule on each triangle).

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::mesh::{signed_area, Edge, ElementGeometry};
use crate::{Point, Result, VemError};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

const MAX_CACHED_POINTS: usize = 64;

/// Gauss-Legendre nodes and weights on `[-1, 1]` with `n` points (exact to degree `2n - 1`).
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    static CACHE: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    assert!(n >= 1 && n <= MAX_CACHED_POINTS, "unsupported Gauss-Legendre size {n}");
    let cache = CACHE.get_or_init(|| {
        (1..=MAX_CACHED_POINTS)
            .map(|m| {
                let rule = GaussLegendre::new(NonZeroUsize::new(m).unwrap());
                let mut pairs = rule.as_node_weight_pairs().to_vec();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                pairs
            })
            .collect()
    });
    &cache[n - 1]
}

/// Gauss-Legendre rule on an edge, exact for polynomials of degree `exactness` in arclength.
/// Also returns the scaled arclength parameter of every point.
pub fn edge_quadrature(edge: &Edge, exactness: usize) -> (QuadratureRule, Vec<f64>) {
    let n = exactness / 2 + 1;
    let half = 0.5 * edge.length;
    let mut rule = QuadratureRule::default();
    let mut params = Vec::with_capacity(n);
    for &(t, w) in gauss_legendre(n) {
        rule.points.push(edge.point_at(t));
        rule.weights.push(w * half);
        params.push(t);
    }
    (rule, params)
}

/// Rule on the reference triangle `(0,0), (1,0), (0,1)` as `(u, v, weight)`, weights summing
/// to 1/2. Collapsed square: `u = s`, `v = t (1 - s)`, Jacobian `1 - s`.
fn reference_triangle(exactness: usize) -> &'static [(f64, f64, f64)] {
    static CACHE: OnceLock<Vec<Vec<(f64, f64, f64)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        (0..=2 * MAX_CACHED_POINTS - 3)
            .map(|d| {
                let n = (d + 2).div_ceil(2);
                let gl = gauss_legendre(n);
                let mut pts = Vec::with_capacity(n * n);
                for &(xs, ws) in gl {
                    let s = 0.5 * (xs + 1.0);
                    for &(xt, wt) in gl {
                        let t = 0.5 * (xt + 1.0);
                        pts.push((s, t * (1.0 - s), 0.25 * ws * wt * (1.0 - s)));
                    }
                }
                pts
            })
            .collect()
    });
    &cache[exactness]
}

/// Rule on triangle `(a, b, c)` exact for polynomials of degree `exactness`. Weights carry
/// the sign of the triangle orientation.
pub fn triangle_quadrature(a: Point, b: Point, c: Point, exactness: usize) -> QuadratureRule {
    let jac = 2.0 * signed_area(&[a, b, c]);
    let reference = reference_triangle(exactness);
    let mut rule = QuadratureRule {
        points: Vec::with_capacity(reference.len()),
        weights: Vec::with_capacity(reference.len()),
    };
    for &(u, v, w) in reference {
        rule.points.push(a + (b - a) * u + (c - a) * v);
        rule.weights.push(w * jac);
    }
    rule
}

/// Polygon rule exact for `P_exactness`. The polygon is fanned from its centroid when every
/// fan triangle is positively oriented, otherwise ear-clipped.
pub fn polygon_quadrature(geom: &ElementGeometry, exactness: usize) -> Result<QuadratureRule> {
    let v = &geom.vertices;
    let n = v.len();
    let c = geom.centroid;
    let tol = 1e-12 * geom.diameter * geom.diameter;
    let fan_ok = (0..n).all(|i| signed_area(&[c, v[i], v[(i + 1) % n]]) > tol);

    let triangles: Vec<[Point; 3]> = if fan_ok {
        (0..n).map(|i| [c, v[i], v[(i + 1) % n]]).collect()
    } else {
        ear_clip(v)?
            .into_iter()
            .map(|[i, j, k]| [v[i], v[j], v[k]])
            .collect()
    };

    let mut rule = QuadratureRule::default();
    for [a, b, cc] in triangles {
        let t = triangle_quadrature(a, b, cc, exactness);
        rule.points.extend(t.points);
        rule.weights.extend(t.weights);
    }
    Ok(rule)
}

/// Ear-clipping triangulation of a simple counter-clockwise polygon, as vertex-index triples.
pub fn ear_clip(ring: &[Point]) -> Result<Vec<[usize; 3]>> {
    let mut idx: Vec<usize> = (0..ring.len()).collect();
    let mut tris = Vec::with_capacity(ring.len().saturating_sub(2));
    let scale = super::super::mesh::ElementGeometry::new(ring)
        .map_err(|_| VemError::Triangulation("polygon has non-positive area".into()))?
        .diameter;
    let tol = 1e-14 * scale * scale;

    while idx.len() > 3 {
        let m = idx.len();
        let ear = (0..m).find(|&i| {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (ring[ia], ring[ib], ring[ic]);
            if signed_area(&[a, b, c]) <= tol {
                return false;
            }
            idx.iter().all(|&j| {
                j == ia || j == ib || j == ic || !in_triangle(ring[j], a, b, c)
            })
        });
        let Some(i) = ear else {
            return Err(VemError::Triangulation(
                "no ear found; polygon is self-intersecting or degenerate".into(),
            ));
        };
        tris.push([idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]]);
        idx.remove(i);
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Ok(tris)
}

fn in_triangle(p: Point, a: Point, b: Point, c: Point) -> bool {
    let d1 = signed_area(&[a, b, p]);
    let d2 = signed_area(&[b, c, p]);
    let d3 = signed_area(&[c, a, p]);
    d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0
}
