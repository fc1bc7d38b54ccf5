use nalgebra::DMatrix;

use crate::mesh::ElementGeometry;
use crate::poly::{gauss_legendre, poly_dim, polygon_quadrature, QuadratureRule, ScaledMonomialBasis};
use crate::{Point, Result};

/// Local DoF ordering: all vertex values, then edge moments edge by edge in ring order, then
/// internal moments in monomial order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub k: usize,
    pub n_vertices: usize,
}

impl DofLayout {
    pub fn new(n_vertices: usize, k: usize) -> Self {
        assert!(k >= 1, "degree must be at least 1");
        DofLayout { k, n_vertices }
    }

    pub fn for_element(geom: &ElementGeometry, k: usize) -> Self {
        Self::new(geom.num_vertices(), k)
    }

    pub fn per_edge(&self) -> usize {
        self.k - 1
    }

    pub fn n_vertex_dofs(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edge_dofs(&self) -> usize {
        self.n_vertices * self.per_edge()
    }

    /// `k (k - 1) / 2`, the dimension of `P_{k-2}`.
    pub fn n_internal(&self) -> usize {
        self.k * (self.k - 1) / 2
    }

    /// `n_V k + k (k - 1) / 2`.
    pub fn total(&self) -> usize {
        self.n_vertices * self.k + self.n_internal()
    }

    pub fn vertex(&self, i: usize) -> usize {
        i
    }

    pub fn edge(&self, e: usize, j: usize) -> usize {
        self.n_vertices + e * self.per_edge() + j
    }

    pub fn internal(&self, m: usize) -> usize {
        self.n_vertices + self.n_edge_dofs() + m
    }

    /// Local DoFs determining the trace on edge `e`: start vertex, end vertex, moments.
    pub fn edge_dofs(&self, e: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.k + 1);
        out.push(self.vertex(e));
        out.push(self.vertex((e + 1) % self.n_vertices));
        out.extend((0..self.per_edge()).map(|j| self.edge(e, j)));
        out
    }
}

/// Reconstruction of the degree-`k` trace on an edge from its `k + 1` DoFs
/// (`q(-1)`, `q(1)`, moments `1/2 int q t^j dt`), evaluated at the Gauss points of the
/// `k + 1`-point rule (exact to degree `2k + 1` along the edge).
#[derive(Debug, Clone)]
pub struct EdgeTrace {
    /// Scaled arclength of the Gauss points.
    pub params: Vec<f64>,
    /// Reference weights on `[-1, 1]`.
    pub ref_weights: Vec<f64>,
    /// `values[p, :]` maps the edge DoFs to the trace value at Gauss point `p`.
    pub values: DMatrix<f64>,
}

impl EdgeTrace {
    pub fn new(k: usize) -> Self {
        let n = k + 1;
        // columns: coefficients of t^l
        let mut m = DMatrix::zeros(n, n);
        for l in 0..n {
            m[(0, l)] = if l % 2 == 0 { 1.0 } else { -1.0 };
            m[(1, l)] = 1.0;
            for j in 0..k.saturating_sub(1) {
                if (l + j) % 2 == 0 {
                    m[(2 + j, l)] = 1.0 / (l + j + 1) as f64;
                }
            }
        }
        let inv = m.try_inverse().expect("edge reconstruction matrix is invertible");
        let gl = gauss_legendre(n);
        let params: Vec<f64> = gl.iter().map(|p| p.0).collect();
        let ref_weights: Vec<f64> = gl.iter().map(|p| p.1).collect();
        let vander = DMatrix::from_fn(n, n, |p, l| params[p].powi(l as i32));
        EdgeTrace {
            params,
            ref_weights,
            values: vander * inv,
        }
    }
}

/// Quadrature exactness used when interpolating non-polynomial functions.
pub(crate) fn interpolation_exactness(k: usize) -> usize {
    2 * k + 6
}

/// DoF values of a smooth function on one element.
pub fn interpolate_dofs(geom: &ElementGeometry, k: usize, v: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
    let rule = polygon_quadrature(geom, interpolation_exactness(k))?;
    Ok(interpolate_with_rule(geom, k, &rule, interpolation_exactness(k), &v))
}

pub(crate) fn interpolate_with_rule(
    geom: &ElementGeometry,
    k: usize,
    rule: &QuadratureRule,
    edge_exactness: usize,
    v: &impl Fn(Point) -> f64,
) -> Vec<f64> {
    let layout = DofLayout::for_element(geom, k);
    let mut dofs = vec![0.0; layout.total()];
    for (i, p) in geom.vertices.iter().enumerate() {
        dofs[layout.vertex(i)] = v(*p);
    }
    if k >= 2 {
        let gl = gauss_legendre(edge_exactness / 2 + 1);
        for (e, edge) in geom.edges.iter().enumerate() {
            for &(t, w) in gl {
                let val = 0.5 * w * v(edge.point_at(t));
                let mut tj = 1.0;
                for j in 0..layout.per_edge() {
                    dofs[layout.edge(e, j)] += val * tj;
                    tj *= t;
                }
            }
        }
        let basis = ScaledMonomialBasis::new(geom, k - 2);
        let n_int = poly_dim(k - 2);
        let mut vals = vec![0.0; n_int];
        for (x, w) in rule.iter() {
            basis.eval_into(x, &mut vals);
            let fw = w * v(x) / geom.area;
            for m in 0..n_int {
                dofs[layout.internal(m)] += fw * vals[m];
            }
        }
    }
    dofs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::triangle_quadrature;
    use std::f64::consts::PI;

    fn polygon(n: usize) -> ElementGeometry {
        let pts: Vec<Point> = (0..n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                Point::new(a.cos(), a.sin())
            })
            .collect();
        ElementGeometry::new(&pts).unwrap()
    }

    #[test]
    fn dimension_formula() {
        assert_eq!(DofLayout::new(4, 1).total(), 4);
        assert_eq!(DofLayout::for_element(&polygon(5), 2).total(), 11);
        assert_eq!(DofLayout::for_element(&polygon(6), 4).total(), 30);
        let l = DofLayout::new(4, 1);
        assert_eq!((l.n_edge_dofs(), l.n_internal()), (0, 0));
    }

    #[test]
    fn edge_trace_reproduces_polynomials() {
        for k in 1..=5 {
            let tr = EdgeTrace::new(k);
            // q(t) = t^k + 0.5 t - 2
            let q = |t: f64| t.powi(k as i32) + 0.5 * t - 2.0;
            let mut d = vec![q(-1.0), q(1.0)];
            let gl = gauss_legendre(k + 2);
            for j in 0..k - 1 {
                d.push(gl.iter().map(|&(t, w)| 0.5 * w * q(t) * t.powi(j as i32)).sum());
            }
            for (p, &t) in tr.params.iter().enumerate() {
                let val: f64 = (0..=k).map(|l| tr.values[(p, l)] * d[l]).sum();
                assert!((val - q(t)).abs() < 1e-13, "k={k}");
            }
        }
    }

    #[test]
    fn constant_function_dofs() {
        let g = polygon(5);
        let d = interpolate_dofs(&g, 3, |_| 1.0).unwrap();
        let l = DofLayout::for_element(&g, 3);
        for i in 0..5 {
            assert_eq!(d[l.vertex(i)], 1.0);
            assert!((d[l.edge(i, 0)] - 1.0).abs() < 1e-14);
            assert!(d[l.edge(i, 1)].abs() < 1e-14); // odd moment of a constant
        }
        assert!((d[l.internal(0)] - 1.0).abs() < 1e-14);
    }

    /// Recursive midpoint subdivision of a triangle, independent of the polygon rule.
    fn adaptive(a: Point, b: Point, c: Point, f: &dyn Fn(Point) -> f64, depth: usize) -> f64 {
        if depth == 0 {
            return triangle_quadrature(a, b, c, 8).integrate(f);
        }
        let (ab, bc, ca) = (nalgebra::center(&a, &b), nalgebra::center(&b, &c), nalgebra::center(&c, &a));
        adaptive(a, ab, ca, f, depth - 1)
            + adaptive(ab, b, bc, f, depth - 1)
            + adaptive(ca, bc, c, f, depth - 1)
            + adaptive(ab, bc, ca, f, depth - 1)
    }

    #[test]
    fn internal_moment_of_oscillatory_function() {
        let g = ElementGeometry::new(&[
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let v = |p: Point| (2.0 * PI * p.x).sin() * (2.0 * PI * p.y).sin() + p.x * p.x;
        let d = interpolate_dofs(&g, 2, v).unwrap();
        let whole = adaptive(g.vertices[0], g.vertices[1], g.vertices[2], &v, 4)
            + adaptive(g.vertices[0], g.vertices[2], g.vertices[3], &v, 4);
        assert!((d[DofLayout::for_element(&g, 2).internal(0)] - whole).abs() < 1e-10);
    }
}
