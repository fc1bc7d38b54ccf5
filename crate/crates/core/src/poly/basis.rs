use nalgebra::DMatrix;

use crate::mesh::{Edge, ElementGeometry};
use crate::{Point, Vector};

/// Dimension of the polynomials of degree `<= k` in two variables.
pub const fn poly_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Exponents `(a, b)` of the monomials of degree `<= k`, grouped by total degree and
/// ordered `(d, 0), (d - 1, 1), ..., (0, d)` within each group.
pub fn exponents(k: usize) -> Vec<(usize, usize)> {
    (0..=k)
        .flat_map(|d| (0..=d).map(move |b| (d - b, b)))
        .collect()
}

pub const fn monomial_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// `m_(a,b)(x) = ((x - x_E) / h_E)^a ((y - y_E) / h_E)^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMonomialBasis {
    pub center: Point,
    pub h: f64,
    pub degree: usize,
    exps: Vec<(usize, usize)>,
}

impl ScaledMonomialBasis {
    pub fn new(geom: &ElementGeometry, degree: usize) -> Self {
        Self::with_center(geom.centroid, geom.diameter, degree)
    }

    pub fn with_center(center: Point, h: f64, degree: usize) -> Self {
        ScaledMonomialBasis {
            center,
            h,
            degree,
            exps: exponents(degree),
        }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exps
    }

    fn powers(&self, x: Point) -> (Vec<f64>, Vec<f64>) {
        let xi = (x.x - self.center.x) / self.h;
        let eta = (x.y - self.center.y) / self.h;
        let mut px = vec![1.0; self.degree + 1];
        let mut py = vec![1.0; self.degree + 1];
        for i in 1..=self.degree {
            px[i] = px[i - 1] * xi;
            py[i] = py[i - 1] * eta;
        }
        (px, py)
    }

    pub fn eval_into(&self, x: Point, out: &mut [f64]) {
        let (px, py) = self.powers(x);
        for (o, &(a, b)) in out.iter_mut().zip(&self.exps) {
            *o = px[a] * py[b];
        }
    }

    pub fn eval_all(&self, x: Point) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.eval_into(x, &mut v);
        v
    }

    pub fn grad_all(&self, x: Point) -> Vec<Vector> {
        let (px, py) = self.powers(x);
        self.exps
            .iter()
            .map(|&(a, b)| {
                let gx = if a > 0 { a as f64 * px[a - 1] * py[b] } else { 0.0 };
                let gy = if b > 0 { b as f64 * px[a] * py[b - 1] } else { 0.0 };
                Vector::new(gx, gy) / self.h
            })
            .collect()
    }

    /// Value of `sum_a coeffs[a] m_a` at `x`.
    pub fn eval(&self, coeffs: &[f64], x: Point) -> f64 {
        let (px, py) = self.powers(x);
        coeffs
            .iter()
            .zip(&self.exps)
            .map(|(c, &(a, b))| c * px[a] * py[b])
            .sum()
    }

    pub fn grad(&self, coeffs: &[f64], x: Point) -> Vector {
        coeffs
            .iter()
            .zip(self.grad_all(x))
            .map(|(c, g)| g * *c)
            .sum()
    }

    /// Laplacian of `m_a` as `(index, coefficient)` pairs in the degree `degree - 2` basis.
    pub fn laplacian(&self, index: usize) -> Vec<(usize, f64)> {
        let (a, b) = self.exps[index];
        let h2 = self.h * self.h;
        let mut out = Vec::with_capacity(2);
        if a >= 2 {
            out.push((monomial_index(a - 2, b), (a * (a - 1)) as f64 / h2));
        }
        if b >= 2 {
            out.push((monomial_index(a, b - 2), (b * (b - 1)) as f64 / h2));
        }
        out
    }

    /// Matrices of `d/dx` and `d/dy` from degree `degree` to degree `degree - 1` coefficients.
    pub fn derivative_matrices(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let rows = if self.degree == 0 { 0 } else { poly_dim(self.degree - 1) };
        let mut dx = DMatrix::zeros(rows, self.dim());
        let mut dy = DMatrix::zeros(rows, self.dim());
        for (j, &(a, b)) in self.exps.iter().enumerate() {
            if a > 0 {
                dx[(monomial_index(a - 1, b), j)] = a as f64 / self.h;
            }
            if b > 0 {
                dy[(monomial_index(a, b - 1), j)] = b as f64 / self.h;
            }
        }
        (dx, dy)
    }
}

/// Monomials `t^j` of the scaled arclength `t` in `[-1, 1]` along an edge, measured from
/// the edge midpoint in units of the half-length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeBasis {
    pub edge: Edge,
    pub degree: usize,
}

impl EdgeBasis {
    pub fn new(edge: Edge, degree: usize) -> Self {
        EdgeBasis { edge, degree }
    }

    pub fn eval_all(&self, t: f64) -> Vec<f64> {
        let mut out = vec![1.0; self.degree + 1];
        for j in 1..=self.degree {
            out[j] = out[j - 1] * t;
        }
        out
    }

    /// Scaled arclength of a point on the edge.
    pub fn param(&self, x: Point) -> f64 {
        let d = self.edge.end - self.edge.start;
        2.0 * (x - self.edge.midpoint()).dot(&d) / d.norm_squared()
    }
}
