//! Scaled monomials, numerical quadrature on polygons and edges, and weighted mass matrices.

mod basis;
mod quadrature;

pub use basis::{exponents, monomial_index, poly_dim, EdgeBasis, ScaledMonomialBasis};
pub use quadrature::{
    ear_clip, edge_quadrature, gauss_legendre, polygon_quadrature, triangle_quadrature,
    QuadratureRule,
};

use nalgebra::DMatrix;

use crate::Point;

/// `H[a][b] = int_E weight * m_a * m_b` for the first `poly_dim(up_to)` basis functions.
/// The matrix is filled symmetrically, so it is exactly symmetric.
pub fn mass_matrix(
    basis: &ScaledMonomialBasis,
    rule: &QuadratureRule,
    up_to: usize,
    weight: impl Fn(Point) -> f64,
) -> DMatrix<f64> {
    let n = poly_dim(up_to);
    let mut h = DMatrix::zeros(n, n);
    let mut vals = vec![0.0; basis.dim()];
    for (x, w) in rule.iter() {
        basis.eval_into(x, &mut vals);
        let ww = w * weight(x);
        for a in 0..n {
            let wa = ww * vals[a];
            for b in a..n {
                h[(a, b)] += wa * vals[b];
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            h[(a, b)] = h[(b, a)];
        }
    }
    h
}
