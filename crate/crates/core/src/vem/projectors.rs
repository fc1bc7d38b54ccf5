//! Projector matrices mapping local DoF vectors to scaled-monomial coefficients.

use std::ops::AddAssign;

use nalgebra::{DMatrix, DVector};

use super::dofs::{DofLayout, EdgeTrace};
use crate::mesh::ElementGeometry;
use crate::poly::{mass_matrix, poly_dim, polygon_quadrature, ScaledMonomialBasis};
use crate::{Result, VemError};

/// All computable projections of a local virtual function, as matrices acting on DoFs.
#[derive(Debug, Clone)]
pub struct ProjectorSet {
    /// `n_k x n_D`: coefficients of `Pi_nabla_k q`.
    pub pi_nabla: DMatrix<f64>,
    /// `n_k x n_D`: coefficients of `Pi0_k q`.
    pub pi0_k: DMatrix<f64>,
    /// `n_{k-1} x n_D`: coefficients of `Pi0_{k-1} q`.
    pub pi0_km1: DMatrix<f64>,
    /// `n_{k-1} x n_D`: components of `Pi0_{k-1} grad q`.
    pub pi0_grad_x: DMatrix<f64>,
    pub pi0_grad_y: DMatrix<f64>,
    /// `n_D x n_k`: DoFs of each scaled monomial.
    pub dof_matrix: DMatrix<f64>,
    /// Closed gradient system of `Pi_nabla` (row 0 is the boundary-mean condition).
    pub g_matrix: DMatrix<f64>,
    /// Right-hand side of the `Pi_nabla` system.
    pub b_matrix: DMatrix<f64>,
    /// `P_k` mass matrix.
    pub mass: DMatrix<f64>,
}

fn singular(what: &str) -> VemError {
    VemError::Singular(format!("local {what} system is singular"))
}

/// Left inverse `(D^T D)^{-1} D^T` of a full-column-rank matrix through Householder QR.
fn pseudo_inverse(d: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let qr = d.clone().qr();
    qr.r().solve_upper_triangular(&qr.q().transpose())
}

/// Cholesky solve with symmetric diagonal scaling, which removes most of the conditioning
/// spread between monomials of different degree.
fn spd_solve(mut m: DMatrix<f64>, rhs: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let d: Vec<f64> = (0..m.nrows()).map(|i| 1.0 / m[(i, i)].sqrt()).collect();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            m[(i, j)] *= d[i] * d[j];
        }
    }
    let mut b = rhs.clone();
    for (i, mut row) in b.row_iter_mut().enumerate() {
        row *= d[i];
    }
    let mut x = m.cholesky()?.solve(&b);
    for (i, mut row) in x.row_iter_mut().enumerate() {
        row *= d[i];
    }
    Some(x)
}

impl ProjectorSet {
    pub fn new(geom: &ElementGeometry, basis: &ScaledMonomialBasis, layout: &DofLayout) -> Result<Self> {
        let k = layout.k;
        let nk = poly_dim(k);
        let nkm1 = poly_dim(k - 1);
        let nkm2 = layout.n_internal();
        let nd = layout.total();
        let area = geom.area;

        let rule = polygon_quadrature(geom, 2 * k)?;
        let mass = mass_matrix(basis, &rule, k, |_| 1.0);

        // ---- boundary integrals of the reconstructed trace ----
        let trace = EdgeTrace::new(k);
        let mut b_mat = DMatrix::zeros(nk, nd);
        let mut g_mat = DMatrix::zeros(nk, nk);
        let mut ex = DMatrix::zeros(nkm1, nd);
        let mut ey = DMatrix::zeros(nkm1, nd);
        let mut dof_matrix = DMatrix::zeros(nd, nk);

        for (e, edge) in geom.edges.iter().enumerate() {
            let local = layout.edge_dofs(e);
            for (p, &t) in trace.params.iter().enumerate() {
                let x = edge.point_at(t);
                let w = trace.ref_weights[p] * 0.5 * edge.length;
                let vals = basis.eval_all(x);
                let grads = basis.grad_all(x);
                for (l, &dof) in local.iter().enumerate() {
                    let tr = w * trace.values[(p, l)];
                    if tr == 0.0 {
                        continue;
                    }
                    b_mat[(0, dof)] += tr;
                    for a in 1..nk {
                        b_mat[(a, dof)] += tr * grads[a].dot(&edge.normal);
                    }
                    for a in 0..nkm1 {
                        ex[(a, dof)] += tr * vals[a] * edge.normal.x;
                        ey[(a, dof)] += tr * vals[a] * edge.normal.y;
                    }
                }
                for b in 0..nk {
                    g_mat[(0, b)] += w * vals[b];
                }
                // edge-moment rows of the DoF matrix
                let mut tj = 1.0;
                for j in 0..layout.per_edge() {
                    for b in 0..nk {
                        dof_matrix[(layout.edge(e, j), b)] += 0.5 * trace.ref_weights[p] * tj * vals[b];
                    }
                    tj *= t;
                }
            }
        }

        // ---- interior terms from the internal moments ----
        for a in 1..nk {
            for (m, c) in basis.laplacian(a) {
                b_mat[(a, layout.internal(m))] -= c * area;
            }
        }
        for (a, &(pa, pb)) in basis.exponents()[..nkm1].iter().enumerate() {
            if pa > 0 {
                let m = crate::poly::monomial_index(pa - 1, pb);
                ex[(a, layout.internal(m))] -= pa as f64 / basis.h * area;
            }
            if pb > 0 {
                let m = crate::poly::monomial_index(pa, pb - 1);
                ey[(a, layout.internal(m))] -= pb as f64 / basis.h * area;
            }
        }

        for (x, w) in rule.iter() {
            let grads = basis.grad_all(x);
            for a in 1..nk {
                for b in 0..nk {
                    g_mat[(a, b)] += w * grads[a].dot(&grads[b]);
                }
            }
        }

        for (i, v) in geom.vertices.iter().enumerate() {
            let vals = basis.eval_all(*v);
            for b in 0..nk {
                dof_matrix[(layout.vertex(i), b)] = vals[b];
            }
        }
        for m in 0..nkm2 {
            for b in 0..nk {
                dof_matrix[(layout.internal(m), b)] = mass[(m, b)] / area;
            }
        }

        let pi_nabla = g_mat
            .clone()
            .lu()
            .solve(&b_mat)
            .ok_or_else(|| singular("elliptic projector"))?;

        // ---- L2 projection through the enhancement identity ----
        // q and Pi_nabla q have equal moments against (I - Q) m_a, Q the L2 projection onto
        // P_{k-2}, so Pi0_k q = Pi_nabla q + Pi0_{k-2}(q - Pi_nabla q). Only the P_{k-2} mass
        // matrix is inverted, which keeps the result accurate on badly shaped cells.
        let mut pi0_k = pi_nabla.clone();
        if nkm2 > 0 {
            let mut residual_moments = -(mass.rows(0, nkm2) * &pi_nabla);
            for m in 0..nkm2 {
                residual_moments[(m, layout.internal(m))] += area;
            }
            let low = mass.view((0, 0), (nkm2, nkm2)).into_owned();
            let correction = spd_solve(low, &residual_moments).ok_or_else(|| singular("P_{k-2} mass"))?;
            pi0_k.rows_mut(0, nkm2).add_assign(&correction);
        }

        let mass_km1 = mass.view((0, 0), (nkm1, nkm1)).into_owned();
        let pi0_km1 = spd_solve(mass_km1.clone(), &(mass.rows(0, nkm1) * &pi0_k))
            .ok_or_else(|| singular("P_{k-1} mass"))?;
        let pi0_grad_x = spd_solve(mass_km1.clone(), &ex).ok_or_else(|| singular("P_{k-1} mass"))?;
        let pi0_grad_y = spd_solve(mass_km1, &ey).ok_or_else(|| singular("P_{k-1} mass"))?;

        // One refinement step against the DoFs of the monomials. The correction vanishes in
        // exact arithmetic; in floating point it brings polynomial reproduction from
        // cond(G) eps down to cond(D) eps on stretched cells.
        let d_pinv = pseudo_inverse(&dof_matrix).ok_or_else(|| singular("DoF matrix"))?;
        let refine = |p: DMatrix<f64>, target: &DMatrix<f64>| {
            let defect = target - &p * &dof_matrix;
            p + defect * &d_pinv
        };
        let (dx, dy) = basis.derivative_matrices();
        let identity = DMatrix::identity(nk, nk);
        let pi_nabla = refine(pi_nabla, &identity);
        let pi0_k = refine(pi0_k, &identity);
        let pi0_grad_x = refine(pi0_grad_x, &dx);
        let pi0_grad_y = refine(pi0_grad_y, &dy);

        Ok(ProjectorSet {
            pi_nabla,
            pi0_k,
            pi0_km1,
            pi0_grad_x,
            pi0_grad_y,
            dof_matrix,
            g_matrix: g_mat,
            b_matrix: b_mat,
            mass,
        })
    }

    /// Coefficients of `Pi_nabla q` for the DoF vector `dofs`.
    pub fn apply_pi_nabla(&self, dofs: &[f64]) -> DVector<f64> {
        &self.pi_nabla * DVector::from_column_slice(dofs)
    }

    pub fn apply_pi0_k(&self, dofs: &[f64]) -> DVector<f64> {
        &self.pi0_k * DVector::from_column_slice(dofs)
    }

    pub fn apply_pi0_grad(&self, dofs: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let d = DVector::from_column_slice(dofs);
        (&self.pi0_grad_x * &d, &self.pi0_grad_y * &d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshgen::{concave_mesh, lloyd_relax, random_seeds};
    use crate::Point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(points: &[Point], k: usize) -> (ElementGeometry, ScaledMonomialBasis, ProjectorSet, DofLayout) {
        let geom = ElementGeometry::new(points).unwrap();
        let basis = ScaledMonomialBasis::new(&geom, k);
        let layout = DofLayout::for_element(&geom, k);
        let p = ProjectorSet::new(&geom, &basis, &layout).unwrap();
        (geom, basis, p, layout)
    }

    fn unit_square() -> Vec<Point> {
        vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)]
    }

    fn sample_cells() -> Vec<Vec<Point>> {
        let mut cells = Vec::new();
        let concave = concave_mesh(2).unwrap();
        cells.push(concave.cell_points(0));
        cells.push(concave.cell_points(3));
        let voronoi = lloyd_relax(&random_seeds(15, 4), 0).unwrap();
        cells.extend((0..6).map(|c| voronoi.cell_points(c)));
        cells
    }

    #[test]
    fn hat_function_on_unit_square() {
        let (_, basis, p, _) = setup(&unit_square(), 1);
        let hat = [1.0, 0.0, 0.0, 0.0];
        let c = p.apply_pi_nabla(&hat);
        for &(x, y) in &[(0.0, 0.0), (0.3, 0.8), (1.0, 0.5)] {
            let v = basis.eval(c.as_slice(), Point::new(x, y));
            assert!((v - (0.75 - 0.5 * x - 0.5 * y)).abs() < 1e-14);
        }
        let (gx, gy) = p.apply_pi0_grad(&hat);
        assert!((gx[0] + 0.5).abs() < 1e-14 && (gy[0] + 0.5).abs() < 1e-14);
        // Pi0_1 agrees with Pi_nabla_1 for k = 1
        assert!((&p.pi0_k - &p.pi_nabla).abs().max() < 1e-13);
    }

    #[test]
    fn projectors_reproduce_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for points in sample_cells() {
            for k in 1..=4 {
                let (_, basis, p, _) = setup(&points, k);
                let coeffs: Vec<f64> = (0..poly_dim(k)).map(|_| rng.random_range(-1.0..1.0)).collect();
                let dofs = &p.dof_matrix * DVector::from_column_slice(&coeffs);
                let pn = p.apply_pi_nabla(dofs.as_slice());
                let p0 = p.apply_pi0_k(dofs.as_slice());
                let (gx, gy) = p.apply_pi0_grad(dofs.as_slice());
                let (dx, dy) = basis.derivative_matrices();
                let c = DVector::from_column_slice(&coeffs);
                assert!((pn - &c).amax() < 1e-10, "Pi_nabla, k = {k}");
                assert!((p0 - &c).amax() < 1e-10, "Pi0_k, k = {k}");
                // gradient coefficients carry a 1/h factor
                let (ex, ey) = (&dx * &c, &dy * &c);
                assert!((gx - &ex).amax() < 1e-10 * ex.amax(), "Pi0 grad x, k = {k}");
                assert!((gy - &ey).amax() < 1e-10 * ey.amax(), "Pi0 grad y, k = {k}");
            }
        }
    }

    #[test]
    fn projections_are_idempotent_on_random_dofs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for points in sample_cells() {
            for k in 1..=4 {
                let (_, _, p, layout) = setup(&points, k);
                let dofs: Vec<f64> = (0..layout.total()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let once = p.apply_pi_nabla(&dofs);
                let twice = p.apply_pi_nabla((&p.dof_matrix * &once).as_slice());
                assert!((&once - twice).amax() < 1e-10 * once.amax().max(1.0));
                let once = p.apply_pi0_k(&dofs);
                let twice = p.apply_pi0_k((&p.dof_matrix * &once).as_slice());
                assert!((&once - twice).amax() < 1e-10 * once.amax().max(1.0));
            }
        }
    }

    #[test]
    fn low_moments_match_the_l2_projection() {
        // the moments against P_{k-2} are DoFs, so Pi0_k must reproduce them exactly
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for points in sample_cells() {
            for k in 2..=4 {
                let (geom, _, p, layout) = setup(&points, k);
                let dofs: Vec<f64> = (0..layout.total()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let moments = &p.mass * p.apply_pi0_k(&dofs) / geom.area;
                for m in 0..layout.n_internal() {
                    assert!((moments[m] - dofs[layout.internal(m)]).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn pi_nabla_boundary_mean_condition() {
        // for k = 1 the trace is piecewise linear, so its boundary integral is the trapezoid sum
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for points in sample_cells() {
            let (geom, basis, p, _) = setup(&points, 1);
            let n = points.len();
            let dofs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let c = p.apply_pi_nabla(&dofs);
            let mut trace = 0.0;
            let mut proj = 0.0;
            for (i, edge) in geom.edges.iter().enumerate() {
                trace += 0.5 * edge.length * (dofs[i] + dofs[(i + 1) % n]);
                let ends = basis.eval(c.as_slice(), edge.start) + basis.eval(c.as_slice(), edge.end);
                proj += 0.5 * edge.length * ends;
            }
            assert!((trace - proj).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_free_gradient_moment_is_a_boundary_integral() {
        // p = (-(y - y_E), x - x_E) has zero divergence, so int grad q . p = int_dE q p.n.
        // For k = 2 the trace is the quadratic fixed by the end values and the edge mean, and
        // q p.n is cubic along the edge, so Simpson's rule is exact.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for points in sample_cells() {
            let (geom, basis, p, layout) = setup(&points, 2);
            let dofs: Vec<f64> = (0..layout.total()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (gx, gy) = p.apply_pi0_grad(&dofs);
            let h = basis.h;
            let mut volume = 0.0;
            for a in 0..3 {
                volume += -h * p.mass[(a, 2)] * gx[a] + h * p.mass[(a, 1)] * gy[a];
            }
            let n = points.len();
            let mut boundary = 0.0;
            for (e, edge) in geom.edges.iter().enumerate() {
                let (qa, qb) = (dofs[e], dofs[(e + 1) % n]);
                let mean = dofs[layout.edge(e, 0)];
                let qm = (3.0 * mean - 0.5 * (qa + qb)) / 2.0;
                let pn = |x: Point| -(x.y - geom.centroid.y) * edge.normal.x + (x.x - geom.centroid.x) * edge.normal.y;
                let mid = edge.midpoint();
                boundary += edge.length / 6.0 * (qa * pn(edge.start) + 4.0 * qm * pn(mid) + qb * pn(edge.end));
            }
            assert!((volume - boundary).abs() < 1e-12 * boundary.abs().max(1e-3), "{volume} vs {boundary}");
        }
    }

    #[test]
    fn energy_of_projected_polynomial_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for points in sample_cells() {
            for k in 1..=4 {
                let (geom, basis, p, _) = setup(&points, k);
                let c = DVector::from_fn(poly_dim(k), |_, _| rng.random_range(-1.0..1.0));
                let pc = p.apply_pi_nabla((&p.dof_matrix * &c).as_slice());
                let rule = polygon_quadrature(&geom, 2 * k).unwrap();
                let energy = |v: &DVector<f64>| rule.integrate(|x| basis.grad(v.as_slice(), x).norm_squared());
                let (a, b) = (energy(&c), energy(&pc));
                assert!((a - b).abs() < 1e-9 * a);
            }
        }
    }
}
