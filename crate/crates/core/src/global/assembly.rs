use faer::prelude::Solve;
use faer::Col;
use rayon::prelude::*;

use super::dofmap::{build_dofmap, canonical_edge_moments, DofMap};
use super::sparse::SparseMatrix;
use crate::mesh::PolyMesh;
use crate::vem::{local_system, Coefficients, LocalElement, LocalSystem, Mode};
use crate::{Point, Result, VemError};

/// Mesh-wide element data for a fixed degree: the DoF map and every element's projectors.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub k: usize,
    pub dofmap: DofMap,
    pub elements: Vec<LocalElement>,
}

impl Discretization {
    /// Element projectors are computed in parallel and stored in cell order.
    pub fn new(mesh: &PolyMesh, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(VemError::InvalidArgument("degree k must be >= 1".into()));
        }
        let elements = (0..mesh.num_cells())
            .into_par_iter()
            .map(|c| LocalElement::new(mesh.element_geometry(c)?, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Discretization {
            k,
            dofmap: build_dofmap(mesh, k),
            elements,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.dofmap.n_dofs()
    }

    pub fn local_systems(
        &self,
        coeffs: &Coefficients,
        mode: Mode,
        quad_boost: usize,
    ) -> Result<Vec<LocalSystem>> {
        self.elements
            .par_iter()
            .map(|e| local_system(e, coeffs, mode, quad_boost))
            .collect()
    }

    /// Scatter-adds all local systems (sequential, in cell order).
    pub fn assemble(&self, coeffs: &Coefficients, mode: Mode, quad_boost: usize) -> Result<GlobalSystem> {
        let locals = self.local_systems(coeffs, mode, quad_boost)?;
        let n = self.n_dofs();
        let mut triplets = Vec::with_capacity(locals.iter().map(|l| l.ah.len()).sum());
        let mut rhs = vec![0.0; n];
        for (c, loc) in locals.iter().enumerate() {
            let dofs = self.dofmap.cell_dofs(c);
            let signs = self.dofmap.cell_signs(c);
            let total = loc.total();
            assert_eq!(total.nrows(), dofs.len(), "local/global dimension mismatch in cell {c}");
            for (i, (&gi, &si)) in dofs.iter().zip(signs).enumerate() {
                rhs[gi] += si * loc.f_loc[i];
                for (j, (&gj, &sj)) in dofs.iter().zip(signs).enumerate() {
                    triplets.push((gi, gj, si * sj * total[(i, j)]));
                }
            }
        }
        Ok(GlobalSystem {
            matrix: SparseMatrix::from_triplets(n, n, triplets),
            rhs,
        })
    }
}

/// Full system over all DoFs, before boundary conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
}

/// Convenience wrapper building the discretization and assembling in one call.
pub fn assemble(
    mesh: &PolyMesh,
    k: usize,
    coeffs: &Coefficients,
    mode: Mode,
    quad_boost: usize,
) -> Result<(Discretization, GlobalSystem)> {
    let disc = Discretization::new(mesh, k)?;
    let system = disc.assemble(coeffs, mode, quad_boost)?;
    Ok((disc, system))
}

/// System on the interior DoFs after eliminating the Dirichlet DoFs.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Full-length vector holding the boundary values (zero on interior DoFs).
    pub lifting: Vec<f64>,
    /// Global index of each reduced unknown.
    pub interior: Vec<usize>,
}

/// Boundary DoF values of `g`: vertex values and canonical edge moments.
pub fn boundary_values(mesh: &PolyMesh, dofmap: &DofMap, g: impl Fn(Point) -> f64) -> Vec<f64> {
    let mut lifting = vec![0.0; dofmap.n_dofs()];
    for (v, p) in mesh.vertices().iter().enumerate() {
        if dofmap.is_boundary(v) {
            lifting[v] = g(*p);
        }
    }
    if dofmap.k >= 2 {
        for (e, &(lo, hi)) in dofmap.edges.iter().enumerate() {
            if !dofmap.is_boundary(dofmap.edge_dof(e, 0)) {
                continue;
            }
            let m = canonical_edge_moments(mesh.vertices()[lo], mesh.vertices()[hi], dofmap.k, &g);
            for (j, val) in m.into_iter().enumerate() {
                lifting[dofmap.edge_dof(e, j)] = val;
            }
        }
    }
    lifting
}

/// Eliminates the boundary DoFs, moving `A_IB g_B` to the right-hand side.
pub fn apply_dirichlet(
    system: &GlobalSystem,
    mesh: &PolyMesh,
    dofmap: &DofMap,
    g: impl Fn(Point) -> f64,
) -> SparseSystem {
    let lifting = boundary_values(mesh, dofmap, g);
    let n = dofmap.n_dofs();
    let mut reduced = vec![usize::MAX; n];
    let interior = dofmap.interior_dofs();
    for (r, &gi) in interior.iter().enumerate() {
        reduced[gi] = r;
    }
    let mut rhs: Vec<f64> = interior.iter().map(|&gi| system.rhs[gi]).collect();
    let mut triplets = Vec::new();
    for &gi in &interior {
        let ri = reduced[gi];
        for (gj, v) in system.matrix.row(gi) {
            if dofmap.is_boundary(gj) {
                rhs[ri] -= v * lifting[gj];
            } else {
                triplets.push((ri, reduced[gj], v));
            }
        }
    }
    let m = interior.len();
    SparseSystem {
        matrix: SparseMatrix::from_triplets(m, m, triplets),
        rhs,
        lifting,
        interior,
    }
}

/// Sparse LU solve; returns the full global DoF vector (interior solution + lifting).
pub fn solve(system: &SparseSystem) -> Result<Vec<f64>> {
    let mut full = system.lifting.clone();
    let m = system.interior.len();
    if m == 0 {
        return Ok(full);
    }
    let a = system.matrix.to_faer();
    let lu = a
        .sp_lu()
        .map_err(|e| VemError::Singular(format!("sparse LU failed: {e:?}")))?;
    let b = Col::<f64>::from_fn(m, |i| system.rhs[i]);
    let x = lu.solve(&b);
    let x: Vec<f64> = (0..m).map(|i| x[i]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(VemError::Singular("non-finite solution (mesh too coarse?)".into()));
    }
    let ax = system.matrix.mul_vec(&x);
    let res: f64 = ax
        .iter()
        .zip(&system.rhs)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let bnorm = system.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if res > 1e-10 * bnorm.max(f64::MIN_POSITIVE) && res > 1e-14 {
        return Err(VemError::Singular(format!(
            "relative residual {:.3e} exceeds 1e-10",
            res / bnorm.max(f64::MIN_POSITIVE)
        )));
    }
    for (r, &gi) in system.interior.iter().enumerate() {
        full[gi] = x[r];
    }
    Ok(full)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use nalgebra::Matrix2;

    use super::*;
    use crate::global::interpolate_global;
    use crate::meshgen::{concave_mesh, lloyd_relax, random_seeds, square_mesh};
    use crate::vem::Diffusion;

    /// `sum c_ab x^a y^b` over `a + b <= k`, with coefficients from a fixed recipe.
    fn global_poly(k: usize) -> impl Fn(Point) -> (f64, f64) + Clone {
        let kappa = Matrix2::new(1.5, 0.4, 0.4, 0.8);
        move |x: Point| {
            let mut v = 0.0;
            let mut lap = 0.0;
            for d in 0..=k {
                for b in 0..=d {
                    let a = d - b;
                    let c = 0.5 + 0.25 * ((3 * a + 5 * b) % 7) as f64 - 0.8;
                    let pw = |t: f64, n: usize| if n == 0 { 1.0 } else { t.powi(n as i32) };
                    let (af, bf) = (a as f64, b as f64);
                    v += c * pw(x.x, a) * pw(x.y, b);
                    let dxx = if a >= 2 { af * (af - 1.0) * pw(x.x, a - 2) * pw(x.y, b) } else { 0.0 };
                    let dyy = if b >= 2 { bf * (bf - 1.0) * pw(x.x, a) * pw(x.y, b - 2) } else { 0.0 };
                    let dxy = if a >= 1 && b >= 1 { af * bf * pw(x.x, a - 1) * pw(x.y, b - 1) } else { 0.0 };
                    lap += c * (kappa[(0, 0)] * dxx + 2.0 * kappa[(0, 1)] * dxy + kappa[(1, 1)] * dyy);
                }
            }
            (v, -lap)
        }
    }

    fn anisotropic(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Coefficients {
        let mut c = Coefficients::diffusion(1.0, f);
        c.kappa = Diffusion::Tensor(Arc::new(|_| Matrix2::new(1.5, 0.4, 0.4, 0.8)));
        c.kappa0 = 0.5;
        c
    }

    fn solve_on(mesh: &PolyMesh, k: usize, coeffs: &Coefficients, g: impl Fn(Point) -> f64) -> (Discretization, Vec<f64>) {
        let (disc, sys) = assemble(mesh, k, coeffs, Mode::Standard, 2).unwrap();
        let reduced = apply_dirichlet(&sys, mesh, &disc.dofmap, g);
        let u = solve(&reduced).unwrap();
        (disc, u)
    }

    #[test]
    fn patch_tests_reproduce_polynomials() {
        let meshes = [
            square_mesh(3).unwrap(),
            concave_mesh(3).unwrap(),
            lloyd_relax(&random_seeds(20, 5), 0).unwrap(),
        ];
        for mesh in &meshes {
            for k in 1..=4 {
                let p = global_poly(k);
                let (pf, pv) = (p.clone(), p.clone());
                let coeffs = anisotropic(move |x| pf(x).1);
                let (disc, u) = solve_on(mesh, k, &coeffs, move |x| pv(x).0);
                let exact = interpolate_global(mesh, &disc.dofmap, |x| p(x).0).unwrap();
                let err = u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err < 1e-9, "k = {k}, dof error {err:e}");
            }
        }
    }

    #[test]
    fn constants_are_reproduced_with_reaction() {
        let mesh = lloyd_relax(&random_seeds(30, 2), 3).unwrap();
        for k in 1..=3 {
            let mut coeffs = Coefficients::diffusion(1.0, |x: Point| 2.0 * (1.0 + x.x * x.y));
            coeffs.gamma = Arc::new(|x: Point| 1.0 + x.x * x.y);
            let (_, u) = solve_on(&mesh, k, &coeffs, |_| 2.0);
            let disc = Discretization::new(&mesh, k).unwrap();
            let exact = interpolate_global(&mesh, &disc.dofmap, |_| 2.0).unwrap();
            for (a, b) in u.iter().zip(&exact) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pure_diffusion_matrix_is_symmetric_with_constant_kernel() {
        let mesh = concave_mesh(3).unwrap();
        for k in 1..=3 {
            let (disc, sys) = assemble(&mesh, k, &Coefficients::diffusion(1.0, |_| 1.0), Mode::Standard, 2).unwrap();
            let scale = sys.matrix.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(sys.matrix.asymmetry() < 1e-12 * scale);
            let ones = interpolate_global(&mesh, &disc.dofmap, |_| 1.0).unwrap();
            let r = sys.matrix.mul_vec(&ones);
            assert!(r.iter().all(|v| v.abs() < 1e-11 * scale));
        }
    }

    #[test]
    fn couplings_are_local() {
        let mesh = lloyd_relax(&random_seeds(25, 8), 2).unwrap();
        let k = 2;
        let prob = crate::harness::builtin_problem();
        let (disc, sys) = assemble(&mesh, k, &prob.coefficients, Mode::Standard, 2).unwrap();
        let n = disc.n_dofs();
        let mut share = vec![std::collections::HashSet::new(); n];
        for c in 0..mesh.num_cells() {
            for &i in disc.dofmap.cell_dofs(c) {
                share[i].extend(disc.dofmap.cell_dofs(c).iter().copied());
            }
        }
        for i in 0..n {
            for (j, _) in sys.matrix.row(i) {
                assert!(share[i].contains(&j));
            }
        }
    }

    #[test]
    fn assembly_is_deterministic_and_linear_in_f() {
        let mesh = lloyd_relax(&random_seeds(40, 3), 1).unwrap();
        let prob = crate::harness::builtin_problem();
        let disc = Discretization::new(&mesh, 3).unwrap();
        let a = disc.assemble(&prob.coefficients, Mode::Standard, 2).unwrap();
        let b = disc.assemble(&prob.coefficients, Mode::Standard, 2).unwrap();
        assert_eq!(a, b);
        let f1 = prob.coefficients.clone().with_f(|x: Point| x.x.exp());
        let f2 = prob.coefficients.clone().with_f(|x: Point| x.y * x.y - 3.0);
        let f12 = prob.coefficients.clone().with_f(|x: Point| x.x.exp() + x.y * x.y - 3.0);
        let (r1, r2, r12) = (
            disc.assemble(&f1, Mode::Standard, 2).unwrap().rhs,
            disc.assemble(&f2, Mode::Standard, 2).unwrap().rhs,
            disc.assemble(&f12, Mode::Standard, 2).unwrap().rhs,
        );
        for i in 0..r1.len() {
            assert!((r1[i] + r2[i] - r12[i]).abs() < 1e-14 * (1.0 + r12[i].abs()));
        }
    }

    #[test]
    fn homogeneous_elimination_keeps_rhs() {
        let mesh = square_mesh(4).unwrap();
        let disc = Discretization::new(&mesh, 2).unwrap();
        let sys = disc.assemble(&Coefficients::diffusion(1.0, |x: Point| x.x), Mode::Standard, 2).unwrap();
        let red = apply_dirichlet(&sys, &mesh, &disc.dofmap, |_| 0.0);
        assert_eq!(red.interior.len(), red.rhs.len());
        for (r, &g) in red.interior.iter().enumerate() {
            assert_eq!(red.rhs[r], sys.rhs[g]);
        }
        assert!(red.lifting.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn boundary_data_of_builtin_solution() {
        let mesh = square_mesh(2).unwrap();
        let dm = build_dofmap(&mesh, 2);
        let lift = boundary_values(&mesh, &dm, crate::harness::builtin_exact);
        let corner = mesh.vertices().iter().position(|p| p.x == 1.0 && p.y == 1.0).unwrap();
        assert!((lift[corner] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn single_cell_solve_returns_lifting() {
        let mesh = square_mesh(1).unwrap();
        let (_, u) = solve_on(&mesh, 1, &Coefficients::diffusion(1.0, |_| 0.0), |x| x.x + 2.0 * x.y);
        let expected: Vec<f64> = mesh.vertices().iter().map(|p| p.x + 2.0 * p.y).collect();
        assert_eq!(u, expected);
    }

    #[test]
    fn builtin_problem_error_decreases() {
        let prob = crate::harness::builtin_problem();
        let err = |n: usize| {
            let mesh = square_mesh(n).unwrap();
            let sol = crate::harness::solve_problem(&mesh, &prob.coefficients, &*prob.exact, 1, Mode::Standard, 2).unwrap();
            let proj = crate::post::project_solution(&sol.disc, &sol.dofs);
            crate::post::error_norms(&mesh, &proj, &*prob.exact, &*prob.exact_gradient, Default::default())
                .unwrap()
                .l2
        };
        assert!(err(20) < err(10));
    }
}
