//! The built-in convection-diffusion-reaction test problem and convergence sweeps.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::Matrix2;
use rayon::prelude::*;

use crate::global::{apply_dirichlet, solve, Discretization};
use crate::mesh::PolyMesh;
use crate::meshgen::{generate, Family, GeneratorSpec};
use crate::post::{
    convergence_rates, error_norms, exact_norms, point_error, project_solution, ConvergenceReport,
    ErrorRecord, GradientRepresentative, ProjectedSolution,
};
use crate::vem::{Coefficients, Diffusion, Mode, ScalarFn, VectorFn};
use crate::{Point, Result, VemError, Vector};

/// Where the point error is measured.
pub const POINT_OF_INTEREST: Point = Point::new(0.781, 0.766);

/// Coefficients together with the exact solution they were manufactured from.
#[derive(Clone)]
pub struct TestProblem {
    pub coefficients: Coefficients,
    pub exact: ScalarFn,
    pub exact_gradient: VectorFn,
}

impl std::fmt::Debug for TestProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestProblem")
            .field("coefficients", &self.coefficients)
            .finish_non_exhaustive()
    }
}

pub fn builtin_kappa(x: Point) -> Matrix2<f64> {
    Matrix2::new(x.y * x.y + 1.0, -x.x * x.y, -x.x * x.y, x.x * x.x + 1.0)
}

pub fn builtin_exact(x: Point) -> f64 {
    x.x * x.x * x.y + (2.0 * PI * x.x).sin() * (2.0 * PI * x.y).sin() + 2.0
}

pub fn builtin_exact_gradient(x: Point) -> Vector {
    let (sx, cx) = (2.0 * PI * x.x).sin_cos();
    let (sy, cy) = (2.0 * PI * x.y).sin_cos();
    Vector::new(2.0 * x.x * x.y + 2.0 * PI * cx * sy, x.x * x.x + 2.0 * PI * sx * cy)
}

/// Right-hand side for `builtin_exact`.
///
/// `div(kappa grad p) = kappa : hess p - x p_x - y p_y` because the divergence of the rows
/// of `kappa` is `(-x, -y)`, and `div(b p) = 2p + x p_x + y p_y`.
pub fn builtin_forcing(x: Point) -> f64 {
    let (sx, cx) = (2.0 * PI * x.x).sin_cos();
    let (sy, cy) = (2.0 * PI * x.y).sin_cos();
    let four_pi2 = 4.0 * PI * PI;
    let g = builtin_exact_gradient(x);
    let pxx = 2.0 * x.y - four_pi2 * sx * sy;
    let pyy = -four_pi2 * sx * sy;
    let pxy = 2.0 * x.x + four_pi2 * cx * cy;
    let k = builtin_kappa(x);
    let hess = k[(0, 0)] * pxx + 2.0 * k[(0, 1)] * pxy + k[(1, 1)] * pyy;
    let gamma = x.x * x.x + x.y.powi(3);
    -hess + 2.0 * (x.x * g.x + x.y * g.y) + (2.0 + gamma) * builtin_exact(x)
}

/// Full-tensor diffusion, linear convection `b = (x, y)` and reaction `x^2 + y^3`.
pub fn builtin_problem() -> TestProblem {
    TestProblem {
        coefficients: Coefficients {
            kappa: Diffusion::Tensor(Arc::new(builtin_kappa)),
            b: Arc::new(|x: Point| Vector::new(x.x, x.y)),
            gamma: Arc::new(|x: Point| x.x * x.x + x.y.powi(3)),
            f: Arc::new(builtin_forcing),
            kappa0: 1.0,
        },
        exact: Arc::new(builtin_exact),
        exact_gradient: Arc::new(builtin_exact_gradient),
    }
}

/// Discretization plus the solved global DoF vector.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub disc: Discretization,
    pub dofs: Vec<f64>,
}

/// Assembles and solves on `mesh` with Dirichlet data `g`.
pub fn solve_problem(
    mesh: &PolyMesh,
    coeffs: &Coefficients,
    g: &(dyn Fn(Point) -> f64 + Sync),
    k: usize,
    mode: Mode,
    quad_boost: usize,
) -> Result<DiscreteSolution> {
    let disc = Discretization::new(mesh, k)?;
    let system = disc.assemble(coeffs, mode, quad_boost)?;
    let reduced = apply_dirichlet(&system, mesh, &disc.dofmap, g);
    let dofs = solve(&reduced)?;
    Ok(DiscreteSolution { disc, dofs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub k: usize,
    pub families: Vec<Family>,
    /// Cell counts (square counts for the square-based families), ascending.
    pub sizes: Vec<usize>,
    pub mode: Mode,
    pub seed: u64,
    pub quad_boost: usize,
    pub gradient: GradientRepresentative,
    pub point: Point,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            k: 1,
            families: Family::ALL.to_vec(),
            sizes: vec![25, 100, 400, 1600],
            mode: Mode::Standard,
            seed: 0,
            quad_boost: 2,
            gradient: GradientRepresentative::L2Projection,
            point: POINT_OF_INTEREST,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.k) {
            return Err(VemError::InvalidArgument(format!("k must be in 1..=4, got {}", self.k)));
        }
        if self.families.is_empty() || self.sizes.is_empty() {
            return Err(VemError::InvalidArgument("need at least one family and one size".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(VemError::InvalidArgument(
                "sizes must be strictly ascending".into(),
            ));
        }
        Ok(())
    }
}

/// Convergence data of one (family, k, mode) sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport {
    pub family: Family,
    pub k: usize,
    pub mode: Mode,
    pub report: ConvergenceReport,
}

/// Errors of the built-in problem on one mesh. A failed solve yields a `NaN` record.
pub fn measure(
    mesh: &PolyMesh,
    problem: &TestProblem,
    config: &ExperimentConfig,
) -> Result<ErrorRecord> {
    let exact = &*problem.exact;
    let sol = match solve_problem(mesh, &problem.coefficients, exact, config.k, config.mode, config.quad_boost) {
        Ok(s) => s,
        Err(VemError::Singular(_)) => {
            let dofs = crate::global::build_dofmap(mesh, config.k).n_dofs();
            return Ok(ErrorRecord::failed(mesh.h_max(), mesh.num_cells(), dofs));
        }
        Err(e) => return Err(e),
    };
    let proj = project_solution(&sol.disc, &sol.dofs);
    solution_errors(mesh, problem, &sol, &proj, config.gradient, config.point)
}

/// Relative L2, H1 and point errors of a solved discretization against the exact solution.
pub fn solution_errors(
    mesh: &PolyMesh,
    problem: &TestProblem,
    sol: &DiscreteSolution,
    proj: &ProjectedSolution,
    gradient: GradientRepresentative,
    at: Point,
) -> Result<ErrorRecord> {
    let exact = &*problem.exact;
    let grad = &*problem.exact_gradient;
    let err = error_norms(mesh, proj, exact, grad, gradient)?;
    let reference = exact_norms(mesh, exact, grad, 2 * sol.disc.k + 12)?;
    let point = point_error(mesh, proj, exact, at)?;
    Ok(ErrorRecord {
        h_max: mesh.h_max(),
        n_cells: mesh.num_cells(),
        err_l2_rel: err.l2 / reference.l2,
        err_h1_rel: err.h1 / reference.h1,
        err_point_rel: point.relative,
        dofs: sol.disc.n_dofs(),
    })
}

/// Runs every (family, size) combination of `config` on the built-in problem.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<FamilyReport>> {
    config.validate()?;
    let problem = builtin_problem();
    config.families
        .iter()
        .map(|&family| {
            let records = config
                .sizes
                .par_iter()
                .map(|&n| {
                    let mesh = generate(&GeneratorSpec::new(family, n, config.seed))?;
                    measure(&mesh, &problem, config)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FamilyReport {
                family,
                k: config.k,
                mode: config.mode,
                report: convergence_rates(&records),
            })
        })
        .collect()
}

pub const CSV_HEADER: [&str; 11] = [
    "family",
    "k",
    "mode",
    "n_cells",
    "n_dofs",
    "h_max",
    "err_L2_rel",
    "err_H1_rel",
    "err_point_rel",
    "slope_L2_pairwise",
    "slope_H1_pairwise",
];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// CSV rows for `reports`: one per mesh, then a `<family>_fit` row per report holding the
/// least-squares slopes in the slope columns.
pub fn report_rows(reports: &[FamilyReport]) -> Vec<[String; 11]> {
    let mut rows = Vec::new();
    for fr in reports {
        let r = &fr.report;
        for (i, rec) in r.records.iter().enumerate() {
            rows.push([
                fr.family.name().to_string(),
                fr.k.to_string(),
                fr.mode.name().to_string(),
                rec.n_cells.to_string(),
                rec.dofs.to_string(),
                num(rec.h_max),
                num(rec.err_l2_rel),
                num(rec.err_h1_rel),
                num(rec.err_point_rel),
                opt(r.pairwise_l2[i]),
                opt(r.pairwise_h1[i]),
            ]);
        }
        rows.push([
            format!("{}_fit", fr.family.name()),
            fr.k.to_string(),
            fr.mode.name().to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            opt(r.fit_l2),
            opt(r.fit_h1),
        ]);
    }
    rows
}

/// Writes the CSV report to `path` and one gnuplot data file per report next to it
/// (`<stem>_<family>_k<k>_<mode>.dat`). Returns the data file paths.
pub fn emit_report(reports: &[FamilyReport], path: &Path) -> Result<Vec<PathBuf>> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| csv_error(path, e))?;
    for row in report_rows(reports) {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| VemError::io(path, e))?;

    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    let dir = path.parent().unwrap_or(Path::new(""));
    let mut written = Vec::new();
    for fr in reports {
        let dat = dir.join(format!("{stem}_{}_k{}_{}.dat", fr.family.name(), fr.k, fr.mode.name()));
        write_plot_data(fr, &dat)?;
        written.push(dat);
    }
    Ok(written)
}

fn write_plot_data(fr: &FamilyReport, path: &Path) -> Result<()> {
    let r = &fr.report;
    let mut out = String::new();
    out.push_str(&format!("# family {} k {} mode {}\n", fr.family.name(), fr.k, fr.mode.name()));
    let fmt_fit = |s: Option<f64>| s.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into());
    out.push_str(&format!(
        "# fitted slopes: L2 {} H1 {} point {}\n",
        fmt_fit(r.fit_l2),
        fmt_fit(r.fit_h1),
        fmt_fit(r.fit_point)
    ));
    out.push_str("# h_max err_L2_rel err_H1_rel err_point_rel n_dofs\n");
    for rec in &r.records {
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            num(rec.h_max),
            num(rec.err_l2_rel),
            num(rec.err_h1_rel),
            num(rec.err_point_rel),
            rec.dofs
        ));
    }
    let mut f = fs::File::create(path).map_err(|e| VemError::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| VemError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> VemError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => VemError::io(path, source),
        other => VemError::Parse(format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `div(-kappa grad p + b p) + gamma p` by nested central differences of `p` alone.
    fn operator_fd(problem: &TestProblem, x: Point, h: f64) -> f64 {
        let p = &problem.exact;
        let grad = |y: Point| {
            Vector::new(
                (p(y + Vector::new(h, 0.0)) - p(y - Vector::new(h, 0.0))) / (2.0 * h),
                (p(y + Vector::new(0.0, h)) - p(y - Vector::new(0.0, h))) / (2.0 * h),
            )
        };
        let c = &problem.coefficients;
        let flux = |y: Point| -c.kappa_at(y) * grad(y) + (c.b)(y) * p(y);
        let div = (flux(x + Vector::new(h, 0.0)).x - flux(x - Vector::new(h, 0.0)).x) / (2.0 * h)
            + (flux(x + Vector::new(0.0, h)).y - flux(x - Vector::new(0.0, h)).y) / (2.0 * h);
        div + (c.gamma)(x) * p(x)
    }

    #[test]
    fn forcing_matches_finite_differences() {
        let problem = builtin_problem();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x = Point::new(rng.random_range(0.01..0.99), rng.random_range(0.01..0.99));
            let f = (problem.coefficients.f)(x);
            let fd = operator_fd(&problem, x, 1e-5);
            assert!((f - fd).abs() <= 1e-5 * f.abs().max(1.0), "f = {f}, fd = {fd} at {x:?}");
        }
    }

    #[test]
    fn exact_solution_values() {
        assert_eq!(builtin_exact(Point::new(0.0, 0.0)), 2.0);
        assert!((builtin_exact(Point::new(1.0, 1.0)) - 3.0).abs() < 1e-14);
        assert!((builtin_exact(POINT_OF_INTEREST) - 3.443367134).abs() < 1e-8);
    }

    #[test]
    fn kappa_is_uniformly_elliptic() {
        let k = builtin_kappa(Point::new(1.0, 1.0));
        assert_eq!(k, Matrix2::new(2.0, -1.0, -1.0, 2.0));
        let mut ev = k.symmetric_eigenvalues();
        ev.as_mut_slice().sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        let grid = (0..=10).flat_map(|i| (0..=10).map(move |j| Point::new(i as f64 / 10.0, j as f64 / 10.0)));
        builtin_problem().coefficients.check_kappa(grid).unwrap();
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let h = 1e-6;
        for &(a, b) in &[(0.1, 0.7), (0.5, 0.5), (0.9, 0.2)] {
            let x = Point::new(a, b);
            let g = builtin_exact_gradient(x);
            let gx = (builtin_exact(Point::new(a + h, b)) - builtin_exact(Point::new(a - h, b))) / (2.0 * h);
            let gy = (builtin_exact(Point::new(a, b + h)) - builtin_exact(Point::new(a, b - h))) / (2.0 * h);
            assert!((g.x - gx).abs() < 1e-7 && (g.y - gy).abs() < 1e-7);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate().is_ok());
        c.sizes = vec![100, 25];
        assert!(c.validate().is_err());
        c.sizes = vec![25];
        c.k = 5;
        assert!(c.validate().is_err());
    }
}
