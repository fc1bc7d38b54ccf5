//! Errors of the projected discrete solution and convergence-rate fitting.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::global::Discretization;
use crate::mesh::PolyMesh;
use crate::poly::{polygon_quadrature, ScaledMonomialBasis};
use crate::{Point, Result, VemError, Vector};

/// Which computable polynomial stands in for `grad p_h` in the H1 error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GradientRepresentative {
    /// `Pi0_{k-1} grad p_h`
    #[default]
    L2Projection,
    /// `grad Pi_nabla p_h`
    GradPiNabla,
}

impl GradientRepresentative {
    pub fn name(self) -> &'static str {
        match self {
            GradientRepresentative::L2Projection => "pi0_grad",
            GradientRepresentative::GradPiNabla => "grad_pinabla",
        }
    }
}

impl fmt::Display for GradientRepresentative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GradientRepresentative {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pi0_grad" | "l2" => Ok(GradientRepresentative::L2Projection),
            "grad_pinabla" | "pinabla" => Ok(GradientRepresentative::GradPiNabla),
            other => Err(VemError::InvalidArgument(format!(
                "unknown gradient representative '{other}'"
            ))),
        }
    }
}

/// Per-cell polynomials computed from a global DoF vector.
#[derive(Debug, Clone)]
pub struct ProjectedSolution {
    pub k: usize,
    pub bases: Vec<ScaledMonomialBasis>,
    /// `Pi0_k p_h` in each cell's degree-`k` basis.
    pub values: Vec<Vec<f64>>,
    /// `Pi_nabla p_h` in each cell's degree-`k` basis.
    pub pi_nabla: Vec<Vec<f64>>,
    /// Components of `Pi0_{k-1} grad p_h` in each cell's degree-`k-1` basis.
    pub grad_x: Vec<Vec<f64>>,
    pub grad_y: Vec<Vec<f64>>,
}

pub fn project_solution(disc: &Discretization, dofs: &[f64]) -> ProjectedSolution {
    assert_eq!(dofs.len(), disc.n_dofs(), "DoF vector has the wrong length");
    let per_cell: Vec<_> = disc
        .elements
        .par_iter()
        .enumerate()
        .map(|(c, e)| {
            let local = disc.dofmap.gather(c, dofs);
            let p = &e.projectors;
            let (gx, gy) = p.apply_pi0_grad(&local);
            (
                p.apply_pi0_k(&local).as_slice().to_vec(),
                p.apply_pi_nabla(&local).as_slice().to_vec(),
                gx.as_slice().to_vec(),
                gy.as_slice().to_vec(),
            )
        })
        .collect();
    let mut out = ProjectedSolution {
        k: disc.k,
        bases: disc.elements.iter().map(|e| e.basis.clone()).collect(),
        values: Vec::with_capacity(per_cell.len()),
        pi_nabla: Vec::with_capacity(per_cell.len()),
        grad_x: Vec::with_capacity(per_cell.len()),
        grad_y: Vec::with_capacity(per_cell.len()),
    };
    for (v, n, gx, gy) in per_cell {
        out.values.push(v);
        out.pi_nabla.push(n);
        out.grad_x.push(gx);
        out.grad_y.push(gy);
    }
    out
}

impl ProjectedSolution {
    pub fn num_cells(&self) -> usize {
        self.values.len()
    }

    /// `(Pi0_k p_h)(x)` using cell `c`'s polynomial.
    pub fn value(&self, c: usize, x: Point) -> f64 {
        self.bases[c].eval(&self.values[c], x)
    }

    pub fn gradient(&self, c: usize, x: Point, rep: GradientRepresentative) -> Vector {
        let basis = &self.bases[c];
        match rep {
            GradientRepresentative::GradPiNabla => basis.grad(&self.pi_nabla[c], x),
            GradientRepresentative::L2Projection => {
                let lower = ScaledMonomialBasis::with_center(basis.center, basis.h, self.k - 1);
                Vector::new(lower.eval(&self.grad_x[c], x), lower.eval(&self.grad_y[c], x))
            }
        }
    }
}

/// Absolute L2 norm and H1 seminorm of an error (or of a function).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
}

/// Quadrature exactness of the error integrals for degree `k`.
pub fn error_exactness(k: usize) -> usize {
    2 * k + 4
}

/// `||p_ex - Pi0_k p_h||_0` and `|grad p_ex - G p_h|` summed over cells.
pub fn error_norms(
    mesh: &PolyMesh,
    proj: &ProjectedSolution,
    p_ex: &(dyn Fn(Point) -> f64 + Sync),
    grad_ex: &(dyn Fn(Point) -> Vector + Sync),
    rep: GradientRepresentative,
) -> Result<Norms> {
    let exactness = error_exactness(proj.k);
    let parts = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| -> Result<(f64, f64)> {
            let rule = polygon_quadrature(&mesh.element_geometry(c)?, exactness)?;
            let mut l2 = 0.0;
            let mut h1 = 0.0;
            for (x, w) in rule.iter() {
                let e = p_ex(x) - proj.value(c, x);
                let g = grad_ex(x) - proj.gradient(c, x, rep);
                l2 += w * e * e;
                h1 += w * g.norm_squared();
            }
            Ok((l2, h1))
        })
        .collect::<Result<Vec<_>>>()?;
    let (l2, h1) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    Ok(Norms {
        l2: l2.sqrt(),
        h1: h1.sqrt(),
    })
}

/// `||p||_0` and `|p|_1` by high-order quadrature, used to normalize errors.
pub fn exact_norms(
    mesh: &PolyMesh,
    p_ex: &(dyn Fn(Point) -> f64 + Sync),
    grad_ex: &(dyn Fn(Point) -> Vector + Sync),
    exactness: usize,
) -> Result<Norms> {
    let parts = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| -> Result<(f64, f64)> {
            let rule = polygon_quadrature(&mesh.element_geometry(c)?, exactness)?;
            Ok(rule.iter().fold((0.0, 0.0), |acc, (x, w)| {
                (acc.0 + w * p_ex(x).powi(2), acc.1 + w * grad_ex(x).norm_squared())
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let (l2, h1) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    Ok(Norms {
        l2: l2.sqrt(),
        h1: h1.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointError {
    pub relative: f64,
    pub value: f64,
    pub exact: f64,
    /// Cell whose polynomial was evaluated; the first match when `x` lies on an interface.
    pub cell: usize,
}

pub fn point_error(
    mesh: &PolyMesh,
    proj: &ProjectedSolution,
    p_ex: &dyn Fn(Point) -> f64,
    x: Point,
) -> Result<PointError> {
    let cell = mesh.locate(x).ok_or(VemError::PointOutside { x: x.x, y: x.y })?;
    let value = proj.value(cell, x);
    let exact = p_ex(x);
    Ok(PointError {
        relative: (exact - value).abs() / exact.abs(),
        value,
        exact,
        cell,
    })
}

/// Errors on one mesh. Failed solves carry `NaN` errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub h_max: f64,
    pub n_cells: usize,
    pub err_l2_rel: f64,
    pub err_h1_rel: f64,
    pub err_point_rel: f64,
    pub dofs: usize,
}

impl ErrorRecord {
    pub fn failed(h_max: f64, n_cells: usize, dofs: usize) -> Self {
        ErrorRecord {
            h_max,
            n_cells,
            err_l2_rel: f64::NAN,
            err_h1_rel: f64::NAN,
            err_point_rel: f64::NAN,
            dofs,
        }
    }

    pub fn is_failed(&self) -> bool {
        !(self.err_l2_rel.is_finite() && self.err_h1_rel.is_finite() && self.err_point_rel.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub records: Vec<ErrorRecord>,
    /// Least-squares slopes of `log err` against `log h_max`; `None` with fewer than two usable records.
    pub fit_l2: Option<f64>,
    pub fit_h1: Option<f64>,
    pub fit_point: Option<f64>,
    /// Slope between each record and the previous usable one (`None` for the first).
    pub pairwise_l2: Vec<Option<f64>>,
    pub pairwise_h1: Vec<Option<f64>>,
    pub pairwise_point: Vec<Option<f64>>,
    pub warnings: Vec<String>,
}

/// Fits convergence slopes. Failed records and records repeating an earlier `h_max` are
/// left out of the fit (the latter with a warning).
pub fn convergence_rates(records: &[ErrorRecord]) -> ConvergenceReport {
    let mut warnings = Vec::new();
    let mut usable = Vec::new();
    for (i, r) in records.iter().enumerate() {
        if r.is_failed() {
            warnings.push(format!("record {i} (n_cells = {}) failed; excluded from fit", r.n_cells));
            continue;
        }
        if usable.iter().any(|&j: &usize| records[j].h_max == r.h_max) {
            warnings.push(format!("record {i} repeats h_max = {}; excluded from fit", r.h_max));
            continue;
        }
        usable.push(i);
    }

    let series = |err: fn(&ErrorRecord) -> f64| {
        let pts: Vec<(f64, f64)> = usable
            .iter()
            .map(|&i| (records[i].h_max.ln(), err(&records[i]).ln()))
            .collect();
        let fit = least_squares_slope(&pts);
        let mut pairwise = vec![None; records.len()];
        for w in usable.windows(2) {
            let (a, b) = (&records[w[0]], &records[w[1]]);
            pairwise[w[1]] = Some((err(b).ln() - err(a).ln()) / (b.h_max.ln() - a.h_max.ln()));
        }
        (fit, pairwise)
    };
    let (fit_l2, pairwise_l2) = series(|r| r.err_l2_rel);
    let (fit_h1, pairwise_h1) = series(|r| r.err_h1_rel);
    let (fit_point, pairwise_point) = series(|r| r.err_point_rel);
    ConvergenceReport {
        records: records.to_vec(),
        fit_l2,
        fit_h1,
        fit_point,
        pairwise_l2,
        pairwise_h1,
        pairwise_point,
        warnings,
    }
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}
