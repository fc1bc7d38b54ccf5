use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use super::coefficients::Coefficients;
use super::dofs::DofLayout;
use super::projectors::ProjectorSet;
use crate::mesh::ElementGeometry;
use crate::poly::{poly_dim, polygon_quadrature, ScaledMonomialBasis};
use crate::{Result, VemError};

/// Consistency term of the diffusion form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// `kappa [Pi0_{k-1} grad p] . [Pi0_{k-1} grad q]`
    #[default]
    Standard,
    /// `kappa [grad Pi_nabla p] . [grad Pi_nabla q]`
    GradPiNabla,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::GradPiNabla => "grad_pinabla",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" => Ok(Mode::Standard),
            "grad_pinabla" | "grad-pinabla" | "pinabla" => Ok(Mode::GradPiNabla),
            other => Err(VemError::InvalidArgument(format!("unknown mode '{other}'"))),
        }
    }
}

/// Geometry, basis, DoF layout and projectors of one element; independent of coefficients.
#[derive(Debug, Clone)]
pub struct LocalElement {
    pub geom: ElementGeometry,
    pub basis: ScaledMonomialBasis,
    pub layout: DofLayout,
    pub projectors: ProjectorSet,
}

impl LocalElement {
    pub fn new(geom: ElementGeometry, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(VemError::InvalidArgument("degree k must be >= 1".into()));
        }
        let basis = ScaledMonomialBasis::new(&geom, k);
        let layout = DofLayout::for_element(&geom, k);
        let projectors = ProjectorSet::new(&geom, &basis, &layout)?;
        Ok(LocalElement {
            geom,
            basis,
            layout,
            projectors,
        })
    }

    pub fn k(&self) -> usize {
        self.layout.k
    }

    pub fn n_dofs(&self) -> usize {
        self.layout.total()
    }

    /// DoFs of the polynomial with coefficients `coeffs` in this element's basis.
    pub fn polynomial_dofs(&self, coeffs: &[f64]) -> DVector<f64> {
        &self.projectors.dof_matrix * DVector::from_column_slice(coeffs)
    }

    /// Gradient coefficients (`n_{k-1}` each) of the consistency term for `mode`.
    pub fn gradient_operator(&self, mode: Mode) -> (DMatrix<f64>, DMatrix<f64>) {
        match mode {
            Mode::Standard => (
                self.projectors.pi0_grad_x.clone(),
                self.projectors.pi0_grad_y.clone(),
            ),
            Mode::GradPiNabla => {
                let (dx, dy) = self.basis.derivative_matrices();
                (&dx * &self.projectors.pi_nabla, &dy * &self.projectors.pi_nabla)
            }
        }
    }
}

/// Element matrices in (test row, trial column) order.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub ah: DMatrix<f64>,
    pub bh: DMatrix<f64>,
    pub ch: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub f_loc: DVector<f64>,
    pub mode: Mode,
}

impl LocalSystem {
    /// `Ah + Bh + Ch`.
    pub fn total(&self) -> DMatrix<f64> {
        &self.ah + &self.bh + &self.ch
    }
}

/// `sigma_E (I - D Pi_nabla)^T (I - D Pi_nabla)` with `sigma_E` the mean of `trace(kappa)/2`.
pub fn stab_matrix(element: &LocalElement, sigma: f64) -> DMatrix<f64> {
    let nd = element.n_dofs();
    let p = &element.projectors;
    let defect = DMatrix::identity(nd, nd) - &p.dof_matrix * &p.pi_nabla;
    let s = defect.transpose() * defect * sigma;
    symmetrize(s)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Local forms
///
/// ```text
/// a_h(p,q) = int kappa G p . G q + S((I - Pi_nabla) p, (I - Pi_nabla) q)
/// b_h(p,q) = -int [Pi0_{k-1} p] [b . Pi0_{k-1} grad q]
/// c_h(p,q) = int gamma [Pi0_{k-1} p] [Pi0_{k-1} q]
/// (f_h, q) = int f Pi0_{k-1} q
/// ```
///
/// where `G` is `Pi0_{k-1} grad` (standard) or `grad Pi_nabla`. Variable coefficients are
/// integrated with exactness `2k + quad_boost`.
pub fn local_system(
    element: &LocalElement,
    coeffs: &Coefficients,
    mode: Mode,
    quad_boost: usize,
) -> Result<LocalSystem> {
    let k = element.k();
    let nkm1 = poly_dim(k - 1);
    let rule = polygon_quadrature(&element.geom, 2 * k + quad_boost)?;

    let mut kxx = DMatrix::zeros(nkm1, nkm1);
    let mut kxy = DMatrix::zeros(nkm1, nkm1);
    let mut kyy = DMatrix::zeros(nkm1, nkm1);
    let mut wbx = DMatrix::zeros(nkm1, nkm1);
    let mut wby = DMatrix::zeros(nkm1, nkm1);
    let mut wgamma = DMatrix::zeros(nkm1, nkm1);
    let mut load = DVector::zeros(nkm1);
    let mut trace_integral = 0.0;
    let lower = ScaledMonomialBasis::with_center(element.basis.center, element.basis.h, k - 1);
    let mut vals = vec![0.0; nkm1];

    for (x, w) in rule.iter() {
        lower.eval_into(x, &mut vals);
        let kap = coeffs.kappa_at(x);
        let b = (coeffs.b)(x);
        let gamma = (coeffs.gamma)(x);
        let f = (coeffs.f)(x);
        trace_integral += w * 0.5 * kap.trace();
        for a in 0..nkm1 {
            let wa = w * vals[a];
            load[a] += wa * f;
            for c in 0..nkm1 {
                let wac = wa * vals[c];
                kxx[(a, c)] += wac * kap[(0, 0)];
                kxy[(a, c)] += wac * kap[(0, 1)];
                kyy[(a, c)] += wac * kap[(1, 1)];
                wbx[(a, c)] += wac * b.x;
                wby[(a, c)] += wac * b.y;
                wgamma[(a, c)] += wac * gamma;
            }
        }
    }
    let sigma = trace_integral / element.geom.area;

    let (gx, gy) = element.gradient_operator(mode);
    let gxt = gx.transpose();
    let gyt = gy.transpose();
    let consistency = &gxt * &kxx * &gx + &gxt * &kxy * &gy + &gyt * &kxy * &gx + &gyt * &kyy * &gy;
    let s = stab_matrix(element, sigma);
    let ah = symmetrize(consistency + &s);

    let p = &element.projectors;
    let p0 = &p.pi0_km1;
    let bh = -(p.pi0_grad_x.transpose() * &wbx * p0 + p.pi0_grad_y.transpose() * &wby * p0);
    let ch = symmetrize(p0.transpose() * &wgamma * p0);
    let f_loc = p0.transpose() * load;

    Ok(LocalSystem {
        ah,
        bh,
        ch,
        s,
        f_loc,
        mode,
    })
}
