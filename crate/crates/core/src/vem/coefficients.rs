use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;

use crate::{Point, Result, VemError, Vector};

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point) -> Vector + Send + Sync>;
pub type TensorFn = Arc<dyn Fn(Point) -> Matrix2<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Diffusion {
    Scalar(ScalarFn),
    Tensor(TensorFn),
}

/// Coefficients of `div(-kappa grad p + b p) + gamma p = f`.
#[derive(Clone)]
pub struct Coefficients {
    pub kappa: Diffusion,
    pub b: VectorFn,
    pub gamma: ScalarFn,
    pub f: ScalarFn,
    /// Uniform lower bound of the smallest eigenvalue of `kappa`.
    pub kappa0: f64,
}

impl fmt::Debug for Coefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kappa {
            Diffusion::Scalar(_) => "scalar",
            Diffusion::Tensor(_) => "tensor",
        };
        f.debug_struct("Coefficients")
            .field("kappa", &kind)
            .field("kappa0", &self.kappa0)
            .finish_non_exhaustive()
    }
}

impl Coefficients {
    /// Constant scalar diffusion `kappa`, no convection or reaction.
    pub fn diffusion(kappa: f64, f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Coefficients {
            kappa: Diffusion::Scalar(Arc::new(move |_| kappa)),
            b: Arc::new(|_| Vector::zeros()),
            gamma: Arc::new(|_| 0.0),
            f: Arc::new(f),
            kappa0: kappa,
        }
    }

    pub fn kappa_at(&self, x: Point) -> Matrix2<f64> {
        match &self.kappa {
            Diffusion::Scalar(k) => Matrix2::identity() * k(x),
            Diffusion::Tensor(k) => k(x),
        }
    }

    pub fn with_f(mut self, f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        self.f = Arc::new(f);
        self
    }

    /// Checks symmetry and `lambda_min(kappa) >= kappa0` at the given points.
    pub fn check_kappa(&self, points: impl IntoIterator<Item = Point>) -> Result<()> {
        if !(self.kappa0 > 0.0) {
            return Err(VemError::InvalidArgument("kappa0 must be positive".into()));
        }
        for x in points {
            let k = self.kappa_at(x);
            let scale = k.abs().max().max(1.0);
            if (k[(0, 1)] - k[(1, 0)]).abs() > 1e-12 * scale {
                return Err(VemError::InvalidArgument(format!(
                    "kappa is not symmetric at ({}, {})",
                    x.x, x.y
                )));
            }
            let lmin = k.symmetric_eigenvalues().min();
            if lmin < self.kappa0 * (1.0 - 1e-12) {
                return Err(VemError::InvalidArgument(format!(
                    "kappa has eigenvalue {lmin} < kappa0 = {} at ({}, {})",
                    self.kappa0, x.x, x.y
                )));
            }
        }
        Ok(())
    }
}
