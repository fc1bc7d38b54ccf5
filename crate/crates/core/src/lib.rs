//! Virtual element discretization of second-order elliptic problems
//!
//! ```text
//! div(-kappa grad p + b p) + gamma p = f   in the unit square,  p = g on the boundary
//! ```
//!
//! on general polygonal meshes, with the computable L2 projections of the function and of
//! its gradient used in every variable-coefficient term. The crate also contains the mesh
//! generators, error post-processing and the convergence-study harness used by the
//! `vemlab` binary.
//!
//! Module map:
//!   - [`mesh`]: polygonal meshes, element geometry, JSON IO and shape-regularity diagnostics
//!   - [`meshgen`]: square, concave, random Voronoi and Lloyd/CVT mesh families
//!   - [`poly`]: scaled monomials, polygon/edge quadrature and mass matrices
//!   - [`vem`]: local degrees of freedom, projectors, stabilization and local forms
//!   - [`global`]: DoF numbering, sparse assembly, Dirichlet elimination and the direct solve
//!   - [`post`]: projected-solution errors and convergence slopes
//!   - [`harness`]: the built-in test problem, experiment sweeps and CSV reports

pub mod error;
pub mod global;
pub mod harness;
pub mod mesh;
pub mod meshgen;
pub mod poly;
pub mod post;
pub mod vem;

pub use error::{Result, VemError};

pub type Point = nalgebra::Point2<f64>;
pub type Vector = nalgebra::Vector2<f64>;
