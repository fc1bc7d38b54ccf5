//! Local virtual element machinery.
//!
//! Degrees of freedom on an element `E` with `n_V` vertices and degree `k`:
//!   - D1: values at the vertices (ring order),
//!   - D2: per edge, `(1/|e|) int_e q t^j ds` for `j = 0..=k-2`, `t` the scaled arclength
//!     in `[-1, 1]` along the counter-clockwise edge direction,
//!   - D3: `(1/|E|) int_E q m_a` for the scaled monomials of degree `<= k-2`.
//!
//! All three projectors (elliptic `Pi_nabla`, L2 `Pi0_k` and L2 of the gradient
//! `Pi0_{k-1} grad`) are computed from these values only.

mod coefficients;
mod dofs;
mod local;
mod projectors;

pub use coefficients::{Coefficients, Diffusion, ScalarFn, TensorFn, VectorFn};
pub use dofs::{interpolate_dofs, DofLayout, EdgeTrace};
pub use local::{local_system, stab_matrix, LocalElement, LocalSystem, Mode};
pub use projectors::ProjectorSet;
