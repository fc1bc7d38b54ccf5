//! Global DoF numbering, sparse assembly, Dirichlet elimination and the direct solve.

mod assembly;
mod dofmap;
mod sparse;

pub use assembly::{
    apply_dirichlet, assemble, boundary_values, solve, Discretization, GlobalSystem, SparseSystem,
};
pub use dofmap::{build_dofmap, interpolate_global, DofMap};
pub use sparse::SparseMatrix;
