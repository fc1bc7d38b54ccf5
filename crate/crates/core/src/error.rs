use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = VemError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum VemError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse mesh: {0}")]
    Parse(String),

    #[error("cell {cell} is not counter-clockwise (signed area {signed_area:e})")]
    Orientation { cell: usize, signed_area: f64 },

    #[error("cell {cell}: edge ({a}, {b}) is not manifold ({reason})")]
    NonManifoldEdge {
        cell: usize,
        a: usize,
        b: usize,
        reason: &'static str,
    },

    #[error("cell {cell} is invalid: {reason}")]
    InvalidCell { cell: usize, reason: String },

    #[error("cell {cell} is degenerate (area {area:e})")]
    DegenerateCell { cell: usize, area: f64 },

    #[error("triangulation failed: {0}")]
    Triangulation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh generation failed: {0}")]
    Generation(String),

    #[error("singular or unstable linear system: {0}")]
    Singular(String),

    #[error("point ({x}, {y}) is outside the mesh")]
    PointOutside { x: f64, y: f64 },
}

impl VemError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        VemError::Io {
            path: path.into(),
            source,
        }
    }
}
