//! Mesh families on the unit square: uniform squares, concave zigzag splits of the
//! squares, random Voronoi tessellations and their Lloyd (centroidal) relaxations.

mod structured;
mod voronoi;

use std::fmt;
use std::str::FromStr;

pub use structured::{concave_mesh, square_mesh};
pub use voronoi::{
    lloyd_iterate, lloyd_relax, random_seeds, voronoi_cells, voronoi_mesh_from_seeds, LloydTrace,
};

use crate::mesh::PolyMesh;
use crate::{Result, VemError};

/// Name of the pseudo-random generator used for Voronoi seeds.
pub const RNG_ALGORITHM: &str = "chacha8";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Square,
    Concave,
    Lloyd0,
    Lloyd100,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Lloyd0, Family::Lloyd100, Family::Square, Family::Concave];

    pub fn name(self) -> &'static str {
        match self {
            Family::Square => "square",
            Family::Concave => "concave",
            Family::Lloyd0 => "lloyd0",
            Family::Lloyd100 => "lloyd100",
        }
    }

    pub fn default_lloyd_iterations(self) -> usize {
        match self {
            Family::Lloyd100 => 100,
            _ => 0,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "square" => Ok(Family::Square),
            "concave" => Ok(Family::Concave),
            "lloyd0" | "lloyd-0" | "voronoi" => Ok(Family::Lloyd0),
            "lloyd100" | "lloyd-100" | "cvt" => Ok(Family::Lloyd100),
            other => Err(VemError::InvalidArgument(format!("unknown mesh family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub family: Family,
    /// Number of cells for the Voronoi families; number of squares for square/concave.
    pub target_cells: usize,
    pub seed: u64,
    pub lloyd_iterations: usize,
}

impl GeneratorSpec {
    pub fn new(family: Family, target_cells: usize, seed: u64) -> Self {
        GeneratorSpec {
            family,
            target_cells,
            seed,
            lloyd_iterations: family.default_lloyd_iterations(),
        }
    }
}

/// Builds the mesh described by `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<PolyMesh> {
    if spec.target_cells == 0 {
        return Err(VemError::InvalidArgument("target_cells must be positive".into()));
    }
    match spec.family {
        Family::Square => square_mesh(squares_per_side(spec.target_cells)?),
        Family::Concave => concave_mesh(squares_per_side(spec.target_cells)?),
        Family::Lloyd0 | Family::Lloyd100 => voronoi_mesh(spec),
    }
}

/// Random Voronoi mesh followed by `spec.lloyd_iterations` Lloyd steps.
pub fn voronoi_mesh(spec: &GeneratorSpec) -> Result<PolyMesh> {
    let seeds = random_seeds(spec.target_cells, spec.seed);
    lloyd_relax(&seeds, spec.lloyd_iterations)
}

fn squares_per_side(cells: usize) -> Result<usize> {
    let n = (cells as f64).sqrt().round() as usize;
    if n * n != cells {
        return Err(VemError::InvalidArgument(format!(
            "square-based families need a perfect-square cell count, got {cells}"
        )));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("hexagon".parse::<Family>().is_err());
    }

    #[test]
    fn square_family_needs_perfect_square() {
        assert!(generate(&GeneratorSpec::new(Family::Square, 24, 0)).is_err());
        assert_eq!(generate(&GeneratorSpec::new(Family::Square, 25, 0)).unwrap().num_cells(), 25);
        assert_eq!(generate(&GeneratorSpec::new(Family::Concave, 25, 0)).unwrap().num_cells(), 50);
    }
}
