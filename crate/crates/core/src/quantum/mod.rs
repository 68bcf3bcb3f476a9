//! Shared vocabulary: physical parameters, potentials, position grids and Hermite functions.

mod grid;
mod hermite;
mod params;
mod potential;

pub use grid::{XGrid, MIN_POINTS};
pub use hermite::{hermite_function, hermite_functions, HermiteBasis};
pub use params::PhysicalParams;
pub use potential::{Potential, PotentialValue, DEFAULT_MAX_DEGREE};
