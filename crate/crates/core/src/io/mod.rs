//! Input parsing, grid generation and serialization.

pub mod grid;
pub mod mm;
pub mod table;
pub mod tess;
pub mod vtk;
