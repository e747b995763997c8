//! Discrete exterior calculus on polyhedral cell complexes for Darcy flow
//! and permeability estimation in porous media.
//!
//! The pipeline builds a material complex M, subdivides it into its Forman
//! complex K, assembles metric operators on cochains of K, assigns a fabric
//! of conductive voids and solves for pressure and volumetric flow rates.

pub mod calculus;
pub mod cochain;
pub mod complex;
pub mod error;
pub mod fabric;
pub mod fixtures;
pub mod flow;
pub mod forman;
pub mod io;
pub mod linalg;
pub mod scalar;
pub mod sparse;
pub mod units;

pub use calculus::{CupProduct, DiscreteCalculus, HodgeStar, InnerProduct, MaterialLaplacian};
pub use cochain::Cochain;
pub use complex::{CellComplex, CellId, RawComplex};
pub use error::{Error, Result};
pub use forman::{FormanCell, FormanComplex, QuasiCube};
pub use scalar::{Real, Ring};
pub use sparse::{ComplexId, OperatorMatrix, Space};
pub use units::PhysDim;

/// Double-precision material complex.
pub type CellComplex64 = CellComplex<f64>;
/// Double-precision Forman complex.
pub type FormanComplex64 = FormanComplex<f64>;
/// Double-precision operator.
pub type OperatorMatrix64 = OperatorMatrix<f64>;
/// Double-precision cochain.
pub type Cochain64 = Cochain<f64>;
/// Single-precision material complex.
pub type CellComplex32 = CellComplex<f32>;
/// Single-precision Forman complex.
pub type FormanComplex32 = FormanComplex<f32>;
/// Single-precision operator.
pub type OperatorMatrix32 = OperatorMatrix<f32>;

/// Exact rational scalar for incidence matrices and cup products.
pub type Rational = num_rational::Ratio<i64>;
/// Exact incidence operator (boundary and coboundary matrices).
pub type ExactOperator = OperatorMatrix<Rational>;
/// Exact cochain.
pub type ExactCochain = Cochain<Rational>;
