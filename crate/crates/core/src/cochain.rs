use crate::error::{Error, Result};
use crate::scalar::Ring;
use crate::sparse::{OperatorMatrix, Space};
use crate::units::PhysDim;

/// Coefficients over the p-cells of a complex, tagged with a physical dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain<T> {
    pub space: Space,
    pub values: Vec<T>,
    pub unit: PhysDim,
}

impl<T: Ring> Cochain<T> {
    pub fn new(space: Space, values: Vec<T>, unit: PhysDim) -> Self {
        Cochain { space, values, unit }
    }

    pub fn zeros(space: Space, len: usize, unit: PhysDim) -> Self {
        Cochain::new(space, vec![T::zero(); len], unit)
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Applies an operator, checking that the bases agree.
    pub fn map_by(&self, op: &OperatorMatrix<T>) -> Result<Cochain<T>> {
        if op.col_space() != self.space {
            return Err(Error::Usage(format!(
                "operator acts on {:?}, cochain lives on {:?}",
                op.col_space(),
                self.space
            )));
        }
        Ok(Cochain::new(
            op.row_space(),
            op.apply(&self.values)?,
            op.unit().mul(self.unit),
        ))
    }
}
