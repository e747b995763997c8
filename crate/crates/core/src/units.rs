//! Physical dimension tags in terms of mass, length and time exponents.

use std::fmt;

/// Exponents of mass (M), length (L) and time (T).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct PhysDim {
    pub mass: i8,
    pub length: i8,
    pub time: i8,
}

impl PhysDim {
    pub const fn new(mass: i8, length: i8, time: i8) -> Self {
        PhysDim { mass, length, time }
    }

    pub const DIMENSIONLESS: PhysDim = PhysDim::new(0, 0, 0);
    pub const LENGTH: PhysDim = PhysDim::new(0, 1, 0);
    pub const AREA: PhysDim = PhysDim::new(0, 2, 0);
    pub const VOLUME: PhysDim = PhysDim::new(0, 3, 0);
    /// Pa = kg m⁻¹ s⁻².
    pub const PRESSURE: PhysDim = PhysDim::new(1, -1, -2);
    /// m³ s kg⁻¹.
    pub const CONDUCTIVITY: PhysDim = PhysDim::new(-1, 3, 1);
    /// m s² kg⁻¹.
    pub const COMPRESSIBILITY: PhysDim = PhysDim::new(-1, 1, 2);
    /// m² s⁻¹.
    pub const DUAL_FLOW: PhysDim = PhysDim::new(0, 2, -1);
    /// m³ s⁻¹.
    pub const FLOW_RATE: PhysDim = PhysDim::new(0, 3, -1);

    pub const fn mul(self, other: PhysDim) -> PhysDim {
        PhysDim::new(
            self.mass + other.mass,
            self.length + other.length,
            self.time + other.time,
        )
    }

    pub const fn inv(self) -> PhysDim {
        PhysDim::new(-self.mass, -self.length, -self.time)
    }
}

impl fmt::Display for PhysDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == PhysDim::DIMENSIONLESS {
            return f.write_str("1");
        }
        let mut first = true;
        for (sym, e) in [("M", self.mass), ("L", self.length), ("T", self.time)] {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{sym}")?;
            } else {
                write!(f, "{sym}^{e}")?;
            }
        }
        Ok(())
    }
}
