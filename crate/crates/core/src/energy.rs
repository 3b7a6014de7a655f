use std::fmt;

/// A finite scalar energy. Lower values mean better agreement.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Energy(f64);

impl Energy {
    pub const ZERO: Energy = Energy(0.0);

    /// Returns `None` for NaN or infinite values.
    pub fn new(value: f64) -> Option<Self> {
        value.is_finite().then_some(Energy(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Energy> for f64 {
    fn from(e: Energy) -> f64 {
        e.0
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
