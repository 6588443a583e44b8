use std::fmt;
use std::str::FromStr;

use num_traits::{Float, FloatConst};

/// Numeric format of the transform path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Precision {
    #[default]
    Single,
    Double,
}

impl Precision {
    /// Bytes per real scalar.
    pub const fn real_bytes(self) -> usize {
        match self {
            Precision::Single => 4,
            Precision::Double => 8,
        }
    }

    /// Bytes per complex sample (re + im).
    pub const fn complex_bytes(self) -> usize {
        2 * self.real_bytes()
    }

    /// Tolerance on relative L2 error against the double-precision oracle.
    pub const fn oracle_tolerance(self) -> f64 {
        match self {
            Precision::Single => 1e-5,
            Precision::Double => 1e-12,
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::Single => "single",
            Precision::Double => "double",
        })
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "single" | "f32" | "float" => Ok(Precision::Single),
            "double" | "f64" => Ok(Precision::Double),
            other => Err(format!("unknown precision {other:?} (expected single or double)")),
        }
    }
}

/// Real scalar type the transforms run in.
pub trait Sample: Float + FloatConst + Default + fmt::Debug + Send + Sync + 'static {
    const PRECISION: Precision;

    fn narrow(v: f64) -> Self;
    fn widen(self) -> f64;
}

impl Sample for f32 {
    const PRECISION: Precision = Precision::Single;

    #[inline]
    fn narrow(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn widen(self) -> f64 {
        self as f64
    }
}

impl Sample for f64 {
    const PRECISION: Precision = Precision::Double;

    #[inline]
    fn narrow(v: f64) -> Self {
        v
    }

    #[inline]
    fn widen(self) -> f64 {
        self
    }
}
