use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radial basis functions of distance `r` with shape parameter `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// Linear spline `r`.
    Ls,
    /// Cubic spline `r^3`.
    Cs,
    /// Multiquadric `sqrt(1 + r^2 / c^2)`.
    Mq,
    /// Gaussian with unsquared distance, `exp(-r / c^2)`.
    Gs,
    /// Conventional Gaussian `exp(-r^2 / c^2)`.
    #[serde(rename = "gs2")]
    GsSquared,
    /// Inverse multiquadric `1 / sqrt(r^2 + c^2)`.
    Imq,
}

impl Kernel {
    pub const ALL: [Kernel; 6] = [Kernel::Ls, Kernel::Cs, Kernel::Mq, Kernel::Gs, Kernel::GsSquared, Kernel::Imq];

    pub fn eval(self, r: f64, c: f64) -> f64 {
        match self {
            Kernel::Ls => r,
            Kernel::Cs => r * r * r,
            Kernel::Mq => (1.0 + r * r / (c * c)).sqrt(),
            Kernel::Gs => (-r / (c * c)).exp(),
            Kernel::GsSquared => (-r * r / (c * c)).exp(),
            Kernel::Imq => 1.0 / (r * r + c * c).sqrt(),
        }
    }

    pub fn uses_shape(self) -> bool {
        !matches!(self, Kernel::Ls | Kernel::Cs)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Ls => "ls",
            Kernel::Cs => "cs",
            Kernel::Mq => "mq",
            Kernel::Gs => "gs",
            Kernel::GsSquared => "gs2",
            Kernel::Imq => "imq",
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kernel::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown kernel '{s}'; expected one of ls, cs, mq, gs, gs2, imq")))
    }
}
