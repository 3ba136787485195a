//! Real-coded genetic algorithm and the surrogate-based calibration problem.

mod ga;
mod problem;

pub use ga::*;
pub use problem::*;
