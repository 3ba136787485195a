//! Material models: linear spring-dashpot relations and the incremental
//! nonlinear Burgers integrator.

mod burgers;
mod linear;

pub use burgers::*;
pub use linear::*;
