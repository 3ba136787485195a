//! POD-RBF surrogate models: snapshot collection, proper orthogonal
//! decomposition, radial basis interpolation of the modal amplitudes, and a
//! versioned text format for trained models.

pub mod benchmark;
mod kernel;
mod model;
mod pod;
mod snapshot;

pub use kernel::Kernel;
pub use model::*;
pub use pod::*;
pub use snapshot::*;
