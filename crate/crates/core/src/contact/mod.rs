//! Indentation analysis: load schedules, load-displacement curves, the
//! Oliver-Pharr method with the Ngan creep correction, the Sneddon cone
//! solution, and the reduced forward model.

mod curve;
mod forward;
mod oliver_pharr;
mod schedule;

pub use curve::LdCurve;
pub use forward::*;
pub use oliver_pharr::*;
pub use schedule::*;
