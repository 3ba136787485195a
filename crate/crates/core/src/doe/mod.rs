//! Orthogonal-array experiments, error functions, ANOVA and one-at-a-time
//! extreme-value sensitivity.

mod anova;
mod arrays;
mod design;

pub use anova::*;
pub use arrays::*;
pub use design::*;
