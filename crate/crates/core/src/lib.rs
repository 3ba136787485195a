//! Nonlinear viscoelastic parameter identification from indentation curves.
//!
//! The crate is organised bottom-up:
//!
//! * [`constitutive`] integrates the nonlinear Burgers model at a material point.
//! * [`contact`] holds load schedules, load-displacement curves, Oliver-Pharr
//!   analysis and the reduced forward indentation model.
//! * [`surrogate`] reduces snapshot matrices with POD and interpolates the
//!   amplitudes with radial basis functions.
//! * [`doe`] provides orthogonal arrays, error functions and ANOVA.
//! * [`calibration`] runs a genetic algorithm against surrogate predictions.

pub mod constitutive;
pub mod contact;
pub mod surrogate;
pub mod calibration;
pub mod doe;
pub mod stats;
pub mod error;

pub use error::{Error, Result};
