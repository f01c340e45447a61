//! Numerical laboratory for regularized products of residue and principal value currents.

pub mod acceptance;
pub mod algebra;
pub mod cli;
pub mod cutoff;
pub mod error;
pub mod integrand;
pub mod lab;
pub mod oracle;
pub mod presets;
pub mod quad;
pub mod superform;
pub mod testform;

pub use error::{LabError, Result};
