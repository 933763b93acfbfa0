//! Numerical toolkit for pairs of extended-Schottky Fuchsian representations:
//! critical exponents via Bowen's equation on the Gurevich pressure, Manhattan
//! curve tracing, entropy/intersection rigidity functionals, and an
//! independent orbit-counting oracle.

pub mod coding;
pub mod curve;
pub mod error;
pub mod fixtures;
pub mod moebius;
pub mod orbit;
pub mod par;
pub mod pressure;
pub mod schottky;

pub use error::{Error, Result};
