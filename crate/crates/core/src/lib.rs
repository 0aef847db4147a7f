//! Periodic-grid solvers for Helmholtz systems and isotropic time-harmonic Maxwell
//! equations, built around the Birman–Schwinger formulation and limiting-absorption
//! sweeps `zeta -> lambda +- i0`.

pub mod error;
pub mod exponents;
pub mod grid;
pub mod helmholtz;
pub mod maxwell;
pub mod resolvent;
pub mod sweep;

pub use error::{LapError, Result};
pub use grid::{Field, Grid};
