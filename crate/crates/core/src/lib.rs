//! Phase-space quantum mechanics on a grid.

pub mod error;
pub mod flow;
pub mod io;
pub mod numerics;
pub mod potential;
pub mod propagation;
pub mod render;
pub mod scenarios;
pub mod state;
pub mod tomography;
pub mod wigner;

pub use error::{Error, Result};
pub use numerics::grid::{Constants, Grid1D, PhaseGrid};
pub use potential::{Potential, TimePotential};
pub use state::WaveFunction;
