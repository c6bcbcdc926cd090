pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod lp;
pub mod spectral;
pub mod timestepper;

pub use error::{Error, Result};
pub use spectral::{make_grid, Grid, MultiplierSymbol, SpectralField, C64};
