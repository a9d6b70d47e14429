//! Spectra, critical couplings and supersymmetric hierarchies of the
//! PT-symmetric square well.

pub mod error;
mod darboux;
pub mod numeric;
pub mod oracle;
pub mod spectral;
pub mod susy;
pub mod wavefunctions;

pub use error::{Error, Result};
pub use num_complex::Complex64;
