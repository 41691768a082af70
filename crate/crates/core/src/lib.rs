//! Spectral, contour-integral and Monte Carlo analysis of the mean-field trap
//! model on the complete graph.

pub mod contour;
pub mod correlate;
pub mod error;
pub mod landscape;
pub mod mcdyn;
pub mod numeric;
pub mod ppp;
pub mod propagator;
pub mod quadrature;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use landscape::{Kind, Landscape, ProbabilityVector};
pub use spectral::{eigenvalues, Spectrum};
