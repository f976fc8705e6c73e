pub mod cavity;
pub mod error;
pub mod geometry;
pub mod leads;
pub mod oned;
pub mod quadrature;
pub mod scattering;
pub mod spectra;
pub mod spline;
pub mod twobody;

pub use error::{Error, Result};
